"""Discordance-driven radiology QA engine.

Compares AI image-analysis findings against rule-based NLP labels on report
text, routes only discordant cases to expert review, and computes
arm-stratified quality metrics under randomized worklist flagging.
"""

__version__ = "0.1.0"

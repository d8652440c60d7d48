"""Lexicon configuration for the report classifier.

The lexicon is the classifier's editable asset: finding terms, negation and
uncertainty triggers, pseudo-negation exceptions, and the token scope window.
A versioned default ships with the package; sites may load their own from a
JSON file with the same keys.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any


@dataclass(frozen=True)
class LexiconConfig:
    finding_terms: tuple[str, ...]
    pre_negation_triggers: tuple[str, ...]
    post_negation_triggers: tuple[str, ...] = ()
    uncertainty_triggers: tuple[str, ...] = ()
    pseudo_negation_exceptions: tuple[str, ...] = ()
    scope_window: int = 6
    version: str = "unversioned"

    def __post_init__(self) -> None:
        if self.scope_window < 1:
            raise ValueError("scope_window must be >= 1")
        if not self.finding_terms:
            raise ValueError("finding_terms must be non-empty")
        if not self.pre_negation_triggers:
            raise ValueError("pre_negation_triggers must be non-empty")
        if not self.uncertainty_triggers:
            raise ValueError("uncertainty_triggers must be non-empty")
        for name in ("finding_terms", "pre_negation_triggers", "post_negation_triggers",
                     "uncertainty_triggers", "pseudo_negation_exceptions"):
            for phrase in getattr(self, name):
                if phrase != phrase.strip():
                    raise ValueError(
                        f"{name} entry {phrase!r} has leading/trailing whitespace")
                if not phrase:
                    raise ValueError(f"{name} contains an empty phrase")

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "scope_window": self.scope_window,
            "finding_terms": list(self.finding_terms),
            "pre_negation_triggers": list(self.pre_negation_triggers),
            "post_negation_triggers": list(self.post_negation_triggers),
            "uncertainty_triggers": list(self.uncertainty_triggers),
            "pseudo_negation_exceptions": list(self.pseudo_negation_exceptions),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LexiconConfig":
        return cls(
            finding_terms=tuple(data["finding_terms"]),
            pre_negation_triggers=tuple(data["pre_negation_triggers"]),
            post_negation_triggers=tuple(data.get("post_negation_triggers", [])),
            uncertainty_triggers=tuple(data.get("uncertainty_triggers", [])),
            pseudo_negation_exceptions=tuple(data.get("pseudo_negation_exceptions", [])),
            scope_window=int(data.get("scope_window", 6)),
            version=str(data.get("version", "unversioned")),
        )


def load_lexicon(path: str | Path) -> LexiconConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return LexiconConfig.from_dict(json.load(handle))


def save_lexicon(lexicon: LexiconConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(lexicon.to_dict(), handle, indent=2, ensure_ascii=False)
        handle.write("\n")


def default_lexicon() -> LexiconConfig:
    """The versioned lexicon bundled with the package."""
    text = resources.files("radqa.data").joinpath("default_lexicon.json").read_text("utf-8")
    return LexiconConfig.from_dict(json.loads(text))

"""Rule-based report classifier with negation and uncertainty scoping.

The pipeline is deterministic and purely lexical:

1. ``segment_sections`` splits the report on recognized header phrases
   (FINDINGS:, IMPRESSION:, TECHNIQUE:, COMPARISON:, INDICATION:, plus any
   all-caps line-start header). Section boundaries double as hard sentence
   boundaries so a dangling phrase in one section never scopes into the next.
2. ``split_sentences`` breaks text on '.', '!', '?' and newline runs, keeping
   decimal points ("4.5") and configured abbreviations ("dr", "mm", single
   letters) inside their sentence.
3. ``classify_sentence`` tokenizes (lowercase, split on non-alphanumerics),
   finds finding-term occurrences (longest match wins at a position), and
   assigns each a polarity from the nearest trigger within the scope window:
   pre-negation triggers look forward, post-negation triggers look backward,
   uncertainty triggers look both ways. The nearest trigger wins; at equal
   distance uncertainty wins (review bias favors sensitivity). A
   pseudo-negation exception phrase overlapping a trigger cancels it.
4. ``classify_report`` aggregates with maximum sensitivity: any AFFIRMED or
   UNCERTAIN span anywhere makes the report POSITIVE.

All offsets reported to callers are UTF-8 byte offsets into the text that was
passed in, so evidence spans can be highlighted by any consumer regardless of
its string encoding.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .domain import EvidenceSpan, NLPLabel, Polarity, ReportDocument
from .errors import EmptyLexicon
from .lexicon import LexiconConfig

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")

_KNOWN_HEADER_RE = re.compile(
    r"(?<![A-Za-z0-9])(findings|impression|technique|comparison|indication):",
    re.IGNORECASE,
)
# Unrecognized headers: an all-caps word group at the start of a line.
_OTHER_HEADER_RE = re.compile(r"^[ \t]*([A-Z][A-Z]+(?:[ \t]+[A-Z]+){0,3}):", re.MULTILINE)

DEFAULT_ABBREVIATIONS = frozenset({"dr", "mr", "cm", "mm", "vs", "approx"})


class SectionKind(str, Enum):
    FINDINGS = "FINDINGS"
    IMPRESSION = "IMPRESSION"
    BODY = "BODY"
    OTHER = "OTHER"


@dataclass(frozen=True)
class SectionSpan:
    kind: SectionKind
    name: str
    start: int  # UTF-8 byte offset
    end: int


@dataclass(frozen=True)
class _Token:
    text: str  # lowercased
    start: int  # character offset
    end: int


def _byte_offsets(text: str) -> list[int]:
    """Cumulative UTF-8 byte offset for every character position."""
    if text.isascii():
        return list(range(len(text) + 1))
    offsets = [0] * (len(text) + 1)
    total = 0
    for i, ch in enumerate(text):
        offsets[i] = total
        total += len(ch.encode("utf-8"))
    offsets[len(text)] = total
    return offsets


def _tokenize(text: str, base: int = 0) -> list[_Token]:
    return [
        _Token(m.group(0).lower(), base + m.start(), base + m.end())
        for m in _TOKEN_RE.finditer(text)
    ]


def _phrase_seq(phrase: str) -> tuple[str, ...]:
    return tuple(m.group(0).lower() for m in _TOKEN_RE.finditer(phrase))


@dataclass(frozen=True)
class _CompiledLexicon:
    terms: tuple[tuple[str, ...], ...]
    pre: tuple[tuple[str, ...], ...]
    post: tuple[tuple[str, ...], ...]
    uncertain: tuple[tuple[str, ...], ...]
    exceptions: tuple[tuple[str, ...], ...]
    scope_window: int


@lru_cache(maxsize=16)
def _compile(lexicon: LexiconConfig) -> _CompiledLexicon:
    def seqs(phrases: tuple[str, ...]) -> tuple[tuple[str, ...], ...]:
        return tuple(s for s in (_phrase_seq(p) for p in phrases) if s)

    return _CompiledLexicon(
        terms=seqs(lexicon.finding_terms),
        pre=seqs(lexicon.pre_negation_triggers),
        post=seqs(lexicon.post_negation_triggers),
        uncertain=seqs(lexicon.uncertainty_triggers),
        exceptions=seqs(lexicon.pseudo_negation_exceptions),
        scope_window=lexicon.scope_window,
    )


def _match_phrases(words: list[str],
                   seqs: tuple[tuple[str, ...], ...]) -> list[tuple[int, int]]:
    """Token index ranges of phrase occurrences; longest match wins, left to right."""
    by_first: dict[str, list[tuple[str, ...]]] = {}
    for seq in seqs:
        by_first.setdefault(seq[0], []).append(seq)
    for candidates in by_first.values():
        candidates.sort(key=len, reverse=True)

    out: list[tuple[int, int]] = []
    i = 0
    n = len(words)
    while i < n:
        for seq in by_first.get(words[i], ()):
            k = len(seq)
            if i + k <= n and tuple(words[i:i + k]) == seq:
                out.append((i, i + k))
                i += k
                break
        else:
            i += 1
    return out


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _polarities(tokens: list[_Token],
                compiled: _CompiledLexicon) -> list[tuple[int, int, Polarity]]:
    """Polarity for every finding-term occurrence in one sentence's tokens."""
    words = [t.text for t in tokens]
    terms = _match_phrases(words, compiled.terms)
    if not terms:
        return []

    exceptions = _match_phrases(words, compiled.exceptions)

    def live(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
        return [s for s in spans if not any(_overlaps(s, e) for e in exceptions)]

    pre = live(_match_phrases(words, compiled.pre))
    post = live(_match_phrases(words, compiled.post))
    uncertain = live(_match_phrases(words, compiled.uncertain))
    window = compiled.scope_window

    def gap_before(trigger: tuple[int, int], term: tuple[int, int]) -> int | None:
        if trigger[1] <= term[0] and term[0] - trigger[1] < window:
            return term[0] - trigger[1]
        return None

    def gap_after(trigger: tuple[int, int], term: tuple[int, int]) -> int | None:
        if trigger[0] >= term[1] and trigger[0] - term[1] < window:
            return trigger[0] - term[1]
        return None

    results: list[tuple[int, int, Polarity]] = []
    for term in terms:
        neg_gaps = [g for t in pre if (g := gap_before(t, term)) is not None]
        neg_gaps += [g for t in post if (g := gap_after(t, term)) is not None]
        unc_gaps = [g for t in uncertain
                    for g in (gap_before(t, term), gap_after(t, term)) if g is not None]
        nearest_neg = min(neg_gaps) if neg_gaps else None
        nearest_unc = min(unc_gaps) if unc_gaps else None
        if nearest_unc is not None and (nearest_neg is None or nearest_neg >= nearest_unc):
            polarity = Polarity.UNCERTAIN
        elif nearest_neg is not None:
            polarity = Polarity.NEGATED
        else:
            polarity = Polarity.AFFIRMED
        results.append((term[0], term[1], polarity))
    return results


# --------------------------------------------------------------------------
# Sections
# --------------------------------------------------------------------------

def _section_char_ranges(text: str) -> list[tuple[SectionKind, str, int, int]]:
    headers: dict[int, tuple[SectionKind, str]] = {}
    for m in _KNOWN_HEADER_RE.finditer(text):
        name = m.group(1).upper()
        kind = SectionKind[name] if name in ("FINDINGS", "IMPRESSION") else SectionKind.OTHER
        headers[m.start(1)] = (kind, name)
    for m in _OTHER_HEADER_RE.finditer(text):
        start = m.start(1)
        if start not in headers:
            headers[start] = (SectionKind.OTHER, m.group(1))

    if not headers:
        return [(SectionKind.BODY, "BODY", 0, len(text))]

    starts = sorted(headers)
    out: list[tuple[SectionKind, str, int, int]] = []
    if starts[0] > 0:
        out.append((SectionKind.BODY, "BODY", 0, starts[0]))
    for idx, start in enumerate(starts):
        end = starts[idx + 1] if idx + 1 < len(starts) else len(text)
        kind, name = headers[start]
        out.append((kind, name, start, end))
    return out


def segment_sections(text: str) -> list[SectionSpan]:
    """Split a report into ordered, non-overlapping sections covering the text.

    Each section runs from its header's first byte to the next header's first
    byte; text before the first header is BODY. Offsets are UTF-8 bytes.
    """
    offsets = _byte_offsets(text)
    return [
        SectionSpan(kind=kind, name=name, start=offsets[start], end=offsets[end])
        for kind, name, start, end in _section_char_ranges(text)
    ]


# --------------------------------------------------------------------------
# Sentences
# --------------------------------------------------------------------------

def _sentence_char_ranges(text: str, lo: int, hi: int,
                          abbreviations: frozenset[str]) -> list[tuple[int, int]]:
    sentences: list[tuple[int, int]] = []

    def emit(start: int, end: int) -> None:
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            sentences.append((start, end))

    start = lo
    i = lo
    while i < hi:
        ch = text[i]
        if ch in "\r\n":
            emit(start, i)
            while i < hi and text[i] in "\r\n":
                i += 1
            start = i
        elif ch in ".!?":
            if ch == ".":
                prev = text[i - 1] if i > lo else ""
                nxt = text[i + 1] if i + 1 < hi else ""
                if prev.isdigit() and nxt.isdigit():
                    i += 1
                    continue
                k = i
                while k > lo and text[k - 1].isalnum():
                    k -= 1
                word = text[k:i].lower()
                if word and word.isalpha() and (len(word) == 1 or word in abbreviations):
                    i += 1
                    continue
            end = i + 1
            while end < hi and text[end] in ".!?":
                end += 1
            emit(start, end)
            start = end
            i = end
        else:
            i += 1
    emit(start, hi)
    return sentences


def split_sentences(text: str,
                    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
                    ) -> list[tuple[int, int]]:
    """Sentence byte ranges: boundaries at '.', '!', '?' and newline runs.

    Periods inside decimals ("4.5") and after configured abbreviations or
    single letters do not terminate a sentence.
    """
    offsets = _byte_offsets(text)
    return [
        (offsets[start], offsets[end])
        for start, end in _sentence_char_ranges(text, 0, len(text), abbreviations)
    ]


# --------------------------------------------------------------------------
# Classification
# --------------------------------------------------------------------------

def classify_sentence(sentence_text: str, lexicon: LexiconConfig) -> list[EvidenceSpan]:
    """Evidence spans for one sentence; byte offsets are sentence-relative."""
    compiled = _compile(lexicon)
    tokens = _tokenize(sentence_text)
    offsets = _byte_offsets(sentence_text)
    spans = []
    for ms, me, polarity in _polarities(tokens, compiled):
        char_start, char_end = tokens[ms].start, tokens[me - 1].end
        spans.append(EvidenceSpan(
            sentence_index=0,
            start=offsets[char_start],
            end=offsets[char_end],
            matched_term=sentence_text[char_start:char_end],
            polarity=polarity,
        ))
    return spans


def classify_report(report: ReportDocument, lexicon: LexiconConfig) -> NLPLabel:
    """Label a report POSITIVE or NEGATIVE with a full evidence trail.

    POSITIVE iff any sentence in any section yields an AFFIRMED or UNCERTAIN
    span; evidence lists every span found, including NEGATED ones. Pure
    function of (text, lexicon): identical inputs give identical output.
    """
    if not lexicon.finding_terms:
        raise EmptyLexicon("lexicon has no finding terms")
    compiled = _compile(lexicon)
    text = report.text
    offsets = _byte_offsets(text)

    evidence: list[EvidenceSpan] = []
    sentence_index = 0
    for _, _, sec_start, sec_end in _section_char_ranges(text):
        for sent_start, sent_end in _sentence_char_ranges(
                text, sec_start, sec_end, DEFAULT_ABBREVIATIONS):
            tokens = _tokenize(text[sent_start:sent_end], base=sent_start)
            for ms, me, polarity in _polarities(tokens, compiled):
                char_start, char_end = tokens[ms].start, tokens[me - 1].end
                evidence.append(EvidenceSpan(
                    sentence_index=sentence_index,
                    start=offsets[char_start],
                    end=offsets[char_end],
                    matched_term=text[char_start:char_end],
                    polarity=polarity,
                ))
            sentence_index += 1

    return NLPLabel.from_evidence(report.study_id, evidence, lexicon.version)

"""Candidate keyphrase extraction and character-to-token span alignment.

Annotators are pluggable: the built-in heuristic splits on whitespace and
punctuation, drops stopwords, and merges adjacent capitalized or numeric
tokens into one span; precomputed spans from an offline POS/NER tool can be
ingested from JSONL instead.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol

from .errors import AlignmentError, InputError, NoCandidatesError
from .backend.protocol import TokenizedText

STOPWORDS_VERSION = 1

# Word tokens: alphanumeric runs, allowing internal apostrophes and hyphens
# ("Major's", "well-known" stay single tokens).
_WORD = re.compile(r"[A-Za-z0-9]+(?:['’-][A-Za-z0-9]+)*")


def _load_default_stopwords() -> frozenset[str]:
    text = resources.files("overshadow").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split("\n") if w)


DEFAULT_STOPWORDS = _load_default_stopwords()


@dataclass(frozen=True)
class Keyphrase:
    """A contiguous content span of a query."""

    text: str
    char_span: tuple[int, int]
    token_span: tuple[int, int]

    def __post_init__(self):
        if self.char_span[0] >= self.char_span[1]:
            raise InputError("char_span must be non-empty")
        if self.token_span[0] >= self.token_span[1]:
            raise InputError("token_span must be non-empty")


@dataclass(frozen=True)
class CandidateSet:
    """All candidate keyphrases of one query, in document order."""

    query: str
    tokenized: TokenizedText
    candidates: tuple[Keyphrase, ...]

    def __post_init__(self):
        if not self.candidates:
            raise NoCandidatesError(f"no candidate keyphrases in query: {self.query!r}")
        prev_end = -1
        for cand in self.candidates:
            if cand.char_span[0] < prev_end:
                raise InputError("candidates overlap or are out of document order")
            prev_end = cand.char_span[1]


class Annotator(Protocol):
    """Produces candidate character spans for a query."""

    def spans(self, query: str) -> list[tuple[int, int]]: ...


class HeuristicAnnotator:
    """Stopword-filtered content spans with capitalized/numeric-run merging."""

    def __init__(self, stopwords: frozenset[str] = DEFAULT_STOPWORDS):
        self.stopwords = stopwords

    def spans(self, query: str) -> list[tuple[int, int]]:
        kept = []  # (token_index, start, end, mergeable)
        for idx, m in enumerate(_WORD.finditer(query)):
            word = m.group()
            if word.lower() in self.stopwords:
                continue
            mergeable = word[0].isupper() or word[0].isdigit()
            kept.append((idx, m.start(), m.end(), mergeable))

        spans: list[tuple[int, int]] = []
        i = 0
        while i < len(kept):
            idx, start, end, mergeable = kept[i]
            j = i + 1
            if mergeable:
                # Extend over tokens adjacent in the original text, each
                # capitalized or numeric.
                while j < len(kept) and kept[j][0] == kept[j - 1][0] + 1 and kept[j][3]:
                    end = kept[j][2]
                    j += 1
            spans.append((start, end))
            i = j
        return spans


class ExternalAnnotations:
    """Precomputed spans from JSONL records {"query_id", "spans": [{start, end, label}]}.

    Overlapping spans are resolved longest first, ties by earlier start.
    """

    def __init__(self, by_query_id: dict[str, list[tuple[int, int]]]):
        self._by_query_id = by_query_id

    @classmethod
    def load(cls, path: str | Path) -> "ExternalAnnotations":
        table: dict[str, list[tuple[int, int]]] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                spans = [(int(s["start"]), int(s["end"])) for s in rec["spans"]]
                table[str(rec["query_id"])] = _resolve_overlaps(spans)
        return cls(table)

    def annotator_for(self, query_id: str) -> "FixedSpanAnnotator":
        return FixedSpanAnnotator(self._by_query_id.get(query_id, []))


class FixedSpanAnnotator:
    def __init__(self, spans: list[tuple[int, int]]):
        self._spans = list(spans)

    def spans(self, query: str) -> list[tuple[int, int]]:
        for start, end in self._spans:
            if not 0 <= start < end <= len(query):
                raise InputError(f"annotated span ({start}, {end}) outside query bounds")
        return list(self._spans)


def _resolve_overlaps(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    ordered = sorted(spans, key=lambda s: (-(s[1] - s[0]), s[0]))
    kept: list[tuple[int, int]] = []
    for span in ordered:
        if all(span[1] <= k[0] or span[0] >= k[1] for k in kept):
            kept.append(span)
    return sorted(kept)


def align_span(char_span: tuple[int, int], tokenized: TokenizedText) -> tuple[int, int]:
    """Minimal contiguous token range whose offsets overlap the character span."""
    start, end = char_span
    if not 0 <= start < end <= len(tokenized.text):
        raise InputError(f"char_span ({start}, {end}) outside text bounds")
    first = last = None
    for i, (tok_start, tok_end) in enumerate(tokenized.offsets):
        if tok_start < end and tok_end > start:
            if first is None:
                first = i
            last = i
    if first is None:
        raise AlignmentError(f"char_span ({start}, {end}) overlaps no token")
    return (first, last + 1)


def keyphrase_mask(keyphrase: Keyphrase, n_tokens: int) -> list[int]:
    """Binary token mask: 1 inside the keyphrase's token span, 0 elsewhere."""
    start, end = keyphrase.token_span
    if not 0 <= start < end <= n_tokens:
        raise InputError("token_span out of range")
    return [1 if start <= i < end else 0 for i in range(n_tokens)]


def extract_candidates(
    query: str,
    tokenized: TokenizedText,
    annotator: Annotator,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
) -> CandidateSet:
    """Annotate, align, and filter candidate keyphrases for one query.

    Spans made up entirely of stopwords are dropped regardless of annotator.
    Raises NoCandidatesError when nothing survives.
    """
    if not query.strip():
        raise InputError("query must be non-empty")
    candidates = []
    for start, end in sorted(annotator.spans(query)):
        text = query[start:end]
        words = [w.group().lower() for w in _WORD.finditer(text)]
        if not words or all(w in stopwords for w in words):
            continue
        token_span = align_span((start, end), tokenized)
        candidates.append(Keyphrase(text=text, char_span=(start, end), token_span=token_span))
    return CandidateSet(query=query, tokenized=tokenized, candidates=tuple(candidates))

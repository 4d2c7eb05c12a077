"""Cited-reference string parsing, field normalization, and pairwise similarity.

A cited-reference string is a comma-separated list of segments, e.g.

    ARRHENIUS S, 1896, PHILOS MAG, V41, P237

Segment roles: the first segment is the author; the first all-digit
4-character segment in the plausible year range is the reference
publication year (RPY); the next untagged segment after the year is the
source title; ``V<digits>`` is the volume, ``P<alnum>`` the start page,
and ``DOI <text>`` or ``10.<text>`` the DOI.  Parsing is total: any
string yields a ParsedReference, with unmatched fields left absent.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

MIN_YEAR = 1000
MAX_YEAR = 2100

_VOLUME_RE = re.compile(r"^V(\d+)$")
_PAGE_RE = re.compile(r"^P([0-9A-Za-z]+)$")
_YEAR_RE = re.compile(r"^\d{4}$")
_WS_RE = re.compile(r"\s+")
_SOURCE_PUNCT_RE = re.compile(r"[^0-9A-Z ]+")


@dataclass(frozen=True, slots=True)
class ParsedReference:
    """Structured fields extracted from one raw cited-reference string."""

    raw_text: str
    author_norm: str = ""
    rpy: int | None = None
    source_norm: str | None = None
    volume: int | None = None
    start_page: str | None = None
    doi_norm: str | None = None


def fold_diacritics(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def normalize_author(text: str) -> str:
    """Uppercase, fold diacritics, drop periods, collapse whitespace."""
    folded = fold_diacritics(text).upper().replace(".", " ")
    return _WS_RE.sub(" ", folded).strip()


def normalize_source(text: str) -> str:
    """Uppercase, fold diacritics, strip punctuation, collapse whitespace."""
    folded = fold_diacritics(text).upper()
    stripped = _SOURCE_PUNCT_RE.sub(" ", folded)
    return _WS_RE.sub(" ", stripped).strip()


def normalize_doi(text: str) -> str:
    return text.strip().lower()


def parse_cited_reference(raw: str) -> ParsedReference:
    """Parse one raw cited-reference string. Never raises.

    Unrecognized segments are ignored; the worst case is a
    ParsedReference carrying only the raw text.
    """
    segments = [seg.strip() for seg in raw.split(",")]

    author = normalize_author(segments[0]) if segments else ""
    rpy: int | None = None
    source: str | None = None
    volume: int | None = None
    page: str | None = None
    doi: str | None = None
    year_index: int | None = None

    for i, seg in enumerate(segments[1:], start=1):
        if not seg:
            continue
        if rpy is None and _YEAR_RE.match(seg):
            year = int(seg)
            if MIN_YEAR <= year <= MAX_YEAR:
                rpy = year
                year_index = i
                continue
        m = _VOLUME_RE.match(seg)
        if m:
            if volume is None:
                volume = int(m.group(1))
            continue
        m = _PAGE_RE.match(seg)
        if m:
            if page is None:
                page = m.group(1)
            continue
        if seg.upper().startswith("DOI "):
            if doi is None:
                doi = normalize_doi(seg[4:])
            continue
        if seg.startswith("10."):
            if doi is None:
                doi = normalize_doi(seg)
            continue
        if source is None and year_index is not None and i > year_index:
            normalized = normalize_source(seg)
            if normalized:
                source = normalized

    return ParsedReference(
        raw_text=raw,
        author_norm=author,
        rpy=rpy,
        source_norm=source,
        volume=volume,
        start_page=page,
        doi_norm=doi,
    )


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    # Shared prefixes and suffixes never contribute to the distance.
    lo = 0
    hi_a, hi_b = len(a), len(b)
    while lo < hi_a and lo < hi_b and a[lo] == b[lo]:
        lo += 1
    while hi_a > lo and hi_b > lo and a[hi_a - 1] == b[hi_b - 1]:
        hi_a -= 1
        hi_b -= 1
    a, b = a[lo:hi_a], b[lo:hi_b]
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, start=1):
            append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def edit_similarity(a: str, b: str) -> float:
    """Normalized edit similarity: 1 - distance / max(len)."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


# Field weights for the composite score.  Weights of fields absent on
# either side are redistributed proportionally across the present ones.
WEIGHT_AUTHOR = 0.40
WEIGHT_SOURCE = 0.30
WEIGHT_VOLUME = 0.15
WEIGHT_PAGE = 0.15


def combine_component_scores(components: list[tuple[float, float]]) -> float:
    """Weighted mean over (weight, score) pairs of the fields present on both sides."""
    total_weight = sum(w for w, _ in components)
    if total_weight == 0.0:
        return 0.0
    return sum(w * s for w, s in components) / total_weight


def similarity(a: ParsedReference, b: ParsedReference, year_tolerance: int = 0) -> float:
    """Score two parsed references in [0, 1].

    Rules, strongest first: identical raw strings score 1.0; equal DOIs
    on both sides score 1.0 (unequal DOIs on both sides score 0.0);
    years present on both sides and further apart than ``year_tolerance``
    score 0.0.  Otherwise the score is the weighted combination of edit
    similarity on author and source plus exact-match scores on volume
    and start page.
    """
    if a.raw_text == b.raw_text:
        return 1.0
    if a.doi_norm is not None and b.doi_norm is not None:
        return 1.0 if a.doi_norm == b.doi_norm else 0.0
    if a.rpy is not None and b.rpy is not None and abs(a.rpy - b.rpy) > year_tolerance:
        return 0.0

    components: list[tuple[float, float]] = []
    if a.author_norm and b.author_norm:
        components.append((WEIGHT_AUTHOR, edit_similarity(a.author_norm, b.author_norm)))
    if a.source_norm is not None and b.source_norm is not None:
        components.append((WEIGHT_SOURCE, edit_similarity(a.source_norm, b.source_norm)))
    if a.volume is not None and b.volume is not None:
        components.append((WEIGHT_VOLUME, 1.0 if a.volume == b.volume else 0.0))
    if a.start_page is not None and b.start_page is not None:
        components.append((WEIGHT_PAGE, 1.0 if a.start_page == b.start_page else 0.0))
    return combine_component_scores(components)

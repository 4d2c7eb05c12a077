"""Independent reference implementations used to verify engine output.

Everything here is written directly from the definitions, favouring
obviousness over speed, and shares no code with the package under test.
"""

from __future__ import annotations


def levenshtein_ref(a: str, b: str) -> int:
    """Full-matrix edit distance."""
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[rows - 1][cols - 1]


def median_of_five(values: list[int]) -> int:
    assert len(values) == 5
    return sorted(values)[2]


def brute_spectrum(
    pairs: list[tuple[str, str]],
    clusters: list[tuple[str, int | None, frozenset[str]]],
    lo: int,
    hi: int,
) -> dict[int, tuple[int, int, int]]:
    """Per-year (ncr, median5, deviation) by direct tally.

    ``pairs`` are (record id, raw reference string) incidences;
    ``clusters`` are (cluster id, effective year, variant raw strings).
    """
    ncr: dict[int, int] = {}
    for year in range(lo, hi + 1):
        count = 0
        for _cid, rpy, raws in clusters:
            if rpy != year:
                continue
            citing = set()
            for record_id, raw in pairs:
                if raw in raws:
                    citing.add(record_id)
            count += len(citing)
        ncr[year] = count

    result: dict[int, tuple[int, int, int]] = {}
    for year in range(lo, hi + 1):
        window = [ncr.get(y, 0) if lo <= y <= hi else 0 for y in range(year - 2, year + 3)]
        median = median_of_five(window)
        result[year] = (ncr[year], median, ncr[year] - median)
    return result


def brute_retained_records(
    pairs: list[tuple[str, str]],
    marker_raw_sets: list[frozenset[str]],
    mode: str = "or",
) -> set[str]:
    """Record ids citing the markers, by direct scan."""
    per_marker: list[set[str]] = []
    for raws in marker_raw_sets:
        citing = set()
        for record_id, raw in pairs:
            if raw in raws:
                citing.add(record_id)
        per_marker.append(citing)
    if mode == "or":
        out: set[str] = set()
        for citing in per_marker:
            out |= citing
        return out
    out = per_marker[0].copy()
    for citing in per_marker[1:]:
        out &= citing
    return out


def brute_era_filter(
    clusters: list[tuple[str, int | None, int]],
    rules: list[tuple[int, int, int]],
) -> set[str]:
    """Cluster ids surviving the era thresholds; clusters are (id, year, ncr)."""
    kept = set()
    for cid, year, ncr in clusters:
        if year is None:
            continue
        for lo, hi, min_ncr in rules:
            if lo <= year <= hi and ncr >= min_ncr:
                kept.add(cid)
                break
    return kept


def naive_transitive_clusters(
    items: list[str],
    linked: "callable",
) -> list[frozenset[str]]:
    """Transitive closure by repeated set merging (no union-find)."""
    groups: list[set[str]] = [{item} for item in items]
    changed = True
    while changed:
        changed = False
        for i in range(len(groups)):
            if not groups[i]:
                continue
            for j in range(i + 1, len(groups)):
                if not groups[j]:
                    continue
                if any(linked(a, b) for a in groups[i] for b in groups[j]):
                    groups[i] |= groups[j]
                    groups[j] = set()
                    changed = True
    return [frozenset(g) for g in groups if g]

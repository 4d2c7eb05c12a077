"""Deterministic clustering of cited-reference variants.

Candidates are blocked by reference publication year, linked when their
pairwise similarity clears the configured threshold, and clusters are
the transitive closure of the links (union-find).  Output is identical
for any permutation of the input instances.

Cluster ids are derived from the sorted variant strings, so a merge
followed by the inverse split restores the original ids, and replaying
a ledger of manual operations reproduces identical tables.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from ._editbatch import batch_distances
from .references import (
    MAX_YEAR,
    MIN_YEAR,
    WEIGHT_AUTHOR,
    WEIGHT_PAGE,
    WEIGHT_SOURCE,
    WEIGHT_VOLUME,
    ParsedReference,
    combine_component_scores,
)


class UnknownClusterError(ValueError):
    """Raised when an operation names a cluster id that does not resolve."""

    def __init__(self, cluster_id: str):
        super().__init__(f"unknown cluster id: {cluster_id}")
        self.cluster_id = cluster_id


class InvalidPartitionError(ValueError):
    """Raised when a split partition does not cover the cluster's variants."""


@dataclass(frozen=True, slots=True)
class ClusterConfig:
    threshold: float = 0.80
    year_tolerance: int = 0
    require_vol_page_match: bool = True

    def validate(self) -> None:
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.year_tolerance < 0:
            raise ValueError("year_tolerance must be >= 0")


@dataclass(frozen=True)
class ReferenceCluster:
    """A set of variant references treated as one cited work."""

    cluster_id: str
    canonical: ParsedReference
    variants: tuple[ParsedReference, ...]
    effective_rpy: int | None
    ncr: int


def cluster_content_id(variant_raws: Iterable[str]) -> str:
    digest = hashlib.sha1("\x1f".join(sorted(variant_raws)).encode("utf-8")).hexdigest()
    return "c" + digest[:12]


def _vol_page_gate(a: ParsedReference, b: ParsedReference) -> bool:
    if a.volume is not None and b.volume is not None and a.volume != b.volume:
        return False
    if a.start_page is not None and b.start_page is not None and a.start_page != b.start_page:
        return False
    return True


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        # Smaller root index wins: keeps the forest order-independent.
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri


class ClusterTable:
    """The live cluster set plus the incidence index it was built from.

    Mutations (merge, split, year correction) recompute NCR as the
    number of distinct citing records over the affected variants.
    Retired merge ids stay resolvable to their successor.
    """

    def __init__(
        self,
        ref_by_raw: dict[str, ParsedReference],
        records_by_raw: dict[str, frozenset[str]],
        occurrences_by_raw: dict[str, int],
    ):
        self._ref_by_raw = ref_by_raw
        self._records_by_raw = records_by_raw
        self._occurrences_by_raw = occurrences_by_raw
        self.clusters: dict[str, ReferenceCluster] = {}
        self._aliases: dict[str, str] = {}
        self._raw_to_cluster: dict[str, str] = {}

    # -- construction ------------------------------------------------

    def _build_cluster(self, raws: Sequence[str], effective_rpy: int | None = None) -> ReferenceCluster:
        ordered_raws = sorted(raws)
        variants = tuple(self._ref_by_raw[r] for r in ordered_raws)
        canonical = min(variants, key=lambda v: (-self._occurrences_by_raw[v.raw_text], v.raw_text))
        citing: set[str] = set()
        for raw in ordered_raws:
            citing.update(self._records_by_raw[raw])
        return ReferenceCluster(
            cluster_id=cluster_content_id(ordered_raws),
            canonical=canonical,
            variants=variants,
            effective_rpy=canonical.rpy if effective_rpy is None else effective_rpy,
            ncr=len(citing),
        )

    def _insert(self, cluster: ReferenceCluster) -> None:
        self._aliases.pop(cluster.cluster_id, None)
        self.clusters[cluster.cluster_id] = cluster
        for variant in cluster.variants:
            self._raw_to_cluster[variant.raw_text] = cluster.cluster_id

    def _remove(self, cluster_id: str) -> ReferenceCluster:
        return self.clusters.pop(cluster_id)

    def copy(self) -> "ClusterTable":
        table = ClusterTable(self._ref_by_raw, self._records_by_raw, self._occurrences_by_raw)
        table.clusters = dict(self.clusters)
        table._aliases = dict(self._aliases)
        table._raw_to_cluster = dict(self._raw_to_cluster)
        return table

    # -- lookup ------------------------------------------------------

    def resolve(self, cluster_id: str) -> str:
        """Follow merge aliases to the live id. Raises UnknownClusterError."""
        seen = 0
        current = cluster_id
        while current not in self.clusters:
            if current not in self._aliases or seen > len(self._aliases):
                raise UnknownClusterError(cluster_id)
            current = self._aliases[current]
            seen += 1
        return current

    def get(self, cluster_id: str) -> ReferenceCluster:
        return self.clusters[self.resolve(cluster_id)]

    def cluster_for_raw(self, raw_text: str) -> ReferenceCluster | None:
        cluster_id = self._raw_to_cluster.get(raw_text)
        return self.clusters[cluster_id] if cluster_id is not None else None

    def ordered(self) -> list[ReferenceCluster]:
        """Deterministic listing: year ascending (unknown last), NCR descending, id."""
        return sorted(
            self.clusters.values(),
            key=lambda c: (
                c.effective_rpy is None,
                c.effective_rpy if c.effective_rpy is not None else 0,
                -c.ncr,
                c.cluster_id,
            ),
        )

    def __len__(self) -> int:
        return len(self.clusters)

    # -- manual operations --------------------------------------------

    def merge(self, cluster_ids: Iterable[str]) -> str:
        resolved: list[str] = []
        for cid in cluster_ids:
            live = self.resolve(cid)
            if live not in resolved:
                resolved.append(live)
        if len(resolved) == 1:
            return resolved[0]
        constituents = [self._remove(cid) for cid in sorted(resolved)]
        raws = [v.raw_text for c in constituents for v in c.variants]
        effective_years = {c.effective_rpy for c in constituents}
        override = effective_years.pop() if len(effective_years) == 1 else None
        merged = self._build_cluster(raws, effective_rpy=override)
        for c in constituents:
            if c.cluster_id != merged.cluster_id:
                self._aliases[c.cluster_id] = merged.cluster_id
        self._insert(merged)
        return merged.cluster_id

    def split(self, cluster_id: str, partition: Sequence[Sequence[str]]) -> list[str]:
        live = self.resolve(cluster_id)
        cluster = self.clusters[live]
        all_raws = {v.raw_text for v in cluster.variants}
        blocks = [list(block) for block in partition]
        if any(not block for block in blocks):
            raise InvalidPartitionError("partition blocks must be non-empty")
        flat = [raw for block in blocks for raw in block]
        if len(flat) != len(set(flat)):
            raise InvalidPartitionError("partition blocks must be disjoint")
        if set(flat) != all_raws:
            missing = sorted(all_raws - set(flat))
            extra = sorted(set(flat) - all_raws)
            raise InvalidPartitionError(
                f"partition must cover the cluster's variants exactly"
                f" (missing={missing[:3]}, unknown={extra[:3]})"
            )
        self._remove(live)
        new_ids: list[str] = []
        for block in blocks:
            piece = self._build_cluster(block)
            self._insert(piece)
            new_ids.append(piece.cluster_id)
        return new_ids

    def correct_year(self, cluster_id: str, corrected_year: int) -> str:
        if not MIN_YEAR <= corrected_year <= MAX_YEAR:
            raise ValueError(f"corrected year out of range: {corrected_year}")
        live = self.resolve(cluster_id)
        self.clusters[live] = replace(self.clusters[live], effective_rpy=corrected_year)
        return live


def _candidate_pairs(block_a: Sequence[int], block_b: Sequence[int] | None) -> Iterable[tuple[int, int]]:
    if block_b is None:
        for x in range(len(block_a)):
            for y in range(x + 1, len(block_a)):
                yield block_a[x], block_a[y]
    else:
        for i in block_a:
            for j in block_b:
                yield i, j


def cluster_references(
    instances: Iterable[tuple[str, ParsedReference]],
    config: ClusterConfig = ClusterConfig(),
) -> ClusterTable:
    """Cluster the distinct variants occurring in ``instances``.

    ``instances`` are (citing record id, parsed reference) pairs; the
    same variant cited by many records appears once in the output with
    its citing records tallied into the cluster's NCR.
    """
    config.validate()

    occurrences: dict[str, int] = {}
    citing: dict[str, set[str]] = {}
    ref_by_raw: dict[str, ParsedReference] = {}
    for record_id, ref in instances:
        raw = ref.raw_text
        if raw not in ref_by_raw:
            ref_by_raw[raw] = ref
            occurrences[raw] = 0
            citing[raw] = set()
        occurrences[raw] += 1
        citing[raw].add(record_id)

    raws = sorted(ref_by_raw)
    refs = [ref_by_raw[r] for r in raws]
    records_by_raw = {raw: frozenset(citing[raw]) for raw in raws}

    blocks: dict[int | None, list[int]] = {}
    for idx, ref in enumerate(refs):
        blocks.setdefault(ref.rpy, []).append(idx)

    uf = _UnionFind(len(refs))
    years = sorted(year for year in blocks if year is not None)
    block_pairs: list[tuple[Sequence[int], Sequence[int] | None]] = []
    if None in blocks:
        block_pairs.append((blocks[None], None))
    for year in years:
        block_pairs.append((blocks[year], None))
        for delta in range(1, config.year_tolerance + 1):
            if year + delta in blocks:
                block_pairs.append((blocks[year], blocks[year + delta]))

    for block_a, block_b in block_pairs:
        _link_block(refs, uf, block_a, block_b, config)

    components: dict[int, list[str]] = {}
    for idx, raw in enumerate(raws):
        components.setdefault(uf.find(idx), []).append(raw)

    table = ClusterTable(ref_by_raw, records_by_raw, occurrences)
    for root in sorted(components, key=lambda r: raws[r]):
        table._insert(table._build_cluster(components[root]))
    return table


def _link_block(
    refs: list[ParsedReference],
    uf: _UnionFind,
    block_a: Sequence[int],
    block_b: Sequence[int] | None,
    config: ClusterConfig,
) -> None:
    """Link every qualifying pair between (or within) year blocks.

    Equivalent to scoring each pair with references.similarity, but the
    expensive author/source edit distances run batched, and a pair is
    skipped early when even a perfect source match could not reach the
    threshold.
    """
    threshold = config.threshold
    scoring: list[tuple[int, int]] = []
    for i, j in _candidate_pairs(block_a, block_b):
        a, b = refs[i], refs[j]
        if config.require_vol_page_match and not _vol_page_gate(a, b):
            continue
        if a.doi_norm is not None and b.doi_norm is not None:
            if a.doi_norm == b.doi_norm:
                uf.union(i, j)
            continue
        scoring.append((i, j))
    if not scoring:
        return

    author_strings = [ref.author_norm for ref in refs]
    author_dists = batch_distances(author_strings, scoring)

    survivors: list[tuple[int, int]] = []
    partial: list[list[tuple[float, float]]] = []
    for (i, j), author_dist in zip(scoring, author_dists):
        a, b = refs[i], refs[j]
        components: list[tuple[float, float]] = []
        if a.author_norm and b.author_norm:
            longest = max(len(a.author_norm), len(b.author_norm))
            components.append((WEIGHT_AUTHOR, 1.0 - author_dist / longest))
        both_source = a.source_norm is not None and b.source_norm is not None
        if a.volume is not None and b.volume is not None:
            components.append((WEIGHT_VOLUME, 1.0 if a.volume == b.volume else 0.0))
        if a.start_page is not None and b.start_page is not None:
            components.append((WEIGHT_PAGE, 1.0 if a.start_page == b.start_page else 0.0))
        if not both_source:
            if combine_component_scores(components) >= threshold:
                uf.union(i, j)
            continue
        optimistic = combine_component_scores(components + [(WEIGHT_SOURCE, 1.0)])
        if optimistic >= threshold:
            survivors.append((i, j))
            partial.append(components)
    if not survivors:
        return

    source_strings = [ref.source_norm or "" for ref in refs]
    source_dists = batch_distances(source_strings, survivors)
    for (i, j), components, source_dist in zip(survivors, partial, source_dists):
        a, b = refs[i], refs[j]
        longest = max(len(a.source_norm or ""), len(b.source_norm or ""))
        source_sim = 1.0 if longest == 0 else 1.0 - source_dist / longest
        if combine_component_scores(components + [(WEIGHT_SOURCE, source_sim)]) >= threshold:
            uf.union(i, j)

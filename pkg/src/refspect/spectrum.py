"""Per-year cited-reference spectra, peak detection, era filters, and
co-citation corpus reduction.

The spectrum counts, for each reference publication year t, the number
of distinct (citing record, cluster) incidences whose cluster has
effective RPY t, and pairs each count with its deviation from the
five-year median (years t-2 .. t+2, zero outside the requested range).
All operations here are pure functions over immutable snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .clustering import ClusterConfig, ClusterTable, ReferenceCluster, cluster_references
from .ingest import (
    DEFAULT_DOCUMENT_TYPES,
    CitingRecord,
    CorpusView,
    apply_rpy_cutoff,
    build_view,
)
from .ledger import LedgerEntry, replay as replay_ledger


@dataclass(frozen=True, slots=True)
class SpectrumPoint:
    rpy: int
    ncr_total: int
    median5: int
    deviation: int


@dataclass(frozen=True)
class Spectrum:
    """One point per year over an inclusive range (None for the empty spectrum)."""

    year_range: tuple[int, int] | None
    points: tuple[SpectrumPoint, ...]

    @staticmethod
    def empty() -> "Spectrum":
        return Spectrum(year_range=None, points=())


@dataclass(frozen=True, slots=True)
class EraThresholdRule:
    """Keep clusters inside ``year_range`` only when NCR >= ``min_ncr``."""

    year_range: tuple[int, int]
    min_ncr: int


@dataclass(frozen=True)
class PeakReport:
    rpy: int
    deviation: int
    ncr_total: int
    top_clusters: tuple[tuple[str, int], ...] = ()


def _cluster_list(clusters: ClusterTable | Iterable[ReferenceCluster]) -> list[ReferenceCluster]:
    if isinstance(clusters, ClusterTable):
        return clusters.ordered()
    return list(clusters)


def _median5(series: dict[int, int], year: int) -> int:
    window = sorted(series.get(y, 0) for y in range(year - 2, year + 3))
    return window[2]


def compute_spectrum(
    view: CorpusView,
    clusters: ClusterTable | Iterable[ReferenceCluster],
    year_range: tuple[int, int],
) -> Spectrum:
    """Tally per-year NCR over the view and derive the median deviation.

    A citing record counts once per cluster, however many variants of
    the cluster it cites.  Gap years inside the range appear with zero
    counts; years outside the range contribute zero to the medians.
    """
    lo, hi = year_range
    if lo > hi:
        raise ValueError(f"inverted year range: {lo}..{hi}")

    year_by_raw: dict[str, tuple[str, int]] = {}
    for cluster in _cluster_list(clusters):
        rpy = cluster.effective_rpy
        if rpy is None or not lo <= rpy <= hi:
            continue
        for variant in cluster.variants:
            year_by_raw[variant.raw_text] = (cluster.cluster_id, rpy)

    seen: set[tuple[str, str]] = set()
    counts: dict[int, int] = {}
    for record_id, ref in view.instances:
        hit = year_by_raw.get(ref.raw_text)
        if hit is None:
            continue
        cluster_id, rpy = hit
        key = (record_id, cluster_id)
        if key in seen:
            continue
        seen.add(key)
        counts[rpy] = counts.get(rpy, 0) + 1

    points = tuple(
        SpectrumPoint(
            rpy=year,
            ncr_total=counts.get(year, 0),
            median5=(median := _median5(counts, year)),
            deviation=counts.get(year, 0) - median,
        )
        for year in range(lo, hi + 1)
    )
    return Spectrum(year_range=(lo, hi), points=points)


def validate_era_rules(rules: Sequence[EraThresholdRule]) -> None:
    ordered = sorted(rules, key=lambda r: r.year_range)
    for rule in ordered:
        if rule.year_range[0] > rule.year_range[1]:
            raise ValueError(f"inverted era rule range: {rule.year_range}")
    for left, right in zip(ordered, ordered[1:]):
        if right.year_range[0] <= left.year_range[1]:
            raise ValueError(
                f"overlapping era rules: {left.year_range} and {right.year_range}"
            )


def apply_era_thresholds(
    clusters: ClusterTable | Iterable[ReferenceCluster],
    rules: Sequence[EraThresholdRule],
) -> list[ReferenceCluster]:
    """Keep clusters meeting the minimum NCR of the era rule covering their year.

    Clusters outside every rule range (or without an effective year)
    are dropped.  Overlapping rule ranges are rejected.
    """
    validate_era_rules(rules)
    kept: list[ReferenceCluster] = []
    for cluster in _cluster_list(clusters):
        if cluster.effective_rpy is None:
            continue
        for rule in rules:
            lo, hi = rule.year_range
            if lo <= cluster.effective_rpy <= hi:
                if cluster.ncr >= rule.min_ncr:
                    kept.append(cluster)
                break
    return kept


def detect_peaks(
    spectrum: Spectrum,
    min_deviation: int = 0,
    max_peaks: int | None = None,
) -> list[PeakReport]:
    """Positive local maxima of the deviation curve, strongest first.

    A year qualifies when its deviation is positive, at least
    ``min_deviation``, and not exceeded by either neighbour (years just
    outside the spectrum never win over an inside year).  Ties rank the
    earlier year first; the list is cut to ``max_peaks`` when given.
    """
    if min_deviation < 0:
        raise ValueError("min_deviation must be >= 0")
    devs = [p.deviation for p in spectrum.points]
    candidates: list[PeakReport] = []
    for idx, point in enumerate(spectrum.points):
        d = point.deviation
        if d <= 0 or d < min_deviation:
            continue
        left = devs[idx - 1] if idx > 0 else None
        right = devs[idx + 1] if idx + 1 < len(devs) else None
        if left is not None and d < left:
            continue
        if right is not None and d < right:
            continue
        candidates.append(PeakReport(rpy=point.rpy, deviation=d, ncr_total=point.ncr_total))
    candidates.sort(key=lambda p: (-p.deviation, p.rpy))
    if max_peaks is not None:
        candidates = candidates[:max_peaks]
    return candidates


def view_ncr_by_cluster(
    view: CorpusView,
    clusters: ClusterTable | Iterable[ReferenceCluster],
) -> dict[str, int]:
    """Distinct citing records per cluster, counted within ``view``."""
    cluster_by_raw: dict[str, str] = {}
    cluster_list = _cluster_list(clusters)
    for cluster in cluster_list:
        for variant in cluster.variants:
            cluster_by_raw[variant.raw_text] = cluster.cluster_id
    citers: dict[str, set[str]] = {c.cluster_id: set() for c in cluster_list}
    for record_id, ref in view.instances:
        cluster_id = cluster_by_raw.get(ref.raw_text)
        if cluster_id is not None:
            citers[cluster_id].add(record_id)
    return {cluster_id: len(records) for cluster_id, records in citers.items()}


def top_references_for_year(
    view: CorpusView,
    clusters: ClusterTable | Iterable[ReferenceCluster],
    rpy: int,
    k: int,
) -> list[tuple[ReferenceCluster, int]]:
    """The k most-cited clusters of one year within the view."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cluster_list = [c for c in _cluster_list(clusters) if c.effective_rpy == rpy]
    ncr = view_ncr_by_cluster(view, cluster_list)
    ranked = sorted(
        cluster_list,
        key=lambda c: (-ncr[c.cluster_id], c.canonical.raw_text),
    )
    return [(c, ncr[c.cluster_id]) for c in ranked[:k]]


def rpys_co(
    view: CorpusView,
    table: ClusterTable,
    marker_cluster_ids: Sequence[str],
    mode: str = "or",
) -> CorpusView:
    """Reduce the view to the citing records that cite the marker clusters.

    ``mode`` "or" keeps records citing at least one marker, "and" only
    records citing all of them.  The reduced view keeps every reference
    of the retained records; no minimum reference count is applied.
    Markers nobody cites yield an empty view, flagged in ``warnings``.
    """
    if not marker_cluster_ids:
        raise ValueError("at least one marker cluster id is required")
    if mode not in ("or", "and"):
        raise ValueError(f"unknown marker mode: {mode!r}")

    marker_raws: dict[str, frozenset[str]] = {}
    for marker in marker_cluster_ids:
        cluster = table.get(marker)  # raises UnknownClusterError
        marker_raws[cluster.cluster_id] = frozenset(v.raw_text for v in cluster.variants)

    citers: dict[str, set[str]] = {mid: set() for mid in marker_raws}
    for record_id, ref in view.instances:
        for mid, raws in marker_raws.items():
            if ref.raw_text in raws:
                citers[mid].add(record_id)

    sets = list(citers.values())
    if mode == "or":
        retained = set().union(*sets)
    else:
        retained = set.intersection(*sets) if sets else set()

    warnings = tuple(
        f"marker {mid} is cited by no record in the view"
        for mid in sorted(citers)
        if not citers[mid]
    )
    return replace(
        view,
        records=tuple(r for r in view.records if r.record_id in retained),
        instances=tuple(inst for inst in view.instances if inst.record_id in retained),
        warnings=view.warnings + warnings,
    )


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the standard run needs, in processing order."""

    cutoff_year: int | None = None
    cluster_config: ClusterConfig = ClusterConfig()
    era_rules: tuple[EraThresholdRule, ...] = ()
    year_range: tuple[int, int] | None = None
    document_types: tuple[str, ...] | None = DEFAULT_DOCUMENT_TYPES
    overrides: tuple[LedgerEntry, ...] = ()
    markers: tuple[str, ...] = ()
    marker_mode: str = "or"
    min_deviation: int = 1
    max_peaks: int | None = 25
    top_k: int = 10


@dataclass(frozen=True)
class PipelineCounts:
    """Intermediate sizes reported after each stage."""

    num_records: int
    num_reference_instances: int
    num_instances_after_cutoff: int
    num_unparseable_rpy: int
    num_clusters: int
    num_clusters_after_thresholds: int
    num_records_after_marker_filter: int | None = None
    num_instances_after_marker_filter: int | None = None


@dataclass(frozen=True)
class PipelineResult:
    counts: PipelineCounts
    view: CorpusView
    table: ClusterTable
    clusters: tuple[ReferenceCluster, ...]
    spectrum: Spectrum
    peaks: tuple[PeakReport, ...]


def attach_top_clusters(
    peaks: Iterable[PeakReport],
    view: CorpusView,
    clusters: ClusterTable | Iterable[ReferenceCluster],
    k: int,
) -> list[PeakReport]:
    cluster_list = _cluster_list(clusters)
    return [
        replace(
            peak,
            top_clusters=tuple(
                (cluster.cluster_id, ncr)
                for cluster, ncr in top_references_for_year(view, cluster_list, peak.rpy, k)
            ),
        )
        for peak in peaks
    ]


def default_year_range(
    view: CorpusView,
    clusters: Iterable[ReferenceCluster],
) -> tuple[int, int] | None:
    """Observed min/max effective RPY among clusters cited within the view."""
    ncr = view_ncr_by_cluster(view, list(clusters))
    years = [
        c.effective_rpy
        for c in clusters
        if c.effective_rpy is not None and ncr.get(c.cluster_id, 0) > 0
    ]
    if not years:
        return None
    return (min(years), max(years))


def run_standard_pipeline(
    records: Sequence[CitingRecord],
    config: PipelineConfig = PipelineConfig(),
) -> PipelineResult:
    """Cutoff, cluster, replay overrides, filter, and spectrum in one pass.

    With markers set, era thresholds are skipped and the spectrum is
    computed over the record set reduced to the markers' citers.
    """
    view = build_view(records, document_types=config.document_types)
    num_instances = len(view.instances)
    if config.cutoff_year is not None:
        view = apply_rpy_cutoff(view, config.cutoff_year)
    instances_after_cutoff = len(view.instances)

    table = cluster_references(view.instances, config.cluster_config)
    if config.overrides:
        table = replay_ledger(table, config.overrides)
    num_clusters = len(table)

    records_after_co: int | None = None
    instances_after_co: int | None = None
    if config.markers:
        view = rpys_co(view, table, config.markers, mode=config.marker_mode)
        records_after_co = len(view.records)
        instances_after_co = len(view.instances)
        clusters = table.ordered()
    else:
        clusters = apply_era_thresholds(table, config.era_rules) if config.era_rules else table.ordered()

    year_range = config.year_range or default_year_range(view, clusters)
    if year_range is None:
        spectrum = Spectrum.empty()
        peaks: list[PeakReport] = []
    else:
        spectrum = compute_spectrum(view, clusters, year_range)
        peaks = detect_peaks(spectrum, min_deviation=config.min_deviation, max_peaks=config.max_peaks)
        peaks = attach_top_clusters(peaks, view, clusters, config.top_k)

    counts = PipelineCounts(
        num_records=len(records),
        num_reference_instances=num_instances,
        num_instances_after_cutoff=instances_after_cutoff,
        num_unparseable_rpy=view.dropped_unparseable_rpy,
        num_clusters=num_clusters,
        num_clusters_after_thresholds=len(clusters),
        num_records_after_marker_filter=records_after_co,
        num_instances_after_marker_filter=instances_after_co,
    )
    return PipelineResult(
        counts=counts,
        view=view,
        table=table,
        clusters=tuple(clusters),
        spectrum=spectrum,
        peaks=tuple(peaks),
    )

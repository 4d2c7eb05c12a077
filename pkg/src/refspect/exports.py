"""Delimited export artifacts with stable, byte-reproducible output.

Schemas (documented with fixtures in FORMATS.md):
  spectrum: RPY,NCR,MEDIAN5,DEV - one row per year, ascending
  clusters: CLUSTER_ID,RPY,NCR,AUTHOR,SOURCE,VOLUME,PAGE,DOI,N_VARIANTS
  peaks:    RPY,NCR,DEV,TOP_CLUSTERS
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Sequence

from .clustering import ReferenceCluster
from .spectrum import PeakReport, Spectrum

SPECTRUM_HEADER = ("RPY", "NCR", "MEDIAN5", "DEV")
CLUSTERS_HEADER = (
    "CLUSTER_ID", "RPY", "NCR", "AUTHOR", "SOURCE", "VOLUME", "PAGE", "DOI", "N_VARIANTS",
)
PEAKS_HEADER = ("RPY", "NCR", "DEV", "TOP_CLUSTERS")


def _writer(out: io.StringIO):
    return csv.writer(out, lineterminator="\n")


def spectrum_csv(spectrum: Spectrum) -> str:
    out = io.StringIO()
    writer = _writer(out)
    writer.writerow(SPECTRUM_HEADER)
    for point in spectrum.points:
        writer.writerow([point.rpy, point.ncr_total, point.median5, point.deviation])
    return out.getvalue()


def clusters_csv(
    clusters: Sequence[ReferenceCluster],
    ncr_by_cluster: Mapping[str, int] | None = None,
) -> str:
    """Cluster table rows, ordered by year (unknown last), NCR desc, id.

    ``ncr_by_cluster`` substitutes view-scoped counts (e.g. after a
    marker reduction) for the clusters' stored NCR.
    """
    def ncr(cluster: ReferenceCluster) -> int:
        if ncr_by_cluster is not None:
            return ncr_by_cluster.get(cluster.cluster_id, 0)
        return cluster.ncr

    ordered = sorted(
        clusters,
        key=lambda c: (
            c.effective_rpy is None,
            c.effective_rpy if c.effective_rpy is not None else 0,
            -ncr(c),
            c.cluster_id,
        ),
    )
    out = io.StringIO()
    writer = _writer(out)
    writer.writerow(CLUSTERS_HEADER)
    for cluster in ordered:
        canonical = cluster.canonical
        writer.writerow(
            [
                cluster.cluster_id,
                cluster.effective_rpy if cluster.effective_rpy is not None else "",
                ncr(cluster),
                canonical.author_norm,
                canonical.source_norm or "",
                canonical.volume if canonical.volume is not None else "",
                canonical.start_page or "",
                canonical.doi_norm or "",
                len(cluster.variants),
            ]
        )
    return out.getvalue()


def peaks_csv(peaks: Iterable[PeakReport]) -> str:
    out = io.StringIO()
    writer = _writer(out)
    writer.writerow(PEAKS_HEADER)
    for peak in peaks:
        tops = "|".join(f"{cid}={n}" for cid, n in peak.top_clusters)
        writer.writerow([peak.rpy, peak.ncr_total, peak.deviation, tops])
    return out.getvalue()


def export_spectrum_csv(spectrum: Spectrum, destination: str) -> None:
    _write_text(spectrum_csv(spectrum), destination)


def export_clusters_csv(
    clusters: Sequence[ReferenceCluster],
    destination: str,
    ncr_by_cluster: Mapping[str, int] | None = None,
) -> None:
    _write_text(clusters_csv(clusters, ncr_by_cluster), destination)


def export_peaks_csv(peaks: Iterable[PeakReport], destination: str) -> None:
    _write_text(peaks_csv(peaks), destination)


def _write_text(text: str, destination: str) -> None:
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)

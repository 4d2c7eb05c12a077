"""Analysis sessions: corpus + clustering config + override ledger + filters.

A session owns the single mutable state of an analysis.  Mutations
(merge, split, year correction, marker selection) are serialized under
a lock and bump a staleness counter; readers always see a fully
published snapshot because cluster tables are copied before mutation
and swapped in atomically.

Sessions persist as a JSON document carrying the corpus fingerprint,
the config, the filters, the marker selection, and the ledger - never
materialized clusters.  Loading replays the ledger over a fresh
clustering, which reproduces bit-identical derived outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from dataclasses import dataclass
from typing import Sequence

from .clustering import ClusterConfig, ClusterTable, ReferenceCluster, cluster_references
from .ingest import (
    DEFAULT_DOCUMENT_TYPES,
    CitingRecord,
    CorpusView,
    apply_rpy_cutoff,
    build_view,
    serialize_csv_corpus,
)
from .ledger import (
    LedgerEntry,
    entry_from_dict,
    merge_entry,
    split_entry,
    year_entry,
    replay as replay_ledger,
)
from .spectrum import (
    EraThresholdRule,
    PeakReport,
    Spectrum,
    apply_era_thresholds,
    attach_top_clusters,
    compute_spectrum,
    default_year_range,
    detect_peaks,
    rpys_co,
    top_references_for_year,
    view_ncr_by_cluster,
)

SESSION_FILE_VERSION = 1


class FingerprintMismatchError(ValueError):
    def __init__(self, expected: str, actual: str):
        super().__init__(
            f"session was saved for corpus {expected}, but the loaded corpus is {actual}"
        )
        self.expected = expected
        self.actual = actual


class SessionFormatError(ValueError):
    """Malformed session document; the message carries the location if known."""


@dataclass(frozen=True)
class Filters:
    cutoff_year: int | None = None
    era_rules: tuple[EraThresholdRule, ...] = ()
    year_range: tuple[int, int] | None = None
    document_types: tuple[str, ...] | None = DEFAULT_DOCUMENT_TYPES


@dataclass(frozen=True)
class MarkerSelection:
    cluster_ids: tuple[str, ...] = ()
    mode: str = "or"


def corpus_fingerprint(records: Sequence[CitingRecord]) -> str:
    """Content hash over the canonical CSV serialization of the corpus."""
    return hashlib.sha256(serialize_csv_corpus(records).encode("utf-8")).hexdigest()


class AnalysisSession:
    """Single-writer analysis state over one corpus."""

    def __init__(
        self,
        records: Sequence[CitingRecord],
        cluster_config: ClusterConfig = ClusterConfig(),
        filters: Filters = Filters(),
        markers: MarkerSelection = MarkerSelection(),
        ledger: Sequence[LedgerEntry] = (),
    ):
        self.records: tuple[CitingRecord, ...] = tuple(records)
        self.fingerprint = corpus_fingerprint(self.records)
        self.session_id = "s" + self.fingerprint[:12]
        self.cluster_config = cluster_config
        self.filters = filters
        self.markers = markers
        self.ledger: list[LedgerEntry] = list(ledger)
        self.counter = 0
        self._write_lock = threading.Lock()
        self._base_view: CorpusView | None = None
        self._table: ClusterTable | None = None

    # -- derived state -------------------------------------------------

    def base_view(self) -> CorpusView:
        """The corpus view after document-type filtering and RPY cutoff."""
        view = self._base_view
        if view is None:
            view = build_view(self.records, document_types=self.filters.document_types)
            if self.filters.cutoff_year is not None:
                view = apply_rpy_cutoff(view, self.filters.cutoff_year)
            self._base_view = view
        return view

    def table(self) -> ClusterTable:
        """The live cluster table: algorithmic clustering plus the full ledger."""
        table = self._table
        if table is None:
            base = cluster_references(self.base_view().instances, self.cluster_config)
            table = replay_ledger(base, self.ledger)
            self._table = table
        return table

    def active_view(self) -> CorpusView:
        """The base view, reduced to the markers' citers when markers are set."""
        view = self.base_view()
        if self.markers.cluster_ids:
            view = rpys_co(view, self.table(), self.markers.cluster_ids, mode=self.markers.mode)
        return view

    def effective_clusters(self) -> list[ReferenceCluster]:
        """Clusters feeding the spectrum: era-thresholded unless in marker mode."""
        table = self.table()
        if self.markers.cluster_ids or not self.filters.era_rules:
            return table.ordered()
        return apply_era_thresholds(table, self.filters.era_rules)

    # -- reads ----------------------------------------------------------

    def spectrum(self, year_range: tuple[int, int] | None = None) -> Spectrum:
        view = self.active_view()
        clusters = self.effective_clusters()
        chosen = year_range or self.filters.year_range or default_year_range(view, clusters)
        if chosen is None:
            return Spectrum.empty()
        return compute_spectrum(view, clusters, chosen)

    def peaks(
        self,
        min_deviation: int = 1,
        max_peaks: int | None = None,
        top_k: int = 10,
        year_range: tuple[int, int] | None = None,
    ) -> list[PeakReport]:
        found = detect_peaks(self.spectrum(year_range), min_deviation=min_deviation, max_peaks=max_peaks)
        return attach_top_clusters(found, self.active_view(), self.effective_clusters(), top_k)

    def top_references(self, rpy: int, k: int) -> list[tuple[ReferenceCluster, int]]:
        return top_references_for_year(self.active_view(), self.effective_clusters(), rpy, k)

    def cluster_ncr(self) -> dict[str, int]:
        return view_ncr_by_cluster(self.active_view(), self.effective_clusters())

    # -- mutations -------------------------------------------------------

    def _mutate_table(self) -> ClusterTable:
        return self.table().copy()

    def _publish(self, table: ClusterTable, entry: LedgerEntry | None) -> None:
        self._table = table
        if entry is not None:
            self.ledger.append(entry)
        self.counter += 1

    def merge_clusters(self, cluster_ids: Sequence[str], note: str = "") -> str:
        """Merge clusters, record the operation, return the surviving id."""
        with self._write_lock:
            table = self._mutate_table()
            resolved = sorted({table.resolve(cid) for cid in cluster_ids})
            if len(resolved) == 1:
                return resolved[0]  # merging a cluster with itself: no-op
            new_id = table.merge(resolved)
            self._publish(table, merge_entry(resolved, note=note))
            return new_id

    def split_cluster(
        self, cluster_id: str, partition: Sequence[Sequence[str]], note: str = ""
    ) -> list[str]:
        with self._write_lock:
            table = self._mutate_table()
            live = table.resolve(cluster_id)
            new_ids = table.split(live, partition)
            self._publish(table, split_entry(live, partition, note=note))
            return new_ids

    def correct_year(self, cluster_id: str, corrected_year: int, note: str = "") -> str:
        with self._write_lock:
            table = self._mutate_table()
            live = table.correct_year(cluster_id, corrected_year)
            self._publish(table, year_entry(live, corrected_year, note=note))
            return live

    def set_markers(self, cluster_ids: Sequence[str], mode: str = "or") -> MarkerSelection:
        if mode not in ("or", "and"):
            raise ValueError(f"unknown marker mode: {mode!r}")
        with self._write_lock:
            table = self.table()
            resolved = []
            for cid in cluster_ids:
                live = table.resolve(cid)
                if live not in resolved:
                    resolved.append(live)
            if not resolved:
                raise ValueError("marker selection must name at least one cluster")
            self.markers = MarkerSelection(cluster_ids=tuple(resolved), mode=mode)
            self.counter += 1
            return self.markers

    def clear_markers(self) -> None:
        with self._write_lock:
            self.markers = MarkerSelection()
            self.counter += 1

    # -- persistence -------------------------------------------------------

    def to_document(self) -> dict:
        return {
            "version": SESSION_FILE_VERSION,
            "session_id": self.session_id,
            "corpus_fingerprint": self.fingerprint,
            "config": {
                "threshold": self.cluster_config.threshold,
                "year_tolerance": self.cluster_config.year_tolerance,
                "require_vol_page_match": self.cluster_config.require_vol_page_match,
            },
            "filters": {
                "cutoff_year": self.filters.cutoff_year,
                "era_rules": [
                    [r.year_range[0], r.year_range[1], r.min_ncr] for r in self.filters.era_rules
                ],
                "year_range": list(self.filters.year_range) if self.filters.year_range else None,
                "document_types": (
                    list(self.filters.document_types)
                    if self.filters.document_types is not None
                    else None
                ),
            },
            "markers": {"cluster_ids": list(self.markers.cluster_ids), "mode": self.markers.mode},
            "ledger": [
                {"op": e.op, "args": e.args, "timestamp": e.timestamp, "note": e.note}
                for e in self.ledger
            ],
        }

    def save(self, destination: str) -> None:
        """Atomic write: the document lands complete or not at all."""
        text = json.dumps(self.to_document(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        directory = os.path.dirname(os.path.abspath(destination))
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".session-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            os.replace(tmp_path, destination)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise


def save_session(session: AnalysisSession, destination: str) -> None:
    session.save(destination)


def load_session(path: str, records: Sequence[CitingRecord]) -> AnalysisSession:
    """Restore a session against its corpus; the fingerprints must match."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SessionFormatError(
                f"{path}: invalid session document at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    return session_from_document(doc, records, source=path)


def session_from_document(
    doc: dict, records: Sequence[CitingRecord], source: str = "<document>"
) -> AnalysisSession:
    if not isinstance(doc, dict):
        raise SessionFormatError(f"{source}: session document must be a JSON object")
    version = doc.get("version")
    if version != SESSION_FILE_VERSION:
        raise SessionFormatError(f"{source}: unsupported session version: {version!r}")

    actual = corpus_fingerprint(tuple(records))
    expected = doc.get("corpus_fingerprint")
    if expected != actual:
        raise FingerprintMismatchError(str(expected), actual)

    try:
        config_doc = doc.get("config", {})
        config = ClusterConfig(
            threshold=float(config_doc.get("threshold", 0.80)),
            year_tolerance=int(config_doc.get("year_tolerance", 0)),
            require_vol_page_match=bool(config_doc.get("require_vol_page_match", True)),
        )
        filters_doc = doc.get("filters", {})
        raw_types = filters_doc.get("document_types", list(DEFAULT_DOCUMENT_TYPES))
        filters = Filters(
            cutoff_year=filters_doc.get("cutoff_year"),
            era_rules=tuple(
                EraThresholdRule(year_range=(int(lo), int(hi)), min_ncr=int(min_ncr))
                for lo, hi, min_ncr in filters_doc.get("era_rules", [])
            ),
            year_range=(
                tuple(int(y) for y in filters_doc["year_range"])
                if filters_doc.get("year_range")
                else None
            ),
            document_types=tuple(raw_types) if raw_types is not None else None,
        )
        markers_doc = doc.get("markers", {})
        markers = MarkerSelection(
            cluster_ids=tuple(markers_doc.get("cluster_ids", [])),
            mode=markers_doc.get("mode", "or"),
        )
        entries = [entry_from_dict(e) for e in doc.get("ledger", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionFormatError(f"{source}: malformed session document: {exc}") from exc

    return AnalysisSession(
        records=records,
        cluster_config=config,
        filters=filters,
        markers=markers,
        ledger=entries,
    )

"""refspect: cited-reference publication year spectroscopy toolkit."""

from .clustering import (
    ClusterConfig,
    ClusterTable,
    InvalidPartitionError,
    ReferenceCluster,
    UnknownClusterError,
    cluster_references,
)
from .ingest import (
    CitingRecord,
    CorpusStats,
    CorpusView,
    Diagnostic,
    RefInstance,
    apply_rpy_cutoff,
    build_view,
    corpus_stats,
    load_corpus,
    parse_csv_corpus,
    parse_field_tagged_export,
    serialize_csv_corpus,
)
from .ledger import LedgerEntry, merge_entry, split_entry, year_entry
from .references import ParsedReference, parse_cited_reference, similarity
from .session import (
    AnalysisSession,
    FingerprintMismatchError,
    Filters,
    MarkerSelection,
    SessionFormatError,
    corpus_fingerprint,
    load_session,
    save_session,
)
from .spectrum import (
    EraThresholdRule,
    PeakReport,
    PipelineConfig,
    PipelineResult,
    Spectrum,
    SpectrumPoint,
    apply_era_thresholds,
    compute_spectrum,
    detect_peaks,
    rpys_co,
    run_standard_pipeline,
    top_references_for_year,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisSession",
    "CitingRecord",
    "ClusterConfig",
    "ClusterTable",
    "CorpusStats",
    "CorpusView",
    "Diagnostic",
    "EraThresholdRule",
    "FingerprintMismatchError",
    "Filters",
    "InvalidPartitionError",
    "LedgerEntry",
    "MarkerSelection",
    "ParsedReference",
    "PeakReport",
    "PipelineConfig",
    "PipelineResult",
    "RefInstance",
    "ReferenceCluster",
    "SessionFormatError",
    "Spectrum",
    "SpectrumPoint",
    "UnknownClusterError",
    "apply_era_thresholds",
    "apply_rpy_cutoff",
    "build_view",
    "cluster_references",
    "compute_spectrum",
    "corpus_fingerprint",
    "corpus_stats",
    "detect_peaks",
    "load_corpus",
    "load_session",
    "merge_entry",
    "parse_cited_reference",
    "parse_csv_corpus",
    "parse_field_tagged_export",
    "rpys_co",
    "run_standard_pipeline",
    "save_session",
    "serialize_csv_corpus",
    "similarity",
    "split_entry",
    "top_references_for_year",
    "year_entry",
]

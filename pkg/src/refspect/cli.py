"""Command-line surface for corpus ingest, spectra, peaks, co-citation
filtering, cluster curation, sessions, reports, and the HTTP service.

Data outputs go to stdout (or --out / --out-dir) and are byte-identical
across runs for identical inputs; progress and warnings go to stderr.
Exit codes: 0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import traceback
from pathlib import Path

from .clustering import ClusterConfig, InvalidPartitionError, UnknownClusterError
from .exports import (
    clusters_csv,
    export_clusters_csv,
    export_peaks_csv,
    export_spectrum_csv,
    peaks_csv,
    spectrum_csv,
)
from .ingest import (
    DEFAULT_DOCUMENT_TYPES,
    CitingRecord,
    Diagnostic,
    corpus_stats,
    load_corpus,
    serialize_csv_corpus,
)
from .references import normalize_author, normalize_source
from .session import (
    AnalysisSession,
    FingerprintMismatchError,
    Filters,
    MarkerSelection,
    SessionFormatError,
    load_session,
)
from .spectrum import EraThresholdRule, PipelineConfig, run_standard_pipeline

CACHE_DIR_ENV = "REFSPECT_CACHE_DIR"

# Engine operation -> subcommand that reaches it.  The test suite checks
# this map against the public operation list, so keep it complete.
OPERATION_COMMANDS = {
    "parse_field_tagged_export": "ingest",
    "parse_csv_corpus": "ingest",
    "apply_rpy_cutoff": "spectrum",
    "corpus_stats": "ingest",
    "parse_cited_reference": "spectrum",
    "similarity": "spectrum",
    "cluster_references": "spectrum",
    "merge_clusters": "merge",
    "split_cluster": "split",
    "correct_year": "correct-year",
    "compute_spectrum": "spectrum",
    "apply_era_thresholds": "spectrum",
    "detect_peaks": "peaks",
    "top_references_for_year": "top",
    "rpys_co": "co",
    "run_standard_pipeline": "report",
    "save_session": "session",
    "load_session": "session",
    "export_spectrum_csv": "spectrum",
    "export_clusters_csv": "clusters",
    "serve": "serve",
}


class UserError(Exception):
    """Invalid input or flags; reported without a traceback, exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise UserError(message)


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo_text, hi_text = text.split(":", 1)
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        raise UserError(f"expected a year range like 1686:1970, got {text!r}")
    if lo > hi:
        raise UserError(f"inverted year range: {text}")
    return lo, hi


def _parse_era_rule(text: str) -> EraThresholdRule:
    try:
        range_text, min_text = text.split("=", 1)
        lo, hi = _parse_range(range_text)
        min_ncr = int(min_text)
    except (ValueError, UserError):
        raise UserError(f"expected an era rule like 1000:1900=10, got {text!r}")
    return EraThresholdRule(year_range=(lo, hi), min_ncr=min_ncr)


def _parse_doc_types(text: str) -> tuple[str, ...] | None:
    if text.strip().lower() == "all":
        return None
    types = tuple(t.strip() for t in text.split(",") if t.strip())
    if not types:
        raise UserError("empty document type list")
    return types


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", help="corpus file (field-tagged export or reference CSV)")
    parser.add_argument("--format", choices=["auto", "wos", "csv"], default="auto")


def _add_filter_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cutoff", type=int, default=None,
                        help="keep references published strictly before this year")
    parser.add_argument("--range", dest="year_range", default=None,
                        help="spectrum year range, e.g. 1686:1970")
    parser.add_argument("--min-ncr", dest="era_rules", action="append", default=None,
                        metavar="LO:HI=N", help="era threshold, repeatable, e.g. 1000:1900=10")
    parser.add_argument("--doc-types", default=None,
                        help="comma list of document types to keep, or 'all' "
                             f"(default {','.join(DEFAULT_DOCUMENT_TYPES)}; unknown types always pass)")
    parser.add_argument("--threshold", type=float, default=None, help="clustering similarity threshold")
    parser.add_argument("--year-tolerance", type=int, default=None,
                        help="max year gap for clustering candidates")
    parser.add_argument("--no-vol-page-match", action="store_true",
                        help="drop the volume/page agreement requirement for clustering")
    parser.add_argument("--session", default=None, help="session file carrying ledger and filters")


def _add_marker_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--marker", action="append", default=[],
                        metavar="AUTHOR/RPY/SOURCE-PREFIX",
                        help="marker reference matcher, repeatable")
    parser.add_argument("--marker-id", action="append", default=[], metavar="CLUSTER_ID",
                        help="marker cluster id, repeatable")
    parser.add_argument("--mode", choices=["or", "and"], default="or",
                        help="retain records citing any marker (or) or all markers (and)")


def build_parser() -> _Parser:
    parser = _Parser(prog="refspect",
                     description="Cited-reference publication year spectroscopy toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[], help="parse a corpus, report stats, fill the cache")
    _add_corpus_args(p)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--doc-types", default=None)
    p.add_argument("--no-cache", action="store_true", help="skip writing the corpus cache")

    for name, help_text in [
        ("spectrum", "write the per-year spectrum CSV"),
        ("clusters", "write the cluster table CSV"),
        ("peaks", "write the detected peak table CSV"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_corpus_args(p)
        _add_filter_args(p)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if name == "spectrum":
            p.add_argument("--plot", default=None, help="also render the spectrogram to this file")
        if name == "peaks":
            p.add_argument("--min-deviation", type=int, default=1)
            p.add_argument("--max-peaks", type=int, default=None)
            p.add_argument("--top-k", type=int, default=3)

    p = sub.add_parser("co", help="reduce to the records citing the marker, then write the spectrum")
    _add_corpus_args(p)
    _add_filter_args(p)
    _add_marker_args(p)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None)

    p = sub.add_parser("top", help="most-cited references for one year")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--out", default=None)

    p = sub.add_parser("merge", help="merge clusters (appends to the session ledger)")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--ids", required=True, help="comma list of cluster ids")
    p.add_argument("--note", default="")

    p = sub.add_parser("split", help="split a cluster (appends to the session ledger)")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--id", dest="cluster_id", required=True)
    p.add_argument("--partition", required=True,
                   help='JSON list of variant groups, e.g. [["raw a"],["raw b"]]')
    p.add_argument("--note", default="")

    p = sub.add_parser("correct-year", help="set a cluster's effective year (ledger op)")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--id", dest="cluster_id", required=True)
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--note", default="")

    p = sub.add_parser("session", help="save or load an analysis session")
    p.add_argument("action", choices=["save", "load"])
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--marker-id", action="append", default=[], metavar="CLUSTER_ID")
    p.add_argument("--mode", choices=["or", "and"], default="or")

    p = sub.add_parser("report", help="write spectrum/cluster/peak CSVs and figures to a directory")
    _add_corpus_args(p)
    _add_filter_args(p)
    _add_marker_args(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--zoom", default=None, help="render an extra figure for this year range")
    p.add_argument("--min-deviation", type=int, default=1)
    p.add_argument("--max-peaks", type=int, default=None)
    p.add_argument("--top-k", type=int, default=3)

    p = sub.add_parser("serve", help="start the HTTP analysis service")
    _add_corpus_args(p)
    _add_filter_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8237)

    return parser


def _report_diagnostics(diagnostics: list[Diagnostic], limit: int = 5) -> None:
    if not diagnostics:
        return
    print(f"{len(diagnostics)} ingest diagnostic(s):", file=sys.stderr)
    for diag in diagnostics[:limit]:
        detail = f" ({diag.detail})" if diag.detail else ""
        print(f"  line {diag.line_number}, byte {diag.byte_offset}: {diag.reason}{detail}",
              file=sys.stderr)
    if len(diagnostics) > limit:
        print(f"  ... and {len(diagnostics) - limit} more", file=sys.stderr)


def _load_records(args) -> list[CitingRecord]:
    try:
        records, diagnostics = load_corpus(args.input, fmt=args.format)
    except OSError as exc:
        raise UserError(f"cannot read corpus: {exc}")
    _report_diagnostics(diagnostics)
    return records


def _build_session(args, records: list[CitingRecord]) -> AnalysisSession:
    """Session from --session (when the file exists) with flag overrides on top."""
    session_path = getattr(args, "session", None)
    base: AnalysisSession | None = None
    if session_path and os.path.exists(session_path):
        base = load_session(session_path, records)

    config = base.cluster_config if base else ClusterConfig()
    if getattr(args, "threshold", None) is not None:
        config = ClusterConfig(args.threshold, config.year_tolerance, config.require_vol_page_match)
    if getattr(args, "year_tolerance", None) is not None:
        config = ClusterConfig(config.threshold, args.year_tolerance, config.require_vol_page_match)
    if getattr(args, "no_vol_page_match", False):
        config = ClusterConfig(config.threshold, config.year_tolerance, False)

    filters = base.filters if base else Filters()
    cutoff = args.cutoff if getattr(args, "cutoff", None) is not None else filters.cutoff_year
    year_range = (
        _parse_range(args.year_range)
        if getattr(args, "year_range", None)
        else filters.year_range
    )
    era_rules = (
        tuple(_parse_era_rule(rule) for rule in args.era_rules)
        if getattr(args, "era_rules", None)
        else filters.era_rules
    )
    doc_types = (
        _parse_doc_types(args.doc_types)
        if getattr(args, "doc_types", None)
        else filters.document_types
    )
    filters = Filters(
        cutoff_year=cutoff, era_rules=era_rules, year_range=year_range, document_types=doc_types,
    )

    return AnalysisSession(
        records,
        cluster_config=config,
        filters=filters,
        markers=base.markers if base else MarkerSelection(),
        ledger=base.ledger if base else (),
    )


def resolve_marker_spec(session: AnalysisSession, spec: str) -> str:
    """Resolve AUTHOR/RPY/SOURCE-PREFIX to exactly one cluster id.

    Ambiguous matchers are rejected with the candidate list rather than
    guessed at.
    """
    parts = spec.split("/", 2)
    if len(parts) != 3:
        raise UserError(f"marker matcher must be AUTHOR/RPY/SOURCE-PREFIX, got {spec!r}")
    author = normalize_author(parts[0])
    try:
        rpy = int(parts[1])
    except ValueError:
        raise UserError(f"marker RPY must be an integer, got {parts[1]!r}")
    source_prefix = normalize_source(parts[2])

    matches = []
    for cluster in session.table().ordered():
        if cluster.effective_rpy != rpy:
            continue
        for variant in cluster.variants:
            author_ok = variant.author_norm == author or variant.author_norm.startswith(author + " ")
            source_ok = not source_prefix or (variant.source_norm or "").startswith(source_prefix)
            if author_ok and source_ok:
                matches.append(cluster)
                break
    if not matches:
        raise UserError(f"no cluster matches marker {spec!r}")
    if len(matches) > 1:
        listing = "\n".join(
            f"  {c.cluster_id}: {c.canonical.raw_text}" for c in matches[:10]
        )
        raise UserError(f"marker {spec!r} is ambiguous; candidates:\n{listing}")
    return matches[0].cluster_id


def _resolve_markers(args, session: AnalysisSession) -> list[str]:
    marker_ids = [session.table().resolve(mid) for mid in getattr(args, "marker_id", [])]
    for spec in getattr(args, "marker", []):
        marker_ids.append(resolve_marker_spec(session, spec))
    ordered: list[str] = []
    for mid in marker_ids:
        if mid not in ordered:
            ordered.append(mid)
    return ordered


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cache_dir() -> Path:
    configured = os.environ.get(CACHE_DIR_ENV)
    if configured:
        return Path(configured)
    return Path.home() / ".cache" / "refspect"


# -- command implementations -------------------------------------------------


def _cmd_ingest(args) -> int:
    records = _load_records(args)
    doc_types = _parse_doc_types(args.doc_types) if args.doc_types else DEFAULT_DOCUMENT_TYPES
    stats = corpus_stats(records, cutoff_year=args.cutoff, document_types=doc_types)
    from .session import corpus_fingerprint

    fingerprint = corpus_fingerprint(records)
    lines = [
        f"records: {stats.num_citing_records}",
        f"reference_instances: {stats.num_reference_instances}",
        f"reference_instances_below_cutoff: {stats.num_reference_instances_below_cutoff}",
        f"unparseable_rpy: {stats.num_unparseable_rpy}",
        f"nonstandard_type_records: {stats.num_nonstandard_type_records}",
        f"min_rpy: {stats.min_rpy if stats.min_rpy is not None else '-'}",
        f"max_rpy: {stats.max_rpy if stats.max_rpy is not None else '-'}",
        f"fingerprint: {fingerprint}",
    ]
    if not args.no_cache:
        cache_dir = _cache_dir()
        cache_dir.mkdir(parents=True, exist_ok=True)
        cache_path = cache_dir / f"{fingerprint}.csv"
        if not cache_path.exists():
            cache_path.write_text(serialize_csv_corpus(records), encoding="utf-8")
        lines.append(f"cache: {cache_path}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_spectrum(args) -> int:
    session = _build_session(args, _load_records(args))
    spectrum = session.spectrum()
    _emit(spectrum_csv(spectrum), args.out)
    if args.plot:
        from .plotting import render_spectrum

        render_spectrum(spectrum, args.plot)
    return 0


def _cmd_clusters(args) -> int:
    session = _build_session(args, _load_records(args))
    _emit(clusters_csv(session.effective_clusters(), session.cluster_ncr()), args.out)
    return 0


def _cmd_peaks(args) -> int:
    session = _build_session(args, _load_records(args))
    peaks = session.peaks(min_deviation=args.min_deviation, max_peaks=args.max_peaks,
                          top_k=args.top_k)
    _emit(peaks_csv(peaks), args.out)
    return 0


def _cmd_co(args) -> int:
    session = _build_session(args, _load_records(args))
    markers = _resolve_markers(args, session)
    if not markers:
        raise UserError("co requires at least one --marker or --marker-id")
    if session.filters.era_rules:
        print("note: era thresholds are not applied in marker mode", file=sys.stderr)
    session.set_markers(markers, mode=args.mode)
    view = session.active_view()
    for warning in view.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    spectrum = session.spectrum()
    _emit(spectrum_csv(spectrum), args.out)
    if args.plot:
        from .plotting import render_spectrum

        render_spectrum(spectrum, args.plot)
    return 0


def _cmd_top(args) -> int:
    session = _build_session(args, _load_records(args))
    if args.k < 1:
        raise UserError("-k must be >= 1")
    ranked = session.top_references(args.year, args.k)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["RANK", "CLUSTER_ID", "NCR", "RPY", "AUTHOR", "SOURCE", "N_VARIANTS"])
    for rank, (cluster, ncr) in enumerate(ranked, start=1):
        writer.writerow([
            rank, cluster.cluster_id, ncr,
            cluster.effective_rpy if cluster.effective_rpy is not None else "",
            cluster.canonical.author_norm, cluster.canonical.source_norm or "",
            len(cluster.variants),
        ])
    _emit(out.getvalue(), args.out)
    return 0


def _require_session_path(args) -> str:
    if not getattr(args, "session", None):
        raise UserError("this command needs --session to record the operation")
    return args.session


def _cmd_merge(args) -> int:
    path = _require_session_path(args)
    session = _build_session(args, _load_records(args))
    ids = [part.strip() for part in args.ids.split(",") if part.strip()]
    if len(ids) < 2:
        raise UserError("--ids needs at least two cluster ids")
    new_id = session.merge_clusters(ids, note=args.note)
    session.save(path)
    sys.stdout.write(new_id + "\n")
    return 0


def _cmd_split(args) -> int:
    path = _require_session_path(args)
    session = _build_session(args, _load_records(args))
    try:
        partition = json.loads(args.partition)
    except json.JSONDecodeError as exc:
        raise UserError(f"--partition is not valid JSON: {exc}")
    if (not isinstance(partition, list)
            or not all(isinstance(block, list) and all(isinstance(r, str) for r in block)
                       for block in partition)):
        raise UserError("--partition must be a JSON list of lists of variant strings")
    new_ids = session.split_cluster(args.cluster_id, partition, note=args.note)
    session.save(path)
    sys.stdout.write("\n".join(new_ids) + "\n")
    return 0


def _cmd_correct_year(args) -> int:
    path = _require_session_path(args)
    session = _build_session(args, _load_records(args))
    cluster_id = session.correct_year(args.cluster_id, args.year, note=args.note)
    session.save(path)
    sys.stdout.write(cluster_id + "\n")
    return 0


def _cmd_session(args) -> int:
    path = _require_session_path(args)
    records = _load_records(args)
    if args.action == "save":
        session = _build_session(args, records)
        if args.marker_id:
            session.set_markers([session.table().resolve(m) for m in args.marker_id],
                                mode=args.mode)
        session.save(path)
        sys.stdout.write(f"saved: {path}\n")
        return 0
    session = load_session(path, records)
    table = session.table()
    lines = [
        f"session_id: {session.session_id}",
        f"fingerprint: {session.fingerprint}",
        f"ledger_entries: {len(session.ledger)}",
        f"clusters: {len(table)}",
        f"markers: {','.join(session.markers.cluster_ids) or '-'}",
        f"cutoff: {session.filters.cutoff_year if session.filters.cutoff_year is not None else '-'}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_report(args) -> int:
    records = _load_records(args)
    session = _build_session(args, records)
    markers = tuple(_resolve_markers(args, session))

    config = PipelineConfig(
        cutoff_year=session.filters.cutoff_year,
        cluster_config=session.cluster_config,
        era_rules=session.filters.era_rules,
        year_range=session.filters.year_range,
        document_types=session.filters.document_types,
        overrides=tuple(session.ledger),
        markers=markers or session.markers.cluster_ids,
        marker_mode=args.mode if markers else session.markers.mode,
        min_deviation=args.min_deviation,
        max_peaks=args.max_peaks,
        top_k=args.top_k,
    )
    result = run_standard_pipeline(records, config)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .plotting import render_spectrum
    from .spectrum import compute_spectrum, view_ncr_by_cluster

    export_spectrum_csv(result.spectrum, str(out_dir / "spectrum.csv"))
    export_clusters_csv(
        list(result.clusters),
        str(out_dir / "clusters.csv"),
        ncr_by_cluster=view_ncr_by_cluster(result.view, result.clusters),
    )
    export_peaks_csv(result.peaks, str(out_dir / "peaks.csv"))
    render_spectrum(result.spectrum, str(out_dir / "spectrum.png"), peaks=list(result.peaks))
    written = ["spectrum.csv", "clusters.csv", "peaks.csv", "spectrum.png"]

    if args.zoom:
        zoom_range = _parse_range(args.zoom)
        zoom = compute_spectrum(result.view, result.clusters, zoom_range)
        render_spectrum(zoom, str(out_dir / "spectrum_zoom.png"))
        written.append("spectrum_zoom.png")

    counts = result.counts
    print(
        f"records={counts.num_records} instances={counts.num_reference_instances} "
        f"after_cutoff={counts.num_instances_after_cutoff} clusters={counts.num_clusters} "
        f"after_thresholds={counts.num_clusters_after_thresholds}",
        file=sys.stderr,
    )
    sys.stdout.write("\n".join(str(out_dir / name) for name in written) + "\n")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    session = _build_session(args, _load_records(args))
    app = create_app(session, session_path=getattr(args, "session", None))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "spectrum": _cmd_spectrum,
    "clusters": _cmd_clusters,
    "peaks": _cmd_peaks,
    "co": _cmd_co,
    "top": _cmd_top,
    "merge": _cmd_merge,
    "split": _cmd_split,
    "correct-year": _cmd_correct_year,
    "session": _cmd_session,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UnknownClusterError, InvalidPartitionError, FingerprintMismatchError,
            SessionFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Corpus ingestion: field-tagged and CSV bibliographic exports.

Both parsers are single-pass, keep at most one record in flight, and
report recoverable problems as Diagnostics instead of raising.  Parsed
corpora are immutable and safe to share across threads.

The exact grammars, including every diagnostic reason code, are
documented in FORMATS.md at the repository root.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import BinaryIO, Iterable, NamedTuple, Sequence

from .references import MAX_YEAR, MIN_YEAR, ParsedReference, parse_cited_reference

CSV_HEADER = ("citing_id", "citing_year", "cited_raw")
DEFAULT_DOCUMENT_TYPES = ("article", "review")

_RECOGNIZED_TAGS = {"PT", "PY", "UT", "CR", "ER", "EF"}


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One recoverable ingest problem, addressable for triage."""

    byte_offset: int
    line_number: int
    reason: str
    detail: str = ""


@dataclass(frozen=True, slots=True)
class CitingRecord:
    """One citing publication with its raw cited-reference strings."""

    record_id: str
    publication_year: int
    document_type: str
    cited_raw: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class CorpusStats:
    num_citing_records: int
    num_reference_instances: int
    num_reference_instances_below_cutoff: int
    min_rpy: int | None
    max_rpy: int | None
    num_unparseable_rpy: int = 0
    num_nonstandard_type_records: int = 0


class RefInstance(NamedTuple):
    """One (citing record, cited reference) incidence."""

    record_id: str
    ref: ParsedReference


@dataclass(frozen=True, slots=True)
class CorpusView:
    """A queryable slice of a corpus: records plus reference instances.

    Citing records are never removed by reference-level filters such as
    the RPY cutoff; only ``instances`` shrinks.  ``dropped_unparseable_rpy``
    accumulates across successive cutoffs so that composed filters
    compare equal to a single equivalent filter.
    """

    records: tuple[CitingRecord, ...]
    instances: tuple[RefInstance, ...]
    dropped_unparseable_rpy: int = 0
    warnings: tuple[str, ...] = ()


def _is_tag_line(line: str) -> bool:
    if len(line) < 2:
        return False
    tag = line[:2]
    if not (tag[0].isascii() and tag[0].isupper() and (tag[1].isupper() or tag[1].isdigit())):
        return False
    return len(line) == 2 or line[2] == " "


class _OpenRecord:
    __slots__ = ("start_line", "start_offset", "record_id", "py_raw", "doc_type", "crs")

    def __init__(self, start_line: int, start_offset: int):
        self.start_line = start_line
        self.start_offset = start_offset
        self.record_id: str | None = None
        self.py_raw: str | None = None
        self.doc_type: str | None = None
        self.crs: list[tuple[str, int, int]] = []  # (text, line, offset)


def parse_field_tagged_export(stream: BinaryIO) -> tuple[list[CitingRecord], list[Diagnostic]]:
    """Parse a field-tagged export into citing records.

    Recognized tags: PT, PY, UT, CR, ER; EF ends the file.  Unrecognized
    tags are skipped.  Lines starting with three spaces continue the
    value of the preceding tag line (joined with a single space).
    Malformed records are skipped and reported as Diagnostics.
    """
    records: list[CitingRecord] = []
    diagnostics: list[Diagnostic] = []
    seen_ids: set[str] = set()

    open_rec: _OpenRecord | None = None
    current_tag: str | None = None
    offset = 0
    line_no = 0
    saw_end_of_file = False

    def finalize(rec: _OpenRecord) -> None:
        if rec.record_id is None or not rec.record_id.strip():
            diagnostics.append(
                Diagnostic(rec.start_offset, rec.start_line, "missing_record_id")
            )
            return
        record_id = rec.record_id.strip()
        if record_id in seen_ids:
            diagnostics.append(
                Diagnostic(rec.start_offset, rec.start_line, "duplicate_record_id", record_id)
            )
            return
        if rec.py_raw is None:
            diagnostics.append(
                Diagnostic(rec.start_offset, rec.start_line, "missing_publication_year")
            )
            return
        py_text = rec.py_raw.strip()
        if not (py_text.isdigit() and len(py_text) == 4 and MIN_YEAR <= int(py_text) <= MAX_YEAR):
            diagnostics.append(
                Diagnostic(rec.start_offset, rec.start_line, "invalid_publication_year", py_text)
            )
            return
        cited: list[str] = []
        for text, cr_line, cr_offset in rec.crs:
            trimmed = text.strip()
            if trimmed:
                cited.append(trimmed)
            else:
                diagnostics.append(Diagnostic(cr_offset, cr_line, "empty_reference"))
        seen_ids.add(record_id)
        records.append(
            CitingRecord(
                record_id=record_id,
                publication_year=int(py_text),
                document_type=(rec.doc_type or "").strip(),
                cited_raw=tuple(cited),
            )
        )

    for raw_line in stream:
        line_start = offset
        offset += len(raw_line)
        line_no += 1
        line = raw_line.decode("utf-8", errors="replace").rstrip("\r\n")

        if not line.strip():
            current_tag = None
            continue

        if line.startswith("   "):
            continuation = line[3:]
            if current_tag is None:
                diagnostics.append(Diagnostic(line_start, line_no, "orphan_continuation"))
                continue
            if open_rec is None:
                continue  # continuation of a non-record tag (file header etc.)
            if current_tag == "CR" and open_rec.crs:
                text, cr_line, cr_offset = open_rec.crs[-1]
                open_rec.crs[-1] = (text + " " + continuation, cr_line, cr_offset)
            elif current_tag == "PY" and open_rec.py_raw is not None:
                open_rec.py_raw += " " + continuation
            elif current_tag == "UT" and open_rec.record_id is not None:
                open_rec.record_id += " " + continuation
            elif current_tag == "PT" and open_rec.doc_type is not None:
                open_rec.doc_type += " " + continuation
            # continuations of unrecognized tags are consumed silently
            continue

        if not _is_tag_line(line):
            diagnostics.append(Diagnostic(line_start, line_no, "malformed_line", line[:40]))
            current_tag = None
            continue

        tag, value = line[:2], line[3:] if len(line) > 3 else ""

        if tag == "EF":
            saw_end_of_file = True
            if open_rec is not None:
                diagnostics.append(
                    Diagnostic(open_rec.start_offset, open_rec.start_line, "truncated_record")
                )
                open_rec = None
            break

        if tag == "ER":
            if open_rec is None:
                diagnostics.append(Diagnostic(line_start, line_no, "stray_record_end"))
            else:
                finalize(open_rec)
                open_rec = None
            current_tag = None
            continue

        current_tag = tag
        if tag not in _RECOGNIZED_TAGS:
            continue  # unrecognized tags never open a record
        if open_rec is None:
            open_rec = _OpenRecord(line_no, line_start)

        if tag == "PT":
            if open_rec.doc_type is None:
                open_rec.doc_type = value
        elif tag == "PY":
            if open_rec.py_raw is None:
                open_rec.py_raw = value
        elif tag == "UT":
            if open_rec.record_id is None:
                open_rec.record_id = value
        elif tag == "CR":
            open_rec.crs.append((value, line_no, line_start))
        # unrecognized tags: value discarded, continuations consumed

    if open_rec is not None and not saw_end_of_file:
        diagnostics.append(
            Diagnostic(open_rec.start_offset, open_rec.start_line, "truncated_record")
        )

    return records, diagnostics


def parse_csv_corpus(stream: BinaryIO) -> tuple[list[CitingRecord], list[Diagnostic]]:
    """Parse the 3-column reference CSV, grouping rows by citing_id.

    Row order is preserved within each record; records appear in
    first-row order.  Rows with an unusable citing_year are skipped with
    a Diagnostic.  An empty cited_raw cell declares the record without
    contributing a reference.
    """
    diagnostics: list[Diagnostic] = []
    line_offsets: list[int] = [0]  # 1-based line number -> byte offset of line start

    def decoded_lines() -> Iterable[str]:
        offset = 0
        for raw in stream:
            line_offsets.append(offset)
            offset += len(raw)
            yield raw.decode("utf-8", errors="replace")

    lines = decoded_lines()
    reader = csv.reader(lines)

    def row_offset(start_line: int) -> int:
        return line_offsets[start_line] if start_line < len(line_offsets) else line_offsets[-1]

    header: list[str] | None = None
    order: list[str] = []
    years: dict[str, int] = {}
    refs: dict[str, list[str]] = {}

    while True:
        start_line = reader.line_num + 1
        try:
            row = next(reader)
        except StopIteration:
            break
        if not row:
            continue
        if header is None:
            header = [cell.strip() for cell in row]
            if tuple(header) != CSV_HEADER:
                diagnostics.append(
                    Diagnostic(row_offset(start_line), start_line, "bad_header", ",".join(header))
                )
                return [], diagnostics
            continue
        if len(row) != 3:
            diagnostics.append(
                Diagnostic(row_offset(start_line), start_line, "bad_row", f"{len(row)} columns")
            )
            continue
        citing_id, year_text, cited = row[0].strip(), row[1].strip(), row[2]
        if not citing_id:
            diagnostics.append(Diagnostic(row_offset(start_line), start_line, "missing_citing_id"))
            continue
        try:
            year = int(year_text)
        except ValueError:
            diagnostics.append(
                Diagnostic(row_offset(start_line), start_line, "invalid_citing_year", year_text)
            )
            continue
        if not MIN_YEAR <= year <= MAX_YEAR:
            diagnostics.append(
                Diagnostic(row_offset(start_line), start_line, "invalid_citing_year", year_text)
            )
            continue
        if citing_id not in years:
            order.append(citing_id)
            years[citing_id] = year
            refs[citing_id] = []
        elif years[citing_id] != year:
            diagnostics.append(
                Diagnostic(
                    row_offset(start_line),
                    start_line,
                    "conflicting_citing_year",
                    f"{citing_id}: {years[citing_id]} vs {year}",
                )
            )
            continue
        trimmed = cited.strip()
        if trimmed:
            refs[citing_id].append(trimmed)

    records = [
        CitingRecord(
            record_id=citing_id,
            publication_year=years[citing_id],
            document_type="",
            cited_raw=tuple(refs[citing_id]),
        )
        for citing_id in order
    ]
    return records, diagnostics


def serialize_csv_corpus(records: Sequence[CitingRecord]) -> str:
    """Canonical CSV serialization (the round-trip and fingerprint form)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        if not record.cited_raw:
            writer.writerow([record.record_id, record.publication_year, ""])
        for raw in record.cited_raw:
            writer.writerow([record.record_id, record.publication_year, raw])
    return out.getvalue()


def sniff_format(head: bytes) -> str:
    """Guess 'csv' or 'wos' from the first bytes of a corpus file."""
    first_line = head.split(b"\n", 1)[0].strip().lower()
    if first_line.startswith(b"citing_id,"):
        return "csv"
    return "wos"


def load_corpus(path: str, fmt: str = "auto") -> tuple[list[CitingRecord], list[Diagnostic]]:
    """Parse a corpus file, sniffing the format unless one is forced."""
    with open(path, "rb") as handle:
        if fmt == "auto":
            head = handle.read(4096)
            handle.seek(0)
            fmt = sniff_format(head)
        if fmt == "csv":
            return parse_csv_corpus(handle)
        if fmt == "wos":
            return parse_field_tagged_export(handle)
    raise ValueError(f"unknown corpus format: {fmt!r}")


def document_type_passes(document_type: str, allowed: Sequence[str] | None) -> bool:
    """Unknown/empty types always pass; otherwise match ``allowed`` case-insensitively."""
    if allowed is None:
        return True
    label = document_type.strip().lower()
    if not label:
        return True
    return label in {a.strip().lower() for a in allowed}


def build_view(
    records: Sequence[CitingRecord],
    document_types: Sequence[str] | None = DEFAULT_DOCUMENT_TYPES,
    parse_cache: dict[str, ParsedReference] | None = None,
) -> CorpusView:
    """Parse every cited reference and assemble the full corpus view."""
    cache = parse_cache if parse_cache is not None else {}
    kept = tuple(r for r in records if document_type_passes(r.document_type, document_types))
    instances: list[RefInstance] = []
    for record in kept:
        rid = record.record_id
        for raw in record.cited_raw:
            ref = cache.get(raw)
            if ref is None:
                ref = parse_cited_reference(raw)
                cache[raw] = ref
            instances.append(RefInstance(rid, ref))
    return CorpusView(records=kept, instances=tuple(instances))


def apply_rpy_cutoff(view: CorpusView, cutoff_year: int) -> CorpusView:
    """Keep reference instances with RPY strictly earlier than ``cutoff_year``.

    Instances without a parseable RPY are dropped and counted; citing
    records are untouched.  Idempotent, and composing cutoffs equals the
    single cutoff at the smaller year.
    """
    kept: list[RefInstance] = []
    dropped_unparseable = 0
    for inst in view.instances:
        rpy = inst.ref.rpy
        if rpy is None:
            dropped_unparseable += 1
        elif rpy < cutoff_year:
            kept.append(inst)
    return replace(
        view,
        instances=tuple(kept),
        dropped_unparseable_rpy=view.dropped_unparseable_rpy + dropped_unparseable,
    )


def corpus_stats(
    records: Sequence[CitingRecord],
    cutoff_year: int | None = None,
    document_types: Sequence[str] | None = DEFAULT_DOCUMENT_TYPES,
) -> CorpusStats:
    """Corpus-level counts; with no cutoff, the below-cutoff count covers all parseable years."""
    cache: dict[str, ParsedReference] = {}
    num_instances = 0
    num_below = 0
    num_unparseable = 0
    min_rpy: int | None = None
    max_rpy: int | None = None
    nonstandard = 0
    for record in records:
        if not document_type_passes(record.document_type, document_types):
            nonstandard += 1
        for raw in record.cited_raw:
            num_instances += 1
            ref = cache.get(raw)
            if ref is None:
                ref = parse_cited_reference(raw)
                cache[raw] = ref
            if ref.rpy is None:
                num_unparseable += 1
                continue
            if min_rpy is None or ref.rpy < min_rpy:
                min_rpy = ref.rpy
            if max_rpy is None or ref.rpy > max_rpy:
                max_rpy = ref.rpy
            if cutoff_year is None or ref.rpy < cutoff_year:
                num_below += 1
    return CorpusStats(
        num_citing_records=len(records),
        num_reference_instances=num_instances,
        num_reference_instances_below_cutoff=num_below,
        min_rpy=min_rpy,
        max_rpy=max_rpy,
        num_unparseable_rpy=num_unparseable,
        num_nonstandard_type_records=nonstandard,
    )

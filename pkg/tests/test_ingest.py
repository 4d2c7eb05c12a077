"""Field-tagged and CSV ingestion, cutoff, and corpus statistics."""

from __future__ import annotations

import io
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from corpusgen import corpus_to_field_tagged, random_corpus
from refspect.ingest import (
    CitingRecord,
    apply_rpy_cutoff,
    build_view,
    corpus_stats,
    document_type_passes,
    parse_csv_corpus,
    parse_field_tagged_export,
    serialize_csv_corpus,
    sniff_format,
)


def wos_stream(text: str) -> io.BytesIO:
    return io.BytesIO(text.encode("utf-8"))


TWO_RECORD_EXPORT = """\
FN refspect test export
VR 1.0
PT Article
UT WOS:0001
TI Something irrelevant
PY 1995
CR ARRHENIUS S, 1896, PHILOS MAG, V41, P237
CR FOURIER JBJ, 1824, ANN CHIM PHYS, V27, P136
CR TYNDALL J, 1861, PHILOS MAG, V22, P169
ER
PT Review
UT WOS:0002
PY 2001
CR DARWIN C, 1859, ORIGIN SPECIES
CR MANN HB, 1945, ECONOMETRICA, V13, P245
ER
EF
"""


class TestFieldTagged:
    def test_two_record_fixture(self):
        records, diagnostics = parse_field_tagged_export(wos_stream(TWO_RECORD_EXPORT))
        assert diagnostics == []
        assert len(records) == 2
        assert [len(r.cited_raw) for r in records] == [3, 2]
        assert records[0].record_id == "WOS:0001"
        assert records[0].publication_year == 1995
        assert records[0].document_type == "Article"
        assert records[1].document_type == "Review"

    def test_empty_stream(self):
        records, diagnostics = parse_field_tagged_export(wos_stream(""))
        assert records == []
        assert diagnostics == []

    def test_missing_publication_year_skips_record(self):
        text = "PT Article\nUT WOS:0001\nCR DARWIN C, 1859, ORIGIN SPECIES\nER\nEF\n"
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert records == []
        assert len(diagnostics) == 1
        assert diagnostics[0].reason == "missing_publication_year"
        assert diagnostics[0].line_number == 1  # record boundary line
        assert diagnostics[0].byte_offset == 0

    def test_truncated_final_record(self):
        text = "PT Article\nUT WOS:0001\nPY 1995\nCR DARWIN C, 1859, ORIGIN SPECIES\n"
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert records == []
        assert [d.reason for d in diagnostics] == ["truncated_record"]

    def test_truncated_record_before_end_of_file_tag(self):
        text = "PT Article\nUT WOS:0001\nPY 1995\nEF\n"
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert records == []
        assert [d.reason for d in diagnostics] == ["truncated_record"]

    def test_continuation_joins_with_single_space(self):
        text = (
            "UT WOS:0001\nPY 1995\n"
            "CR DANSGAARD W, 1964, TELLUS,\n   V16, P436\nER\nEF\n"
        )
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert diagnostics == []
        assert records[0].cited_raw == ("DANSGAARD W, 1964, TELLUS, V16, P436",)

    def test_unknown_tags_and_their_continuations_are_skipped(self):
        text = (
            "FN Some header\n   wrapped header line\n"
            "UT WOS:0001\nPY 1995\nAB An abstract\n   continued abstract\n"
            "CR DARWIN C, 1859, ORIGIN SPECIES\nER\nEF\n"
        )
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert diagnostics == []
        assert len(records) == 1
        assert records[0].cited_raw == ("DARWIN C, 1859, ORIGIN SPECIES",)

    def test_duplicate_record_id_skipped_with_diagnostic(self):
        text = (
            "UT WOS:0001\nPY 1995\nCR A B, 1900, X\nER\n"
            "UT WOS:0001\nPY 1996\nCR C D, 1901, Y\nER\nEF\n"
        )
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert len(records) == 1
        assert [d.reason for d in diagnostics] == ["duplicate_record_id"]

    def test_invalid_year_and_missing_id(self):
        text = (
            "UT WOS:0001\nPY 18XX\nCR A B, 1900, X\nER\n"
            "PY 1995\nCR C D, 1901, Y\nER\nEF\n"
        )
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert records == []
        assert sorted(d.reason for d in diagnostics) == [
            "invalid_publication_year",
            "missing_record_id",
        ]

    def test_content_after_end_of_file_tag_is_ignored(self):
        text = "UT A\nPY 1995\nCR X Y, 1900, Z\nER\nEF\nUT B\nPY 1996\nER\n"
        records, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert [r.record_id for r in records] == ["A"]
        assert diagnostics == []

    def test_byte_offsets_point_at_record_start(self):
        prefix = "UT ONE\nPY 1995\nCR A B, 1900, X\nER\n"
        text = prefix + "UT TWO\nCR C D, 1901, Y\nER\nEF\n"
        _, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert diagnostics[0].reason == "missing_publication_year"
        assert diagnostics[0].byte_offset == len(prefix.encode())
        assert diagnostics[0].line_number == 5


class TestCsv:
    def test_rows_grouped_by_citing_id(self):
        text = (
            "citing_id,citing_year,cited_raw\n"
            "A,1991,REF ONE\n"
            "A,1991,REF TWO\n"
            "A,1991,REF THREE\n"
        )
        records, diagnostics = parse_csv_corpus(wos_stream(text))
        assert diagnostics == []
        assert len(records) == 1
        assert records[0].cited_raw == ("REF ONE", "REF TWO", "REF THREE")

    def test_header_only(self):
        records, diagnostics = parse_csv_corpus(wos_stream("citing_id,citing_year,cited_raw\n"))
        assert records == []
        assert diagnostics == []

    def test_non_integer_year_row_skipped(self):
        header = "citing_id,citing_year,cited_raw\n"
        text = header + "A,18XX,REF ONE\nB,1991,REF TWO\n"
        records, diagnostics = parse_csv_corpus(wos_stream(text))
        assert [r.record_id for r in records] == ["B"]
        assert [d.reason for d in diagnostics] == ["invalid_citing_year"]
        assert diagnostics[0].line_number == 2
        assert diagnostics[0].byte_offset == len(header.encode())

    def test_duplicate_rows_are_kept(self):
        text = "citing_id,citing_year,cited_raw\nA,1991,REF ONE\nA,1991,REF ONE\n"
        records, _ = parse_csv_corpus(wos_stream(text))
        assert records[0].cited_raw == ("REF ONE", "REF ONE")

    def test_conflicting_year_row_skipped(self):
        text = "citing_id,citing_year,cited_raw\nA,1991,REF ONE\nA,1992,REF TWO\n"
        records, diagnostics = parse_csv_corpus(wos_stream(text))
        assert records[0].cited_raw == ("REF ONE",)
        assert [d.reason for d in diagnostics] == ["conflicting_citing_year"]

    def test_quoted_fields_round_trip(self):
        record = CitingRecord("A,1", 1991, "", ('REF "quoted", with commas', "plain"))
        text = serialize_csv_corpus([record])
        records, diagnostics = parse_csv_corpus(wos_stream(text))
        assert diagnostics == []
        assert records[0].record_id == "A,1"
        assert records[0].cited_raw == record.cited_raw

    def test_bad_header_rejected(self):
        records, diagnostics = parse_csv_corpus(wos_stream("a,b,c\nA,1991,REF\n"))
        assert records == []
        assert [d.reason for d in diagnostics] == ["bad_header"]

    def test_sniff(self):
        assert sniff_format(b"citing_id,citing_year,cited_raw\n") == "csv"
        assert sniff_format(b"FN export\nPT Article\n") == "wos"


class TestRoundTrip:
    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_csv_round_trip_is_identity(self, seed):
        rng = random.Random(seed)
        records = random_corpus(rng, max_records=20, max_refs=8, n_works=20)
        text = serialize_csv_corpus(records)
        reparsed, diagnostics = parse_csv_corpus(wos_stream(text))
        assert diagnostics == []
        assert [(r.record_id, r.publication_year, r.cited_raw) for r in reparsed] == [
            (r.record_id, r.publication_year, r.cited_raw) for r in records
        ]

    def test_field_tagged_serialization_round_trip(self):
        rng = random.Random(7)
        records = random_corpus(rng, max_records=15, max_refs=6, n_works=15)
        text = corpus_to_field_tagged(records)
        reparsed, diagnostics = parse_field_tagged_export(wos_stream(text))
        assert diagnostics == []
        assert [(r.record_id, r.publication_year, r.cited_raw) for r in reparsed] == [
            (r.record_id, r.publication_year, r.cited_raw) for r in records
        ]


REFS_BY_YEAR = {
    1896: "ARRHENIUS S, 1896, PHILOS MAG, V41, P237",
    1970: "AUTHOR A, 1970, SOME J, V1, P1",
    1971: "AUTHOR B, 1971, SOME J, V1, P2",
    1985: "AUTHOR C, 1985, SOME J, V1, P3",
}


class TestCutoff:
    def _view(self):
        record = CitingRecord("A", 1995, "Article", tuple(REFS_BY_YEAR.values()))
        return build_view([record])

    def test_strictly_earlier_than_cutoff(self):
        cut = apply_rpy_cutoff(self._view(), 1971)
        assert sorted(inst.ref.rpy for inst in cut.instances) == [1896, 1970]

    def test_cutoff_above_max_is_identity_on_parseable(self):
        cut = apply_rpy_cutoff(self._view(), 3000)
        assert len(cut.instances) == 4

    def test_cutoff_below_min_empties_instances_keeps_records(self):
        cut = apply_rpy_cutoff(self._view(), 1500)
        assert cut.instances == ()
        assert len(cut.records) == 1

    def test_unparseable_rpy_dropped_and_counted(self):
        record = CitingRecord("A", 1995, "Article", ("NO YEAR HERE", REFS_BY_YEAR[1896]))
        cut = apply_rpy_cutoff(build_view([record]), 1971)
        assert len(cut.instances) == 1
        assert cut.dropped_unparseable_rpy == 1

    @given(st.integers(1500, 2100), st.integers(1500, 2100), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_idempotent_and_monotone(self, y1, y2, seed):
        rng = random.Random(seed)
        view = build_view(random_corpus(rng, max_records=12, max_refs=6, n_works=15))
        once = apply_rpy_cutoff(view, y1)
        assert apply_rpy_cutoff(once, y1) == once
        composed = apply_rpy_cutoff(once, y2)
        assert composed == apply_rpy_cutoff(view, min(y1, y2))


class TestStats:
    def test_two_records_counts(self):
        records, _ = parse_field_tagged_export(wos_stream(TWO_RECORD_EXPORT))
        stats = corpus_stats(records)
        assert stats.num_citing_records == 2
        assert stats.num_reference_instances == 5

    def test_empty_corpus(self):
        stats = corpus_stats([])
        assert stats.num_citing_records == 0
        assert stats.num_reference_instances == 0
        assert stats.num_reference_instances_below_cutoff == 0
        assert stats.min_rpy is None
        assert stats.max_rpy is None

    def test_below_cutoff_hand_count(self):
        # 10 instances; by construction exactly 4 have RPY < 1900
        refs = [
            "A A, 1850, X",   # below
            "B B, 1875, X",   # below
            "C C, 1899, X",   # below
            "D D, 1880, X",   # below
            "E E, 1900, X",
            "F F, 1950, X",
            "G G, 1970, X",
            "H H, 2000, X",
            "NO YEAR ONE",
            "NO YEAR TWO",
        ]
        records = [CitingRecord("R1", 1995, "Article", tuple(refs[:5])),
                   CitingRecord("R2", 1996, "Article", tuple(refs[5:]))]
        stats = corpus_stats(records, cutoff_year=1900)
        assert stats.num_reference_instances == 10
        assert stats.num_reference_instances_below_cutoff == 4
        assert stats.num_unparseable_rpy == 2
        assert stats.min_rpy == 1850
        assert stats.max_rpy == 2000

    def test_sum_of_cited_raw_lengths(self):
        rng = random.Random(11)
        records = random_corpus(rng, max_records=30, max_refs=10, n_works=25)
        stats = corpus_stats(records)
        assert stats.num_reference_instances == sum(len(r.cited_raw) for r in records)


class TestDocumentTypes:
    def test_unknown_and_empty_types_pass(self):
        assert document_type_passes("", ("article", "review"))
        assert document_type_passes("Article", ("article", "review"))
        assert not document_type_passes("Letter", ("article", "review"))
        assert document_type_passes("Letter", None)

    def test_view_excludes_filtered_types_but_corpus_keeps_them(self):
        records = [
            CitingRecord("A", 1995, "Article", ("X Y, 1900, Z",)),
            CitingRecord("B", 1995, "Letter", ("X Y, 1900, Z",)),
        ]
        view = build_view(records)
        assert [r.record_id for r in view.records] == ["A"]
        stats = corpus_stats(records)
        assert stats.num_citing_records == 2
        assert stats.num_nonstandard_type_records == 1

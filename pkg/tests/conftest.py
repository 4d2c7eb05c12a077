from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))  # oracles / corpusgen helpers

FIXTURES = TESTS_DIR / "fixtures"
GOLDEN_DIR = FIXTURES / "golden"

from refspect.ingest import CitingRecord, parse_field_tagged_export  # noqa: E402


@pytest.fixture(scope="session")
def golden_corpus_path() -> Path:
    return GOLDEN_DIR / "corpus.wos"


@pytest.fixture(scope="session")
def golden_records(golden_corpus_path) -> list[CitingRecord]:
    with open(golden_corpus_path, "rb") as handle:
        records, diagnostics = parse_field_tagged_export(handle)
    assert not diagnostics
    return records


@pytest.fixture(scope="session")
def abc_csv_path() -> Path:
    return FIXTURES / "abc.csv"


def make_record(record_id: str, year: int, refs: list[str], doc_type: str = "Article") -> CitingRecord:
    return CitingRecord(
        record_id=record_id,
        publication_year=year,
        document_type=doc_type,
        cited_raw=tuple(refs),
    )


@pytest.fixture()
def make_records():
    def build(spec: dict[str, list[str]], year: int = 1995) -> list[CitingRecord]:
        return [make_record(rid, year, refs) for rid, refs in spec.items()]

    return build

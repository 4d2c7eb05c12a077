"""Seeded synthetic corpus builders shared by property and acceptance tests."""

from __future__ import annotations

import random

from refspect.ingest import CitingRecord

SURNAMES = [
    "ARRHENIUS", "FOURIER", "TYNDALL", "CHAMBERLIN", "CALLENDAR", "PLASS", "REVELLE",
    "HALLEY", "HADLEY", "DARWIN", "MALTHUS", "BERGMANN", "BLANFORD", "WALKER", "JENNY",
    "MANN", "PENMAN", "MCCREA", "EPSTEIN", "HUTCHINSON", "CRAIG", "STOMMEL", "LORENZ",
    "DANSGAARD", "PALMER", "MONTEITH", "MANABE", "STOKES", "SEN", "HARDIN", "BJERKNES",
    "BUDYKO", "NASH", "KEELING", "THORNTHWAITE", "MILANKOVITCH", "LINNAEUS", "WEART",
    "SCHMIDT", "FISCHER", "MUELLER", "WEBER", "MEYER", "WAGNER", "BECKER", "HOFFMANN",
]

JOURNALS = [
    "PHILOS MAG", "PHILOS T ROY SOC", "J GEOL", "TELLUS", "ECONOMETRICA", "GEOGR REV",
    "SCIENCE", "NATURE", "MONTHLY WEATHER REV", "J ATMOS SCI", "Q J ROY METEOR SOC",
    "AM J SCI", "ANN CHIM PHYS", "J CHEM PHYS", "GEOL SOC AM BULL", "WEATHER",
    "J HYDROL", "J AM STAT ASSOC", "P ROY SOC LOND", "MEM ROY METEOR SOC",
]

INITIALS = "ABCDEFGHJKLMNPRSTW"


def make_work(rng: random.Random, years: tuple[int, int]) -> str:
    """One canonical cited-reference string."""
    author = f"{rng.choice(SURNAMES)} {rng.choice(INITIALS)}"
    year = rng.randint(*years)
    journal = rng.choice(JOURNALS)
    volume = rng.randint(1, 200)
    page = rng.randint(1, 999)
    return f"{author}, {year}, {journal}, V{volume}, P{page}"


def misspell(rng: random.Random, raw: str) -> str:
    """A plausible variant: one character dropped from the source segment."""
    parts = raw.split(", ")
    source = parts[2]
    if len(source) > 4:
        drop = rng.randrange(1, len(source) - 1)
        parts = parts[:2] + [source[:drop] + source[drop + 1:]] + parts[3:]
    return ", ".join(parts)


def random_corpus(
    rng: random.Random,
    max_records: int = 200,
    max_refs: int = 50,
    years: tuple[int, int] = (1680, 1970),
    n_works: int = 100,
    variant_share: float = 0.2,
) -> list[CitingRecord]:
    """A citing corpus over a reusable pool of works, some with variants."""
    pool: list[str] = []
    seen: set[str] = set()
    while len(pool) < n_works:
        work = make_work(rng, years)
        if work in seen:
            continue
        seen.add(work)
        pool.append(work)
        if rng.random() < variant_share:
            variant = misspell(rng, work)
            if variant not in seen:
                seen.add(variant)
                pool.append(variant)

    n_records = rng.randint(max(5, max_records // 10), max_records)
    records = []
    for i in range(n_records):
        n_refs = rng.randint(1, max_refs)
        cited = tuple(rng.choice(pool) for _ in range(n_refs))
        doc_type = "Review" if rng.random() < 0.1 else "Article"
        records.append(
            CitingRecord(
                record_id=f"R{i:05d}",
                publication_year=rng.randint(1980, 2014),
                document_type=doc_type,
                cited_raw=cited,
            )
        )
    return records


def corpus_to_field_tagged(records: list[CitingRecord]) -> str:
    """Serialize records in the field-tagged export grammar."""
    lines = []
    for record in records:
        lines.append(f"PT {record.document_type or 'Article'}")
        lines.append(f"UT {record.record_id}")
        lines.append(f"PY {record.publication_year}")
        for raw in record.cited_raw:
            lines.append(f"CR {raw}")
        lines.append("ER")
    lines.append("EF")
    return "\n".join(lines) + "\n"

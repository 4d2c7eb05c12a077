"""Append-only ledger of manual curation operations.

Every analyst action on the cluster set (merge, split, year correction)
is recorded as one entry; replaying the ledger over a freshly built
cluster table reproduces identical results.  The on-disk form is one
JSON object per line: {"op", "args", "timestamp", "note"}.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .clustering import ClusterTable

OPS = ("merge", "split", "correct_year")

# Set REFSPECT_FIXED_TIME to stamp all new entries with one fixed value;
# used for reproducible scripted runs and cross-surface comparisons.
FIXED_TIME_ENV = "REFSPECT_FIXED_TIME"


def current_timestamp() -> str:
    fixed = os.environ.get(FIXED_TIME_ENV)
    if fixed:
        return fixed
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class LedgerEntry:
    op: str
    args: dict
    timestamp: str = field(default_factory=current_timestamp)
    note: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {"op": self.op, "args": self.args, "timestamp": self.timestamp, "note": self.note},
            sort_keys=True,
            ensure_ascii=False,
        )


def entry_from_dict(payload: dict) -> LedgerEntry:
    op = payload.get("op")
    if op not in OPS:
        raise ValueError(f"unknown ledger op: {op!r}")
    args = payload.get("args")
    if not isinstance(args, dict):
        raise ValueError("ledger entry args must be an object")
    return LedgerEntry(
        op=op,
        args=args,
        timestamp=str(payload.get("timestamp", "")),
        note=str(payload.get("note", "")),
    )


def merge_entry(cluster_ids: Sequence[str], note: str = "") -> LedgerEntry:
    return LedgerEntry(op="merge", args={"cluster_ids": sorted(cluster_ids)}, note=note)


def split_entry(cluster_id: str, partition: Sequence[Sequence[str]], note: str = "") -> LedgerEntry:
    blocks = [sorted(block) for block in partition]
    blocks.sort()
    return LedgerEntry(op="split", args={"cluster_id": cluster_id, "partition": blocks}, note=note)


def year_entry(cluster_id: str, rpy: int, note: str = "") -> LedgerEntry:
    return LedgerEntry(op="correct_year", args={"cluster_id": cluster_id, "rpy": rpy}, note=note)


def apply_entry(table: ClusterTable, entry: LedgerEntry) -> None:
    """Apply one entry to a table in place."""
    if entry.op == "merge":
        table.merge(entry.args["cluster_ids"])
    elif entry.op == "split":
        table.split(entry.args["cluster_id"], entry.args["partition"])
    elif entry.op == "correct_year":
        table.correct_year(entry.args["cluster_id"], int(entry.args["rpy"]))
    else:
        raise ValueError(f"unknown ledger op: {entry.op!r}")


def replay(table: ClusterTable, entries: Iterable[LedgerEntry]) -> ClusterTable:
    """Replay entries onto a copy of ``table`` and return the copy."""
    result = table.copy()
    for entry in entries:
        apply_entry(result, entry)
    return result


def write_ledger_file(entries: Iterable[LedgerEntry], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for entry in entries:
            handle.write(entry.to_json() + "\n")


def read_ledger_file(path: str) -> list[LedgerEntry]:
    entries: list[LedgerEntry] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid ledger line: {exc}") from exc
            entries.append(entry_from_dict(payload))
    return entries

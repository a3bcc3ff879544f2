"""Deterministic CSV/JSON writers and the per-run discrepancy ledger."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass


def _clean(value):
    """Make a value JSON-safe and stable: numpy scalars to Python, NaN/inf to strings."""
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def dumps(doc) -> str:
    return json.dumps(_clean(doc), indent=1, sort_keys=True) + "\n"


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def csv_text(columns, rows, header: dict) -> str:
    buf = io.StringIO()
    for key in sorted(header):
        buf.write(f"# {key}: {header[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_text(path, text: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


@dataclass(frozen=True)
class LedgerEntry:
    id: str
    claim: str
    reference_value: object
    computed_value: object
    comparison: str
    status: str
    note: str = ""


class DiscrepancyLedger:
    """Append-only record of every comparison between a stated value and a computed one.

    ``status`` is one of ``agree``, ``disagree`` or ``reported`` (no pass/fail verdict).
    """

    def __init__(self):
        self._entries: list[LedgerEntry] = []

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self) -> tuple:
        return tuple(self._entries)

    def append(self, entry: LedgerEntry):
        if any(e.id == entry.id for e in self._entries):
            raise ValueError(f"ledger entry {entry.id!r} already recorded")
        self._entries.append(entry)

    def compare(self, id, claim, reference, computed, rel_tol=None, abs_tol=None, note=""):
        """Record ``computed`` against ``reference`` with a relative or absolute tolerance."""
        if rel_tol is not None:
            dev = abs(computed - reference) / abs(reference)
            comparison = f"relative deviation {dev:.6g} (tolerance {rel_tol:g})"
            ok = dev <= rel_tol
        elif abs_tol is not None:
            dev = abs(computed - reference)
            comparison = f"absolute deviation {dev:.6g} (tolerance {abs_tol:g})"
            ok = dev <= abs_tol
        else:
            raise ValueError("give rel_tol or abs_tol")
        self.append(LedgerEntry(id, claim, reference, computed, comparison,
                                "agree" if ok else "disagree", note))

    def within(self, id, claim, interval, computed, note=""):
        lo, hi = interval
        ok = lo <= computed <= hi
        self.append(LedgerEntry(id, claim, [lo, hi], computed, "inside interval",
                                "agree" if ok else "disagree", note))

    def report(self, id, claim, reference, computed, note=""):
        self.append(LedgerEntry(id, claim, reference, computed, "reported only", "reported", note))

    def to_json(self, metadata: dict) -> str:
        return dumps({"metadata": metadata, "entries": [asdict(e) for e in self._entries]})

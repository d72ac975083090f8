"""Parsing and validation of the lab's exported file formats.

Portrait documents are the `schema_version: 1` JSON written by
`hlb portrait`; sweep tables are the six-column CSV written by `hlb sweep`
and fits the JSON written by its `--fit-out` flag.  Validation errors name
the offending field.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional


class SchemaError(ValueError):
    """A document does not match the expected schema."""


SWEEP_COLUMNS = ("mu", "amplitude", "period", "x_max", "multiplier",
                 "converged")

_RECORD_KEYS = ("mu", "manifolds", "trajectories", "events", "equilibria",
                "folds", "sliding_regions", "cycle")


@dataclass
class PortraitDoc:
    entry: str
    name: str
    records: list

    @property
    def negative(self) -> dict:
        return self.records[0]

    @property
    def positive(self) -> dict:
        return self.records[-1]


def _require(cond, field, why):
    if not cond:
        raise SchemaError(f"portrait field {field!r}: {why}")


def load_portrait(path) -> PortraitDoc:
    with open(path) as fh:
        doc = json.load(fh)
    return parse_portrait(doc)


def parse_portrait(doc: dict) -> PortraitDoc:
    _require(isinstance(doc, dict), "<root>", "not an object")
    _require(doc.get("schema_version") == 1, "schema_version",
             f"expected 1, got {doc.get('schema_version')!r}")
    for key in ("entry", "records"):
        _require(key in doc, key, "missing")
    records = doc["records"]
    _require(isinstance(records, list) and records, "records",
             "must be a non-empty list")
    for i, rec in enumerate(records):
        where = f"records[{i}]"
        _require(isinstance(rec, dict), where, "not an object")
        for key in _RECORD_KEYS:
            _require(key in rec, f"{where}.{key}", "missing")
        for j, traj in enumerate(rec["trajectories"]):
            samples = traj.get("samples")
            _require(isinstance(samples, list),
                     f"{where}.trajectories[{j}].samples", "missing")
            _require(all(isinstance(s, list) and len(s) == 3 for s in samples),
                     f"{where}.trajectories[{j}].samples",
                     "ragged rows (need [t, x, y])")
        cyc = rec["cycle"]
        if cyc is not None:
            _require("samples" in cyc, f"{where}.cycle.samples", "missing")
            _require(all(len(s) == 3 for s in cyc["samples"]),
                     f"{where}.cycle.samples", "ragged rows")
    return PortraitDoc(entry=str(doc["entry"]),
                       name=str(doc.get("name", doc["entry"])),
                       records=records)


def load_sweep_csv(path) -> list:
    """Rows of a sweep CSV as dicts with numeric fields."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != SWEEP_COLUMNS:
            raise SchemaError(
                f"sweep field <header>: expected {','.join(SWEEP_COLUMNS)}, "
                f"got {header}")
        rows = []
        for k, raw in enumerate(reader):
            if len(raw) != 6:
                raise SchemaError(f"sweep field row[{k}]: expected 6 columns, "
                                  f"got {len(raw)}")
            rows.append({
                "mu": float(raw[0]),
                "amplitude": float(raw[1]),
                "period": float(raw[2]),
                "x_max": float(raw[3]),
                "multiplier": float(raw[4]),
                "converged": bool(int(raw[5])),
            })
    return rows


def load_fit_json(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("a_hat", "k1", "b_hat", "k2"):
        if key not in doc:
            raise SchemaError(f"fit field {key!r}: missing")
    return doc

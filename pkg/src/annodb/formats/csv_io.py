"""Flat CSV interchange (RFC 4180), one row per object."""
from __future__ import annotations

import csv

from .. import store
from ..store import Session

CSV_HEADER = ("imagefile", "objectid", "name", "x", "y", "width", "height", "score")


def export_csv(session: Session, out_path: str) -> int:
    """Write header + one row per object; returns the data-row count."""
    rows = 0
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for entry in store.iterate_objects(session):
            obj = entry.object
            writer.writerow(
                [
                    obj.imagefile,
                    obj.objectid,
                    "" if obj.name is None else obj.name,
                    _cell(obj.x),
                    _cell(obj.y),
                    _cell(obj.width),
                    _cell(obj.height),
                    _cell(obj.score),
                ]
            )
            rows += 1
    return rows


def _cell(v) -> str:
    return "" if v is None else repr(float(v))

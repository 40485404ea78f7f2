"""Aggregate statistics and histogram plotting. Read-only."""
from __future__ import annotations

import csv
import logging
import math
import pprint
import sqlite3

import numpy as np

from .errors import PredicateError
from .store import Session

logger = logging.getLogger(__name__)


def get_info(
    session: Session, images_by_dir: bool = False, objects_by_image: bool = False
) -> dict:
    """Key-value summary of the open database."""
    conn = session.conn
    info = {
        "num images": conn.execute("SELECT COUNT(*) FROM images").fetchone()[0],
        "num objects": conn.execute("SELECT COUNT(*) FROM objects").fetchone()[0],
        "num masks": conn.execute(
            "SELECT COUNT(*) FROM images WHERE maskfile IS NOT NULL"
        ).fetchone()[0],
        "matches": conn.execute("SELECT COUNT(DISTINCT match) FROM matches").fetchone()[0],
    }
    for key, column in (("image width", "width"), ("image height", "height")):
        values = [
            row[0]
            for row in conn.execute(
                f"SELECT DISTINCT {column} FROM images WHERE {column} IS NOT NULL"
            )
        ]
        if len(values) == 1:
            info[key] = values[0]
        elif len(values) > 1:
            info[key] = f"{len(values)} different values"
    keys = [row[0] for row in conn.execute("SELECT DISTINCT key FROM properties ORDER BY key")]
    if keys:
        info["properties"] = keys
    if images_by_dir:
        info["images by dir"] = dict(
            conn.execute(
                "SELECT CASE WHEN instr(imagefile, '/') = 0 THEN '.' ELSE "
                "rtrim(imagefile, replace(imagefile, '/', '')) END AS dir, COUNT(*) "
                "FROM images GROUP BY dir ORDER BY dir"
            ).fetchall()
        )
    if objects_by_image:
        info["objects by image"] = dict(
            conn.execute(
                "SELECT i.imagefile, COUNT(o.objectid) FROM images i "
                "LEFT JOIN objects o ON o.imagefile = i.imagefile "
                "GROUP BY i.imagefile ORDER BY i.imagefile"
            ).fetchall()
        )
    return info


def format_info(info: dict) -> str:
    """Deterministic text form: keys alphabetized, stable across runs."""
    return pprint.pformat(info, width=72, sort_dicts=True)


def print_info(
    session: Session, images_by_dir: bool = False, objects_by_image: bool = False
) -> str:
    text = format_info(get_info(session, images_by_dir, objects_by_image))
    print(text)
    return text


def sturges_bins(n: int) -> int:
    return max(math.ceil(math.log2(n)) + 1, 1) if n > 0 else 1


def histogram_values(session: Session, sql: str) -> tuple[list[float], int]:
    """Run a single-column query; returns (parseable reals, unparseable count)."""
    if not sql.lstrip().lower().startswith("select"):
        raise PredicateError("histogram query must be a SELECT")
    try:
        cursor = session.execute(sql)
    except sqlite3.Error as exc:
        raise PredicateError(f"bad histogram query {sql!r}: {exc}") from exc
    if cursor.description is None or len(cursor.description) != 1:
        n = 0 if cursor.description is None else len(cursor.description)
        raise PredicateError(f"histogram query must return exactly 1 column, got {n}")
    values, bad = [], 0
    for (raw,) in cursor:
        try:
            values.append(float(raw))
        except (TypeError, ValueError):
            bad += 1
    return values, bad


def plot_objects_histogram(
    session: Session,
    sql: str,
    bins: int | None = None,
    out_svg: str | None = None,
    out_csv: str | None = None,
) -> list[tuple[float, float, int]]:
    """Histogram of a single-column query; emits SVG and/or CSV when asked.

    Returns the bin table [(bin_low, bin_high, count), ...]. Unparseable
    values are counted and reported, not plotted.
    """
    values, bad = histogram_values(session, sql)
    if bad:
        logger.warning("plotObjectsHistogram: %d values were not parseable as reals", bad)
    if not values:
        logger.warning("plotObjectsHistogram: query returned no parseable values")
        table: list[tuple[float, float, int]] = []
    else:
        counts, edges = np.histogram(values, bins=bins if bins else sturges_bins(len(values)))
        table = [
            (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))
        ]

    _print_text_histogram(table)
    if out_csv:
        with open(out_csv, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(("bin_low", "bin_high", "count"))
            writer.writerows(table)
    if out_svg:
        _write_svg(table, out_svg)
    return table


def _print_text_histogram(table) -> None:
    peak = max((count for _, _, count in table), default=0)
    for low, high, count in table:
        bar = "#" * (round(40 * count / peak) if peak else 0)
        print(f"[{low:g}, {high:g}): {bar} {count}")


def _write_svg(table, out_svg: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    if table:
        lows = [low for low, _, _ in table]
        widths = [high - low for low, high, _ in table]
        counts = [count for _, _, count in table]
        ax.bar(lows, counts, width=widths, align="edge", edgecolor="black")
    ax.set_xlabel("value")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)

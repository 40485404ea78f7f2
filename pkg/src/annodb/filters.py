"""Deletion operations: remove images or objects by geometric or SQL criteria.

All filters are monotone (counts never increase, surviving rows unchanged)
and cascade fully, so integrity holds after every call. Predicate execution
is all-or-nothing: a malformed predicate leaves the database untouched.
"""
from __future__ import annotations

import logging
import sqlite3

from . import store
from .errors import AnnoDbError, PredicateError
from .store import Session

logger = logging.getLogger(__name__)

DEFAULT_BORDER_THRESH = 0.01


def filter_empty_images(session: Session) -> int:
    """Delete every image that owns zero objects."""
    empty = [
        row[0]
        for row in session.execute(
            "SELECT imagefile FROM images "
            "WHERE imagefile NOT IN (SELECT imagefile FROM objects)"
        )
    ]
    deleted = store.delete_images(session, empty)
    logger.info("filterEmptyImages: deleted %d images", deleted)
    return deleted


def _boxed_objects(session: Session):
    return session.execute(
        "SELECT objectid, imagefile, x, y, width, height FROM objects "
        "WHERE x IS NOT NULL AND y IS NOT NULL AND width IS NOT NULL AND height IS NOT NULL "
        "ORDER BY objectid"
    ).fetchall()


def filter_objects_at_border(
    session: Session, border_thresh_perc: float = DEFAULT_BORDER_THRESH
) -> int:
    """Delete objects whose box enters the border band of their image.

    The band is per-axis: thresh * W horizontally, thresh * H vertically.
    """
    dims = {
        row[0]: (row[1], row[2])
        for row in session.execute("SELECT imagefile, width, height FROM images")
    }
    doomed = []
    total = store.count_rows(session, "objects")
    for objectid, imagefile, x, y, w, h in _boxed_objects(session):
        size = dims.get(imagefile)
        if size is None or size[0] is None or size[1] is None:
            raise AnnoDbError(
                f"image '{imagefile}' lacks dimensions needed by filterObjectsAtBorder"
            )
        img_w, img_h = size
        tw = border_thresh_perc * img_w
        th = border_thresh_perc * img_h
        if x < tw or y < th or x + w > img_w - tw or y + h > img_h - th:
            doomed.append(objectid)
    deleted = store.delete_objects(session, doomed)
    logger.info("filterObjectsAtBorder: deleted %d out of %d objects", deleted, total)
    return deleted


def _intersection_area(a, b) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    w = min(ax + aw, bx + bw) - max(ax, bx)
    h = min(ay + ah, by + bh) - max(ay, by)
    return max(w, 0.0) * max(h, 0.0)


def filter_objects_by_intersection(session: Session, intersection_thresh_perc: float) -> int:
    """Delete objects overlapped by another object in the same image by more
    than the threshold fraction of their own box area.

    The ratio denominator is the object's own area, not IoU. Decisions use
    pre-filter geometry: deletions do not cascade within one invocation.
    """
    by_image: dict[str, list] = {}
    for objectid, imagefile, x, y, w, h in _boxed_objects(session):
        by_image.setdefault(imagefile, []).append((objectid, (x, y, w, h)))

    doomed = []
    total = store.count_rows(session, "objects")
    for boxes in by_image.values():
        for objectid, box in boxes:
            own_area = box[2] * box[3]
            if own_area <= 0:
                continue
            worst = max(
                (_intersection_area(box, other) for oid, other in boxes if oid != objectid),
                default=0.0,
            )
            if worst / own_area > intersection_thresh_perc:
                doomed.append(objectid)
    deleted = store.delete_objects(session, doomed)
    logger.info("filterObjectsByIntersection: deleted %d out of %d objects", deleted, total)
    return deleted


def filter_objects_sql(session: Session, where_object: str) -> int:
    """Delete all objects satisfying the predicate, with full cascade."""
    if not where_object:
        raise PredicateError("empty where_object predicate")
    doomed = store.select_objectids(session, where_object)
    total = store.count_rows(session, "objects")
    deleted = store.delete_objects(session, doomed)
    logger.info("filterObjectsSQL: deleted %d out of %d objects", deleted, total)
    return deleted


def filter_images_sql(session: Session, where_image: str) -> int:
    """Delete matching images together with all their objects."""
    if not where_image:
        raise PredicateError("empty where_image predicate")
    try:
        doomed = [
            row[0]
            for row in session.execute(
                f"SELECT imagefile FROM images WHERE {where_image}"
            )
        ]
    except sqlite3.Error as exc:
        raise PredicateError(f"bad where_image predicate {where_image!r}: {exc}") from exc
    total = store.count_rows(session, "images")
    deleted = store.delete_images(session, doomed)
    logger.info("filterImagesSQL: deleted %d out of %d images", deleted, total)
    return deleted

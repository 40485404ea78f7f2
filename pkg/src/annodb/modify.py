"""In-place transformations and dataset restructuring.

Everything here rewrites database rows only; image files on disk are never
modified (cropObjects writes new files into its own directory).
"""
from __future__ import annotations

import logging
import math
import os
import random

from . import media, store
from .errors import AnnoDbError
from .records import ImportReport
from .store import Session

logger = logging.getLogger(__name__)


def expand_boxes(session: Session, expand_perc: float) -> int:
    """Grow every box by expand_perc of its size on each side.

    (x, y, w, h) -> (x - p*w, y - p*h, w*(1+2p), h*(1+2p)). The box center is
    invariant. No clamping to image bounds; see clamp_boxes_to_image.
    """
    if expand_perc < -0.5:
        raise ValueError("expand_perc below -0.5 inverts boxes")
    cursor = session.execute(
        "UPDATE objects SET x = x - ? * width, y = y - ? * height, "
        "width = width * ?, height = height * ? "
        "WHERE x IS NOT NULL AND y IS NOT NULL AND width IS NOT NULL AND height IS NOT NULL",
        (expand_perc, expand_perc, 1 + 2 * expand_perc, 1 + 2 * expand_perc),
    )
    session.mark_dirty()
    logger.info("expandBoxes: modified %d boxes", cursor.rowcount)
    return cursor.rowcount


def polygons_to_boxes(session: Session) -> int:
    """Assign each polygon-bearing object the minimal box containing all its
    polygon points (all polygons of the object pooled). Polygon rows stay."""
    rows = session.execute(
        "SELECT p.objectid, MIN(p.x), MIN(p.y), MAX(p.x), MAX(p.y) FROM polygons p "
        "JOIN objects o ON o.objectid = p.objectid GROUP BY p.objectid"
    ).fetchall()
    for objectid, min_x, min_y, max_x, max_y in rows:
        session.execute(
            "UPDATE objects SET x = ?, y = ?, width = ?, height = ? WHERE objectid = ?",
            (min_x, min_y, max_x - min_x, max_y - min_y, objectid),
        )
    if rows:
        session.mark_dirty()
    logger.info("polygonsToBoxes: assigned %d boxes", len(rows))
    return len(rows)


def clamp_boxes_to_image(session: Session) -> int:
    """Clamp boxes to [0, W] x [0, H] of their image; returns boxes changed."""
    dims = {
        row[0]: (row[1], row[2])
        for row in session.execute("SELECT imagefile, width, height FROM images")
    }
    changed = 0
    rows = session.execute(
        "SELECT objectid, imagefile, x, y, width, height FROM objects "
        "WHERE x IS NOT NULL AND y IS NOT NULL AND width IS NOT NULL AND height IS NOT NULL "
        "ORDER BY objectid"
    ).fetchall()
    for objectid, imagefile, x, y, w, h in rows:
        size = dims.get(imagefile)
        if size is None or size[0] is None or size[1] is None:
            raise AnnoDbError(f"image '{imagefile}' lacks dimensions needed by clampBoxesToImage")
        img_w, img_h = size
        nx = min(max(x, 0.0), float(img_w))
        ny = min(max(y, 0.0), float(img_h))
        nw = max(min(x + w, float(img_w)) - nx, 0.0)
        nh = max(min(y + h, float(img_h)) - ny, 0.0)
        if (nx, ny, nw, nh) != (x, y, w, h):
            session.execute(
                "UPDATE objects SET x = ?, y = ?, width = ?, height = ? WHERE objectid = ?",
                (nx, ny, nw, nh, objectid),
            )
            changed += 1
    if changed:
        session.mark_dirty()
    logger.info("clampBoxesToImage: changed %d boxes", changed)
    return changed


def add_database(session: Session, other_db_path: str) -> ImportReport:
    """Merge all rows of another database into the open one.

    Object/property/polygon/match ids are reallocated; match group values are
    offset to stay disjoint from the receiving database's groups. Identical
    imagefile rows are unified. Conflicting image dimensions abort the merge
    before any row is written.
    """
    other = store.open_session(other_db_path)
    try:
        for imagefile, width, height in other.execute(
            "SELECT imagefile, width, height FROM images"
        ):
            existing = store.get_image(session, imagefile)
            if existing is None:
                continue
            for theirs, ours in ((width, existing.width), (height, existing.height)):
                if theirs is not None and ours is not None and theirs != ours:
                    raise AnnoDbError(
                        f"conflicting dimensions for imagefile '{imagefile}': "
                        f"{(existing.width, existing.height)} vs {(width, height)}"
                    )

        match_offset = session.execute(
            "SELECT 1 + COALESCE(MAX(match), 0) FROM matches"
        ).fetchone()[0]

        report = ImportReport()
        for image in store.iterate_images(other):
            if store.get_image(session, image.imagefile) is None:
                store.add_image(
                    session,
                    image.imagefile,
                    width=image.width,
                    height=image.height,
                    maskfile=image.maskfile,
                    name=image.name,
                    score=image.score,
                )
                report.images_added += 1
        for entry in store.iterate_objects(other):
            obj = entry.object
            new_id = store.add_object(
                session,
                obj.imagefile,
                x=obj.x,
                y=obj.y,
                width=obj.width,
                height=obj.height,
                name=obj.name,
                score=obj.score,
            )
            for prop in entry.properties:
                store.add_property(session, new_id, prop.key, prop.value)
            for point in entry.polygon_points:
                store.add_polygon_point(session, new_id, point.x, point.y, point.name)
            for match in store.object_matches(other, obj.objectid):
                store.add_match(session, new_id, match.match + match_offset)
            report.objects_added += 1
    finally:
        other.close()
    logger.info(
        "addDatabase: merged %d images, %d objects from %s",
        report.images_added,
        report.objects_added,
        other_db_path,
    )
    return report


def split_database(
    session: Session, fractions: list[float], out_names: list[str], seed: int
) -> list[int]:
    """Shuffle images by a seed-deterministic permutation and write contiguous
    fraction ranges to new database files. Returns per-split image counts.

    Counts are floor(fraction * N); when the fractions sum to 1 the remainder
    images go to the first split, so the outputs partition the source.
    """
    if len(fractions) != len(out_names):
        raise ValueError("fractions and out_names must have the same length")
    if not fractions:
        raise ValueError("at least one fraction is required")
    if any(not 0 < f <= 1 for f in fractions):
        raise ValueError("fractions must lie in (0, 1]")
    if sum(fractions) > 1 + 1e-9:
        raise ValueError("fractions exceed 1")

    imagefiles = [row[0] for row in session.execute("SELECT imagefile FROM images ORDER BY imagefile")]
    rng = random.Random(seed)
    rng.shuffle(imagefiles)

    n = len(imagefiles)
    counts = [math.floor(f * n) for f in fractions]
    if abs(sum(fractions) - 1.0) <= 1e-9:
        counts[0] += n - sum(counts)

    start = 0
    for count, out_name in zip(counts, out_names):
        chunk = imagefiles[start : start + count]
        start += count
        out = store.open_session(None, out_name, rootdir=session.rootdir)
        try:
            _copy_images_verbatim(session, out, chunk)
            store.commit(out)
        finally:
            out.close()
    logger.info("splitDatabase: wrote %s with counts %s", out_names, counts)
    return counts


def _copy_images_verbatim(src: Session, dst: Session, imagefiles: list[str]) -> None:
    """Copy image rows and all dependent rows, preserving every id."""
    for imagefile in imagefiles:
        row = src.execute("SELECT * FROM images WHERE imagefile = ?", (imagefile,)).fetchone()
        dst.execute("INSERT INTO images VALUES (?,?,?,?,?,?)", row)
        for obj_row in src.execute(
            "SELECT * FROM objects WHERE imagefile = ? ORDER BY objectid", (imagefile,)
        ).fetchall():
            dst.execute("INSERT INTO objects VALUES (?,?,?,?,?,?,?,?)", obj_row)
            objectid = obj_row[0]
            for table, width in (("properties", 4), ("polygons", 5), ("matches", 3)):
                marks = ",".join("?" * width)
                for dep in src.execute(
                    f"SELECT * FROM {table} WHERE objectid = ? ORDER BY id", (objectid,)
                ).fetchall():
                    dst.execute(f"INSERT INTO {table} VALUES ({marks})", dep)
    dst.mark_dirty()


def crop_objects(
    session: Session,
    target_width: int,
    target_height: int,
    edges: str,
    image_pictures_dir: str,
    jpeg_quality: int = media.JPEG_QUALITY,
) -> int:
    """Crop each object's box region to its own image file and rewrite the
    database so every crop is an image holding exactly that one object.

    Crop files are named {objectid}.jpg. Properties, polygons (coordinate
    transformed into crop space), and match rows follow the object. Objects
    whose source image is unreadable or whose box rounds to zero area are
    skipped and reported via the log.
    """
    if edges not in media.EDGE_POLICIES:
        raise ValueError(f"unknown edges policy {edges!r}; expected one of {media.EDGE_POLICIES}")
    os.makedirs(image_pictures_dir, exist_ok=True)

    crops = []
    buffers: dict[str, media.PixelBuffer | None] = {}
    for entry in store.iterate_objects(session):
        obj = entry.object
        if not obj.has_box:
            logger.warning("cropObjects: objectid=%d has no box, skipped", obj.objectid)
            continue
        if obj.imagefile not in buffers:
            try:
                buffers[obj.imagefile] = media.read_image(session.rootdir, obj.imagefile)
            except (FileNotFoundError, media.MediaError) as exc:
                logger.warning("cropObjects: cannot read '%s': %s", obj.imagefile, exc)
                buffers[obj.imagefile] = None
        buf = buffers[obj.imagefile]
        if buf is None:
            continue

        x0, y0, w0, h0 = media.box_to_grid(obj.x, obj.y, obj.width, obj.height)
        if w0 <= 0 or h0 <= 0:
            logger.warning("cropObjects: objectid=%d has a zero-area box, skipped", obj.objectid)
            continue
        try:
            crop = media.crop_and_resize(
                buf, (obj.x, obj.y, obj.width, obj.height), target_width, target_height, edges
            )
        except ValueError as exc:
            logger.warning("cropObjects: objectid=%d skipped: %s", obj.objectid, exc)
            continue

        crop_path = os.path.join(image_pictures_dir, f"{obj.objectid}.jpg")
        media.write_image(crop, crop_path, jpeg_quality=jpeg_quality)

        if edges == media.DISTORT:
            sx, sy = target_width / w0, target_height / h0
            ox, oy = 0.0, 0.0
            content_box = (0.0, 0.0, float(target_width), float(target_height))
        elif edges == media.ORIGINAL:
            sx = sy = 1.0
            ox, oy = 0.0, 0.0
            content_box = (0.0, 0.0, float(w0), float(h0))
        else:
            ox_i, oy_i, cw, ch = media.letterbox_geometry(w0, h0, target_width, target_height)
            sx, sy = cw / w0, ch / h0
            ox, oy = float(ox_i), float(oy_i)
            content_box = (ox, oy, float(cw), float(ch))

        points = [
            ((p.x - x0) * sx + ox, (p.y - y0) * sy + oy, p.name)
            for p in entry.polygon_points
        ]
        crops.append(
            {
                "objectid": obj.objectid,
                "imagefile": os.path.relpath(crop_path, session.rootdir),
                "size": (crop.width, crop.height),
                "box": content_box,
                "name": obj.name,
                "score": obj.score,
                "properties": [(p.key, p.value) for p in entry.properties],
                "points": points,
                "matches": [m.match for m in store.object_matches(session, obj.objectid)],
            }
        )

    for table in store.TABLES:
        session.execute(f"DELETE FROM {table}")
    for crop in crops:
        store.add_image(
            session, crop["imagefile"], width=crop["size"][0], height=crop["size"][1]
        )
        session.execute(
            "INSERT INTO objects(objectid, imagefile, x, y, width, height, name, score) "
            "VALUES (?,?,?,?,?,?,?,?)",
            (crop["objectid"], crop["imagefile"], *crop["box"], crop["name"], crop["score"]),
        )
        for key, value in crop["properties"]:
            store.add_property(session, crop["objectid"], key, value)
        for px, py, pname in crop["points"]:
            store.add_polygon_point(session, crop["objectid"], px, py, pname)
        for match in crop["matches"]:
            store.add_match(session, crop["objectid"], match)
    session.mark_dirty()
    logger.info("cropObjects: wrote %d crops to %s", len(crops), image_pictures_dir)
    return len(crops)

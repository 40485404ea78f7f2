"""KITTI object-label text format (read and write).

One whitespace-delimited text file per image. Line layout:

    type truncated occluded alpha left top right bottom
    dim_height dim_width dim_length loc_x loc_y loc_z rotation_y [score]

15 fields per line, or 16 when a detection confidence is appended. Numeric
tokens beyond the box are kept verbatim as object properties so a re-export
reproduces them exactly.
"""
from __future__ import annotations

import logging
import os
from pathlib import Path

from .. import media, store
from ..errors import ExportError
from ..records import ImportReport
from ..store import Session

logger = logging.getLogger(__name__)

PROPERTY_KEYS = (
    "truncated",
    "occluded",
    "alpha",
    "dim_height",
    "dim_width",
    "dim_length",
    "loc_x",
    "loc_y",
    "loc_z",
    "rotation_y",
)

# KITTI's own "don't care" sentinels, used when an exported object lacks a property.
EXPORT_DEFAULTS = {
    "truncated": "0",
    "occluded": "0",
    "alpha": "-10",
    "dim_height": "-1",
    "dim_width": "-1",
    "dim_length": "-1",
    "loc_x": "-1",
    "loc_y": "-1",
    "loc_z": "-1",
    "rotation_y": "-10",
}

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


def parse_label_line(line: str) -> dict:
    """Split one label line into name, box, properties, and optional score.

    Raises ValueError on a wrong field count or a non-numeric numeric field.
    """
    fields = line.split()
    if len(fields) not in (15, 16):
        raise ValueError(f"expected 15 or 16 fields, got {len(fields)}")
    numbers = [float(f) for f in fields[1:]]
    left, top, right, bottom = numbers[3:7]
    record = {
        "name": fields[0],
        "x": left,
        "y": top,
        "width": right - left,
        "height": bottom - top,
        "score": numbers[14] if len(fields) == 16 else None,
        # raw tokens, keyed in line order after the box fields are pulled out
        "properties": dict(zip(("truncated", "occluded", "alpha"), fields[1:4]))
        | dict(zip(PROPERTY_KEYS[3:], fields[8:15])),
    }
    return record


def parse_label_file(path: str) -> list[dict]:
    with open(path) as f:
        return [parse_label_line(line) for line in f if line.strip()]


def list_images(images_dir: str) -> list[str]:
    return sorted(
        os.path.join(images_dir, name)
        for name in os.listdir(images_dir)
        if name.lower().endswith(IMAGE_EXTENSIONS)
    )


def import_kitti(session: Session, images_dir: str, detection_dir: str | None) -> ImportReport:
    """One image row per image file; one object per label line of its stem-matched file."""
    report = ImportReport()
    for image_path in list_images(images_dir):
        try:
            width, height = media.image_size(image_path)
        except Exception as exc:
            report.skipped.append((image_path, f"unreadable image: {exc}"))
            continue
        imagefile = os.path.relpath(image_path, session.rootdir)
        store.add_image(session, imagefile, width=width, height=height)
        report.images_added += 1

        if detection_dir is None:
            continue
        label_path = os.path.join(detection_dir, Path(image_path).stem + ".txt")
        if not os.path.exists(label_path):
            continue
        try:
            records = parse_label_file(label_path)
        except ValueError as exc:
            report.skipped.append((label_path, str(exc)))
            continue
        for rec in records:
            objectid = store.add_object(
                session,
                imagefile,
                x=rec["x"],
                y=rec["y"],
                width=rec["width"],
                height=rec["height"],
                name=rec["name"],
                score=rec["score"],
            )
            for key, value in rec["properties"].items():
                store.add_property(session, objectid, key, value)
            report.objects_added += 1
    logger.info(
        "importKitti: %d images, %d objects, %d files skipped",
        report.images_added,
        report.objects_added,
        report.files_skipped,
    )
    return report


def _format_float(v: float) -> str:
    text = f"{v:.6f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def export_kitti(session: Session, detection_dir: str) -> int:
    """Write one label file per image; returns the number of files written.

    Every exported object must carry a box. Properties are written verbatim
    when present, else the documented sentinel defaults.
    """
    os.makedirs(detection_dir, exist_ok=True)
    entries_by_image: dict[str, list] = {}
    for entry in store.iterate_objects(session):
        if not entry.object.has_box:
            raise ExportError(
                f"object without a box cannot be exported: objectid={entry.object.objectid}"
            )
        entries_by_image.setdefault(entry.object.imagefile, []).append(entry)

    written = 0
    seen_stems: dict[str, str] = {}
    for image in store.iterate_images(session):
        stem = Path(image.imagefile).stem
        if stem in seen_stems:
            raise ExportError(
                f"label filename collision: '{image.imagefile}' and '{seen_stems[stem]}' "
                f"both map to {stem}.txt"
            )
        seen_stems[stem] = image.imagefile
        lines = []
        for entry in entries_by_image.get(image.imagefile, []):
            obj = entry.object
            props = {p.key: p.value for p in entry.properties}
            fields = [obj.name if obj.name is not None else "DontCare"]
            fields += [str(props.get(k, EXPORT_DEFAULTS[k])) for k in ("truncated", "occluded", "alpha")]
            fields += [
                _format_float(obj.x),
                _format_float(obj.y),
                _format_float(obj.x + obj.width),
                _format_float(obj.y + obj.height),
            ]
            fields += [str(props.get(k, EXPORT_DEFAULTS[k])) for k in PROPERTY_KEYS[3:]]
            if obj.score is not None:
                fields.append(_format_float(obj.score))
            lines.append(" ".join(fields))
        with open(os.path.join(detection_dir, stem + ".txt"), "w") as f:
            f.write("\n".join(lines) + ("\n" if lines else ""))
        written += 1
    return written

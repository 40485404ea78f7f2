"""LabelMe annotation XML (read).

Per <object>: a <name>, a <deleted> flag, and one or more <polygon> elements
whose <pt> points are kept in file order (the closed-polygon ordering).
Objects get no box fields; polygonsToBoxes derives boxes on demand.
"""
from __future__ import annotations

import logging
import os
import xml.etree.ElementTree as ET
from pathlib import Path

from .. import media, store
from ..records import ImportReport
from ..store import Session
from .kitti import IMAGE_EXTENSIONS

logger = logging.getLogger(__name__)


def _find_image(images_dir: str, xml_path: str, filename: str | None) -> str | None:
    if filename:
        candidate = os.path.join(images_dir, filename.strip())
        if os.path.exists(candidate):
            return candidate
    stem = Path(xml_path).stem
    for ext in IMAGE_EXTENSIONS:
        candidate = os.path.join(images_dir, stem + ext)
        if os.path.exists(candidate):
            return candidate
    return None


def _polygon_name(polygon: ET.Element, index: int, total: int) -> str | None:
    username = polygon.findtext("username")
    if username and username.strip():
        return username.strip()
    return None if total == 1 else str(index)


def import_labelme(session: Session, images_dir: str, annotations_dir: str) -> ImportReport:
    report = ImportReport()
    for name in sorted(os.listdir(annotations_dir)):
        if not name.lower().endswith(".xml"):
            continue
        xml_path = os.path.join(annotations_dir, name)
        try:
            root = ET.parse(xml_path).getroot()
        except ET.ParseError as exc:
            report.skipped.append((xml_path, f"malformed XML: {exc}"))
            continue

        image_path = _find_image(images_dir, xml_path, root.findtext("filename"))
        if image_path is None:
            report.skipped.append((xml_path, "image not found"))
            continue

        nrows = root.findtext("imagesize/nrows")
        ncols = root.findtext("imagesize/ncols")
        if nrows and ncols:
            width, height = int(float(ncols)), int(float(nrows))
        else:
            width, height = media.image_size(image_path)
        imagefile = os.path.relpath(image_path, session.rootdir)
        store.add_image(session, imagefile, width=width, height=height)
        report.images_added += 1

        for obj in root.iterfind("object"):
            deleted = (obj.findtext("deleted") or "0").strip()
            if deleted == "1":
                continue
            objectid = store.add_object(session, imagefile, name=(obj.findtext("name") or "").strip() or None)
            polygons = obj.findall("polygon")
            for index, polygon in enumerate(polygons):
                poly_name = _polygon_name(polygon, index, len(polygons))
                for pt in polygon.iterfind("pt"):
                    store.add_polygon_point(
                        session,
                        objectid,
                        float(pt.findtext("x")),
                        float(pt.findtext("y")),
                        name=poly_name,
                    )
            report.objects_added += 1
    logger.info(
        "importLabelme: %d images, %d objects, %d files skipped",
        report.images_added,
        report.objects_added,
        report.files_skipped,
    )
    return report

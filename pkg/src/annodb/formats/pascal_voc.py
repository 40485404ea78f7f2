"""PASCAL VOC annotation XML (read).

One XML file per image with a <size> element and <object> entries carrying
<name> and <bndbox> corners xmin/ymin/xmax/ymax. Corner convention:
width = xmax - xmin (no +1), kept as reals.
"""
from __future__ import annotations

import logging
import os
import xml.etree.ElementTree as ET
from pathlib import Path

from .. import store
from ..records import ImportReport
from ..store import Session
from .kitti import IMAGE_EXTENSIONS

logger = logging.getLogger(__name__)

FLAG_PROPERTIES = ("difficult", "truncated", "pose")


def _find_image(images_dir: str, xml_path: str, filename: str | None) -> str | None:
    if filename:
        candidate = os.path.join(images_dir, filename)
        if os.path.exists(candidate):
            return candidate
    stem = Path(xml_path).stem
    for ext in IMAGE_EXTENSIONS:
        candidate = os.path.join(images_dir, stem + ext)
        if os.path.exists(candidate):
            return candidate
    return None


def import_pascal_voc(session: Session, images_dir: str, annotations_dir: str) -> ImportReport:
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

        filename = root.findtext("filename")
        image_path = _find_image(images_dir, xml_path, filename)
        if image_path is None:
            report.skipped.append((xml_path, "image not found"))
            continue

        size = root.find("size")
        width = int(float(size.findtext("width"))) if size is not None else None
        height = int(float(size.findtext("height"))) if size is not None else None
        imagefile = os.path.relpath(image_path, session.rootdir)
        store.add_image(session, imagefile, width=width, height=height)
        report.images_added += 1

        for obj in root.iterfind("object"):
            bndbox = obj.find("bndbox")
            if bndbox is None:
                continue
            xmin = float(bndbox.findtext("xmin"))
            ymin = float(bndbox.findtext("ymin"))
            xmax = float(bndbox.findtext("xmax"))
            ymax = float(bndbox.findtext("ymax"))
            objectid = store.add_object(
                session,
                imagefile,
                x=xmin,
                y=ymin,
                width=xmax - xmin,
                height=ymax - ymin,
                name=obj.findtext("name"),
            )
            for key in FLAG_PROPERTIES:
                value = obj.findtext(key)
                if value is not None:
                    store.add_property(session, objectid, key, value.strip())
            report.objects_added += 1
    logger.info(
        "importPascalVoc: %d images, %d objects, %d files skipped",
        report.images_added,
        report.objects_added,
        report.files_skipped,
    )
    return report

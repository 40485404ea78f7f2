"""JSON HTTP API over one open session, backing the inspector web app.

Edits accumulate in the session and persist only via POST /api/commit,
mirroring the command line's -i/-o lifecycle. Read-only sessions reject
every mutating endpoint with 403. One database per process; binds to
loopback by default.

Image ids in URLs are URL-safe base64 encodings of the imagefile text.
"""
from __future__ import annotations

import base64
import io
import logging
import mimetypes
import os
import random
import threading

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Query, Response

from . import info, media, store
from .errors import PredicateError, ReadOnlySessionError
from .store import Session

logger = logging.getLogger(__name__)

MAX_PAGE_LIMIT = 1000


def encode_image_id(imagefile: str) -> str:
    return base64.urlsafe_b64encode(imagefile.encode()).decode().rstrip("=")

def decode_image_id(image_id: str) -> str:
    padded = image_id + "=" * (-len(image_id) % 4)
    try:
        return base64.urlsafe_b64decode(padded.encode()).decode()
    except Exception:
        raise HTTPException(status_code=404, detail="malformed image id")


# 20 visually distinct colors; labels and match groups cycle through them.
PALETTE = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
    (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60), (250, 190, 212),
    (0, 128, 128), (220, 190, 255), (170, 110, 40), (255, 250, 200), (128, 0, 0),
    (170, 255, 195), (128, 128, 0), (255, 215, 180), (0, 0, 128), (128, 128, 128),
]


def colorize_mask(labels: np.ndarray) -> np.ndarray:
    out = np.zeros((*labels.shape, 3), dtype=np.uint8)
    for label in np.unique(labels):
        if label == 0:
            continue
        out[labels == label] = PALETTE[int(label) % len(PALETTE)]
    return out


def _object_payload(session: Session, objectid: int) -> dict:
    obj = store.get_object(session, objectid)
    if obj is None:
        raise HTTPException(status_code=404, detail=f"no object with objectid {objectid}")
    polygons: dict[str | None, list] = {}
    for point in store.object_polygon_points(session, objectid):
        polygons.setdefault(point.name, []).append([point.x, point.y])
    return {
        "objectid": obj.objectid,
        "imagefile": obj.imagefile,
        "x": obj.x,
        "y": obj.y,
        "width": obj.width,
        "height": obj.height,
        "name": obj.name,
        "score": obj.score,
        "properties": [
            {"key": p.key, "value": p.value} for p in store.object_properties(session, objectid)
        ],
        "polygons": [
            {"name": name, "points": points} for name, points in polygons.items()
        ],
        "matches": [m.match for m in store.object_matches(session, objectid)],
    }


def build_app(session: Session, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="annotation database inspector")
    lock = threading.RLock()

    def require_writable() -> None:
        if not session.writable:
            raise HTTPException(status_code=403, detail="read-only session")

    @app.get("/api/info")
    def api_info():
        with lock:
            payload = info.get_info(session)
        payload["mode"] = session.mode
        payload["writable"] = session.writable
        payload["dirty"] = session.dirty
        return payload

    @app.get("/api/images")
    def api_images(
        offset: int = Query(0, ge=0),
        limit: int = Query(100, ge=1),
        where: str | None = None,
        shuffle: bool = False,
        seed: int = 0,
    ):
        if limit > MAX_PAGE_LIMIT:
            raise HTTPException(status_code=400, detail=f"limit must be <= {MAX_PAGE_LIMIT}")
        with lock:
            try:
                images = list(store.iterate_images(session, where))
            except PredicateError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            if shuffle:
                random.Random(seed).shuffle(images)
            page = images[offset : offset + limit]
            summaries = []
            for image in page:
                n_objects = session.execute(
                    "SELECT COUNT(*) FROM objects WHERE imagefile = ?", (image.imagefile,)
                ).fetchone()[0]
                summaries.append(
                    {
                        "id": encode_image_id(image.imagefile),
                        "imagefile": image.imagefile,
                        "width": image.width,
                        "height": image.height,
                        "name": image.name,
                        "has_mask": image.maskfile is not None,
                        "n_objects": n_objects,
                    }
                )
        return {"total": len(images), "offset": offset, "limit": limit, "images": summaries}

    def _lookup_image(image_id: str):
        imagefile = decode_image_id(image_id)
        image = store.get_image(session, imagefile)
        if image is None:
            raise HTTPException(status_code=404, detail=f"no image '{imagefile}'")
        return image

    @app.get("/api/images/{image_id}/bytes")
    def api_image_bytes(image_id: str):
        with lock:
            image = _lookup_image(image_id)
        path = os.path.join(session.rootdir, image.imagefile)
        if not os.path.exists(path):
            raise HTTPException(status_code=404, detail=f"image file missing: {path}")
        with open(path, "rb") as f:
            data = f.read()
        media_type = mimetypes.guess_type(path)[0] or "application/octet-stream"
        return Response(content=data, media_type=media_type)

    @app.get("/api/images/{image_id}/mask")
    def api_image_mask(image_id: str):
        with lock:
            image = _lookup_image(image_id)
        if image.maskfile is None:
            raise HTTPException(status_code=404, detail="image has no maskfile")
        try:
            labels = media.read_mask(session.rootdir, image.maskfile).data[:, :, 0]
        except (FileNotFoundError, media.MediaError) as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        from PIL import Image as PILImage

        out = io.BytesIO()
        PILImage.fromarray(colorize_mask(labels)).save(out, format="PNG")
        return Response(content=out.getvalue(), media_type="image/png")

    @app.get("/api/images/{image_id}/objects")
    def api_image_objects(image_id: str):
        with lock:
            image = _lookup_image(image_id)
            objectids = [
                row[0]
                for row in session.execute(
                    "SELECT objectid FROM objects WHERE imagefile = ? ORDER BY objectid",
                    (image.imagefile,),
                )
            ]
            return [_object_payload(session, objectid) for objectid in objectids]

    @app.get("/api/objects/{objectid}/crop")
    def api_object_crop(objectid: int):
        with lock:
            obj = store.get_object(session, objectid)
            if obj is None:
                raise HTTPException(status_code=404, detail=f"no object with objectid {objectid}")
            if not obj.has_box:
                raise HTTPException(status_code=400, detail="object has no box")
        try:
            buf = media.read_image(session.rootdir, obj.imagefile)
            crop = media.crop_and_resize(buf, (obj.x, obj.y, obj.width, obj.height), 0, 0, media.ORIGINAL)
        except (FileNotFoundError, media.MediaError) as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        from PIL import Image as PILImage

        out = io.BytesIO()
        PILImage.fromarray(crop.data if crop.channels > 1 else crop.data[:, :, 0]).save(
            out, format="JPEG", quality=media.JPEG_QUALITY
        )
        return Response(content=out.getvalue(), media_type="image/jpeg")

    @app.patch("/api/objects/{objectid}")
    def api_update_object(objectid: int, payload: dict = Body(...)):
        require_writable()
        if "name" not in payload:
            raise HTTPException(status_code=400, detail="payload must carry 'name'")
        with lock:
            try:
                store.update_object_name(session, objectid, payload["name"])
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc.args[0]))
            return _object_payload(session, objectid)

    @app.post("/api/matches")
    def api_create_match(payload: dict = Body(...)):
        require_writable()
        objectids = payload.get("objectids")
        if not isinstance(objectids, list) or len(set(objectids)) < 2:
            raise HTTPException(status_code=400, detail="need >= 2 distinct objectids")
        with lock:
            for objectid in objectids:
                if store.get_object(session, objectid) is None:
                    raise HTTPException(
                        status_code=404, detail=f"no object with objectid {objectid}"
                    )
            match = store.new_match_value(session)
            for objectid in dict.fromkeys(objectids):
                store.add_match(session, objectid, match)
        return {"match": match, "objectids": list(dict.fromkeys(objectids))}

    @app.delete("/api/matches/{match}")
    def api_delete_match(match: int):
        require_writable()
        with lock:
            cursor = session.execute("DELETE FROM matches WHERE match = ?", (match,))
            if cursor.rowcount == 0:
                raise HTTPException(status_code=404, detail=f"no match group {match}")
            session.mark_dirty()
        return {"match": match, "deleted": cursor.rowcount}

    @app.post("/api/commit")
    def api_commit():
        with lock:
            try:
                store.commit(session)
            except ReadOnlySessionError as exc:
                raise HTTPException(status_code=403, detail=str(exc))
        return {"committed": True, "path": session.write_path}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app


def serve(session: Session, port: int = 8000, host: str = "127.0.0.1", static_dir: str | None = None):
    """Run the API until interrupted."""
    import uvicorn

    app = build_app(session, static_dir=static_dir)
    logger.info("serving on http://%s:%d/ (mode: %s)", host, port, session.mode)
    uvicorn.run(app, host=host, port=port, log_level="warning")

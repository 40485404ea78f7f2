"""Pixel access: the only module that touches image bytes.

Everything else treats imagefile/maskfile as opaque text keys resolved
against a root directory.

Box-to-pixel-grid rounding is fixed for reproducible crops:
origin = (floor(x), floor(y)), extent = (round(w), round(h)) with
round(v) = floor(v + 0.5).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import MediaError

DISTORT = "distort"
CONSTANT = "constant"
ORIGINAL = "original"
EDGE_POLICIES = (DISTORT, CONSTANT, ORIGINAL)

JPEG_QUALITY = 90


@dataclass
class PixelBuffer:
    """Row-major pixel data: shape (height, width, channels)."""

    width: int
    height: int
    channels: int
    data: np.ndarray

    @classmethod
    def from_array(cls, array: np.ndarray) -> "PixelBuffer":
        if array.ndim == 2:
            array = array[:, :, None]
        h, w, c = array.shape
        return cls(width=w, height=h, channels=c, data=array)


def _resolve(rootdir: str, relfile: str) -> str:
    return os.path.join(rootdir, relfile)


def image_size(path: str) -> tuple[int, int]:
    """(width, height) without decoding pixel data."""
    try:
        with Image.open(path) as im:
            return im.size
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise MediaError(f"cannot read image header of {path}: {exc}") from exc


def read_image(rootdir: str, imagefile: str) -> PixelBuffer:
    """Decode a PNG or JPEG into a 3-channel buffer."""
    path = _resolve(rootdir, imagefile)
    if not os.path.exists(path):
        raise FileNotFoundError(f"image not found: {path}")
    try:
        with Image.open(path) as im:
            array = np.asarray(im.convert("RGB"))
    except Exception as exc:
        raise MediaError(f"cannot decode image {path}: {exc}") from exc
    return PixelBuffer.from_array(array)


def read_mask(rootdir: str, maskfile: str) -> PixelBuffer:
    """Decode a single-channel (or palettized) PNG of integer labels."""
    path = _resolve(rootdir, maskfile)
    if not os.path.exists(path):
        raise FileNotFoundError(f"mask not found: {path}")
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "P", "I", "I;16"):
                array = np.asarray(im)
            else:
                raise MediaError(
                    f"mask {path} has mode {im.mode}; expected a single-channel label map"
                )
    except MediaError:
        raise
    except Exception as exc:
        raise MediaError(f"cannot decode mask {path}: {exc}") from exc
    if array.ndim != 2:
        raise MediaError(f"mask {path} is not single-channel")
    return PixelBuffer.from_array(array.astype(np.int32))


def write_image(buf: PixelBuffer | np.ndarray, path: str, jpeg_quality: int = JPEG_QUALITY) -> None:
    array = buf.data if isinstance(buf, PixelBuffer) else buf
    if array.ndim == 3 and array.shape[2] == 1:
        array = array[:, :, 0]
    im = Image.fromarray(array.astype(np.uint8))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    if path.lower().endswith((".jpg", ".jpeg")):
        im.save(path, quality=jpeg_quality)
    else:
        im.save(path)


def write_mask(labels: np.ndarray, path: str) -> None:
    """Write integer labels as a lossless single-channel PNG."""
    if labels.ndim == 3:
        labels = labels[:, :, 0]
    if labels.max(initial=0) > 255 or labels.min(initial=0) < 0:
        raise MediaError("mask labels must fit uint8")
    im = Image.fromarray(labels.astype(np.uint8), mode="L")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    im.save(path)


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def box_to_grid(x: float, y: float, w: float, h: float) -> tuple[int, int, int, int]:
    """Snap a real-valued box onto the pixel grid per the documented rule."""
    return math.floor(x), math.floor(y), round_half_up(w), round_half_up(h)


def resize_bilinear(array: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resampling with half-pixel-center alignment and edge clamping."""
    if out_w <= 0 or out_h <= 0:
        raise ValueError("target dimensions must be positive")
    h, w = array.shape[:2]
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[None, :, None]
    fy = (ys - y0)[:, None, None]
    src = array.astype(np.float64)
    top = src[y0[:, None], x0[None, :]] * (1 - fx) + src[y0[:, None], x1[None, :]] * fx
    bottom = src[y1[:, None], x0[None, :]] * (1 - fx) + src[y1[:, None], x1[None, :]] * fx
    out = top * (1 - fy) + bottom * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def extract_region(buf: PixelBuffer, x0: int, y0: int, w0: int, h0: int) -> np.ndarray:
    """Copy a region, zero-padding the portions outside the buffer."""
    out = np.zeros((h0, w0, buf.channels), dtype=buf.data.dtype)
    sx0, sy0 = max(x0, 0), max(y0, 0)
    sx1, sy1 = min(x0 + w0, buf.width), min(y0 + h0, buf.height)
    if sx1 > sx0 and sy1 > sy0:
        out[sy0 - y0 : sy1 - y0, sx0 - x0 : sx1 - x0] = buf.data[sy0:sy1, sx0:sx1]
    return out


def letterbox_geometry(w0: int, h0: int, target_w: int, target_h: int) -> tuple[int, int, int, int]:
    """(offset_x, offset_y, content_w, content_h) of the un-padded region."""
    scale = min(target_w / w0, target_h / h0)
    content_w = max(round_half_up(w0 * scale), 1)
    content_h = max(round_half_up(h0 * scale), 1)
    content_w = min(content_w, target_w)
    content_h = min(content_h, target_h)
    return (target_w - content_w) // 2, (target_h - content_h) // 2, content_w, content_h


def crop_and_resize(
    buf: PixelBuffer,
    box: tuple[float, float, float, float],
    target_w: int,
    target_h: int,
    policy: str,
) -> PixelBuffer:
    """Crop the box region (zero-padded outside the buffer) and apply the edge policy.

    distort:  rescale to (target_w, target_h) ignoring aspect
    constant: letterbox with black to target aspect, then rescale
    original: return the unscaled crop
    """
    if policy not in EDGE_POLICIES:
        raise ValueError(f"unknown edge policy {policy!r}; expected one of {EDGE_POLICIES}")
    x0, y0, w0, h0 = box_to_grid(*box)
    if w0 <= 0 or h0 <= 0:
        raise ValueError(f"zero-area box {box}")
    if x0 + w0 <= 0 or y0 + h0 <= 0 or x0 >= buf.width or y0 >= buf.height:
        raise ValueError(f"box {box} does not intersect the {buf.width}x{buf.height} buffer")
    crop = extract_region(buf, x0, y0, w0, h0)
    if policy == ORIGINAL:
        return PixelBuffer.from_array(crop)
    if target_w <= 0 or target_h <= 0:
        raise ValueError("target dimensions must be positive")
    if policy == DISTORT:
        return PixelBuffer.from_array(resize_bilinear(crop, target_w, target_h))
    ox, oy, cw, ch = letterbox_geometry(w0, h0, target_w, target_h)
    content = resize_bilinear(crop, cw, ch)
    out = np.zeros((target_h, target_w, buf.channels), dtype=np.uint8)
    out[oy : oy + ch, ox : ox + cw] = content
    return PixelBuffer.from_array(out)

from __future__ import annotations

import random

import numpy as np
import pytest
from PIL import Image

from annodb import store


@pytest.fixture
def session():
    s = store.open_session()
    yield s
    s.close()


def make_png(path, width, height, seed=0):
    rng = np.random.default_rng(seed)
    array = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    Image.fromarray(array).save(path)
    return path


def gradient_png(path, width, height):
    """Deterministic gradient, useful for checking geometric transforms."""
    xs = np.linspace(0, 255, width, dtype=np.uint8)
    array = np.stack([np.tile(xs, (height, 1))] * 3, axis=-1)
    Image.fromarray(array).save(path)
    return path


def random_kitti_line(rng: random.Random, img_w: int, img_h: int, name=None, with_score=False):
    """One KITTI label line with randomized numeric fields, as raw text."""
    left = round(rng.uniform(0, img_w - 2), 2)
    top = round(rng.uniform(0, img_h - 2), 2)
    right = round(rng.uniform(left + 0.5, img_w), 2)
    bottom = round(rng.uniform(top + 0.5, img_h), 2)
    fields = [
        name or rng.choice(["Car", "Van", "Truck", "Pedestrian", "Cyclist", "Tram"]),
        f"{rng.uniform(0, 1):.2f}",
        str(rng.randint(0, 3)),
        f"{rng.uniform(-3.14, 3.14):.2f}",
        f"{left:.2f}",
        f"{top:.2f}",
        f"{right:.2f}",
        f"{bottom:.2f}",
        f"{rng.uniform(0.5, 4):.2f}",
        f"{rng.uniform(0.5, 4):.2f}",
        f"{rng.uniform(0.5, 10):.2f}",
        f"{rng.uniform(-40, 40):.2f}",
        f"{rng.uniform(-3, 3):.2f}",
        f"{rng.uniform(0, 120):.2f}",
        f"{rng.uniform(-3.14, 3.14):.2f}",
    ]
    if with_score:
        fields.append(f"{rng.uniform(0, 1):.4f}")
    return " ".join(fields)


def make_kitti_corpus(
    root,
    n_images: int,
    n_objects: int,
    seed: int = 0,
    image_size=(64, 48),
    tiny_images: bool = False,
):
    """Synthetic KITTI-layout dataset under root: images/ and labels/.

    Objects are distributed round-robin over images. Returns (images_dir,
    labels_dir, lines_by_stem).
    """
    rng = random.Random(seed)
    images_dir = root / "images"
    labels_dir = root / "labels"
    images_dir.mkdir(parents=True, exist_ok=True)
    labels_dir.mkdir(parents=True, exist_ok=True)
    width, height = image_size
    lines_by_stem = {}
    for i in range(n_images):
        stem = f"{i:06d}"
        if tiny_images:
            Image.new("RGB", (width, height), (i % 256, 0, 0)).save(images_dir / f"{stem}.png")
        else:
            make_png(images_dir / f"{stem}.png", width, height, seed=i)
        lines_by_stem[stem] = []
    stems = sorted(lines_by_stem)
    for j in range(n_objects):
        stem = stems[j % len(stems)]
        lines_by_stem[stem].append(random_kitti_line(rng, width, height))
    for stem, lines in lines_by_stem.items():
        (labels_dir / f"{stem}.txt").write_text("\n".join(lines) + ("\n" if lines else ""))
    return images_dir, labels_dir, lines_by_stem


def add_boxed_object(session, imagefile, box, name=None, score=None):
    x, y, w, h = box
    return store.add_object(session, imagefile, x=x, y=y, width=w, height=h, name=name, score=score)

#!/usr/bin/env python3
"""Generate a synthetic KITTI-layout dataset for demos and benchmarks.

Writes <out>/images/NNNNNN.png and <out>/labels/NNNNNN.txt with randomized
but well-formed object-label lines.
"""
import argparse
import random
from pathlib import Path

import numpy as np
from PIL import Image

NAMES = ["Car", "Van", "Truck", "Pedestrian", "Cyclist", "Tram"]


def label_line(rng, img_w, img_h):
    left = rng.uniform(0, img_w - 2)
    top = rng.uniform(0, img_h - 2)
    right = rng.uniform(left + 1, img_w)
    bottom = rng.uniform(top + 1, img_h)
    values = [
        rng.choice(NAMES),
        f"{rng.uniform(0, 1):.2f}",
        str(rng.randint(0, 3)),
        f"{rng.uniform(-3.14, 3.14):.2f}",
        f"{left:.2f}", f"{top:.2f}", f"{right:.2f}", f"{bottom:.2f}",
        f"{rng.uniform(0.5, 4):.2f}", f"{rng.uniform(0.5, 4):.2f}", f"{rng.uniform(0.5, 10):.2f}",
        f"{rng.uniform(-40, 40):.2f}", f"{rng.uniform(-3, 3):.2f}", f"{rng.uniform(0, 120):.2f}",
        f"{rng.uniform(-3.14, 3.14):.2f}",
    ]
    return " ".join(values)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--n_images", type=int, default=20)
    parser.add_argument("--objects_per_image", type=int, default=4)
    parser.add_argument("--width", type=int, default=320)
    parser.add_argument("--height", type=int, default=96)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    np_rng = np.random.default_rng(args.seed)
    images_dir = args.out / "images"
    labels_dir = args.out / "labels"
    images_dir.mkdir(parents=True, exist_ok=True)
    labels_dir.mkdir(parents=True, exist_ok=True)

    for i in range(args.n_images):
        stem = f"{i:06d}"
        pixels = np_rng.integers(0, 256, size=(args.height, args.width, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(images_dir / f"{stem}.png")
        lines = [label_line(rng, args.width, args.height) for _ in range(args.objects_per_image)]
        (labels_dir / f"{stem}.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {args.n_images} images and label files under {args.out}")


if __name__ == "__main__":
    main()

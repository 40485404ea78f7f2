#!/usr/bin/env python3
"""Compare loading a committed database against re-parsing per-image label
files, on a synthetic corpus of configurable size."""
import argparse
import random
import tempfile
import time
from pathlib import Path

from annodb import info, store
from annodb.formats.kitti import parse_label_file

import sys

sys.path.insert(0, str(Path(__file__).parent))
from make_synthetic_kitti import label_line  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n_images", type=int, default=7481)
    parser.add_argument("--objects_per_image", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    workdir = Path(tempfile.mkdtemp(prefix="annodb_bench_"))
    labels_dir = workdir / "labels"
    labels_dir.mkdir()
    paths = []
    for i in range(args.n_images):
        path = labels_dir / f"{i:06d}.txt"
        lines = [label_line(rng, 1242, 375) for _ in range(args.objects_per_image)]
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)

    db_path = workdir / "corpus.db"
    session = store.open_session(None, str(db_path))
    for i, path in enumerate(paths):
        imagefile = f"images/{i:06d}.png"
        store.add_image(session, imagefile, width=1242, height=375)
        for rec in parse_label_file(path):
            oid = store.add_object(
                session, imagefile, x=rec["x"], y=rec["y"], width=rec["width"],
                height=rec["height"], name=rec["name"], score=rec["score"],
            )
            for key, value in rec["properties"].items():
                store.add_property(session, oid, key, value)
    store.commit(session)
    session.close()

    started = time.perf_counter()
    session = store.open_session(str(db_path))
    info.get_info(session)
    session.close()
    db_elapsed = time.perf_counter() - started

    started = time.perf_counter()
    for path in paths:
        parse_label_file(path)
    reparse_elapsed = time.perf_counter() - started

    print(f"images: {args.n_images}, objects/image: {args.objects_per_image}")
    print(f"open db + printInfo: {db_elapsed * 1000:8.1f} ms")
    print(f"re-parse label files: {reparse_elapsed * 1000:8.1f} ms")
    print(f"ratio: {reparse_elapsed / db_elapsed:.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""End-to-end demo: import a synthetic dataset, chain box-prep operations,
and crop objects into their own images.

Creates a scratch directory, then runs the equivalent of:

    annodb -o demo.db importKitti ...
    annodb -i demo.db -o prepped.db \
        expandBoxes --expand_perc=0.2 \
        '|' filterObjectsByIntersection --intersection_thresh_perc=0.3 \
        '|' filterObjectsAtBorder \
        '|' cropObjects --edges=distort --target_width=64 --target_height=64 \
            --image_pictures_dir=crops
"""
import argparse
import subprocess
import sys
import tempfile
from pathlib import Path

from annodb import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=None)
    args = parser.parse_args()
    workdir = args.workdir or Path(tempfile.mkdtemp(prefix="annodb_demo_"))
    workdir.mkdir(parents=True, exist_ok=True)

    subprocess.run(
        [
            sys.executable,
            str(Path(__file__).with_name("make_synthetic_kitti.py")),
            "--out", str(workdir / "data"),
            "--n_images", "12",
        ],
        check=True,
    )

    db = workdir / "demo.db"
    code = cli.main(
        [
            "-o", str(db), "--relpath", str(workdir),
            "importKitti",
            f"--images_dir={workdir / 'data' / 'images'}",
            f"--detection_dir={workdir / 'data' / 'labels'}",
        ]
    )
    assert code == 0, "import failed"

    prepped = workdir / "prepped.db"
    code = cli.main(
        [
            "-i", str(db), "-o", str(prepped), "--relpath", str(workdir),
            "expandBoxes", "--expand_perc=0.2",
            "|", "filterObjectsByIntersection", "--intersection_thresh_perc=0.3",
            "|", "filterObjectsAtBorder",
            "|", "cropObjects", "--edges=distort", "--target_width=64",
            "--target_height=64", f"--image_pictures_dir={workdir / 'crops'}",
        ]
    )
    assert code == 0, "pipeline failed"

    cli.main(["-i", str(prepped), "printInfo"])
    print(f"\ndemo artifacts under {workdir}")
    print(f"inspect with: annodb -i {prepped} --relpath {workdir} serve --port 8000")


if __name__ == "__main__":
    main()

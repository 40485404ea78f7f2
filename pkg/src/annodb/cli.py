"""Command-line front end: global flags, sub-command registry, chaining engine.

Grammar:

    annodb [-i IN_DB_FILE] [-o OUT_DB_FILE] [--relpath RELPATH]
           [--logging {10,20,30,40}] [-h]
           sub-command-1 [sub-arguments-1] ["|" sub-command-2 [sub-arguments-2] ...]

One session spans the whole pipeline: sub-commands run in order against it,
and the session commits at the end iff an out path was given. The chain
separator is the literal token "|" (escape it from the shell).

Exit codes: 0 success, 1 operation error, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Callable

from . import evaluate, filters, formats, info, media, modify, store
from .errors import AnnoDbError
from .store import Session

logger = logging.getLogger(__name__)

PROG = "annodb"


@dataclass
class OpSpec:
    name: str
    description: str
    add_arguments: Callable[[argparse.ArgumentParser], None]
    handler: Callable[[Session, argparse.Namespace], object]


@dataclass
class OpInvocation:
    name: str
    args: argparse.Namespace


@dataclass
class Pipeline:
    in_path: str | None = None
    out_path: str | None = None
    rootdir: str = "."
    logging_level: int = 20
    invocations: list[OpInvocation] = field(default_factory=list)


_REGISTRY: dict[str, OpSpec] = {}


def register_op(
    name: str,
    description: str,
    add_arguments: Callable[[argparse.ArgumentParser], None],
    handler: Callable[[Session, argparse.Namespace], object],
) -> None:
    if name in _REGISTRY:
        raise RuntimeError(f"duplicate sub-command registration: {name}")
    _REGISTRY[name] = OpSpec(name, description, add_arguments, handler)


def registered_ops() -> dict[str, OpSpec]:
    return dict(_REGISTRY)


def _op_parser(spec: OpSpec) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=f"{PROG} {spec.name}", description=spec.description)
    spec.add_arguments(parser)
    return parser


def _global_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, add_help=False)
    parser.add_argument("-i", dest="in_path", default=None, metavar="IN_DB_FILE")
    parser.add_argument("-o", dest="out_path", default=None, metavar="OUT_DB_FILE")
    parser.add_argument("--relpath", default=".", help="root path that all imagefile-s are relative to")
    parser.add_argument("--logging", type=int, choices=(10, 20, 30, 40), default=20)
    parser.add_argument("-h", "--help", action="store_true")
    return parser


def _help_text() -> str:
    lines = [
        f"usage: {PROG} [-i IN_DB_FILE] [-o OUT_DB_FILE] [--relpath RELPATH]",
        f"       {' ' * len(PROG)} [--logging {{10,20,30,40}}] [-h]",
        f"       {' ' * len(PROG)} sub-command-1 [sub-arguments-1] ['|' sub-command-2 ...]",
        "",
        "sub-commands:",
    ]
    width = max((len(name) for name in _REGISTRY), default=0)
    for name in sorted(_REGISTRY):
        lines.append(f"  {name.ljust(width)}  {_REGISTRY[name].description}")
    lines.append("")
    lines.append(f"run '{PROG} <sub-command> -h' for a sub-command's arguments")
    return "\n".join(lines)


def split_segments(tokens: list[str]) -> list[list[str]]:
    """Split at each literal "|" token. Quoted arguments containing a bar
    arrive as single tokens from the shell and are never split."""
    segments: list[list[str]] = [[]]
    for token in tokens:
        if token == "|":
            segments.append([])
        else:
            segments[-1].append(token)
    return [segment for segment in segments if segment] if segments != [[]] else []


def _unknown_op(name: str) -> SystemExit:
    print(
        f"{PROG}: unknown sub-command '{name}'; available: {', '.join(sorted(_REGISTRY))}",
        file=sys.stderr,
    )
    return SystemExit(2)


def parse_command_line(argv: list[str]) -> Pipeline:
    """Parse global flags, then split the rest into sub-command invocations.

    The global section ends at the first token naming a registered
    sub-command, so a later "-h" belongs to that sub-command. Prints help and
    raises SystemExit(0) for top-level -h; raises SystemExit(2) on usage
    errors (unknown sub-command, bad sub-arguments).
    """
    first_op = next((k for k, token in enumerate(argv) if token in _REGISTRY), len(argv))
    globals_ns, unknown = _global_parser().parse_known_args(argv[:first_op])
    if globals_ns.help:
        print(_help_text())
        raise SystemExit(0)
    if unknown:
        raise _unknown_op(unknown[0])

    pipeline = Pipeline(
        in_path=globals_ns.in_path,
        out_path=globals_ns.out_path,
        rootdir=globals_ns.relpath,
        logging_level=globals_ns.logging,
    )
    for segment in split_segments(argv[first_op:]):
        name = segment[0]
        if name not in _REGISTRY:
            raise _unknown_op(name)
        args = _op_parser(_REGISTRY[name]).parse_args(segment[1:])
        pipeline.invocations.append(OpInvocation(name, args))
    if not pipeline.invocations and pipeline.in_path is None and pipeline.out_path is None:
        # nothing to open and nothing to run
        print(_help_text(), file=sys.stderr)
        raise SystemExit(2)
    return pipeline


def run_pipeline(pipeline: Pipeline) -> int:
    logging.basicConfig(
        level=pipeline.logging_level, format="[%(name)s %(levelname)s]: %(message)s", force=True
    )
    try:
        session = store.open_session(
            pipeline.in_path, pipeline.out_path, rootdir=pipeline.rootdir
        )
    except (OSError, AnnoDbError) as exc:
        logger.error("cannot open session: %s", exc)
        return 1

    try:
        for invocation in pipeline.invocations:
            logger.info("=== Running %s ===", invocation.name)
            try:
                _REGISTRY[invocation.name].handler(session, invocation.args)
            except Exception as exc:
                logger.error("error in %s: %s", invocation.name, exc)
                return 1
        if session.mode in (store.CREATE, store.COPY_ON_WRITE):
            try:
                store.commit(session)
            except Exception as exc:
                logger.error("commit failed: %s", exc)
                return 1
            logger.info("Committed.")
        return 0
    finally:
        session.close()


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        pipeline = parse_command_line(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run_pipeline(pipeline)


# --- built-in sub-commands ---


def _no_arguments(parser: argparse.ArgumentParser) -> None:
    pass


def _register_formats() -> None:
    def kitti_args(parser):
        parser.add_argument("--images_dir", required=True)
        parser.add_argument("--detection_dir", default=None)

    def import_kitti(session, args):
        report = formats.import_kitti(session, args.images_dir, args.detection_dir)
        print(f"{report.images_added} images, {report.objects_added} objects")
        return report

    register_op("importKitti", "import KITTI images and object-label text files", kitti_args, import_kitti)

    def voc_args(parser):
        parser.add_argument("--images_dir", required=True)
        parser.add_argument("--annotations_dir", required=True)

    def import_voc(session, args):
        report = formats.import_pascal_voc(session, args.images_dir, args.annotations_dir)
        print(f"{report.images_added} images, {report.objects_added} objects")
        return report

    register_op("importPascalVoc", "import PASCAL VOC annotation XML files", voc_args, import_voc)

    def import_labelme(session, args):
        report = formats.import_labelme(session, args.images_dir, args.annotations_dir)
        print(f"{report.images_added} images, {report.objects_added} objects")
        return report

    register_op("importLabelme", "import LabelMe polygon annotation XML files", voc_args, import_labelme)

    def export_kitti_args(parser):
        parser.add_argument("--detection_dir", required=True)

    def export_kitti(session, args):
        written = formats.export_kitti(session, args.detection_dir)
        print(f"{written} label files written")
        return written

    register_op("exportKitti", "write KITTI object-label text files", export_kitti_args, export_kitti)

    def export_csv_args(parser):
        parser.add_argument("--out_path", required=True)

    def export_csv(session, args):
        rows = formats.export_csv(session, args.out_path)
        print(f"{rows} rows written")
        return rows

    register_op("exportCsv", "write one CSV row per object", export_csv_args, export_csv)


def _register_filters() -> None:
    register_op(
        "filterEmptyImages",
        "delete images that have no objects",
        _no_arguments,
        lambda session, args: filters.filter_empty_images(session),
    )

    def border_args(parser):
        parser.add_argument("--border_thresh_perc", type=float, default=filters.DEFAULT_BORDER_THRESH)

    register_op(
        "filterObjectsAtBorder",
        "delete objects whose box enters the image border band",
        border_args,
        lambda session, args: filters.filter_objects_at_border(session, args.border_thresh_perc),
    )

    def intersection_args(parser):
        parser.add_argument("--intersection_thresh_perc", type=float, required=True)

    register_op(
        "filterObjectsByIntersection",
        "delete objects overlapped beyond a fraction of their own area",
        intersection_args,
        lambda session, args: filters.filter_objects_by_intersection(
            session, args.intersection_thresh_perc
        ),
    )

    def where_object_args(parser):
        parser.add_argument("--where_object", required=True)

    register_op(
        "filterObjectsSQL",
        "delete objects matching an SQL predicate",
        where_object_args,
        lambda session, args: filters.filter_objects_sql(session, args.where_object),
    )

    def where_image_args(parser):
        parser.add_argument("--where_image", required=True)

    register_op(
        "filterImagesSQL",
        "delete images (and their objects) matching an SQL predicate",
        where_image_args,
        lambda session, args: filters.filter_images_sql(session, args.where_image),
    )


def _register_modify() -> None:
    def expand_args(parser):
        parser.add_argument("--expand_perc", type=float, required=True)

    register_op(
        "expandBoxes",
        "expand bounding boxes from each side by a fraction",
        expand_args,
        lambda session, args: modify.expand_boxes(session, args.expand_perc),
    )

    register_op(
        "polygonsToBoxes",
        "compute a bounding box for each polygon-bearing object",
        _no_arguments,
        lambda session, args: modify.polygons_to_boxes(session),
    )

    register_op(
        "clampBoxesToImage",
        "clamp boxes to their image bounds",
        _no_arguments,
        lambda session, args: modify.clamp_boxes_to_image(session),
    )

    def add_db_args(parser):
        parser.add_argument("--db_file", required=True)

    def add_db(session, args):
        report = modify.add_database(session, args.db_file)
        print(f"{report.images_added} images, {report.objects_added} objects merged")
        return report

    register_op("addDatabase", "merge another database into the open one", add_db_args, add_db)

    def split_args(parser):
        parser.add_argument("--fractions", type=float, nargs="+", required=True)
        parser.add_argument("--out_names", nargs="+", required=True)
        parser.add_argument("--seed", type=int, default=0)

    def split_db(session, args):
        counts = modify.split_database(session, args.fractions, args.out_names, args.seed)
        print(" ".join(str(c) for c in counts))
        return counts

    register_op(
        "splitDatabase",
        "split images into several new databases by shuffled fractions",
        split_args,
        split_db,
    )

    def crop_args(parser):
        parser.add_argument("--target_width", type=int, required=True)
        parser.add_argument("--target_height", type=int, required=True)
        parser.add_argument("--edges", choices=media.EDGE_POLICIES, default=media.DISTORT)
        parser.add_argument("--image_pictures_dir", required=True)
        parser.add_argument("--jpeg_quality", type=int, default=media.JPEG_QUALITY)

    def crop(session, args):
        written = modify.crop_objects(
            session,
            args.target_width,
            args.target_height,
            args.edges,
            args.image_pictures_dir,
            jpeg_quality=args.jpeg_quality,
        )
        print(f"{written} crops written")
        return written

    register_op("cropObjects", "crop each object's box region to its own image file", crop_args, crop)


def _register_info() -> None:
    def info_args(parser):
        parser.add_argument("--images_by_dir", action="store_true", help="print image statistics by directory")
        parser.add_argument("--objects_by_image", action="store_true", help="print object statistics by image")

    register_op(
        "printInfo",
        "sum up and print out information in the database",
        info_args,
        lambda session, args: info.print_info(session, args.images_by_dir, args.objects_by_image),
    )

    def histogram_args(parser):
        parser.add_argument("sql", help="single-column SELECT producing the values")
        parser.add_argument("--bins", type=int, default=None)
        parser.add_argument("--out_svg", default=None)
        parser.add_argument("--out_csv", default=None)

    register_op(
        "plotObjectsHistogram",
        "histogram the values of a single-column SQL query",
        histogram_args,
        lambda session, args: info.plot_objects_histogram(
            session, args.sql, bins=args.bins, out_svg=args.out_svg, out_csv=args.out_csv
        ),
    )


def _register_evaluate() -> None:
    def detection_args(parser):
        parser.add_argument("--gt_db_file", required=True)
        parser.add_argument("--iou_thresh", type=float, default=evaluate.DEFAULT_IOU_THRESH)
        parser.add_argument("--where_object", default=None)
        parser.add_argument("--out_csv", default=None)

    def eval_detection(session, args):
        result = evaluate.evaluate_detection(
            session, args.gt_db_file, iou_thresh=args.iou_thresh, where_object=args.where_object
        )
        print(info.format_info(result.as_dict()))
        if args.out_csv:
            _write_detection_csv(result, args.out_csv)
        return result

    register_op(
        "evaluateDetection",
        "score detections against a ground-truth database (AP per class)",
        detection_args,
        eval_detection,
    )

    def segmentation_args(parser):
        parser.add_argument("--gt_db_file", required=True)
        parser.add_argument("--class_ids", type=int, nargs="*", default=None)

    def eval_segmentation(session, args):
        result = evaluate.evaluate_segmentation(session, args.gt_db_file, class_ids=args.class_ids)
        print(info.format_info(result.as_dict()))
        return result

    register_op(
        "evaluateSegmentation",
        "score segmentation masks against a ground-truth database (mIoU)",
        segmentation_args,
        eval_segmentation,
    )


def _write_detection_csv(result, out_csv: str) -> None:
    import csv

    with open(out_csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(("class", "AP", "TP", "FP", "FN"))
        for name in sorted(result.ap_per_class, key=str):
            writer.writerow(
                (name, result.ap_per_class[name], result.tp[name], result.fp[name], result.fn[name])
            )
        writer.writerow(("mean", result.mean_ap, "", "", ""))


def _register_serve() -> None:
    def serve_args(parser):
        parser.add_argument("--port", type=int, default=8000)
        parser.add_argument("--host", default="127.0.0.1")
        parser.add_argument("--static_dir", default=None)

    def serve(session, args):
        from . import server

        server.serve(session, port=args.port, host=args.host, static_dir=args.static_dir)

    register_op("serve", "serve the inspection HTTP API over the open session", serve_args, serve)


def _register_builtin_ops() -> None:
    _register_formats()
    _register_filters()
    _register_modify()
    _register_info()
    _register_evaluate()
    _register_serve()


_register_builtin_ops()


if __name__ == "__main__":
    sys.exit(main())

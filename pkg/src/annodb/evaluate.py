"""Score a predictions database against a ground-truth database.

Detection: greedy IoU matching in score order per class, average precision as
the exact area under the monotone (all-point interpolated) precision-recall
curve. Segmentation: per-class pixel IoU accumulated over image pairs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import media, store
from .errors import AnnoDbError
from .store import Session

logger = logging.getLogger(__name__)

DEFAULT_IOU_THRESH = 0.5


@dataclass
class DetectionResult:
    ap_per_class: dict = field(default_factory=dict)
    mean_ap: float = 0.0
    tp: dict = field(default_factory=dict)
    fp: dict = field(default_factory=dict)
    fn: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "AP": {str(k): v for k, v in sorted(self.ap_per_class.items(), key=lambda kv: str(kv[0]))},
            "mean AP": self.mean_ap,
            "TP": {str(k): v for k, v in sorted(self.tp.items(), key=lambda kv: str(kv[0]))},
            "FP": {str(k): v for k, v in sorted(self.fp.items(), key=lambda kv: str(kv[0]))},
            "FN": {str(k): v for k, v in sorted(self.fn.items(), key=lambda kv: str(kv[0]))},
        }


@dataclass
class SegmentationResult:
    iou_per_class: dict = field(default_factory=dict)
    miou: float = 0.0
    intersection: dict = field(default_factory=dict)
    union: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "IoU": dict(sorted(self.iou_per_class.items())),
            "mIoU": self.miou,
        }


def box_iou(a, b) -> float:
    """IoU of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def average_precision(tp_flags: list[bool], n_gt: int) -> float:
    """AP from per-prediction TP flags in score order, against n_gt positives.

    Precision is made monotone non-increasing from the right; the result is
    the exact area under the resulting step curve.
    """
    if n_gt == 0 or not tp_flags:
        return 0.0
    tp_cum = np.cumsum(np.asarray(tp_flags, dtype=np.float64))
    recalls = tp_cum / n_gt
    precisions = tp_cum / np.arange(1, len(tp_flags) + 1)
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    ap = 0.0
    prev_recall = 0.0
    for recall, precision in zip(recalls, precisions):
        if recall != prev_recall:
            ap += (recall - prev_recall) * precision
            prev_recall = recall
    return float(ap)


def greedy_match(predictions, gt_boxes, iou_thresh: float) -> list[bool]:
    """TP flag per prediction, in the given order.

    Each prediction claims the unmatched ground-truth box with the highest
    IoU, provided that IoU reaches the threshold.
    """
    matched = [False] * len(gt_boxes)
    flags = []
    for pred_box in predictions:
        best_iou, best_j = 0.0, -1
        for j, gt_box in enumerate(gt_boxes):
            if matched[j]:
                continue
            iou = box_iou(pred_box, gt_box)
            if iou > best_iou:
                best_iou, best_j = iou, j
        if best_j >= 0 and best_iou >= iou_thresh:
            matched[best_j] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def _boxed_by_class_and_image(session: Session, where_object: str | None):
    """{class name: {imagefile: [(score, objectid, box), ...]}} over boxed objects."""
    out: dict = {}
    for entry in store.iterate_objects(session, where_object):
        obj = entry.object
        if not obj.has_box:
            continue
        score = 1.0 if obj.score is None else obj.score
        out.setdefault(obj.name, {}).setdefault(obj.imagefile, []).append(
            (score, obj.objectid, (obj.x, obj.y, obj.width, obj.height))
        )
    return out


def evaluate_detection(
    session: Session,
    gt_db_path: str,
    iou_thresh: float = DEFAULT_IOU_THRESH,
    where_object: str | None = None,
) -> DetectionResult:
    """Evaluate the open database's objects as detections against ground truth.

    Classes are the ground truth's distinct object names; predictions of
    classes absent from the ground truth are ignored. The optional predicate
    restricts the objects of both databases.
    """
    gt = store.open_session(gt_db_path, rootdir=session.rootdir)
    try:
        pred_images = {im.imagefile for im in store.iterate_images(session)}
        gt_images = {im.imagefile for im in store.iterate_images(gt)}
        if not pred_images & gt_images:
            raise AnnoDbError(
                "prediction and ground-truth databases share no imagefile; "
                "check --relpath and the imported paths"
            )
        preds = _boxed_by_class_and_image(session, where_object)
        gts = _boxed_by_class_and_image(gt, where_object)
    finally:
        gt.close()

    result = DetectionResult()
    for class_name, gt_by_image in sorted(gts.items(), key=lambda kv: str(kv[0])):
        n_gt = sum(len(v) for v in gt_by_image.values())
        # Matching state is per image, so greedy over each image's predictions
        # (in score order) equals one global score-ordered pass.
        flag_by_key = {}
        for imagefile, items in preds.get(class_name, {}).items():
            ordered = sorted(items, key=lambda item: (-item[0], item[1]))
            gt_boxes = [box for _, _, box in gt_by_image.get(imagefile, [])]
            image_flags = greedy_match([box for _, _, box in ordered], gt_boxes, iou_thresh)
            for (score, objectid, _), flag in zip(ordered, image_flags):
                flag_by_key[(-score, objectid)] = flag
        flags = [flag_by_key[key] for key in sorted(flag_by_key)]

        tp = sum(flags)
        result.ap_per_class[class_name] = average_precision(flags, n_gt)
        result.tp[class_name] = tp
        result.fp[class_name] = len(flags) - tp
        result.fn[class_name] = n_gt - tp

    if result.ap_per_class:
        result.mean_ap = float(np.mean(list(result.ap_per_class.values())))
    logger.info("evaluateDetection: mean AP %.4f over %d classes", result.mean_ap, len(result.ap_per_class))
    return result


def evaluate_segmentation(
    session: Session, gt_db_path: str, class_ids: list[int] | None = None
) -> SegmentationResult:
    """Accumulate per-class mask IoU over images common to both databases.

    Images lacking a maskfile on either side are skipped and reported; a mask
    dimension mismatch is an error naming the imagefile.
    """
    gt = store.open_session(gt_db_path, rootdir=session.rootdir)
    try:
        pred_masks = {
            im.imagefile: im.maskfile for im in store.iterate_images(session)
        }
        intersection: dict[int, int] = {}
        union: dict[int, int] = {}
        allowed = None if class_ids is None else set(class_ids)
        for gt_image in store.iterate_images(gt):
            pred_maskfile = pred_masks.get(gt_image.imagefile)
            if gt_image.imagefile not in pred_masks:
                continue
            if gt_image.maskfile is None or pred_maskfile is None:
                logger.warning(
                    "evaluateSegmentation: '%s' lacks a maskfile on one side, skipped",
                    gt_image.imagefile,
                )
                continue
            gt_mask = media.read_mask(session.rootdir, gt_image.maskfile).data[:, :, 0]
            pred_mask = media.read_mask(session.rootdir, pred_maskfile).data[:, :, 0]
            if gt_mask.shape != pred_mask.shape:
                raise AnnoDbError(
                    f"mask dimension mismatch for imagefile '{gt_image.imagefile}': "
                    f"{pred_mask.shape} vs {gt_mask.shape}"
                )
            labels = set(np.unique(gt_mask)) | set(np.unique(pred_mask))
            for label in labels:
                label = int(label)
                if allowed is not None and label not in allowed:
                    continue
                inter = int(np.count_nonzero((gt_mask == label) & (pred_mask == label)))
                un = int(np.count_nonzero((gt_mask == label) | (pred_mask == label)))
                intersection[label] = intersection.get(label, 0) + inter
                union[label] = union.get(label, 0) + un
    finally:
        gt.close()

    result = SegmentationResult(intersection=intersection, union=union)
    for label in sorted(union):
        if union[label] > 0:
            result.iou_per_class[label] = intersection[label] / union[label]
    if result.iou_per_class:
        result.miou = float(np.mean(list(result.iou_per_class.values())))
    logger.info("evaluateSegmentation: mIoU %.4f over %d classes", result.miou, len(result.iou_per_class))
    return result

"""Confusion-matrix segmentation metrics and the checkpoint comparison table."""

from typing import Dict, Iterable, Tuple

import numpy as np

from src.core.errors import DataError, ShapeError
from src.models.reports import ClassMetrics, EvalReport, SegMetrics


def confusion_matrix(pred_labels: np.ndarray, gt_labels: np.ndarray, n_classes: int) -> np.ndarray:
    """C[i, j] counts pixels of ground-truth class i predicted as j."""
    pred = np.asarray(pred_labels)
    gt = np.asarray(gt_labels)
    if pred.shape != gt.shape:
        raise ShapeError(f"prediction shape {pred.shape} does not match ground truth {gt.shape}")
    for name, labels in (("prediction", pred), ("ground truth", gt)):
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise DataError(
                f"{name} class ids must lie in [0, {n_classes}), got [{labels.min()}, {labels.max()}]"
            )
    flat = gt.astype(np.int64).reshape(-1) * n_classes + pred.astype(np.int64).reshape(-1)
    return np.bincount(flat, minlength=n_classes * n_classes).reshape(n_classes, n_classes)


def metrics_from_confusion(matrix: np.ndarray) -> SegMetrics:
    """
    MP over all pixels; AC and IoU averaged over classes present in the ground
    truth only.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    total = matrix.sum()
    if total == 0:
        raise DataError("cannot compute segmentation metrics over zero pixels")
    diag = np.diag(matrix)
    gt_count = matrix.sum(axis=1)
    pred_count = matrix.sum(axis=0)
    present = gt_count > 0

    per_class = []
    for k in range(matrix.shape[0]):
        if present[k]:
            union = gt_count[k] + pred_count[k] - diag[k]
            per_class.append(
                ClassMetrics(
                    class_id=k,
                    pixels=int(gt_count[k]),
                    accuracy=float(diag[k] / gt_count[k]),
                    iou=float(diag[k] / union),
                )
            )
        else:
            per_class.append(ClassMetrics(class_id=k, pixels=0))

    accuracies = [c.accuracy for c in per_class if c.accuracy is not None]
    ious = [c.iou for c in per_class if c.iou is not None]
    return SegMetrics(
        mean_pixel_accuracy=float(diag.sum() / total),
        average_class_accuracy=float(np.mean(accuracies)),
        mean_iou=float(np.mean(ious)),
        per_class=per_class,
    )


def seg_metrics(pred_labels: np.ndarray, gt_labels: np.ndarray, n_classes: int) -> SegMetrics:
    return metrics_from_confusion(confusion_matrix(pred_labels, gt_labels, n_classes))


def pooled_seg_metrics(
    pairs: Iterable[Tuple[np.ndarray, np.ndarray]], n_classes: int
) -> SegMetrics:
    """Metrics of the summed confusion matrix over every (prediction, ground truth) pair."""
    pooled = np.zeros((n_classes, n_classes), dtype=np.int64)
    for pred, gt in pairs:
        pooled += confusion_matrix(pred, gt, n_classes)
    return metrics_from_confusion(pooled)


TABLE_ROWS = (
    ("MP", lambda r: r.seg_metrics["all"].mean_pixel_accuracy if "all" in r.seg_metrics else None),
    ("AC", lambda r: r.seg_metrics["all"].average_class_accuracy if "all" in r.seg_metrics else None),
    ("IoU", lambda r: r.seg_metrics["all"].mean_iou if "all" in r.seg_metrics else None),
    ("oracle score", lambda r: r.oracle_score),
    ("translation MSE", lambda r: r.translation_mse),
    ("diversity ratio", lambda r: r.diversity.ratio if r.diversity is not None else None),
)


def comparison_table(reports: Dict[str, EvalReport]) -> str:
    """Plain-text table: one row per criterion, one column per evaluated checkpoint."""
    names = list(reports)
    label_width = max(len(label) for label, _ in TABLE_ROWS)
    widths = [max(len(name), 10) for name in names]
    lines = ["  ".join([" " * label_width] + [name.rjust(w) for name, w in zip(names, widths)])]
    for label, getter in TABLE_ROWS:
        values = [getter(reports[name]) for name in names]
        if all(v is None for v in values):
            continue
        cells = ["-" if v is None else f"{v:.4f}" for v in values]
        lines.append("  ".join([label.ljust(label_width)] + [c.rjust(w) for c, w in zip(cells, widths)]))
    return "\n".join(lines)

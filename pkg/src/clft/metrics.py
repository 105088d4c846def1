"""Void-aware segmentation metrics with micro-averaging across frames.

Pixels whose ground-truth label is the void value (255) carry no signal
and are excluded from every count: they are neither correct nor
incorrect, whatever the prediction says there. Counts accumulate over
frames first and ratios are taken once at report time, so frames with
rare classes weigh in by their pixel counts (micro-averaging).

Per class c: iou = tp / (tp + fp + fn), precision = tp / (tp + fp),
recall = tp / (tp + fn). A zero denominator leaves the ratio undefined;
undefined values are reported as None and rendered as "-", never as 0
or NaN.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from clft.io_formats import load_mask

VOID = 255


@dataclass
class ConfusionCounts:
    """Per-class true positive / false positive / false negative tallies."""

    tp: np.ndarray  # (num_classes,) int64
    fp: np.ndarray
    fn: np.ndarray

    @property
    def num_classes(self):
        return self.tp.shape[0]

    def merged(self, other):
        """Counts for the union of two disjoint pixel sets."""
        if other.num_classes != self.num_classes:
            raise ValueError(
                f"cannot merge counts over {other.num_classes} classes into {self.num_classes}"
            )
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def empty_counts(num_classes):
    if num_classes < 1:
        raise ValueError(f"need at least one class, got {num_classes}")
    zeros = lambda: np.zeros(num_classes, dtype=np.int64)
    return ConfusionCounts(zeros(), zeros(), zeros())


def accumulate(pred, gt, num_classes, counts=None):
    """Add one frame's pixels into the running confusion counts.

    ``pred`` and ``gt`` are equal-shaped integer label maps. Ground truth
    may contain the void value; predictions may not. Labels outside
    [0, num_classes) are rejected.
    """
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction shape {pred.shape} does not match ground truth {gt.shape}")
    if counts is None:
        counts = empty_counts(num_classes)
    elif counts.num_classes != num_classes:
        raise ValueError(f"counts track {counts.num_classes} classes, expected {num_classes}")
    pred = pred.astype(np.int64, copy=False).reshape(-1)
    gt = gt.astype(np.int64, copy=False).reshape(-1)
    if pred.size and (pred.min() < 0 or pred.max() >= num_classes):
        raise ValueError(f"prediction labels outside [0, {num_classes}) (void is not predictable)")
    valid = gt != VOID
    gv = gt[valid]
    if gv.size and (gv.min() < 0 or gv.max() >= num_classes):
        raise ValueError(f"ground-truth labels outside [0, {num_classes}) and not void")
    # Confusion matrix in one pass: row = true class, column = predicted.
    joint = np.bincount(gv * num_classes + pred[valid], minlength=num_classes * num_classes)
    conf = joint.reshape(num_classes, num_classes)
    diag = np.diag(conf).copy()
    counts.tp += diag
    counts.fp += conf.sum(axis=0) - diag
    counts.fn += conf.sum(axis=1) - diag
    return counts


@dataclass
class ClassMetrics:
    name: str
    tp: int
    fp: int
    fn: int
    iou: float = None  # None when the denominator is empty
    precision: float = None
    recall: float = None


def report(counts, class_names):
    """Turn counts into per-class ratios, leaving empty ones undefined."""
    if len(class_names) != counts.num_classes:
        raise ValueError(f"{len(class_names)} names for {counts.num_classes} classes")
    rows = []
    for c, name in enumerate(class_names):
        tp, fp, fn = int(counts.tp[c]), int(counts.fp[c]), int(counts.fn[c])
        row = ClassMetrics(name=name, tp=tp, fp=fp, fn=fn)
        if tp + fp + fn:
            row.iou = tp / (tp + fp + fn)
        if tp + fp:
            row.precision = tp / (tp + fp)
        if tp + fn:
            row.recall = tp / (tp + fn)
        rows.append(row)
    return rows


def mean_iou(rows):
    """Mean of the defined per-class IoUs; None when every class is empty."""
    defined = [r.iou for r in rows if r.iou is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


def _cell(value):
    return "-" if value is None else f"{value:.4f}"


def format_report(rows, fmt="table"):
    """Render per-class metrics as an aligned table or tab-separated lines."""
    if fmt not in ("table", "tsv"):
        raise ValueError(f"unknown report format {fmt!r}; expected 'table' or 'tsv'")
    header = ("class", "iou", "precision", "recall")
    body = [(r.name, _cell(r.iou), _cell(r.precision), _cell(r.recall)) for r in rows]
    body.append(("mean_iou", _cell(mean_iou(rows)), "-", "-"))
    if fmt == "tsv":
        return "\n".join("\t".join(line) for line in [header] + body)
    widths = [max(len(line[i]) for line in [header] + body) for i in range(4)]
    out = []
    for line in [header] + body:
        out.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
    return "\n".join(out)


def evaluate_directory(pred_dir, gt_dir, num_classes):
    """Accumulate counts over every mask pair shared by two directories.

    Pairs are matched by file name (*.pgm). The two directories must hold
    exactly the same mask names and at least one pair.
    """
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    pred_names = {p.name for p in pred_dir.glob("*.pgm")}
    gt_names = {p.name for p in gt_dir.glob("*.pgm")}
    if not gt_names:
        raise ValueError(f"no ground-truth masks (*.pgm) in {gt_dir}")
    if pred_names != gt_names:
        missing = sorted(gt_names - pred_names)
        extra = sorted(pred_names - gt_names)
        raise ValueError(
            f"prediction/ground-truth mismatch: missing predictions {missing[:3]}, "
            f"unmatched predictions {extra[:3]}"
        )
    counts = empty_counts(num_classes)
    for name in sorted(gt_names):
        pred = load_mask(pred_dir / name)
        gt = load_mask(gt_dir / name)
        counts = accumulate(pred, gt, num_classes, counts)
    return counts

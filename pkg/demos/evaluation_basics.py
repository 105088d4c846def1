"""
Scoring segmentation masks
==========================

Walks through the confusion-count bookkeeping behind IoU, precision and
recall, including the two cases that usually go wrong: void pixels and
classes that never appear.
"""

import numpy as np

from clft.metrics import VOID, accumulate, format_report, mean_iou, report

# A 4x4 toy frame with three classes. The ground truth marks one pixel
# as void (255): it is excluded from scoring entirely.
gt = np.array(
    [
        [0, 0, 1, 1],
        [0, 0, 1, 1],
        [2, 2, 0, 0],
        [2, 2, 0, VOID],
    ],
    dtype=np.uint8,
)
pred = np.array(
    [
        [0, 0, 1, 0],
        [0, 0, 1, 1],
        [2, 0, 0, 0],
        [2, 2, 0, 1],
    ],
    dtype=np.uint8,
)

counts = accumulate(pred, gt, num_classes=4)
print("tp per class:", counts.tp.tolist())
print("fp per class:", counts.fp.tolist())
print("fn per class:", counts.fn.tolist())

# The void pixel was predicted as class 1, yet class 1 shows no false
# positive for it: void never moves any count.
rows = report(counts, ("road", "vehicle", "person", "sky"))
print()
print(format_report(rows))

# "sky" never occurs in ground truth or prediction, so its ratios are
# undefined and print as dashes instead of a misleading 0 or 1.
sky = rows[3]
print("\nsky iou is None:", sky.iou is None)
print("mean over defined classes only:", round(mean_iou(rows), 4))

# Counts accumulate across frames: two frames scored together equal the
# pixel-wise concatenation of both.
counts2 = accumulate(pred, gt, 4, counts=None)
accumulate(gt.clip(0, 3), gt, 4, counts=counts2)
print("\nafter a second (perfect) frame, tp:", counts2.tp.tolist())

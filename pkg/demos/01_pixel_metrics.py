"""
Pixel metrics on a toy mask
===========================

Precision, recall and F1 count pixels. PSNR and DRD measure how far a
prediction is from the ground truth as a binary image. Relaxed scores forgive
one pixel of boundary disagreement.
"""

import numpy as np

from textseg_eval import confusion_counts, dilate_cross, drd, pixel_scores, psnr, relaxed_pixel_scores

# A 3x3 "glyph" on a 16x16 page.
gt = np.zeros((16, 16), dtype=bool)
gt[6:9, 6:9] = True

# The prediction over-segments by one pixel all around, which is a typical boundary error.
pred = dilate_cross(gt)

counts = confusion_counts(gt, pred)
print("confusion:", counts)
print("normal :", pixel_scores(counts))
print("relaxed:", relaxed_pixel_scores(gt, pred))

# Relaxed precision is 1: every predicted pixel lies in the dilated ground truth.
print("PSNR (dB):", round(psnr(gt, pred), 4))
print("DRD      :", drd(gt, pred))

# A stray false positive far from any text adds one unit of distortion,
# which is then divided by the number of non-uniform 8x8 blocks.
stray = gt.copy()
stray[0, 15] = True
print("DRD with one stray pixel:", drd(gt, stray).drd)

"""Pixel-level scores: precision/recall/F1 (normal and relaxed), PSNR and DRD."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .masks import ConfusionCounts, check_same_shape
from .morphology import dilate_cross, erode_cross

NUBN_BLOCK = 8


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def harmonic(a: float, b: float) -> float:
    return 2 * a * b / (a + b) if a + b > 0 else 0.0


@dataclass(frozen=True)
class PixelScores:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_ratios(cls, tp, pred_total, gt_total) -> "PixelScores":
        p, r = _ratio(tp, pred_total), _ratio(tp, gt_total)
        return cls(p, r, harmonic(p, r))


@dataclass(frozen=True)
class RelaxedCounts:
    """Tallies behind relaxed pixel scores; they add across images."""

    pred_in_dilated: int = 0
    pred_total: int = 0
    pred_in_eroded: int = 0
    eroded_total: int = 0

    def __add__(self, other: "RelaxedCounts") -> "RelaxedCounts":
        return RelaxedCounts(
            self.pred_in_dilated + other.pred_in_dilated,
            self.pred_total + other.pred_total,
            self.pred_in_eroded + other.pred_in_eroded,
            self.eroded_total + other.eroded_total,
        )

    def scores(self) -> PixelScores:
        p = _ratio(self.pred_in_dilated, self.pred_total)
        r = _ratio(self.pred_in_eroded, self.eroded_total)
        return PixelScores(p, r, harmonic(p, r))


@dataclass(frozen=True)
class DistortionScore:
    """DRD for one image together with the pieces needed to pool it.

    ``distortion`` is the unnormalised sum of per-pixel distortions.
    """

    drd: float
    nubn: int
    flipped_pixels: int
    distortion: float


def confusion_counts(gt: np.ndarray, pred: np.ndarray) -> ConfusionCounts:
    gt = np.asarray(gt, dtype=bool)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt, pred)
    tp = int(np.count_nonzero(gt & pred))
    fp = int(np.count_nonzero(pred)) - tp
    fn = int(np.count_nonzero(gt)) - tp
    return ConfusionCounts(tp, fp, fn, gt.size - tp - fp - fn)


def pixel_scores(counts: ConfusionCounts) -> PixelScores:
    """Precision, recall and F1; an empty denominator yields 0."""
    return PixelScores.from_ratios(counts.tp, counts.tp + counts.fp, counts.tp + counts.fn)


def relaxed_counts(gt: np.ndarray, pred: np.ndarray) -> RelaxedCounts:
    gt = np.asarray(gt, dtype=bool)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt, pred)
    eroded = erode_cross(gt)
    return RelaxedCounts(
        pred_in_dilated=int(np.count_nonzero(pred & dilate_cross(gt))),
        pred_total=int(np.count_nonzero(pred)),
        pred_in_eroded=int(np.count_nonzero(pred & eroded)),
        eroded_total=int(np.count_nonzero(eroded)),
    )


def relaxed_pixel_scores(gt: np.ndarray, pred: np.ndarray) -> PixelScores:
    """Precision against the dilated ground truth, recall against the eroded one."""
    return relaxed_counts(gt, pred).scores()


def psnr_from_flips(flipped: int, n_pixels: int) -> float:
    if flipped == 0:
        return math.inf
    return 10.0 * math.log10(n_pixels / flipped)


def psnr(gt: np.ndarray, pred: np.ndarray) -> float:
    """PSNR of two binary masks with peak value 1; ``math.inf`` when identical."""
    gt = np.asarray(gt, dtype=bool)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt, pred)
    return psnr_from_flips(int(np.count_nonzero(gt ^ pred)), gt.size)


def nubn(gt: np.ndarray) -> int:
    """Count the 8x8 blocks of ``gt`` that are neither all text nor all background.

    Blocks tile from the top-left corner; partial blocks at the right and
    bottom edges are ignored.
    """
    gt = np.asarray(gt, dtype=bool)
    h = gt.shape[0] // NUBN_BLOCK * NUBN_BLOCK
    w = gt.shape[1] // NUBN_BLOCK * NUBN_BLOCK
    if h == 0 or w == 0:
        return 0
    blocks = gt[:h, :w].reshape(h // NUBN_BLOCK, NUBN_BLOCK, w // NUBN_BLOCK, NUBN_BLOCK)
    sums = blocks.sum(axis=(1, 3))
    return int(np.count_nonzero((sums > 0) & (sums < NUBN_BLOCK * NUBN_BLOCK)))


def drd_weights(size: int = 5) -> np.ndarray:
    """Normalised reciprocal-distance weights; the centre weight is 0."""
    half = size // 2
    i, j = np.mgrid[-half : half + 1, -half : half + 1]
    dist = np.hypot(i, j)
    w = np.zeros_like(dist)
    np.divide(1.0, dist, out=w, where=dist > 0)
    return w / w.sum()


_DRD_WEIGHTS = drd_weights()


def drd(gt: np.ndarray, pred: np.ndarray) -> DistortionScore:
    """Distance-reciprocal distortion of ``pred`` against ``gt``.

    Each flipped pixel contributes the weighted count of ground-truth pixels in
    its 5x5 window that differ from the predicted value; pixels outside the
    image read as background. The total is divided by ``max(nubn(gt), 1)``.
    """
    gt = np.asarray(gt, dtype=bool)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt, pred)
    flipped = gt ^ pred
    n_flipped = int(np.count_nonzero(flipped))
    blocks = nubn(gt)
    if n_flipped == 0:
        return DistortionScore(0.0, blocks, 0, 0.0)

    # weighted share of text neighbours; the weights sum to 1
    text_share = ndi.correlate(gt.astype(np.float64), _DRD_WEIGHTS, mode="constant", cval=0.0)
    per_pixel = np.where(pred, 1.0 - text_share, text_share)
    total = float(per_pixel[flipped].sum())
    return DistortionScore(total / max(blocks, 1), blocks, n_flipped, total)

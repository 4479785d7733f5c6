"""Binary morphology with the 3x3 cross, 8-connected labeling, and watershed assignment.

The assignment used to split predicted pixels among ground-truth components is
marker-based watershed over the Euclidean distance map: each predicted pixel
goes to the component owning its nearest ground-truth pixel. Equidistant
components resolve to the smaller id, so results are reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage as ndi
from scipy.spatial import cKDTree

from .masks import check_same_shape

CROSS = ndi.generate_binary_structure(2, 1)
EIGHT = ndi.generate_binary_structure(2, 2)


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """Label 8-connected text regions.

    Returns ``(labels, n)`` with ``labels`` an ``int32`` raster where 0 is
    background and ids ``1..n`` follow the raster-scan order of each region's
    first pixel.
    """
    labels, n = ndi.label(np.asarray(mask, dtype=bool), structure=EIGHT)
    return labels.astype(np.int32, copy=False), int(n)


def erode_cross(mask: np.ndarray) -> np.ndarray:
    """One cross erosion; pixels beyond the border count as background."""
    return ndi.binary_erosion(np.asarray(mask, dtype=bool), structure=CROSS, border_value=0)


def dilate_cross(mask: np.ndarray) -> np.ndarray:
    """One cross dilation, clipped to the image."""
    return ndi.binary_dilation(np.asarray(mask, dtype=bool), structure=CROSS)


def _component_boundary(labels: np.ndarray) -> np.ndarray:
    # a pixel is interior iff all 4 neighbours belong to the same component;
    # only boundary pixels can be nearest to a point outside the component
    return (labels > 0) & ~erode_cross(labels > 0)


def assign_predictions(gt_labels: np.ndarray, pred: np.ndarray, n_components: int | None = None) -> np.ndarray:
    """Assign every predicted text pixel to a ground-truth component id.

    Pixels inside a component keep its id. Other predicted pixels take the
    component holding their nearest ground-truth pixel (Euclidean), breaking
    ties toward the smaller id. The result is 0 where ``pred`` is background or
    when there are no components at all.
    """
    gt_labels = np.asarray(gt_labels)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt_labels, pred)
    if n_components is None:
        n_components = int(gt_labels.max(initial=0))

    assignment = np.zeros(gt_labels.shape, dtype=np.int32)
    if n_components == 0 or not pred.any():
        return assignment

    inside = pred & (gt_labels > 0)
    assignment[inside] = gt_labels[inside]

    outside = pred & (gt_labels == 0)
    if not outside.any():
        return assignment

    seeds = np.argwhere(_component_boundary(gt_labels))
    seed_ids = gt_labels[seeds[:, 0], seeds[:, 1]]
    queries = np.argwhere(outside)
    tree = cKDTree(seeds)

    k = min(4, len(seeds))
    _, idx = tree.query(queries, k=k)
    idx = idx.reshape(len(queries), k)
    # exact integer squared distances; the tree's floats only pick candidates
    d2 = ((seeds[idx] - queries[:, None, :]) ** 2).sum(axis=2)
    best = d2.min(axis=1)
    cand = np.where(d2 == best[:, None], seed_ids[idx], np.iinfo(np.int32).max)
    winner = cand.min(axis=1)

    # when every one of the k neighbours ties, more equidistant seeds may exist
    if k < len(seeds):
        crowded = np.flatnonzero(d2[:, -1] == best)
        if len(crowded):
            radii = np.sqrt(best[crowded]) + 1e-6
            for row, hits in zip(crowded, tree.query_ball_point(queries[crowded], radii)):
                hits = np.asarray(hits)
                hd2 = ((seeds[hits] - queries[row]) ** 2).sum(axis=1)
                winner[row] = seed_ids[hits[hd2 == best[row]]].min()

    assignment[queries[:, 0], queries[:, 1]] = winner
    return assignment

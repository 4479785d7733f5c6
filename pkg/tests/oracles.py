"""Slow reference implementations used as test oracles.

Everything here is built from Python sets, loops and exhaustive numpy distance
matrices, and shares no code with the package under test.
"""

from collections import deque
import math

import numpy as np

NEIGHBOURS_8 = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
CROSS = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]


def pixels(mask):
    return {(y, x) for y in range(len(mask)) for x in range(len(mask[0])) if mask[y][x]}


def components(mask):
    """8-connected components as a list of pixel sets, ordered by first pixel in raster scan."""
    h, w = len(mask), len(mask[0])
    seen, comps = set(), []
    for y in range(h):
        for x in range(w):
            if mask[y][x] and (y, x) not in seen:
                comp, queue = set(), deque([(y, x)])
                seen.add((y, x))
                while queue:
                    cy, cx = queue.popleft()
                    comp.add((cy, cx))
                    for dy, dx in NEIGHBOURS_8:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny][nx] and (ny, nx) not in seen:
                            seen.add((ny, nx))
                            queue.append((ny, nx))
                comps.append(comp)
    return comps


def erode_set(pix):
    return {(y, x) for (y, x) in pix if all((y + dy, x + dx) in pix for dy, dx in CROSS)}


def dilate_set(pix, h, w):
    out = set()
    for y, x in pix:
        for dy, dx in CROSS:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w:
                out.add((ny, nx))
    return out


def assign_brute(comps, pred_pix):
    """Map each predicted pixel to the 1-based index of the component with the nearest pixel.

    Exhaustive: the full matrix of squared distances from every predicted pixel
    to every ground-truth pixel. ``argmin`` returns the first minimum, i.e. the
    smaller component id on ties.
    """
    if not comps or not pred_pix:
        return {}
    preds = sorted(pred_pix)
    p = np.array(preds)
    per_comp = []
    for comp in comps:
        q = np.array(sorted(comp))
        d2 = ((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2)
        per_comp.append(d2.min(axis=1))
    owner = np.argmin(np.stack(per_comp, axis=1), axis=1) + 1
    return {pix: int(c) for pix, c in zip(preds, owner)}


def _div(a, b):
    return a / b if b else 0.0


def _hm(a, b):
    return 2 * a * b / (a + b) if a + b else 0.0


def cc_brute(gt_labels, pred, mode):
    """Component metrics from direct set arithmetic.

    ``gt_labels`` is a nested list of class values (0 non-text, 1 easy, 2 hard).
    Returns (metrics dict, per-component records).
    """
    h, w = len(pred), len(pred[0])
    gt_bin = [[v != 0 for v in row] for row in gt_labels]
    comps = components(gt_bin)
    pred_pix = pixels(pred)
    gt_pix = pixels(gt_bin)
    owner = assign_brute(comps, pred_pix)

    records = []
    for cid, comp in enumerate(comps, start=1):
        eroded = erode_set(comp) or comp
        detection = {p for p, c in owner.items() if c == cid}
        matched = bool(eroded & pred_pix)
        if not matched:
            cov = acc = 0.0
        elif mode == "normal":
            cov = len(comp & detection) / len(comp)
            acc = _div(len(comp & detection), len(detection))
        else:
            dilated = dilate_set(comp, h, w)
            cov = len(eroded & detection) / len(eroded)
            acc = _div(len(dilated & detection), len(detection))
        easy = sum(1 for (y, x) in comp if gt_labels[y][x] == 1)
        records.append(dict(matched=matched, cov=cov, acc=acc, klass=1 if easy > len(comp) - easy else 2))

    fp_mask = gt_pix if mode == "normal" else dilate_set(gt_pix, h, w)
    pred_comps = components(pred)
    fp = sum(1 for pc in pred_comps if not (pc & fp_mask))

    m = len(comps)
    tp = sum(r["matched"] for r in records)
    sc = sum(r["cov"] for r in records if r["matched"])
    sa = sum(r["acc"] for r in records if r["matched"])
    r_quant, p_quant = _div(tp, m), _div(tp, tp + fp)
    r_qual, p_qual = _div(sc, tp), _div(sa, tp)
    gr, gp = _div(sc, m), _div(sa, tp + fp)
    metrics = dict(
        r_quant=r_quant, p_quant=p_quant, r_qual=r_qual, p_qual=p_qual,
        f1_qual=_hm(r_qual, p_qual), gr=gr, gp=gp, gf1=_hm(gr, gp),
    )
    return metrics, records, dict(m=m, tp=tp, fp=fp, d=len(pred_comps))


def drd_brute(gt, pred):
    h, w = len(gt), len(gt[0])
    weights = {}
    for i in range(-2, 3):
        for j in range(-2, 3):
            weights[(i, j)] = 0.0 if (i, j) == (0, 0) else 1.0 / math.sqrt(i * i + j * j)
    total_w = sum(weights.values())

    blocks = 0
    for by in range(h // 8):
        for bx in range(w // 8):
            s = sum(gt[by * 8 + y][bx * 8 + x] for y in range(8) for x in range(8))
            if 0 < s < 64:
                blocks += 1

    total = 0.0
    for y in range(h):
        for x in range(w):
            if bool(gt[y][x]) != bool(pred[y][x]):
                p = 1 if pred[y][x] else 0
                for (i, j), wt in weights.items():
                    yy, xx = y + i, x + j
                    g = 1 if (0 <= yy < h and 0 <= xx < w and gt[yy][xx]) else 0
                    total += abs(g - p) * wt / total_w
    return total / max(blocks, 1), blocks

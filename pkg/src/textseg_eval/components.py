"""Connected-component matching and the quantity / quality / global metric family.

Ground-truth components are 8-connected regions of the binarized ground truth.
Predicted pixels are split among them by :func:`~textseg_eval.morphology.assign_predictions`;
the pixels assigned to component ``i`` form its detection ``D_i``.

A component counts as detected (``matched``) when its eroded pixel set meets the
prediction. Per matched component::

    normal   coverage = |G_i & D_i| / |G_i|          accuracy = |G_i & D_i| / |D_i|
    relaxed  coverage = |E_i & D_i| / |E_i|          accuracy = |X_i & D_i| / |D_i|

where ``E_i`` is the cross erosion of ``G_i`` (or ``G_i`` itself when erosion
removes every pixel) and ``X_i`` its cross dilation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .masks import TextClass, binarize_ground_truth, check_same_shape
from .morphology import assign_predictions, dilate_cross, erode_cross, label_components
from .pixel_metrics import _ratio, harmonic


class Mode(str, enum.Enum):
    NORMAL = "normal"
    RELAXED = "relaxed"


CLASS_NAMES = {TextClass.EASY: "easy", TextClass.HARD: "hard"}


@dataclass(frozen=True)
class ComponentMatch:
    component_id: int
    area: int
    eroded_area: int  # size of the set used for matching (after the empty-erosion fallback)
    klass: TextClass
    matched: bool
    coverage: float
    accuracy: float
    f1: float
    assigned_pixels: int


@dataclass
class ComponentMatchSet:
    matches: list[ComponentMatch] = field(default_factory=list)
    fp: int = 0
    d: int = 0

    @property
    def m(self) -> int:
        return len(self.matches)

    @property
    def tp(self) -> int:
        return sum(1 for c in self.matches if c.matched)

    def __add__(self, other: "ComponentMatchSet") -> "ComponentMatchSet":
        return ComponentMatchSet(self.matches + other.matches, self.fp + other.fp, self.d + other.d)


@dataclass(frozen=True)
class CCMetrics:
    r_quant: float
    p_quant: float
    r_qual: float
    p_qual: float
    f1_qual: float
    gr: float
    gp: float
    gf1: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ComponentTally:
    """Additive sufficient statistics for :class:`CCMetrics`."""

    m: int = 0
    tp: int = 0
    fp: int = 0
    sum_cov: float = 0.0
    sum_acc: float = 0.0

    def __add__(self, other: "ComponentTally") -> "ComponentTally":
        return ComponentTally(
            self.m + other.m,
            self.tp + other.tp,
            self.fp + other.fp,
            self.sum_cov + other.sum_cov,
            self.sum_acc + other.sum_acc,
        )

    def metrics(self) -> CCMetrics:
        r_quant = _ratio(self.tp, self.m)
        p_quant = _ratio(self.tp, self.tp + self.fp)
        r_qual = _ratio(self.sum_cov, self.tp)
        p_qual = _ratio(self.sum_acc, self.tp)
        gr = _ratio(self.sum_cov, self.m)
        gp = _ratio(self.sum_acc, self.tp + self.fp)
        return CCMetrics(
            r_quant=r_quant,
            p_quant=p_quant,
            r_qual=r_qual,
            p_qual=p_qual,
            f1_qual=harmonic(r_qual, p_qual),
            gr=gr,
            gp=gp,
            gf1=harmonic(gr, gp),
        )


def tally(matches, fp: int) -> ComponentTally:
    matched = [c for c in matches if c.matched]
    return ComponentTally(
        m=len(matches),
        tp=len(matched),
        fp=fp,
        sum_cov=float(sum(c.coverage for c in matched)),
        sum_acc=float(sum(c.accuracy for c in matched)),
    )


def _per_label_count(labels: np.ndarray, where: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(labels[where], minlength=n + 1)[: n + 1]


def _dilation_hits(gt_labels: np.ndarray, assignment: np.ndarray, n: int) -> np.ndarray:
    """Per component, how many of its assigned pixels fall in its own cross dilation."""
    h, w = gt_labels.shape
    padded = np.zeros((h + 2, w + 2), dtype=gt_labels.dtype)
    padded[1:-1, 1:-1] = gt_labels
    hit = np.zeros((h, w), dtype=bool)
    for dy, dx in ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)):
        hit |= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] == assignment
    return _per_label_count(assignment, hit & (assignment > 0), n)


def match_components(gt: np.ndarray, pred: np.ndarray, mode: Mode | str = Mode.NORMAL) -> ComponentMatchSet:
    """Match ground-truth components of a 3-class mask against a binary prediction."""
    mode = Mode(mode)
    gt = np.asarray(gt)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt, pred)

    gt_bin = binarize_ground_truth(gt)
    gt_labels, n = label_components(gt_bin)
    assignment = assign_predictions(gt_labels, pred, n)

    area = _per_label_count(gt_labels, gt_bin, n)
    eroded = erode_cross(gt_bin)
    eroded_area = _per_label_count(gt_labels, eroded, n)
    eroded_hits = _per_label_count(gt_labels, eroded & pred, n)
    own_hits = _per_label_count(gt_labels, gt_bin & pred, n)
    assigned = _per_label_count(assignment, assignment > 0, n)

    # erosion can wipe out thin components entirely; fall back to the component
    fallback = eroded_area == 0
    eroded_area = np.where(fallback, area, eroded_area)
    eroded_hits = np.where(fallback, own_hits, eroded_hits)
    matched = eroded_hits > 0

    if mode is Mode.NORMAL:
        cov_num, cov_den = own_hits, area
        acc_num = own_hits
        fp_mask = gt_bin
    else:
        cov_num, cov_den = eroded_hits, eroded_area
        acc_num = _dilation_hits(gt_labels, assignment, n)
        fp_mask = dilate_cross(gt_bin)

    easy = _per_label_count(gt_labels, gt == TextClass.EASY, n)
    hard = _per_label_count(gt_labels, gt == TextClass.HARD, n)

    matches = []
    for i in range(1, n + 1):
        if matched[i]:
            cov = cov_num[i] / cov_den[i]
            acc = acc_num[i] / assigned[i] if assigned[i] else 0.0
        else:
            cov = acc = 0.0
        matches.append(
            ComponentMatch(
                component_id=i,
                area=int(area[i]),
                eroded_area=int(eroded_area[i]),
                klass=TextClass.EASY if easy[i] > hard[i] else TextClass.HARD,
                matched=bool(matched[i]),
                coverage=float(cov),
                accuracy=float(acc),
                f1=harmonic(float(cov), float(acc)),
                assigned_pixels=int(assigned[i]),
            )
        )

    pred_labels, d = label_components(pred)
    touching = np.unique(pred_labels[fp_mask & pred])
    fp = d - int(np.count_nonzero(touching))
    return ComponentMatchSet(matches=matches, fp=fp, d=d)


def summarize(matchset: ComponentMatchSet) -> CCMetrics:
    return tally(matchset.matches, matchset.fp).metrics()


def class_tallies(matchset: ComponentMatchSet) -> dict[str, ComponentTally]:
    """Tallies restricted to easy and hard components.

    False positives carry no class, so both classes are charged with all of them.
    """
    return {
        name: tally([c for c in matchset.matches if c.klass == klass], matchset.fp)
        for klass, name in CLASS_NAMES.items()
    }


def class_breakdown(matchset: ComponentMatchSet) -> tuple[CCMetrics, CCMetrics]:
    t = class_tallies(matchset)
    return t["easy"].metrics(), t["hard"].metrics()


@dataclass(frozen=True)
class HistogramTable:
    edges: np.ndarray
    counts: dict[str, np.ndarray]

    @property
    def fractions(self) -> dict[str, np.ndarray]:
        out = {}
        for name, c in self.counts.items():
            total = c.sum()
            out[name] = c / total if total else np.zeros(len(c))
        return out

    def rows(self) -> list[dict]:
        fr = self.fractions
        rows = []
        for b in range(len(self.edges) - 1):
            row = {"bin_lo": float(self.edges[b]), "bin_hi": float(self.edges[b + 1])}
            for name in ("easy", "hard"):
                row[f"{name}_count"] = int(self.counts[name][b])
                row[f"{name}_frac"] = float(fr[name][b])
            rows.append(row)
        return rows


def histogram_edges(bins: int) -> np.ndarray:
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    return np.arange(bins + 1) / bins


def histogram_counts(values, bins: int = 10) -> np.ndarray:
    """Equal-width bins on [0, 1]; the last bin is closed on the right."""
    edges = histogram_edges(bins)
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    idx = np.minimum(np.searchsorted(edges, values, side="right") - 1, bins - 1)
    return np.bincount(idx, minlength=bins)


def f1_histogram_from_values(values_by_class: dict[str, list[float]], bins: int = 10) -> HistogramTable:
    return HistogramTable(
        edges=histogram_edges(bins),
        counts={name: histogram_counts(values_by_class.get(name, []), bins) for name in ("easy", "hard")},
    )


def component_f1_values(matchset: ComponentMatchSet) -> dict[str, list[float]]:
    """Per-component F1 grouped by class; unmatched components score 0."""
    out = {name: [] for name in CLASS_NAMES.values()}
    for c in matchset.matches:
        out[CLASS_NAMES[c.klass]].append(c.f1)
    return out


def f1_histogram(matchset: ComponentMatchSet, bins: int = 10) -> HistogramTable:
    return f1_histogram_from_values(component_f1_values(matchset), bins)

"""Corpus evaluation: per-image metrics, pooled reports, merging and method comparison.

Pooled (micro-averaged) figures are the canonical report values: pixel scores
come from summed confusion counts and component scores from summed ``m``,
``tp``, ``fp`` and coverage/accuracy totals. Per-image means are reported under
``macro`` for reference only.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import numpy as np

from .components import (
    ComponentMatchSet,
    ComponentTally,
    Mode,
    class_tallies,
    component_f1_values,
    f1_histogram_from_values,
    match_components,
    tally,
)
from .errors import ConfigMismatch, MissingPairs
from .masks import (
    DEFAULT_PRED_THRESHOLD,
    ConfusionCounts,
    PaletteConfig,
    binarize_ground_truth,
    check_same_shape,
    read_gray,
    read_ground_truth,
    read_prediction,
    write_binary_mask,
)
from .pixel_metrics import (
    DistortionScore,
    PixelScores,
    RelaxedCounts,
    confusion_counts,
    drd,
    pixel_scores,
    psnr_from_flips,
    relaxed_counts,
)

TABLE_COLUMNS = ("pf1", "gf1", "precision", "recall", "drd", "psnr", "relaxed_pf1", "relaxed_gf1")
# columns shown as percentages in comparison tables
PERCENT_COLUMNS = {"pf1", "gf1", "precision", "recall", "relaxed_pf1", "relaxed_gf1"}
COLUMN_TITLES = {
    "pf1": "PF1",
    "gf1": "GF1",
    "precision": "Precision",
    "recall": "Recall",
    "drd": "DRD",
    "psnr": "PSNR",
    "relaxed_pf1": "Relaxed PF1",
    "relaxed_gf1": "Relaxed GF1",
}
MASK_SUFFIX = ".mask.png"


@dataclass(frozen=True)
class EvaluationConfig:
    palette: PaletteConfig = PaletteConfig()
    pred_threshold: int = DEFAULT_PRED_THRESHOLD
    gt_encoding: str = "palette"
    modes: tuple[str, ...] = ("normal", "relaxed")
    bins: int = 10

    def __post_init__(self):
        modes = tuple(Mode(m).value for m in self.modes)
        if not modes:
            raise ValueError("at least one mode is required")
        object.__setattr__(self, "modes", modes)
        if self.gt_encoding not in ("palette", "gray"):
            raise ValueError(f"unknown ground-truth encoding {self.gt_encoding!r}")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")

    def as_dict(self) -> dict:
        return {
            "palette": self.palette.as_dict(),
            "pred_threshold": self.pred_threshold,
            "gt_encoding": self.gt_encoding,
            "modes": list(self.modes),
            "bins": self.bins,
        }


@dataclass
class ImageResult:
    image_id: str
    width: int
    height: int
    confusion: ConfusionCounts
    relaxed: RelaxedCounts
    pixel_normal: PixelScores
    pixel_relaxed: PixelScores
    psnr: float
    drd: DistortionScore
    matchset_normal: ComponentMatchSet
    matchset_relaxed: ComponentMatchSet

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def matchset(self, mode) -> ComponentMatchSet:
        return self.matchset_normal if Mode(mode) is Mode.NORMAL else self.matchset_relaxed


def evaluate_pair(gt: np.ndarray, pred: np.ndarray, image_id: str = "") -> ImageResult:
    """Every metric family, both modes, for one ground-truth / prediction pair."""
    gt = np.asarray(gt)
    pred = np.asarray(pred, dtype=bool)
    check_same_shape(gt, pred, image_id)
    gt_bin = binarize_ground_truth(gt)
    confusion = confusion_counts(gt_bin, pred)
    relaxed = relaxed_counts(gt_bin, pred)
    return ImageResult(
        image_id=image_id,
        width=int(gt.shape[1]),
        height=int(gt.shape[0]),
        confusion=confusion,
        relaxed=relaxed,
        pixel_normal=pixel_scores(confusion),
        pixel_relaxed=relaxed.scores(),
        psnr=psnr_from_flips(confusion.fp + confusion.fn, gt_bin.size),
        drd=drd(gt_bin, pred),
        matchset_normal=match_components(gt, pred, Mode.NORMAL),
        matchset_relaxed=match_components(gt, pred, Mode.RELAXED),
    )


def baseline_threshold_predict(image: np.ndarray, threshold: int = DEFAULT_PRED_THRESHOLD) -> np.ndarray:
    """Dark-ink heuristic: a pixel is text iff its intensity is below ``threshold``."""
    return np.asarray(image) < threshold


# -- pooling -------------------------------------------------------------------


def _cc_block(t: ComponentTally, d: int | None = None) -> dict:
    out = {"m": t.m, "tp": t.tp, "fp": t.fp, **t.metrics().as_dict()}
    if d is not None:
        out["d"] = d
    return out


def _mode_tallies(results, mode) -> tuple[ComponentTally, dict[str, ComponentTally], int]:
    total, by_class, d = ComponentTally(), {"easy": ComponentTally(), "hard": ComponentTally()}, 0
    for r in results:
        ms = r.matchset(mode)
        total = total + tally(ms.matches, ms.fp)
        for name, t in class_tallies(ms).items():
            by_class[name] = by_class[name] + t
        d += ms.d
    return total, by_class, d


def _f1_values(results, mode) -> dict[str, list[float]]:
    out = {"easy": [], "hard": []}
    for r in results:
        for name, vals in component_f1_values(r.matchset(mode)).items():
            out[name].extend(vals)
    return out


def _table_row(results, modes) -> dict:
    """The comparison columns pooled over ``results``."""
    confusion = sum((r.confusion for r in results), ConfusionCounts())
    row = dict.fromkeys(TABLE_COLUMNS)
    if "normal" in modes:
        px = pixel_scores(confusion)
        flipped = confusion.fp + confusion.fn
        distortion = sum(r.drd.distortion for r in results)
        blocks = sum(r.drd.nubn for r in results)
        row.update(
            pf1=px.f1,
            precision=px.precision,
            recall=px.recall,
            gf1=_mode_tallies(results, "normal")[0].metrics().gf1,
            drd=distortion / max(blocks, 1),
            psnr=psnr_from_flips(flipped, confusion.total) if confusion.total else math.inf,
        )
    if "relaxed" in modes:
        rel = sum((r.relaxed for r in results), RelaxedCounts())
        row.update(
            relaxed_pf1=rel.scores().f1,
            relaxed_gf1=_mode_tallies(results, "relaxed")[0].metrics().gf1,
        )
    return row


@dataclass
class EvaluationReport:
    name: str = "report"
    config: EvaluationConfig = EvaluationConfig()
    images: list[ImageResult] = field(default_factory=list)
    missing_ground_truth: list[str] = field(default_factory=list)
    missing_prediction: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.images = sorted(self.images, key=lambda r: r.image_id)
        ids = [r.image_id for r in self.images]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate image ids in report")
        self.missing_ground_truth = sorted(self.missing_ground_truth)
        self.missing_prediction = sorted(self.missing_prediction)

    @property
    def table(self) -> dict:
        return _table_row(self.images, self.config.modes)

    def pooled(self) -> dict:
        results = self.images
        out = {}
        for mode in self.config.modes:
            total, by_class, d = _mode_tallies(results, mode)
            if mode == "normal":
                confusion = sum((r.confusion for r in results), ConfusionCounts())
                px = pixel_scores(confusion)
                pixel = {
                    "tp": confusion.tp,
                    "fp": confusion.fp,
                    "fn": confusion.fn,
                    "tn": confusion.tn,
                    "precision": px.precision,
                    "recall": px.recall,
                    "f1": px.f1,
                }
                extra = {
                    "psnr": psnr_from_flips(confusion.fp + confusion.fn, confusion.total)
                    if confusion.total
                    else math.inf,
                    "drd": sum(r.drd.distortion for r in results) / max(sum(r.drd.nubn for r in results), 1),
                    "nubn": sum(r.drd.nubn for r in results),
                    "flipped_pixels": confusion.fp + confusion.fn,
                }
            else:
                rel = sum((r.relaxed for r in results), RelaxedCounts())
                px = rel.scores()
                pixel = {**rel.__dict__, "precision": px.precision, "recall": px.recall, "f1": px.f1}
                extra = {}
            components = _cc_block(total, d)
            components["easy"] = _cc_block(by_class["easy"])
            components["hard"] = _cc_block(by_class["hard"])
            hist = f1_histogram_from_values(_f1_values(results, mode), self.config.bins)
            out[mode] = {"pixel": pixel, **extra, "components": components, "histogram": hist.rows()}
        return out

    def macro(self) -> dict:
        """Unweighted per-image means of the table columns."""
        rows = [_table_row([r], self.config.modes) for r in self.images]
        out = {}
        for col in TABLE_COLUMNS:
            vals = [row[col] for row in rows if row[col] is not None]
            out[col] = float(np.mean(vals)) if vals else None
        return out

    def image_rows(self) -> list[dict]:
        rows = []
        for r in self.images:
            row = {"image_id": r.image_id, "width": r.width, "height": r.height}
            row.update(_table_row([r], self.config.modes))
            row.update(tp_px=r.confusion.tp, fp_px=r.confusion.fp, fn_px=r.confusion.fn, tn_px=r.confusion.tn)
            row.update(nubn=r.drd.nubn)
            for mode in self.config.modes:
                ms = r.matchset(mode)
                row.update({f"{mode}_m": ms.m, f"{mode}_tp": ms.tp, f"{mode}_fp": ms.fp, f"{mode}_d": ms.d})
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config": self.config.as_dict(),
            "table": self.table,
            "pooled": self.pooled(),
            "macro": self.macro(),
            "images": self.image_rows(),
            "component_f1": {mode: _f1_values(self.images, mode) for mode in self.config.modes},
            "skipped": {
                "missing_ground_truth": self.missing_ground_truth,
                "missing_prediction": self.missing_prediction,
            },
        }

    def to_json(self) -> str:
        return dumps_report(self.to_dict())

    def write_json(self, path) -> None:
        Path(path).write_text(self.to_json())

    def write_csv(self, path) -> None:
        rows = self.image_rows()
        pooled = {"image_id": "__pooled__", **self.table}
        fields = list(rows[0]) if rows else ["image_id", *TABLE_COLUMNS]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, restval="")
            writer.writeheader()
            for row in [*rows, pooled]:
                writer.writerow({k: _format_value(v) for k, v in row.items()})


# -- serialization -------------------------------------------------------------

_QUANTUM = Decimal("0.0001")


def _format_value(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return None
        return float(Decimal(value).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))
    if isinstance(value, dict):
        return {k: _format_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_format_value(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _format_value(float(value))
    return value


def dumps_report(data: dict) -> str:
    """Canonical JSON: sorted keys, floats rounded half-even to 4 places, ``"inf"`` for infinity."""
    return json.dumps(_format_value(data), sort_keys=True, indent=2) + "\n"


def load_report(path) -> dict:
    data = json.loads(Path(path).read_text())
    if "table" not in data:
        raise ValueError(f"{path}: not an evaluation report (no 'table')")
    data.setdefault("name", Path(path).stem)
    return data


# -- corpus --------------------------------------------------------------------


def _stem(path: Path) -> str:
    name = path.name
    if name.endswith(MASK_SUFFIX):
        return name[: -len(MASK_SUFFIX)]
    return path.stem


def ground_truth_files(gt_dir) -> dict[str, Path]:
    """Ground-truth PNGs keyed by stem; ``*.mask.png`` files win when present."""
    gt_dir = Path(gt_dir)
    masks = sorted(gt_dir.glob("*" + MASK_SUFFIX))
    files = masks or sorted(gt_dir.glob("*.png"))
    return {_stem(p): p for p in files}


def prediction_files(pred_dir) -> dict[str, Path]:
    return {_stem(p): p for p in sorted(Path(pred_dir).glob("*.png")) if not p.name.endswith(MASK_SUFFIX)}


def _evaluate_files(job) -> ImageResult:
    image_id, gt_path, pred_path, config = job
    gt = read_ground_truth(gt_path, config.palette, config.gt_encoding)
    pred = read_prediction(pred_path, config.pred_threshold)
    return evaluate_pair(gt, pred, image_id)


def default_jobs() -> int:
    return os.cpu_count() or 1


def evaluate_corpus(
    gt_dir,
    pred_dir,
    config: EvaluationConfig = EvaluationConfig(),
    *,
    jobs: int | None = None,
    strict: bool = False,
    name: str | None = None,
) -> EvaluationReport:
    """Evaluate every prediction in ``pred_dir`` against its same-stem ground truth.

    Unpaired files are listed in the report; with ``strict=True`` they raise
    :class:`MissingPairs` instead. The result does not depend on ``jobs``.
    """
    gts = ground_truth_files(gt_dir)
    preds = prediction_files(pred_dir)
    missing_gt = sorted(set(preds) - set(gts))
    missing_pred = sorted(set(gts) - set(preds))
    if strict and (missing_gt or missing_pred):
        raise MissingPairs(missing_gt, missing_pred)

    work = [(key, gts[key], preds[key], config) for key in sorted(set(gts) & set(preds))]
    jobs = jobs or default_jobs()
    if jobs <= 1 or len(work) <= 1:
        results = [_evaluate_files(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_files, work, chunksize=max(1, len(work) // (4 * jobs))))

    return EvaluationReport(
        name=name if name is not None else Path(pred_dir).resolve().name,
        config=config,
        images=results,
        missing_ground_truth=missing_gt,
        missing_prediction=missing_pred,
    )


def merge(a: EvaluationReport, b: EvaluationReport) -> EvaluationReport:
    """Combine reports over disjoint image sets that share one configuration."""
    if a.config != b.config:
        raise ConfigMismatch(f"cannot merge reports with different configs: {a.config} vs {b.config}")
    overlap = {r.image_id for r in a.images} & {r.image_id for r in b.images}
    if overlap:
        raise ValueError(f"reports share images: {sorted(overlap)}")
    return EvaluationReport(
        name=a.name,
        config=a.config,
        images=a.images + b.images,
        missing_ground_truth=sorted(set(a.missing_ground_truth) | set(b.missing_ground_truth)),
        missing_prediction=sorted(set(a.missing_prediction) | set(b.missing_prediction)),
    )


# -- comparison ----------------------------------------------------------------


@dataclass
class ComparisonTable:
    rows: list[tuple[str, dict]]
    columns: tuple[str, ...] = TABLE_COLUMNS
    sort_key: str = "pf1"

    @staticmethod
    def format_cell(column: str, value) -> str:
        if value is None:
            return "-"
        if value == "inf" or (isinstance(value, float) and math.isinf(value)):
            return "inf"
        value = float(value)
        if column in PERCENT_COLUMNS:
            value *= 100
        return f"{value:.2f}"

    def formatted(self) -> list[list[str]]:
        return [[name] + [self.format_cell(c, row.get(c)) for c in self.columns] for name, row in self.rows]

    def header(self) -> list[str]:
        return ["Method"] + [COLUMN_TITLES[c] for c in self.columns]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        writer.writerows(self.formatted())
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| " + " | ".join(self.header()) + " |", "|" + "---|" * (len(self.columns) + 1)]
        lines += ["| " + " | ".join(r) + " |" for r in self.formatted()]
        return "\n".join(lines) + "\n"


def compare(reports, sort_key: str = "pf1") -> ComparisonTable:
    """One row per report, best ``sort_key`` first; ties fall back to report name."""
    if not reports:
        raise ValueError("compare needs at least one report")
    rows = []
    for rep in reports:
        data = rep.to_dict() if isinstance(rep, EvaluationReport) else rep
        table = {c: data["table"].get(c) for c in TABLE_COLUMNS}
        rows.append((str(data["name"]), table))

    def key(item):
        v = item[1].get(sort_key)
        if v is None:
            v = -math.inf
        elif v == "inf":
            v = math.inf
        return (-float(v), item[0])

    return ComparisonTable(rows=sorted(rows, key=key), sort_key=sort_key)


def histogram_csv(report: dict, mode: str = "normal", bins: int = 10) -> str:
    """Per-class F1 histogram of a stored report as CSV."""
    values = report["component_f1"][Mode(mode).value]
    hist = f1_histogram_from_values(values, bins)
    buf = io.StringIO()
    fields = ["bin_lo", "bin_hi", "easy_count", "easy_frac", "hard_count", "hard_frac"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in hist.rows():
        writer.writerow({k: _format_value(v) for k, v in row.items()})
    return buf.getvalue()


def baseline_directory(image_dir, out_dir, threshold: int = DEFAULT_PRED_THRESHOLD) -> list[Path]:
    """Write a 0/255 baseline mask for every page image in ``image_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in prediction_files(image_dir).values():
        target = out_dir / path.name
        write_binary_mask(target, baseline_threshold_predict(read_gray(path), threshold))
        written.append(target)
    return written

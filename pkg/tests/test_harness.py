import json
import math
from pathlib import Path

import numpy as np
import pytest

from textseg_eval.errors import ConfigMismatch, DimensionMismatch, MissingPairs
from textseg_eval.harness import (
    EvaluationConfig,
    EvaluationReport,
    baseline_threshold_predict,
    compare,
    dumps_report,
    evaluate_corpus,
    evaluate_pair,
    histogram_csv,
    load_report,
    merge,
)
from textseg_eval.masks import binarize_ground_truth, write_binary_mask, write_ground_truth
from textseg_eval.morphology import dilate_cross
from textseg_eval.synthgen import SynthConfig, generate_page

FIXTURES = Path(__file__).parent / "fixtures"
SMALL = SynthConfig(page_size=(96, 96), glyph_size_range=(10, 16), balloons_per_page=(0, 1),
                    glyphs_per_balloon=(1, 3), loose_glyphs_per_page=(1, 4), seed=7)


def random_gt(rng, shape=(24, 24), density=0.3):
    return np.where(rng.random(shape) < density, rng.integers(1, 3, size=shape), 0).astype(np.uint8)


def test_evaluate_pair_self(rng):
    gt = random_gt(rng)
    r = evaluate_pair(gt, binarize_ground_truth(gt), "x")
    assert r.pixel_normal.f1 == r.pixel_relaxed.f1 == 1.0
    assert r.drd.drd == 0.0 and r.psnr == math.inf
    t = EvaluationReport(images=[r]).table
    assert t["gf1"] == t["relaxed_gf1"] == 1.0


def test_evaluate_pair_empty_prediction(rng):
    gt = random_gt(rng)
    r = evaluate_pair(gt, np.zeros(gt.shape, bool))
    assert r.pixel_normal.recall == 0 and r.matchset_normal.tp == 0
    t = EvaluationReport(images=[r]).table
    assert t["gf1"] == 0 and t["relaxed_gf1"] == 0


def test_evaluate_pair_seven(seven):
    t = EvaluationReport(images=[evaluate_pair(*seven)]).table
    assert t["pf1"] == pytest.approx(4 / 7)
    assert t["gf1"] == pytest.approx(10 / 17)


def test_evaluate_pair_mismatch():
    with pytest.raises(DimensionMismatch) as exc:
        evaluate_pair(np.zeros((2, 2), np.uint8), np.zeros((3, 2), bool), "page")
    assert exc.value.image_id == "page"


def test_pooling_sums_counts(rng):
    a = evaluate_pair(random_gt(rng), rng.random((24, 24)) < 0.3, "a")
    b = evaluate_pair(random_gt(rng), rng.random((24, 24)) < 0.3, "b")
    rep = EvaluationReport(images=[a, b])
    tp = a.confusion.tp + b.confusion.tp
    fp = a.confusion.fp + b.confusion.fp
    assert rep.table["precision"] == tp / (tp + fp)
    lo, hi = sorted([a.pixel_normal.precision, b.pixel_normal.precision])
    assert lo <= rep.table["precision"] <= hi
    pooled_drd = (a.drd.distortion + b.drd.distortion) / max(a.drd.nubn + b.drd.nubn, 1)
    assert rep.table["drd"] == pytest.approx(pooled_drd, abs=1e-12)


def write_corpus(root, pairs):
    gt_dir, pred_dir = root / "gt", root / "pred"
    gt_dir.mkdir()
    pred_dir.mkdir()
    for name, (gt, pred) in pairs.items():
        write_ground_truth(gt_dir / f"{name}.mask.png", gt)
        write_binary_mask(pred_dir / f"{name}.png", pred)
    return gt_dir, pred_dir


def synth_pairs(n, predict=binarize_ground_truth):
    out = {}
    for i in range(n):
        _, gt = generate_page(SMALL, i)
        out[f"page_{i:05d}"] = (gt, predict(gt))
    return out


def test_corpus_self_is_perfect(tmp_path):
    gt_dir, pred_dir = write_corpus(tmp_path, synth_pairs(4))
    rep = evaluate_corpus(gt_dir, pred_dir, jobs=1)
    assert len(rep.images) == 4
    t = rep.table
    assert all(t[k] == 1.0 for k in ("pf1", "gf1", "precision", "recall", "relaxed_pf1", "relaxed_gf1"))
    assert t["drd"] == 0 and t["psnr"] == math.inf
    data = json.loads(rep.to_json())
    assert data["table"]["psnr"] == "inf"


def test_corpus_dilated_predictions(tmp_path):
    pairs = synth_pairs(50, lambda gt: dilate_cross(binarize_ground_truth(gt)))
    gt_dir, pred_dir = write_corpus(tmp_path, pairs)
    pooled = evaluate_corpus(gt_dir, pred_dir, jobs=1).pooled()
    assert pooled["relaxed"]["pixel"]["precision"] == 1.0
    assert pooled["normal"]["pixel"]["precision"] < 1.0


def test_corpus_missing_files(tmp_path):
    pairs = synth_pairs(3)
    gt_dir, pred_dir = write_corpus(tmp_path, pairs)
    (gt_dir / "page_00000.mask.png").unlink()
    (pred_dir / "page_00001.png").unlink()
    rep = evaluate_corpus(gt_dir, pred_dir, jobs=1)
    assert [r.image_id for r in rep.images] == ["page_00002"]
    assert rep.missing_ground_truth == ["page_00000"]
    assert rep.missing_prediction == ["page_00001"]
    with pytest.raises(MissingPairs):
        evaluate_corpus(gt_dir, pred_dir, jobs=1, strict=True)


def test_corpus_plain_png_ground_truth(tmp_path, rng):
    gt_dir, pred_dir = tmp_path / "g", tmp_path / "p"
    gt_dir.mkdir(), pred_dir.mkdir()
    gt = random_gt(rng)
    write_ground_truth(gt_dir / "a.png", gt, encoding="gray")
    write_binary_mask(pred_dir / "a.png", binarize_ground_truth(gt))
    rep = evaluate_corpus(gt_dir, pred_dir, EvaluationConfig(gt_encoding="gray"), jobs=1)
    assert rep.table["pf1"] == 1.0


def test_corpus_deterministic_across_jobs(tmp_path, rng):
    pairs = {f"img{i}": (random_gt(rng), rng.random((24, 24)) < 0.3) for i in range(6)}
    gt_dir, pred_dir = write_corpus(tmp_path, pairs)
    texts = {evaluate_corpus(gt_dir, pred_dir, jobs=j, name="m").to_json() for j in (1, 2, 3)}
    assert len(texts) == 1


def test_mode_selection_omits_columns(rng):
    r = evaluate_pair(random_gt(rng), rng.random((24, 24)) < 0.3, "a")
    rep = EvaluationReport(config=EvaluationConfig(modes=("normal",)), images=[r])
    data = json.loads(rep.to_json())
    assert data["table"]["relaxed_pf1"] is None and "relaxed" not in data["pooled"]
    assert compare([data]).formatted()[0][-1] == "-"


def make_reports(rng, n):
    return [EvaluationReport(images=[evaluate_pair(random_gt(rng), rng.random((24, 24)) < 0.3, f"i{k:02d}")])
            for k in range(n)]


def test_merge_identity_and_commutativity(rng):
    a, b = make_reports(rng, 2)
    assert merge(a, EvaluationReport()).to_json() == a.to_json()
    assert merge(a, b).to_dict()["pooled"] == merge(b, a).to_dict()["pooled"]


def test_merge_split_equals_single_pass(rng):
    singles = make_reports(rng, 10)
    whole = EvaluationReport(images=[r.images[0] for r in singles])
    left = EvaluationReport(images=[r.images[0] for r in singles[:3]])
    right = EvaluationReport(images=[r.images[0] for r in singles[3:]])
    merged = merge(left, right)
    for k, v in whole.table.items():
        assert merged.table[k] == pytest.approx(v, abs=1e-12)


def test_merge_rejects_bad_inputs(rng):
    a, b = make_reports(rng, 2)
    with pytest.raises(ValueError):
        merge(a, a)
    with pytest.raises(ConfigMismatch):
        merge(a, EvaluationReport(config=EvaluationConfig(pred_threshold=100)))


def test_compare_reference_row_verbatim():
    table = compare([load_report(FIXTURES / "reference_report.json")])
    assert table.formatted() == [
        ["fastai Resnet34 U-Net", "79.36", "84.92", "82.26", "76.71", "11.15", "21.91", "80.43", "89.26"]
    ]
    md = table.to_markdown()
    assert "| fastai Resnet34 U-Net | 79.36 | 84.92 | 82.26 | 76.71 | 11.15 | 21.91 | 80.43 | 89.26 |" in md
    assert table.to_csv().splitlines()[0] == "Method,PF1,GF1,Precision,Recall,DRD,PSNR,Relaxed PF1,Relaxed GF1"


def test_compare_sorting():
    row = {"pf1": 0.5, "gf1": 0.1, "precision": 0.5, "recall": 0.5, "drd": 1.0, "psnr": "inf",
           "relaxed_pf1": 0.5, "relaxed_gf1": 0.5}
    reports = [{"name": "b", "table": row}, {"name": "a", "table": row},
               {"name": "c", "table": {**row, "pf1": 0.9}}]
    assert [name for name, _ in compare(reports).rows] == ["c", "a", "b"]
    assert len(compare(reports[:1]).rows) == 1
    assert compare(reports[:1]).formatted()[0][6] == "inf"
    with pytest.raises(ValueError):
        compare([])


def test_histogram_csv_from_report(rng):
    rep = make_reports(rng, 1)[0]
    data = json.loads(rep.to_json())
    text = histogram_csv(data, "normal", 5)
    lines = text.splitlines()
    assert lines[0] == "bin_lo,bin_hi,easy_count,easy_frac,hard_count,hard_frac"
    assert len(lines) == 6
    counts = sum(int(line.split(",")[2]) + int(line.split(",")[4]) for line in lines[1:])
    assert counts == rep.images[0].matchset_normal.m


def test_json_format():
    text = dumps_report({"b": 1 / 3, "a": math.inf, "c": [0.00005, 2.5e-5]})
    assert json.loads(text) == {"a": "inf", "b": 0.3333, "c": [0.0001, 0.0]}
    assert text.index('"a"') < text.index('"b"')


def test_baseline_threshold():
    assert not baseline_threshold_predict(np.full((4, 4), 255, np.uint8)).any()
    assert baseline_threshold_predict(np.zeros((4, 4), np.uint8)).all()
    img, gt = generate_page(SMALL, 0)
    pred = baseline_threshold_predict(img, 128)
    assert not (binarize_ground_truth(gt) & ~pred).any()

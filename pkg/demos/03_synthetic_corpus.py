"""
From a synthetic corpus to a comparison table
=============================================

Generate pages with known masks, predict them with the dark-ink threshold
baseline, evaluate the corpus and put the result next to a stored reference
report.
"""

import tempfile
from pathlib import Path

from textseg_eval import SynthConfig, compare, evaluate_corpus, generate_corpus
from textseg_eval.harness import baseline_directory, load_report

work = Path(tempfile.mkdtemp(prefix="textseg-demo-"))
corpus, preds = work / "corpus", work / "baseline"

manifest = generate_corpus(SynthConfig(page_size=(384, 384), seed=11), 8, corpus)
print("class pixels:", manifest["class_pixels"])

baseline_directory(corpus, preds, threshold=128)

report = evaluate_corpus(corpus, preds, name="threshold baseline")
report.write_json(work / "baseline.json")
print("pooled columns:", {k: round(v, 4) for k, v in report.table.items()})

# The texture's halftone dots are dark too, so the baseline reaches full recall
# and loses precision to many small false-positive components.
normal = report.pooled()["normal"]["components"]
print(f"components: m={normal['m']} tp={normal['tp']} fp={normal['fp']} d={normal['d']}")

fixture = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "reference_report.json"
reports = [report.to_dict()] + ([load_report(fixture)] if fixture.exists() else [])
print()
print(compare(reports).to_markdown())
print("files written to", work)

"""Command-line entry point: ``textseg-eval <verb> [options]``.

Exit codes: 0 on success, 2 on usage or fatal errors, 3 when ``--strict`` finds
unpaired files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import MissingPairs, TextSegEvalError
from .harness import (
    EvaluationConfig,
    baseline_directory,
    compare,
    default_jobs,
    evaluate_corpus,
    histogram_csv,
    load_report,
)
from .masks import DEFAULT_PRED_THRESHOLD, PaletteConfig, parse_rgb, split_page_file
from .synthgen import SynthConfig, generate_corpus

EXIT_OK, EXIT_FATAL, EXIT_MISSING = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _rgb_arg(text):
    try:
        return parse_rgb(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _byte_arg(text):
    value = int(text)
    if not 0 <= value <= 255:
        raise argparse.ArgumentTypeError(f"{text} is not in 0..255")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="textseg-eval", description="Evaluate text segmentation masks.")
    sub = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    ev = sub.add_parser("evaluate", help="evaluate predictions against ground truth")
    ev.add_argument("--gt-dir", required=True, type=Path, help="directory of ground-truth PNGs")
    ev.add_argument("--pred-dir", required=True, type=Path, help="directory of prediction PNGs (same stems)")
    ev.add_argument("--mode", choices=("normal", "relaxed", "both"), default="both", help="modes to report (default: both)")
    ev.add_argument("--out", type=Path, help="write the JSON report here (default: stdout)")
    ev.add_argument("--csv", type=Path, help="also write a flat per-image CSV table")
    ev.add_argument("--name", help="method name shown by compare (default: prediction dir name)")
    ev.add_argument("--jobs", type=_positive_int, default=default_jobs(), help="worker processes (default: CPU count)")
    ev.add_argument("--strict", action="store_true", help="fail with exit code 3 when files are unpaired")
    ev.add_argument("--bins", type=_positive_int, default=10, help="histogram bins embedded in the report (default: 10)")
    ev.add_argument("--pred-threshold", type=_byte_arg, default=DEFAULT_PRED_THRESHOLD, help="text iff intensity >= N (default: 128)")
    ev.add_argument("--gt-encoding", choices=("palette", "gray"), default="palette", help="ground-truth encoding (default: palette)")
    _palette_args(ev)

    cmp_ = sub.add_parser("compare", help="tabulate stored reports")
    cmp_.add_argument("reports", nargs="+", type=Path, help="report JSON files")
    cmp_.add_argument("--format", choices=("md", "csv"), default="md", help="output format (default: md)")
    cmp_.add_argument("--sort", default="pf1", help="column to sort by, descending (default: pf1)")
    cmp_.add_argument("--out", type=Path, help="write here instead of stdout")

    hist = sub.add_parser("histogram", help="per-class component F1 histogram from a report")
    hist.add_argument("report", type=Path, help="report JSON file")
    hist.add_argument("--bins", type=_positive_int, default=10, help="number of bins (default: 10)")
    hist.add_argument("--mode", choices=("normal", "relaxed"), default="normal", help="evaluation mode (default: normal)")
    hist.add_argument("--out", type=Path, help="write CSV here instead of stdout")

    syn = sub.add_parser("synth", help="generate a synthetic corpus")
    syn.add_argument("--out", required=True, type=Path, help="output directory")
    syn.add_argument("-n", "--count", type=_positive_int, default=10, help="number of pages (default: 10)")
    syn.add_argument("--config", type=Path, help="JSON file with SynthConfig fields")
    syn.add_argument("--seed", type=int, help="override the config seed")
    syn.add_argument("--font", help="override the glyph font file")
    syn.add_argument("--page-size", type=int, nargs=2, metavar=("W", "H"), help="override the page size")
    syn.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (default: 1)")
    _palette_args(syn)

    spl = sub.add_parser("split", help="cut double-page images into halves")
    spl.add_argument("input_dir", type=Path, help="directory of PNG spreads")
    spl.add_argument("--out", required=True, type=Path, help="output directory")

    base = sub.add_parser("baseline", help="dark-ink threshold predictions")
    base.add_argument("image_dir", type=Path, help="directory of page images")
    base.add_argument("--out", required=True, type=Path, help="output directory for masks")
    base.add_argument("--threshold", type=_byte_arg, default=DEFAULT_PRED_THRESHOLD, help="text iff intensity < N (default: 128)")
    return parser


def _palette_args(p):
    p.add_argument("--palette-easy", type=_rgb_arg, default=(0, 0, 0), metavar="R,G,B", help="easy-text color (default: 0,0,0)")
    p.add_argument("--palette-hard", type=_rgb_arg, default=(255, 0, 255), metavar="R,G,B", help="hard-text color (default: 255,0,255)")
    p.add_argument("--palette-nontext", type=_rgb_arg, default=(255, 255, 0), metavar="R,G,B", help="non-text color (default: 255,255,0)")
    p.add_argument("--palette-tolerance", type=_byte_arg, default=32, metavar="N", help="max per-channel deviation (default: 32)")


def _palette(args) -> PaletteConfig:
    return PaletteConfig(args.palette_easy, args.palette_hard, args.palette_nontext, args.palette_tolerance)


def parse_args(argv):
    """Parse ``argv``; raises :class:`UsageError` naming the offending token."""
    return build_parser().parse_args(argv)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(args) -> int:
    if args.verb == "evaluate":
        modes = ("normal", "relaxed") if args.mode == "both" else (args.mode,)
        config = EvaluationConfig(_palette(args), args.pred_threshold, args.gt_encoding, modes, args.bins)
        try:
            report = evaluate_corpus(args.gt_dir, args.pred_dir, config, jobs=args.jobs, strict=args.strict, name=args.name)
        except MissingPairs as exc:
            print(f"textseg-eval: {exc}", file=sys.stderr)
            return EXIT_MISSING
        _emit(report.to_json(), args.out)
        if args.csv:
            report.write_csv(args.csv)
        skipped = report.missing_ground_truth + report.missing_prediction
        if skipped:
            print(f"textseg-eval: skipped {len(skipped)} unpaired file(s)", file=sys.stderr)
    elif args.verb == "compare":
        table = compare([load_report(p) for p in args.reports], sort_key=args.sort)
        _emit(table.to_csv() if args.format == "csv" else table.to_markdown(), args.out)
    elif args.verb == "histogram":
        _emit(histogram_csv(load_report(args.report), args.mode, args.bins), args.out)
    elif args.verb == "synth":
        data = json.loads(args.config.read_text()) if args.config else {}
        if args.seed is not None:
            data["seed"] = args.seed
        if args.font:
            data["font_source"] = args.font
        if args.page_size:
            data["page_size"] = args.page_size
        manifest = generate_corpus(SynthConfig.from_dict(data), args.count, args.out, jobs=args.jobs, palette=_palette(args))
        print(f"wrote {manifest['n']} pages to {args.out}", file=sys.stderr)
    elif args.verb == "split":
        args.out.mkdir(parents=True, exist_ok=True)
        files = sorted(args.input_dir.glob("*.png"))
        for path in files:
            split_page_file(path, args.out)
        print(f"split {len(files)} image(s) into {args.out}", file=sys.stderr)
    elif args.verb == "baseline":
        written = baseline_directory(args.image_dir, args.out, args.threshold)
        print(f"wrote {len(written)} mask(s) to {args.out}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FATAL
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return run(args)
    except (TextSegEvalError, OSError, ValueError, KeyError) as exc:
        print(f"textseg-eval: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())

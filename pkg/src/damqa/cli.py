"""Command-line interface.

Subcommands: run, score, judge, patches, sweep, convert, fixtures.
Exit codes: 0 success, 1 usage error, 2 data error, 3 backend failure or
failure threshold exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from damqa import datasets as ds
from damqa import runner
from damqa.backend import HttpBackend, MockBackend
from damqa.config import judge_endpoint, load_run_config
from damqa.errors import BackendUnavailableError, DataError
from damqa.views import enumerate_patches

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the harness contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="damqa",
                     description="Sliding-window VQA evaluation harness")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run inference over a dataset")
    p_run.add_argument("--config", type=Path, default=None,
                       help="JSON run config (defaults apply when omitted)")
    p_run.add_argument("--dataset", type=Path, required=True)
    p_run.add_argument("--images", type=Path, required=True)
    p_run.add_argument("--out", type=Path, required=True)
    p_run.add_argument("--mode", choices=["baseline", "sliding"], default=None)
    p_run.add_argument("--concurrency", type=int, default=None)

    p_score = sub.add_parser("score", help="score a predictions file")
    p_score.add_argument("--preds", type=Path, required=True)
    p_score.add_argument("--dataset", type=Path, required=True)
    p_score.add_argument("--metric", required=True,
                         help="one of: " + ", ".join(runner.METRICS))
    p_score.add_argument("--tau", type=float, default=0.5)
    p_score.add_argument("--out", type=Path, default=None,
                         help="write the full report here; stdout otherwise")

    p_judge = sub.add_parser("judge", help="grade predictions with an LLM judge")
    p_judge.add_argument("--preds", type=Path, required=True)
    p_judge.add_argument("--dataset", type=Path, required=True)
    p_judge.add_argument("--template", type=Path, default=None,
                         help="judge prompt template file (built-in default)")
    p_judge.add_argument("--judge-url", default=None,
                         help="judge backend base URL (or DAMQA_JUDGE_URL)")
    p_judge.add_argument("--out", type=Path, default=None)

    p_patches = sub.add_parser("patches", help="print sliding-window rects")
    p_patches.add_argument("--width", type=int, required=True)
    p_patches.add_argument("--height", type=int, required=True)
    p_patches.add_argument("--window", type=int, default=512)
    p_patches.add_argument("--stride", type=int, default=256)

    p_sweep = sub.add_parser("sweep", help="run an ablation sweep")
    p_sweep.add_argument("--axis", required=True,
                         help="one of: " + ", ".join(runner.SWEEP_AXES))
    p_sweep.add_argument("--values", default=None,
                         help="window-stride: '512x256,256x128'; "
                              "unanswerable-weight: '0.0,0.5,1.0,1.5'; "
                              "prompt-rules: ignored (full grid)")
    p_sweep.add_argument("--config", type=Path, default=None)
    p_sweep.add_argument("--dataset", type=Path, required=True)
    p_sweep.add_argument("--images", type=Path, required=True)
    p_sweep.add_argument("--out-dir", type=Path, required=True)
    p_sweep.add_argument("--metric", default=None,
                         help="optionally score each sweep point")
    p_sweep.add_argument("--tau", type=float, default=0.5)

    p_convert = sub.add_parser("convert", help="convert a benchmark file to canonical JSONL")
    p_convert.add_argument("--format", required=True,
                           help="one of: " + ", ".join(ds.SOURCE_FORMATS))
    p_convert.add_argument("--in", dest="in_path", type=Path, required=True)
    p_convert.add_argument("--out", type=Path, required=True)
    p_convert.add_argument("--questions", type=Path, default=None,
                           help="vqav2 questions file")
    p_convert.add_argument("--subset-ids", type=Path, default=None,
                           help="restrict vqav2 to these question ids")

    p_fix = sub.add_parser("fixtures",
                           help="export per-view mock answers as digest fixtures")
    p_fix.add_argument("--config", type=Path, default=None)
    p_fix.add_argument("--dataset", type=Path, required=True)
    p_fix.add_argument("--images", type=Path, required=True)
    p_fix.add_argument("--answers", type=Path, required=True,
                       help="mock fixture file (by_view schema)")
    p_fix.add_argument("--out", type=Path, required=True)
    return parser


def _parse_sweep_values(axis: str, text) -> list:
    if axis == "prompt-rules":
        return [(False, False), (True, False), (False, True), (True, True)]
    if not text:
        raise ValueError(f"--values is required for axis {axis}")
    if axis == "window-stride":
        pairs = []
        for chunk in text.split(","):
            window, _, stride = chunk.partition("x")
            pairs.append((int(window), int(stride)))
        return pairs
    return [float(chunk) for chunk in text.split(",")]


def _cmd_run(args) -> int:
    cfg = load_run_config(args.config,
                          overrides={"mode": args.mode,
                                     "concurrency": args.concurrency})
    summary = runner.run_evaluation(cfg, args.dataset, args.images, args.out)
    if summary["samples"] and summary["failed"] / summary["samples"] > cfg.max_failure_ratio:
        print(f"error: {summary['failed']}/{summary['samples']} samples failed",
              file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def _cmd_score(args) -> int:
    report = runner.score_predictions(args.preds, args.dataset, args.metric, args.tau)
    payload = json.dumps(report.to_dict(), indent=2, ensure_ascii=False)
    if args.out:
        args.out.write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    print(f"{report.metric}: {report.aggregate:.4f} over {report.num_samples} samples",
          file=sys.stderr)
    return EXIT_OK


def _cmd_judge(args) -> int:
    template = None
    if args.template is not None:
        template = args.template.read_text(encoding="utf-8")
    endpoint = judge_endpoint(args.judge_url)
    backend = (MockBackend.from_file(endpoint.base_url[len("mock:"):])
               if endpoint.base_url.startswith("mock:") else HttpBackend(endpoint))
    kwargs = {} if template is None else {"template": template}
    report = runner.judge_predictions(args.preds, args.dataset, backend, **kwargs)
    payload = json.dumps(report, indent=2, ensure_ascii=False)
    if args.out:
        args.out.write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    print(f"llm score: {report['llm_score']:.4f} over {report['num_samples']} samples",
          file=sys.stderr)
    return EXIT_OK


def _cmd_patches(args) -> int:
    rects = enumerate_patches(args.width, args.height, args.window, args.stride)
    for rect in rects:
        print(f"{rect.x}\t{rect.y}\t{rect.w}\t{rect.h}")
    print(f"{len(rects)} patches", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_run_config(args.config)
    try:
        values = _parse_sweep_values(args.axis, args.values)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    table = runner.sweep(cfg, args.axis, values, args.dataset, args.images,
                         args.out_dir, metric=args.metric, tau=args.tau)
    print(table, end="")
    return EXIT_OK


def _cmd_convert(args) -> int:
    count = ds.convert(args.format, args.in_path, args.out,
                       questions_path=args.questions,
                       subset_ids_path=args.subset_ids)
    print(f"wrote {count} records to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_fixtures(args) -> int:
    cfg = load_run_config(args.config)
    mock = MockBackend.from_file(args.answers)
    fixtures = runner.export_digest_fixtures(cfg, args.dataset, args.images, mock)
    args.out.write_text(json.dumps(fixtures, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    print(f"wrote {len(fixtures['infer'])} digest fixtures to {args.out}",
          file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "score": _cmd_score,
    "judge": _cmd_judge,
    "patches": _cmd_patches,
    "sweep": _cmd_sweep,
    "convert": _cmd_convert,
    "fixtures": _cmd_fixtures,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BackendUnavailableError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())

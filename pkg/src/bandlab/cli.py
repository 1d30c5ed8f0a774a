"""Command-line entry point: ``bandlab <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .band import band_from_spec, sample_band
from .boundary import PointSequence, class_probe
from .errors import BandlabError
from .experiments import Criterion, ExperimentConfig, ExperimentReport, run_experiment
from .metric import four_point_delta, load_metric, quadruple_defects, three_point_delta
from .models import model_from_spec


def _read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _emit(report: ExperimentReport, args) -> int:
    text = report.to_csv() if args.format == "csv" else report.dumps() + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def _timed(fn, args) -> ExperimentReport:
    start = time.perf_counter()
    report = fn()
    report.duration_ms = 0.0 if args.no_timing else round((time.perf_counter() - start) * 1000, 3)
    return report


def cmd_delta(args) -> int:
    def run():
        space = load_metric(args.matrix)
        four = four_point_delta(space, args.threads)
        three = three_point_delta(space)
        m = {"n": space.n, "four_point_delta": four.delta, "four_point_witness": list(four.witness),
             "three_point_delta": three.delta, "three_point_witness": list(three.witness),
             "base": three.base}
        criteria = [Criterion("four-point delta <= 2 x three-point delta at base", four.delta,
                              2 * three.delta + args.tolerance, asserted=False)]
        report = ExperimentReport({"matrix": args.matrix, "threads": args.threads}, m, criteria)
        if args.format == "csv":
            report.quadruples = quadruple_defects(space)
        return report
    return _emit(_timed(run, args), args)


def cmd_band_sample(args) -> int:
    spec = _read_json(args.band)
    band = band_from_spec(spec)
    points = sample_band(band, args.n, args.radius_cap, args.seed, args.diagonal)
    text = json.dumps({"band": band.spec(), "points": [band.point_to_json(p) for p in points]},
                      indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _experiment(name: str):
    def cmd(args) -> int:
        data = _read_json(args.config)
        data.setdefault("experiment", name)
        if args.tolerance is not None:
            data["tolerance"] = args.tolerance
        if args.threads is not None:
            data["threads"] = args.threads
        cfg = ExperimentConfig.from_dict(data)
        report = run_experiment(cfg, timing=not args.no_timing)
        if args.output is None and cfg.output:
            args.output = cfg.output
        return _emit(report, args)
    return cmd


def _space_from_spec(spec: dict):
    if "factor1" in spec:
        return band_from_spec(spec)
    return model_from_spec(spec)


def cmd_probe(args) -> int:
    """``{"space": spec, "seq1": [...], "seq2": [...], "window": w, "threshold": t}``."""
    def run():
        data = _read_json(args.sequences)
        space = _space_from_spec(data["space"])
        seqs = [PointSequence(space, [space.point_from_json(p) for p in data[key]])
                for key in ("seq1", "seq2")]
        window = int(data.get("window", 10))
        threshold = float(data.get("threshold", 20.0))
        v1, v2, eq = class_probe(*seqs, window=window, threshold=threshold)
        m = {"verdicts": [v1.to_json(), v2.to_json()], "equivalent": eq}
        return ExperimentReport({"sequences": args.sequences, "window": window,
                                 "threshold": threshold}, m, [])
    return _emit(_timed(run, args), args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None,
                        help="slack added to asserted inequalities (default 1e-8)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for delta scans")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--no-timing", action="store_true",
                        help="report duration_ms as 0 so outputs are byte-identical across runs")

    parser = argparse.ArgumentParser(prog="bandlab",
                                     description="Hyperbolicity experiments on product bands.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delta", parents=[common], help="hyperbolicity constants of a distance matrix")
    p.add_argument("matrix", help="CSV matrix or JSON {labels, base, dist}")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("band-sample", parents=[common], help="sample points of a band")
    p.add_argument("band", help="band spec JSON")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius-cap", type=float, default=20.0)
    p.add_argument("--diagonal", action="store_true")
    p.set_defaults(func=cmd_band_sample)

    for name in ("theorem1", "theorem2", "counterexample", "limitcase"):
        p = sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
        p.add_argument("config", help="experiment config JSON")
        p.set_defaults(func=_experiment(name))

    p = sub.add_parser("probe", parents=[common], help="boundary probe on two point sequences")
    p.add_argument("sequences", help="JSON with space spec and two sequences")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("delta", "probe", "band-sample"):
        args.threads = args.threads or 1
        args.tolerance = 1e-8 if args.tolerance is None else args.tolerance
    try:
        return args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except (BandlabError, OSError, ValueError, KeyError) as exc:
        print(f"bandlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: generate | transform | estimate | verify.

Exit codes: 0 success (and verdict consistent), 1 verdict inconsistent,
2 usage/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from ._validation import NumericalError
from .characterize import Thresholds, characterization_verdict
from .estimators import (
    gaussian_abs_moment,
    holder_exponent_estimate,
    p_variation,
    weighted_qv,
    weighted_qv_tail,
)
from .generate import generate_cholesky, generate_davies_harte
from .grid import PathEnsemble, TimeGrid
from .report import ReportDocument, emit_report, read_paths_csv, write_paths_csv
from .transforms import ProcessTransform
from ._validation import DegeneratePathError

GENERATORS = {"davies-harte": generate_davies_harte, "cholesky": generate_cholesky}
TRANSFORM_TARGETS = (
    "y", "x-from-y", "martingale", "martingale-via-y", "w",
    "y-from-m", "x-from-m", "x-from-w", "bracket",
)


def _hurst_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"hurst must be a number, got {text!r}") from exc
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(
            f"hurst must lie in the open interval (0, 1), got {value}"
        )
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def extract_threshold_overrides(argv):
    """Split off `--threshold.<name> <value>` / `--threshold.<name>=<value>` flags."""
    rest, overrides = [], {}
    i = 0
    while i < len(argv):
        token = argv[i]
        if token.startswith("--threshold."):
            key, eq, inline = token[len("--threshold."):].partition("=")
            if eq:
                raw = inline
            else:
                if i + 1 >= len(argv):
                    raise ValueError(f"flag --threshold.{key} needs a value")
                i += 1
                raw = argv[i]
            try:
                overrides[key] = float(raw)
            except ValueError as exc:
                raise ValueError(
                    f"threshold override {key} needs a numeric value, got {raw!r}"
                ) from exc
        else:
            rest.append(token)
        i += 1
    return rest, overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmchar",
        description="Simulate fractional Brownian motion, run its martingale "
                    "transforms, and verify the characterization properties.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_generation=True):
        p.add_argument("--hurst", type=_hurst_arg, required=True,
                       help="Hurst index in (0, 1)")
        if with_generation:
            p.add_argument("--t", type=_positive_float, default=1.0,
                           help="time horizon (default 1)")
            p.add_argument("--n", type=_positive_int, default=4096,
                           help="grid steps (default 4096)")
            p.add_argument("--paths", type=_positive_int, default=500,
                           help="ensemble size (default 500)")
            p.add_argument("--seed", type=int, default=42,
                           help="ensemble seed (default 42)")
            p.add_argument("--generator", choices=sorted(GENERATORS),
                           default="davies-harte")

    gen = sub.add_parser("generate", help="simulate an fBm ensemble to CSV")
    add_common(gen)
    gen.add_argument("--out", required=True, help="output path CSV")

    tra = sub.add_parser("transform", help="apply a process transform to paths")
    add_common(tra, with_generation=False)
    tra.add_argument("--in", dest="input", required=True, help="input path CSV")
    tra.add_argument("--target", choices=TRANSFORM_TARGETS, default="martingale")
    tra.add_argument("--out", required=True, help="output path CSV")

    est = sub.add_parser("estimate", help="run the path estimators on a CSV")
    add_common(est, with_generation=False)
    est.add_argument("--in", dest="input", required=True, help="input path CSV")
    est.add_argument("--out", required=True, help="output report JSON")

    ver = sub.add_parser("verify", help="verify the characterization properties")
    add_common(ver)
    ver.add_argument("--in", dest="input",
                     help="optional input path CSV (skips generation)")
    ver.add_argument("--out", required=True, help="output report JSON")
    return parser


def _config_echo(args, thresholds: Thresholds | None = None) -> dict:
    echo = {"command": args.command, "hurst": args.hurst}
    for name in ("t", "n", "paths", "seed", "generator", "input", "target", "out"):
        if hasattr(args, name):
            echo["horizon" if name == "t" else name] = getattr(args, name)
    if thresholds is not None:
        echo["thresholds"] = thresholds.to_dict()
    return echo


def _load_or_generate(args, timings: dict) -> PathEnsemble:
    if getattr(args, "input", None):
        values, grid = read_paths_csv(args.input)
        return PathEnsemble.from_matrix(values, grid, role="X", seed=None)
    grid = TimeGrid(args.t, args.n)
    start = time.perf_counter()
    ens = GENERATORS[args.generator](grid, args.hurst, args.seed, args.paths)
    timings["generate_s"] = time.perf_counter() - start
    return ens


def _cmd_generate(args, overrides) -> int:
    if overrides:
        raise ValueError("generate accepts no --threshold overrides")
    grid = TimeGrid(args.t, args.n)
    ens = GENERATORS[args.generator](grid, args.hurst, args.seed, args.paths)
    write_paths_csv(ens.to_matrix(), grid, args.out)
    print(f"wrote {args.paths} path(s) to {args.out}", file=sys.stderr)
    return 0


def _cmd_transform(args, overrides) -> int:
    if overrides:
        raise ValueError("transform accepts no --threshold overrides")
    values, grid = read_paths_csv(args.input)
    out = ProcessTransform(kind=args.target, hurst=args.hurst,
                           horizon=grid.horizon).fit_transform(values)
    write_paths_csv(out, grid, args.out)
    print(f"wrote {args.target} transform of {values.shape[0]} path(s) to {args.out}",
          file=sys.stderr)
    return 0


def _cmd_estimate(args, overrides) -> int:
    if overrides:
        raise ValueError("estimate accepts no --threshold overrides")
    values, grid = read_paths_csv(args.input)
    ens = PathEnsemble.from_matrix(values, grid, role="X", seed=None)
    h = args.hurst
    n_paths = len(ens)
    wq = np.array([weighted_qv(p, h) for p in ens.paths])
    pv = np.array([p_variation(p, h) for p in ens.paths])
    estimates = {
        "weighted_qv": _mean_block(wq, target=grid.horizon ** (2 * h)),
        "p_variation": _mean_block(
            pv, target=gaussian_abs_moment(1.0 / h) * grid.horizon),
    }
    if grid.n_steps % 2 == 0:
        s = 0.5 * grid.horizon
        tail = np.array([weighted_qv_tail(p, h, s) for p in ens.paths])
        estimates["tail_weighted_qv"] = _mean_block(
            tail, target=grid.horizon ** (2 * h - 1) * (grid.horizon - s))
    if grid.n_steps >= 64:
        holder = []
        for p in ens.paths:
            try:
                holder.append(holder_exponent_estimate(p).value)
            except DegeneratePathError:
                holder.append(None)
        defined = [v for v in holder if v is not None]
        estimates["holder_exponent"] = {
            "median": float(np.median(defined)) if defined else None,
            "n_defined": len(defined),
            "n_samples": n_paths,
        }
    doc = ReportDocument(config=_config_echo(args), results={"estimates": estimates})
    emit_report(doc, args.out)
    print(f"wrote estimate report to {args.out}", file=sys.stderr)
    return 0


def _mean_block(samples: np.ndarray, target: float) -> dict:
    n = samples.size
    return {
        "mean": float(samples.mean()),
        "std_error": float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
        "n_samples": int(n),
        "target": float(target),
    }


def _cmd_verify(args, overrides) -> int:
    thresholds = Thresholds().replace(**overrides)
    timings: dict = {}
    ens = _load_or_generate(args, timings)
    start = time.perf_counter()
    verdict = characterization_verdict(ens, args.hurst, thresholds=thresholds)
    timings["verify_s"] = time.perf_counter() - start
    results = {"verdict": verdict.to_dict(), "series": verdict.series}
    doc = ReportDocument(config=_config_echo(args, thresholds), results=results,
                         timings=timings)
    emit_report(doc, args.out)
    print(f"verdict: {verdict.verdict} (report: {args.out})", file=sys.stderr)
    return 0 if verdict.consistent else 1


_COMMANDS = {
    "generate": _cmd_generate,
    "transform": _cmd_transform,
    "estimate": _cmd_estimate,
    "verify": _cmd_verify,
}


def parse_and_dispatch(argv) -> int:
    """Parse argv (without the program name) and run the command.

    Returns the exit code instead of raising SystemExit, so it can be driven
    in-process.
    """
    try:
        argv, overrides = extract_threshold_overrides(list(argv))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args, overrides)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

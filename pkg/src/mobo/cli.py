"""Command-line interface: experiment runs and geometry utilities.

Point files are CSV with a ``f1,...,fM`` header and one objective vector per
row, in the maximization convention.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .engine import load_config, run_experiment
from .metrics import WeightDistribution, generalized_hypervolume
from .pareto import box_decompose, hypervolume, pareto_filter
from .problems import make_problem


def read_points(path) -> np.ndarray:
    pts = np.genfromtxt(path, delimiter=",", skip_header=1, ndmin=2)
    if pts.size == 0:
        return pts.reshape(0, 0)
    return pts


def write_points(points, stream) -> None:
    points = np.atleast_2d(points)
    stream.write(",".join(f"f{j + 1}" for j in range(points.shape[1])) + "\n")
    for row in points:
        stream.write(",".join(repr(float(v)) for v in row) + "\n")


def _parse_reference(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _parse_distribution(text: str) -> WeightDistribution:
    if text == "uniform":
        return WeightDistribution(kind="uniform")
    if text.startswith("beta:"):
        a, b = (float(v) for v in text[len("beta:"):].split(","))
        return WeightDistribution(kind="beta", a=np.array([a]), b=np.array([b]))
    if text.startswith("box:"):
        lo, hi = (float(v) for v in text[len("box:"):].split(","))
        return WeightDistribution(kind="box", a=np.array([lo]), b=np.array([hi]))
    raise argparse.ArgumentTypeError(
        f"unknown distribution {text!r}; use uniform, beta:a,b or box:lo,hi"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobo")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an optimization experiment")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--out", required=True, help="output directory")

    hv = sub.add_parser("hv", help="exact hypervolume of a point file")
    hv.add_argument("--points", required=True)
    hv.add_argument("--ref", required=True, type=_parse_reference)

    ghv = sub.add_parser("ghv", help="Monte Carlo weighted hypervolume")
    ghv.add_argument("--points", required=True)
    ghv.add_argument("--ref", required=True, type=_parse_reference)
    ghv.add_argument("--dist", default="uniform", type=_parse_distribution)
    ghv.add_argument("--n", type=int, default=1_000_000)
    ghv.add_argument("--seed", type=int, default=0)

    dec = sub.add_parser("decompose", help="box decomposition of a point file")
    dec.add_argument("--points", required=True)

    front = sub.add_parser("front", help="emit a problem's true front")
    front.add_argument("--problem", required=True)
    front.add_argument("--d", type=int, default=None, help="input dimension")
    front.add_argument("--zdt2-paper-sign", action="store_true")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "run":
        try:
            cfg = load_config(args.config)
        except (ValueError, TypeError) as exc:
            print(f"bad config: {exc}", file=sys.stderr)
            return 2
        run_experiment(cfg, out_dir=args.out)
        return 0

    if args.command == "hv":
        print(repr(float(hypervolume(pareto_filter(read_points(args.points)), args.ref))))
        return 0

    if args.command == "ghv":
        value = generalized_hypervolume(
            pareto_filter(read_points(args.points)),
            args.ref,
            args.dist,
            n_mc=args.n,
            seed=args.seed,
        )
        print(repr(float(value)))
        return 0

    if args.command == "decompose":
        dec = box_decompose(pareto_filter(read_points(args.points)))
        m = dec.n_objectives
        header = [f"l{j + 1}" for j in range(m)] + [f"u{j + 1}" for j in range(m)]
        sys.stdout.write(",".join(header) + "\n")
        for lo, up in zip(dec.lower, dec.upper):
            cells = ["-inf" if v == -np.inf else repr(float(v)) for v in lo]
            cells += [repr(float(v)) for v in up]
            sys.stdout.write(",".join(cells) + "\n")
        return 0

    if args.command == "front":
        try:
            problem = make_problem(args.problem, args.d, args.zdt2_paper_sign)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return 2
        if problem.true_front is None:
            print("problem has no known front", file=sys.stderr)
            return 1
        write_points(problem.true_front(), sys.stdout)
        return 0

    return 1


if __name__ == "__main__":
    raise SystemExit(main())

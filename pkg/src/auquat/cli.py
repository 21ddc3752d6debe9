"""Batch command-line interface.

Subcommands: gen, calibrate, calibrate-world, slam, simulate, probe.
All outputs are deterministic for a fixed seed.  Exit codes: 0 success,
1 I/O failure, 2 malformed input file, 3 solver did not converge (the
solution file is still written).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, files
from . import generation as gen
from . import motion
from .control import Gains, LyapunovWeights, integrate
from .errors import ParseError
from .generation import NoiseModel
from .optimization import STATUS_CONVERGED, SolverConfig, solve


def _csv_floats(count=None):
    def parse(text):
        try:
            values = np.array([float(v) for v in text.replace(",", " ").split()])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if count is not None and len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated values")
        return values

    return parse


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="auquat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"auquat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic problem instance with ground truth")
    p.add_argument("--problem", required=True, choices=["handeye", "handeye-world", "posegraph"])
    p.add_argument("-m", "--pairs", type=int, default=5, help="measurement pairs (hand-eye)")
    p.add_argument("-n", "--vertices", type=int, default=10, help="vertex count (pose graph)")
    p.add_argument("--loop-edges", type=int, default=10, help="extra arcs beyond the chain")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rot-noise", type=float, default=0.0)
    p.add_argument("--trans-noise", type=float, default=0.0)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--truth", default=None, help="truth sidecar path (default: OUTPUT.truth)")

    for name in ("calibrate", "calibrate-world", "slam"):
        p = sub.add_parser(name, help=f"solve a {name.replace('-', ' ')} problem file")
        p.add_argument("input")
        p.add_argument("-o", "--output", required=True)
        p.add_argument("--restarts", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iters", type=int, default=10_000)
        p.add_argument("--target-objective", type=float, default=1e-18)
        p.add_argument("--no-gn", action="store_true", help="skip the Gauss-Newton refinement")

    p = sub.add_parser("simulate", help="integrate the closed-loop pose error")
    p.add_argument("--start", type=_csv_floats(7), default=None, help="start pose, 7 values")
    p.add_argument("--target", type=_csv_floats(7), default=None, help="target pose, 7 values")
    p.add_argument("--seed", type=int, default=0, help="seed for omitted start/target")
    p.add_argument("--kr", type=_csv_floats(3), default=np.ones(3))
    p.add_argument("--kt", type=_csv_floats(3), default=np.ones(3))
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--dynamics", choices=["exponential", "twist"], default="exponential")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("probe", help="measure the motion-representation discontinuities")
    p.add_argument("--axis", type=_csv_floats(3), default=np.array([0.0, 0.0, 1.0]))
    p.add_argument("--deltas", type=_csv_floats(), default=np.array([1e-6, 1e-4, 1e-2, 1.0]))
    p.add_argument("-o", "--output", required=True)

    return parser


def _run_gen(args) -> int:
    noise = None
    if args.rot_noise or args.trans_noise:
        noise = NoiseModel(args.rot_noise, args.trans_noise, args.noise_seed)
    if args.problem == "handeye":
        problem, truth = gen.gen_handeye(args.pairs, args.seed, args.sigma, noise)
        indexed = False
    elif args.problem == "handeye-world":
        problem, x_true, y_true = gen.gen_handeye_world(args.pairs, args.seed, args.sigma, noise)
        truth = np.stack([x_true, y_true])
        indexed = False
    else:
        problem, truth = gen.gen_posegraph(
            args.vertices, args.loop_edges, args.seed, args.sigma, noise
        )
        indexed = True
    files.write_problem(args.output, problem)
    files.write_truth(args.truth or args.output + ".truth", truth, indexed=indexed)
    return 0


def _run_solve(args, world: bool, posegraph: bool) -> int:
    problem = files.parse_problem_file(args.input, world=world)
    config = SolverConfig(
        max_iters=args.max_iters,
        grad_tol=args.tol,
        restarts=args.restarts,
        seed=args.seed,
        gn_refine=not args.no_gn,
        target_objective=args.target_objective,
    )
    init = problem.initial if posegraph and getattr(problem, "initial", None) is not None else None
    result = solve(problem, config, init=init)
    files.write_solution(args.output, result, problem)
    return 0 if result.status == STATUS_CONVERGED else 3


def _run_simulate(args) -> int:
    rng = np.random.default_rng(args.seed)
    start = args.start if args.start is not None else gen.random_auq(rng)
    target = args.target if args.target is not None else gen.random_auq(rng)
    trace = integrate(
        start,
        target,
        Gains(args.kr, args.kt),
        args.dt,
        args.steps,
        weights=LyapunovWeights(args.alpha, args.beta),
        dynamics=args.dynamics,
    )
    files.write_trace(args.output, trace)
    return 0


def _run_probe(args) -> int:
    files.write_probe_report(args.output, motion.discontinuity_report(args.axis, args.deltas))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return _run_gen(args)
        if args.command == "calibrate":
            return _run_solve(args, world=False, posegraph=False)
        if args.command == "calibrate-world":
            return _run_solve(args, world=True, posegraph=False)
        if args.command == "slam":
            return _run_solve(args, world=False, posegraph=True)
        if args.command == "simulate":
            return _run_simulate(args)
        return _run_probe(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

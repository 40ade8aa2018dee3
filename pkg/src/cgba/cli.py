"""Command-line surface: experiment runner, theory sweep, metrics, serving.

Exit codes: 0 on success, 1 when any experiment cell failed, 2 on bad
configuration. The ``ATTACK_LOG`` environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import bench, theory
from .errors import AttackToolkitError, InvalidConfig
from .remote import serve_stdio, serve_tcp

log = logging.getLogger("attack")


def _setup_logging() -> None:
    level = os.environ.get("ATTACK_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise InvalidConfig(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise InvalidConfig(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_p_grid(text: str, h: float):
    if not text.startswith("log:"):
        raise InvalidConfig(f"p-grid must look like log:LO,HI,COUNT, got {text!r}")
    lo, hi, count = text[len("log:"):].split(",")
    return theory.default_p_grid(h, float(lo), float(hi), int(count))


def cmd_run(args) -> int:
    spec = bench.ExperimentSpec(
        oracle=args.oracle,
        variants=tuple(args.variant.split(",")),
        mode=args.mode,
        budget=args.budget,
        checkpoints=_int_list(args.checkpoints),
        seed=args.seed,
        samples=args.samples,
        k_init=args.k_init,
        n0=args.n0,
        sigma=args.sigma,
        eps=args.eps,
        subspace=args.subspace,
        image_shape=(_int_list(args.image_shape) if args.image_shape else None),
        threshold=args.threshold,
        init=args.init,
        clip=args.clip,
        sample_files=tuple(args.sample_files or ()),
        workers=args.workers,
    )
    report = bench.run_experiment(spec, args.out)
    for variant, data in sorted(report["variants"].items()):
        log.info("variant %s medians %s", variant, data["median_l2"])
    if report["failures"]:
        for failure in report["failures"]:
            print(f"cell failed: {failure}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}/aggregate.csv and summary.json "
          f"(config {report['config_hash']})")
    return 0


def cmd_theory_sweep(args) -> int:
    p_values = _parse_p_grid(args.p_grid, args.h)
    rows = theory.sweep(args.h, _float_list(args.deltas), p_values,
                        cross_check=args.cross_check, eps=args.eps)
    theory.write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return 0


def cmd_metrics(args) -> int:
    grouped, failures = bench.load_traces(args.traces)
    if not grouped:
        raise InvalidConfig(f"no traces found under {args.traces}")
    if args.checkpoints:
        checkpoints = _int_list(args.checkpoints)
    else:
        summary_path = os.path.join(args.traces, "summary.json")
        if not os.path.exists(summary_path):
            raise InvalidConfig(
                "pass --checkpoints or keep summary.json next to the traces")
        with open(summary_path) as fh:
            checkpoints = tuple(json.load(fh)["checkpoints"])
    report = bench.compute_report(grouped, checkpoints, args.threshold)
    report["failures"] = failures
    with open(args.out, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2, default=list)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 1 if failures else 0


def cmd_serve_builtin(args) -> int:
    spec = args.name if not args.params else f"{args.name}:{args.params}"
    oracle = bench.build_oracle(spec)
    if args.stdio:
        serve_stdio(oracle)
        return 0
    log.info("serving %s on %s:%d", spec, args.host, args.port)
    serve_tcp(oracle, args.host, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attack",
        description="Decision-based black-box attack toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark experiment")
    run.add_argument("--oracle", required=True,
                     help="halfspace|parabola|cone|blobmlp[:k=v,...], "
                          "remote:HOST:PORT or weights:PATH")
    run.add_argument("--variant", default="cgba",
                     help="cgba, cgba-h or bsnv (comma-separated for several)")
    run.add_argument("--mode", choices=["nontargeted", "targeted"],
                     default="nontargeted")
    run.add_argument("--budget", type=int, required=True)
    run.add_argument("--checkpoints", required=True,
                     help="comma-separated query checkpoints")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True)
    run.add_argument("--k-init", type=int, default=1, dest="k_init")
    run.add_argument("--subspace", default="full", help="full or dct:F")
    run.add_argument("--n0", type=int, default=30)
    run.add_argument("--sigma", type=float, default=0.0002)
    run.add_argument("--eps", type=float, default=0.0001)
    run.add_argument("--samples", type=int, default=4)
    run.add_argument("--threshold", type=float, default=1.0)
    run.add_argument("--image-shape", default="",
                     help="C,H,W (required for dct subspace)")
    run.add_argument("--init", default="", choices=["", "random", "targets"])
    run.add_argument("--clip", action="store_true",
                     help="clamp every query to [0,1]")
    run.add_argument("--sample-files", nargs="*",
                     help=".npz files with source/targets arrays")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    th = sub.add_parser("theory", help="analytic boundary-search checks")
    th_sub = th.add_subparsers(dest="theory_command", required=True)
    sweep = th_sub.add_parser("sweep", help="evaluate both searches over a grid")
    sweep.add_argument("--h", type=float, required=True)
    sweep.add_argument("--deltas", required=True,
                       help="comma-separated boundary angles in degrees")
    sweep.add_argument("--p-grid", default="log:0.1,1000,60", dest="p_grid",
                       help="log:LO,HI,COUNT in units of h")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--cross-check", action="store_true", dest="cross_check")
    sweep.add_argument("--eps", type=float, default=1e-6)
    sweep.set_defaults(func=cmd_theory_sweep)

    metrics = sub.add_parser("metrics", help="recompute metrics from traces")
    metrics.add_argument("--traces", required=True)
    metrics.add_argument("--threshold", type=float, required=True)
    metrics.add_argument("--out", required=True)
    metrics.add_argument("--checkpoints", default="")
    metrics.set_defaults(func=cmd_metrics)

    oracle = sub.add_parser("oracle", help="oracle hosting utilities")
    oracle_sub = oracle.add_subparsers(dest="oracle_command", required=True)
    serve = oracle_sub.add_parser("serve-builtin",
                                  help="host a builtin oracle over the wire protocol")
    serve.add_argument("--name", required=True,
                       choices=["halfspace", "parabola", "cone", "blobmlp"])
    serve.add_argument("--params", default="", help="k=v,... oracle parameters")
    serve.add_argument("--port", type=int, default=0)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--stdio", action="store_true",
                       help="serve one session over stdin/stdout")
    serve.set_defaults(func=cmd_serve_builtin)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return 2
    except AttackToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

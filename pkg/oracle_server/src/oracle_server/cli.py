"""Entry point: host a weights file or the seeded toy classifier."""

from __future__ import annotations

import argparse
import sys

from .model import LinearSoftmaxModel
from .server import ServerConfig, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oracle-server",
        description="Serve a hard-label classifier over the NDJSON "
                    "base64-float32 wire protocol")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--weights", help=".npz file with W (classes x n) and b")
    source.add_argument("--toy", default="16,4,0", metavar="N,CLASSES,SEED",
                        help="serve the built-in toy softmax classifier")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0)
    parser.add_argument("--stdio", action="store_true",
                        help="serve one session over stdin/stdout")
    parser.add_argument("--clip", action="store_true",
                        help="clamp inputs to [0,1] before classification")
    parser.add_argument("--dump-weights", metavar="PATH",
                        help="write the served model's weights to PATH and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.weights:
        model = LinearSoftmaxModel.load(args.weights)
    else:
        try:
            n, classes, seed = (int(v) for v in args.toy.split(","))
        except ValueError:
            print(f"--toy expects N,CLASSES,SEED, got {args.toy!r}",
                  file=sys.stderr)
            return 2
        model = LinearSoftmaxModel.toy(n, classes, seed)
    if args.dump_weights:
        model.save(args.dump_weights)
        print(f"wrote weights for n={model.n}, classes={model.classes} "
              f"to {args.dump_weights}")
        return 0
    config = ServerConfig(model=model, host=args.host, port=args.port,
                          stdio=args.stdio, clip=args.clip)
    if not args.stdio:
        print(f"serving n={model.n} classes={model.classes} "
              f"on {args.host}:{args.port}", file=sys.stderr)
    serve(config)
    return 0


if __name__ == "__main__":
    sys.exit(main())

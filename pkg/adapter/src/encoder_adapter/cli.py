"""`adapter serve` / `adapter echo`: stdio encoder services."""

from __future__ import annotations

import argparse
import sys

from .backbones import AdapterConfig, EchoBackbone, ModelLoadError, load_backbone
from .protocol import encode_line, error_message
from .server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="Serve a frozen time-series encoder over stdio NDJSON.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="serve a model backbone")
    p.add_argument("--model", required=True, help="random-patch[:k=v,...] or moment:<name>")
    p.add_argument("--device", default="cpu")
    p.add_argument("--max-length", type=int, default=4096, dest="max_length")
    p.add_argument("--batch-limit", type=int, default=256, dest="batch_limit")
    p.add_argument("--pooling", choices=["mean", "last", "cls"], default="mean")

    p = sub.add_parser("echo", help="protocol fixture: embedding = first D input values")
    p.add_argument("--dim", required=True, type=int)
    p.add_argument("--max-length", type=int, default=1 << 20, dest="max_length")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "echo":
            backbone = EchoBackbone(dim=args.dim, max_length=args.max_length)
            batch_limit = 4096
        else:
            config = AdapterConfig(
                model_id=args.model,
                device=args.device,
                max_length=args.max_length,
                batch_limit=args.batch_limit,
                pooling=args.pooling,
            )
            backbone = load_backbone(config)
            batch_limit = config.batch_limit
    except ModelLoadError as exc:
        sys.stdout.buffer.write(encode_line(error_message(str(exc))))
        sys.stdout.buffer.flush()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return serve(backbone, batch_limit=batch_limit)


if __name__ == "__main__":
    sys.exit(main())

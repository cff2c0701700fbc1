"""Command-line entry point: corpus TSV files in, embedding store out."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .errors import ExtractorError
from .extraction import DEFAULT_MODEL, ExtractionConfig, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract-embeddings",
        description="Embed word-in-context usage pairs with a pretrained encoder",
    )
    parser.add_argument("--usages", required=True, help="usages TSV path")
    parser.add_argument("--instances", required=True, help="instances TSV path")
    parser.add_argument("--out", required=True, help="output embedding store path")
    parser.add_argument(
        "--model", default=DEFAULT_MODEL, help=f"model id or path (default: {DEFAULT_MODEL})"
    )
    parser.add_argument(
        "--max-len", type=int, default=512, help="max subword length incl. specials (default: 512)"
    )
    parser.add_argument("--batch-size", type=int, default=16, help="inference batch size")
    parser.add_argument("--device", default="cpu", help="torch device (default: cpu)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExtractionConfig(
            model=args.model,
            max_len=args.max_len,
            batch_size=args.batch_size,
            device=args.device,
        )
        summary = extract(args.usages, args.instances, args.out, config)
    except (ExtractorError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {summary.n_instances} records ({summary.n_usages} usages, "
        f"dim {summary.dim}) to {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())

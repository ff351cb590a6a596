"""Command-line entry point for batch extraction."""

from __future__ import annotations

import argparse
import logging
import sys

from .extract import run_embed_requests
from .model import Encoder
from .probs import run_prob_requests
from .saxeio import read_requests, write_context_records, write_vectors

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saxe-extract",
        description="Extract contextualized span embeddings or masked-token "
                    "probabilities from a pretrained masked language model.",
    )
    parser.add_argument("--mode", choices=("embed", "probs"), required=True)
    parser.add_argument("--input", required=True, help="request file (JSON lines)")
    parser.add_argument("--model", required=True, help="model name or local path")
    parser.add_argument("--out", required=True, help="output file")
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        encoder = Encoder(args.model, device=args.device)
        requests = read_requests(args.input)
        if args.mode == "embed":
            records = run_embed_requests(encoder, requests)
            write_vectors(records, encoder.dim, args.out)
            print(f"wrote {len(records)} vectors (dim {encoder.dim}) to {args.out}")
        else:
            records = run_prob_requests(encoder, requests)
            write_context_records(records, args.out)
            print(f"wrote {len(records)} context records to {args.out}")
        return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        logger.exception("extraction failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Standalone entry point: serve a linear model file over the wire protocol.

    cfibridge MODEL.json
    python3 -m cfibridge MODEL.json

Exit status: 0 on clean EOF, 1 after a protocol or prediction error,
2 when the model file cannot be loaded.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .linear import load_linear
from .serve import serve_loop


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cfibridge",
        description="serve a linear model file over newline-delimited JSON",
    )
    parser.add_argument("model", help="linear model JSON file")
    args = parser.parse_args(argv)
    try:
        prediction = load_linear(args.model)
    except (OSError, ValueError) as exc:
        print(f"cfibridge: {exc}", file=sys.stderr)
        return 2
    return serve_loop(prediction)


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))

"""Command-line entry point: render one figure per invocation."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureInputError, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="baroflow-plots",
        description="Render figures from baroflow CSV outputs")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--input", dest="inputs", action="append", required=True,
                        type=Path, help="input CSV (repeatable for overlays)")
    parser.add_argument("--out", required=True, type=Path, help="output image path")
    parser.add_argument("--label", dest="labels", action="append", default=[],
                        help="series label (repeatable, matched to inputs in order)")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                          output=args.out, labels=tuple(args.labels),
                          title=args.title)
        out = render(spec)
    except (FigureInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""plotgen --spec spec.json: render one figure (PNG and SVG)."""

from __future__ import annotations

import argparse
import sys

from .spec import FigureSpec, PlotgenError
from .render import render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plotgen", description="Render figures from simulator CSVs")
    ap.add_argument("--spec", required=True, help="figure specification JSON")
    args = ap.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec)
        written = render(spec)
    except PlotgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

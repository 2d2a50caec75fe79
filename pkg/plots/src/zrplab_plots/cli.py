"""Command-line figure renderer.

`zrplab-plot --spec figures.json` renders every figure in the file to PNG
and SVG, one status line per figure.  Input paths resolve next to the
figures file, outputs under --outdir (default: the current directory).
Exit codes: 0 all figures rendered, 1 configuration or artifact error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .render import render
from .spec import PlotSpecError, load_figures_file


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zrplab-plot",
        description="Render laboratory CSV/JSON artifacts into figures.",
    )
    parser.add_argument("--spec", required=True, type=Path, help="figures.json file")
    parser.add_argument(
        "--outdir", type=Path, default=None,
        help="base directory for relative output paths (default: current directory)",
    )
    parser.add_argument(
        "--only", action="append", metavar="NAME", default=None,
        help="render only the named figure (repeatable)",
    )
    parser.add_argument(
        "--style-seed", type=int, default=None,
        help="override the style seed from the figures file",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    args = parser.parse_args(argv)

    try:
        style_seed, figures = load_figures_file(args.spec, outdir=args.outdir)
    except PlotSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.style_seed is not None:
        style_seed = args.style_seed
    if args.only:
        known = {fig.name for fig in figures}
        missing = sorted(set(args.only) - known)
        if missing:
            print(
                f"error: no figure named {', '.join(missing)}; "
                f"available: {', '.join(sorted(known))}",
                file=sys.stderr,
            )
            return 1
        figures = [fig for fig in figures if fig.name in set(args.only)]

    for fig in figures:
        try:
            png, svg = render(fig, style_seed=style_seed)
        except PlotSpecError as exc:
            print(f"error: {fig.name}: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {png} {svg}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

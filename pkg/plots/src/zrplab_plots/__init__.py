"""Figures from the zero-range laboratory's CSV and JSON artifacts.

Four figure kinds cover the laboratory's outputs: `convergence` for
rescaled-rate curves along a ladder, `scaling` for log-log time fits,
`occupation` for stationary-mass bars, and `overlay` for particle paths
against the limiting diffusion.  Everything is drawn from artifacts alone;
no quantity is recomputed here, so the laboratory stays the single source
of numerical truth.
"""

from __future__ import annotations

from pathlib import Path

__version__ = "0.1.0"

from .render import PALETTE, render
from .spec import (
    KINDS,
    FigureSpec,
    PlotSpecError,
    Table,
    load_figures_file,
    read_table,
)

__all__ = [
    "KINDS",
    "PALETTE",
    "FigureSpec",
    "PlotSpecError",
    "Table",
    "load_figures_file",
    "read_table",
    "render",
    "sample_dir",
]


def sample_dir() -> Path:
    """Directory holding the bundled sample artifacts and figures.json."""
    return Path(__file__).parent / "samples"

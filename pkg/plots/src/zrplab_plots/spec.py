"""Figure specifications and artifact tables.

A figures file is JSON: a style seed plus a list of figure entries, each
naming a kind, its input artifacts, and an output image stem.  The inputs
are the CSV and JSON files the laboratory CLI writes; this package never
touches the models themselves, it only draws what the artifacts contain.
Input paths resolve relative to the figures file, output paths relative to
the caller's output directory, so a bundled spec can ship next to its
sample artifacts and still render anywhere.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "KINDS",
    "FigureSpec",
    "PlotSpecError",
    "Table",
    "load_figures_file",
    "read_table",
]

KINDS = ("convergence", "scaling", "occupation", "overlay")

_ENTRY_KEYS = {"name", "kind", "inputs", "output", "options"}


class PlotSpecError(ValueError):
    """A figures file or input artifact violates the contract."""


@dataclass(frozen=True)
class Table:
    """One CSV artifact: ordered columns with string cells, numeric on demand."""

    path: Path
    columns: tuple[str, ...]
    cells: dict[str, list[str]] = field(repr=False)

    def __len__(self) -> int:
        return len(self.cells[self.columns[0]])

    def require(self, *names: str) -> None:
        """Fail with the missing and the available column names spelled out."""
        missing = [n for n in names if n not in self.cells]
        if missing:
            raise PlotSpecError(
                f"{self.path.name}: missing column(s) {', '.join(missing)}; "
                f"found {', '.join(self.columns)}"
            )

    def numeric(self, name: str) -> np.ndarray:
        self.require(name)
        try:
            return np.array([float(cell) for cell in self.cells[name]])
        except ValueError as exc:
            raise PlotSpecError(
                f"{self.path.name}: column {name!r} is not numeric ({exc})"
            ) from None

    def maybe_numeric(self, name: str) -> np.ndarray | None:
        """The column as floats, or None when absent or label-valued."""
        if name not in self.cells:
            return None
        try:
            return np.array([float(cell) for cell in self.cells[name]])
        except ValueError:
            return None

    def strings(self, name: str) -> list[str]:
        self.require(name)
        return self.cells[name]


def read_table(path: Path) -> Table:
    """Parse one artifact CSV, skipping the generator's comment header.

    A CSV without data rows is an error here, before any figure exists, so
    an empty artifact can never produce an empty image.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows:
        raise PlotSpecError(f"{path.name}: no header row")
    header, data = rows[0], rows[1:]
    if not data:
        raise PlotSpecError(f"{path.name}: no data rows")
    for i, row in enumerate(data):
        if len(row) != len(header):
            raise PlotSpecError(
                f"{path.name}: row {i + 1} has {len(row)} cells, header has {len(header)}"
            )
    cells = {name: [row[j] for row in data] for j, name in enumerate(header)}
    if len(cells) != len(header):
        raise PlotSpecError(f"{path.name}: duplicate column names in header")
    return Table(path=path, columns=tuple(header), cells=cells)


@dataclass(frozen=True)
class FigureSpec:
    """One figure: a kind, resolved input paths, and an output image stem.

    `output` carries no suffix; rendering writes the .png and .svg siblings.
    """

    name: str
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    options: dict = field(default_factory=dict)


def _figure_entry(entry, base: Path, outdir: Path, position: int) -> FigureSpec:
    if not isinstance(entry, dict):
        raise PlotSpecError(f"figure #{position}: expected an object, got {type(entry).__name__}")
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        raise PlotSpecError(
            f"figure #{position}: unknown key(s) {', '.join(sorted(unknown))}; "
            f"allowed: {', '.join(sorted(_ENTRY_KEYS))}"
        )
    for key in ("kind", "inputs", "output"):
        if key not in entry:
            raise PlotSpecError(f"figure #{position}: missing required key {key!r}")
    kind = entry["kind"]
    if kind not in KINDS:
        raise PlotSpecError(
            f"figure #{position}: unknown kind {kind!r}; available: {', '.join(KINDS)}"
        )
    raw_inputs = entry["inputs"]
    if not isinstance(raw_inputs, list) or not raw_inputs:
        raise PlotSpecError(f"figure #{position}: 'inputs' must be a non-empty list of paths")
    inputs = []
    for raw in raw_inputs:
        path = base / raw
        if path.suffix not in (".csv", ".json"):
            raise PlotSpecError(f"figure #{position}: input {raw!r} must be a .csv or .json file")
        if not path.exists():
            raise PlotSpecError(f"figure #{position}: input not found: {path}")
        inputs.append(path)
    output = outdir / entry["output"]
    if output.suffix in (".png", ".svg"):
        output = output.with_suffix("")
    name = entry.get("name", output.name)
    options = entry.get("options", {})
    if not isinstance(options, dict):
        raise PlotSpecError(f"figure #{position}: 'options' must be an object")
    return FigureSpec(
        name=name, kind=kind, inputs=tuple(inputs), output=output, options=options
    )


def load_figures_file(path, outdir=None) -> tuple[int, list[FigureSpec]]:
    """Parse figures.json into (style_seed, figure specs).

    Inputs resolve against the figures file's directory and must exist;
    outputs resolve against `outdir` (default: the current directory).
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise PlotSpecError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise PlotSpecError(f"{path.name}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise PlotSpecError(f"{path.name}: top level must be an object")
    unknown = set(doc) - {"style_seed", "figures"}
    if unknown:
        raise PlotSpecError(f"{path.name}: unknown key(s) {', '.join(sorted(unknown))}")
    style_seed = doc.get("style_seed", 0)
    if not isinstance(style_seed, int) or style_seed < 0:
        raise PlotSpecError(f"{path.name}: style_seed must be a non-negative integer")
    raw_figures = doc.get("figures")
    if not isinstance(raw_figures, list) or not raw_figures:
        raise PlotSpecError(f"{path.name}: 'figures' must be a non-empty list")
    base = path.parent
    out = Path(outdir) if outdir is not None else Path(".")
    figures = [
        _figure_entry(entry, base, out, i) for i, entry in enumerate(raw_figures)
    ]
    names = [f.name for f in figures]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise PlotSpecError(f"{path.name}: duplicate figure name(s) {', '.join(dupes)}")
    return style_seed, figures

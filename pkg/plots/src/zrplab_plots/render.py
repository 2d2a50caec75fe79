"""Deterministic rendering of the four figure kinds.

The backend is pinned to Agg, the rc style is fixed, image metadata that
varies between runs (timestamps, tool tags) is stripped, SVG ids are salted
with a constant, and series colors come from a palette shuffled by the
style seed.  Rendering the same spec against the same artifacts is
therefore byte-identical, PNG and SVG alike, and never mutates an input.

Any CSV input may carry a numeric `target` column (name configurable via
the `target_column` option): its distinct finite values become horizontal
reference lines.  A string-valued column of that name is a grouping label,
as in the expansion artifacts, and is left alone.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spec import FigureSpec, PlotSpecError, Table, read_table

__all__ = ["PALETTE", "render"]

PALETTE = (
    "#4477aa",
    "#ee6677",
    "#228833",
    "#ccbb44",
    "#66ccee",
    "#aa3377",
    "#bbbbbb",
    "#993300",
    "#1a6659",
    "#555555",
)

_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 9,
    "svg.hashsalt": "zrplab-plots",
}

_REFERENCE_STYLE = {"color": "#888888", "linestyle": ":", "linewidth": 1.0}


def _palette(style_seed: int) -> list[str]:
    order = np.random.default_rng(style_seed).permutation(len(PALETTE))
    return [PALETTE[i] for i in order]


def _load_inputs(spec: FigureSpec) -> list:
    loaded = []
    for path in spec.inputs:
        if path.suffix == ".json":
            try:
                loaded.append(json.loads(path.read_text()))
            except json.JSONDecodeError as exc:
                raise PlotSpecError(f"{path.name}: invalid JSON ({exc})") from None
        else:
            loaded.append(read_table(path))
    return loaded


def _table(spec: FigureSpec, loaded: list, index: int) -> Table:
    if index >= len(loaded) or not isinstance(loaded[index], Table):
        raise PlotSpecError(
            f"{spec.name}: kind {spec.kind!r} needs a CSV as input #{index}"
        )
    return loaded[index]


def _filter(table: Table, column: str, wanted, mask: np.ndarray) -> np.ndarray:
    if wanted is None:
        return mask
    values = table.strings(column)
    keep = np.array([v in wanted for v in values])
    missing = set(wanted) - set(values)
    if missing:
        raise PlotSpecError(
            f"{table.path.name}: no rows with {column} {', '.join(sorted(missing))}"
        )
    return mask & keep


def _render_convergence(ax, spec: FigureSpec, loaded: list, colors: list) -> None:
    """Per-N rescaled rates, one curve per (target, scale) group, with the
    extrapolated estimate and the limit value from the summary artifact."""
    values = _table(spec, loaded, 0)
    values.require("target", "scale", "N", "value")
    mask = np.ones(len(values), dtype=bool)
    mask = _filter(values, "target", spec.options.get("targets"), mask)
    mask = _filter(values, "scale", spec.options.get("scales"), mask)
    Ns = values.numeric("N")
    ys = values.numeric("value")
    keys = [
        (t, s) for t, s in zip(values.strings("target"), values.strings("scale"))
    ]
    groups = list(dict.fromkeys(k for k, m in zip(keys, mask) if m))
    if not groups:
        raise PlotSpecError(f"{values.path.name}: no rows left after filtering")

    summary = None
    if len(loaded) > 1:
        summary = _table(spec, loaded, 1)
        summary.require("target", "scale", "estimate", "error_bar", "target_value")

    one_scale = len({s for _, s in groups}) == 1
    x_mark = Ns[mask].max() * 1.12
    for i, (target, scale) in enumerate(groups):
        sel = np.array([k == (target, scale) for k in keys]) & mask
        order = np.argsort(Ns[sel])
        color = colors[i % len(colors)]
        label = target if one_scale else f"{target} [{scale}]"
        ax.plot(Ns[sel][order], ys[sel][order], marker="o", color=color, label=label)
        if summary is None:
            continue
        rows = [
            j
            for j, key in enumerate(
                zip(summary.strings("target"), summary.strings("scale"))
            )
            if key == (target, scale)
        ]
        if not rows:
            raise PlotSpecError(
                f"{summary.path.name}: no summary row for {target} [{scale}]"
            )
        j = rows[0]
        estimate = summary.numeric("estimate")[j]
        error_bar = summary.numeric("error_bar")[j]
        limit = summary.numeric("target_value")[j]
        if np.isfinite(estimate):
            ax.errorbar(
                [x_mark], [estimate], yerr=[abs(error_bar)],
                fmt="D", color=color, markersize=5, capsize=3,
            )
        if np.isfinite(limit):
            ax.axhline(limit, color=color, linestyle="--", linewidth=1.0)
    ax.set_xlabel("N")
    ax.set_ylabel("rescaled rate")


def _render_scaling(ax, spec: FigureSpec, loaded: list, colors: list) -> None:
    """Mean times with error bars on log-log axes; the fitted slope from the
    sidecar is drawn through the last point, never refitted here."""
    table = _table(spec, loaded, 0)
    table.require("N", "mean", "stderr")
    Ns = table.numeric("N")
    means = table.numeric("mean")
    stderrs = table.numeric("stderr")
    order = np.argsort(Ns)
    Ns, means, stderrs = Ns[order], means[order], stderrs[order]
    ax.errorbar(
        Ns, means, yerr=stderrs,
        fmt="o", color=colors[0], capsize=3, label="measured mean",
    )
    if len(loaded) > 1:
        sidecar = loaded[1]
        if not isinstance(sidecar, dict):
            raise PlotSpecError(f"{spec.name}: scaling sidecar must be a JSON object")
        if "exponent" not in sidecar:
            raise PlotSpecError(
                f"{spec.inputs[1].name}: missing 'exponent'; "
                f"found {', '.join(sorted(sidecar))}"
            )
        exponent = float(sidecar["exponent"])
        label = f"slope {exponent:.3f}"
        ci95 = sidecar.get("ci95")
        if ci95 is not None:
            label += f", 95% CI [{float(ci95[0]):.2f}, {float(ci95[1]):.2f}]"
        guide = np.geomspace(Ns[0], Ns[-1] * 1.15, 64)
        ax.plot(
            guide, means[-1] * (guide / Ns[-1]) ** exponent,
            linestyle="--", color=colors[1], label=label,
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("mean time")


def _well_columns(table: Table) -> list[str]:
    cols = [
        c for c in table.columns
        if c.startswith("well_mass_") and c[len("well_mass_"):].isdigit()
    ]
    if not cols:
        raise PlotSpecError(
            f"{table.path.name}: no well_mass_<site> columns; "
            f"found {', '.join(table.columns)}"
        )
    return sorted(cols, key=lambda c: int(c[len("well_mass_"):]))


def _render_occupation(ax, spec: FigureSpec, loaded: list, colors: list) -> None:
    """Stationary mass per region as stacked bars, one bar per ladder rung."""
    table = _table(spec, loaded, 0)
    table.require("N", "interior_mass")
    wells = _well_columns(table)
    Ns = table.numeric("N")
    x = np.arange(len(table))
    bottom = np.zeros(len(table))
    for i, col in enumerate(wells):
        masses = table.numeric(col)
        ax.bar(
            x, masses, bottom=bottom, width=0.6,
            color=colors[i % len(colors)], label=f"well at site {col[len('well_mass_'):]}",
        )
        bottom += masses
    ax.bar(
        x, table.numeric("interior_mass"), bottom=bottom, width=0.6,
        color="#bbbbbb", label="interior",
    )
    ax.set_xticks(x)
    ax.set_xticklabels([f"{n:g}" for n in Ns])
    ax.set_ylim(0.0, 1.08)
    ax.set_xlabel("N")
    ax.set_ylabel("stationary mass")


def _state_columns(table: Table) -> list[str]:
    cols = [c for c in table.columns if c.startswith(("xi_", "eta_"))]
    if not cols:
        raise PlotSpecError(
            f"{table.path.name}: no state columns (xi_* or eta_*); "
            f"found {', '.join(table.columns)}"
        )
    return cols


def _per_input(spec: FigureSpec, key: str, default, cast) -> list:
    values = spec.options.get(key)
    if values is None:
        return [default] * len(spec.inputs)
    if not isinstance(values, list) or len(values) != len(spec.inputs):
        raise PlotSpecError(
            f"{spec.name}: option {key!r} needs one entry per input "
            f"({len(spec.inputs)} inputs)"
        )
    return [cast(v) for v in values]


def _render_overlay(ax, spec: FigureSpec, loaded: list, colors: list) -> None:
    """Trajectories on shared axes: matching components share a color, each
    input gets its own line style.  `time_scale` rescales an input's clock
    for display (e.g. t/N^2); `normalize` divides states by the row sum."""
    linestyles = ("-", "--", ":", "-.")
    labels = _per_input(spec, "labels", None, str)
    scales = _per_input(spec, "time_scale", 1.0, float)
    normalize = bool(spec.options.get("normalize", False))
    for i, path in enumerate(spec.inputs):
        table = _table(spec, loaded, i)
        table.require("t")
        t = table.numeric("t") * scales[i]
        columns = _state_columns(table)
        states = np.column_stack([table.numeric(c) for c in columns])
        if normalize:
            totals = states.sum(axis=1, keepdims=True)
            if np.any(totals == 0.0):
                raise PlotSpecError(
                    f"{path.name}: cannot normalize rows with zero total"
                )
            states = states / totals
        prefix = labels[i] if labels[i] is not None else path.stem
        for j, col in enumerate(columns):
            ax.plot(
                t, states[:, j],
                color=colors[j % len(colors)],
                linestyle=linestyles[i % len(linestyles)],
                linewidth=1.2,
                label=f"{prefix}: {col}",
            )
    ax.set_xlabel("t")
    ax.set_ylabel("occupancy fraction" if normalize else "state")


_RENDERERS = {
    "convergence": _render_convergence,
    "scaling": _render_scaling,
    "occupation": _render_occupation,
    "overlay": _render_overlay,
}


def _reference_lines(ax, spec: FigureSpec, loaded: list) -> None:
    explicit = spec.options.get("target", [])
    values = list(np.atleast_1d(np.asarray(explicit, dtype=float)))
    column = spec.options.get("target_column", "target")
    for item in loaded:
        if isinstance(item, Table):
            found = item.maybe_numeric(column)
            if found is not None:
                values.extend(found)
    for value in sorted({v for v in values if np.isfinite(v)}):
        ax.axhline(value, **_REFERENCE_STYLE)


def _finish(ax, spec: FigureSpec) -> None:
    options = spec.options
    if "title" in options:
        ax.set_title(str(options["title"]))
    if "xlabel" in options:
        ax.set_xlabel(str(options["xlabel"]))
    if "ylabel" in options:
        ax.set_ylabel(str(options["ylabel"]))
    # log-log is part of the scaling contract, not an option there
    if spec.kind != "scaling":
        if options.get("logx", False):
            ax.set_xscale("log")
        if options.get("logy", False):
            ax.set_yscale("log")
    if options.get("legend", True):
        ax.legend(loc=options.get("legend_loc", "best"))


def render(spec: FigureSpec, style_seed: int = 0) -> tuple[Path, Path]:
    """Render one figure to its .png and .svg siblings and return both paths.

    Inputs are read and validated before any drawing, so a bad artifact
    fails before a file is created and never emits a partial image.
    """
    loaded = _load_inputs(spec)
    with plt.rc_context(_RC):
        colors = _palette(style_seed)
        fig, ax = plt.subplots()
        try:
            _RENDERERS[spec.kind](ax, spec, loaded, colors)
            _reference_lines(ax, spec, loaded)
            _finish(ax, spec)
            fig.tight_layout()
            png = spec.output.with_suffix(".png")
            svg = spec.output.with_suffix(".svg")
            spec.output.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(png, format="png", metadata={"Software": None})
            fig.savefig(svg, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return png, svg

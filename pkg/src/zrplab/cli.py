"""Command-line front end.

`zrplab run scenario.json` loads a scenario (JSON, or TOML normalized to the
same shape), runs one task against a model family, and writes CSV artifacts
plus a JSON sidecar and an index with content hashes.  Identical scenario and
seed produce bit-identical artifacts.  Exit codes: 0 success, 1 configuration
error, 2 for "ran correctly but a requested threshold failed" so CI can tell
science regressions from crashes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .expansion import default_targets, expansion_table, richardson
from .metastability import mean_jump_rates, resolvent_check
from .rates import limiting_chain, rate_reversible, rate_variational
from .simplexfn import face_energy, face_energy_mc, normalized, product_bump, simplex_grid
from .sitegraph import (
    SiteGraph,
    complete_graph,
    cycle_graph,
    graph_from_dict,
    load_graph,
    two_site_graph,
)
from .zrp import (
    ConfigSpace,
    SpaceTooLargeError,
    ZrpModel,
    balanced_config,
    condensed_config,
    limiting_partition_function,
    wells,
)
from . import simulate

__all__ = ["main", "run_scenario", "load_scenario", "validate_scenario", "TASKS"]


class ScenarioError(ValueError):
    """Configuration problem: bad scenario file, unknown task, missing file."""


# -- scenario handling -----------------------------------------------------

_GRAPH_KINDS = {"complete", "two-site", "cycle"}


def _build_graph(doc: dict) -> SiteGraph:
    if "file" in doc:
        path = Path(doc["file"])
        if not path.exists():
            raise ScenarioError(f"graph file not found: {path}")
        return load_graph(path)
    if "rates" in doc:
        return graph_from_dict(doc)
    kind = doc.get("kind", "complete")
    if kind not in _GRAPH_KINDS:
        raise ScenarioError(f"unknown graph kind {kind!r}; use one of {sorted(_GRAPH_KINDS)}")
    if kind == "two-site":
        return two_site_graph(doc.get("rate", 1.0))
    kappa = int(doc.get("kappa", 2))
    if kind == "cycle":
        return cycle_graph(kappa, doc.get("forward", 1.0), doc.get("backward", 1.0))
    return complete_graph(kappa, doc.get("rate", 1.0))


def load_scenario(path) -> dict:
    """Read a scenario file; TOML is accepted and normalized to the JSON shape."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        doc = tomllib.loads(text.decode())
    elif path.suffix.lower() in (".json", ""):
        doc = json.loads(text)
    else:
        raise ScenarioError(f"unsupported scenario format: {path.suffix}")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a table/object at the top level")
    return doc


def validate_scenario(doc: dict) -> dict:
    """Fill defaults and enforce the scenario invariants; returns a new dict."""
    out = {
        "version": int(doc.get("version", 1)),
        "graph": dict(doc.get("graph", {"kind": "two-site"})),
        "alpha": float(doc.get("alpha", 2.0)),
        "ladder": [int(n) for n in doc.get("ladder", [20, 40, 80])],
        "task": str(doc.get("task", "")),
        "seed": int(doc.get("seed", 0)),
        "params": dict(doc.get("params", {})),
    }
    if out["version"] != 1:
        raise ScenarioError(f"unsupported scenario version {out['version']}")
    if not out["alpha"] > 1:
        raise ScenarioError("alpha must exceed 1")
    ladder = out["ladder"]
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ScenarioError("ladder must be nonempty and strictly increasing")
    if out["task"] not in TASKS:
        raise ScenarioError(
            f"unknown task {out['task']!r}; available: {', '.join(sorted(TASKS))}"
        )
    unknown = set(out["params"]) - set(TASKS[out["task"]]["params"])
    if unknown:
        raise ScenarioError(
            f"unknown parameter(s) for task {out['task']}: {sorted(unknown)}"
        )
    _build_graph(out["graph"])  # fail fast on bad graph specs
    return out


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _scenario_hash(scenario: dict) -> str:
    return hashlib.sha256(_canonical(scenario).encode()).hexdigest()[:12]


def _model_hash(graph: SiteGraph, alpha: float, ladder) -> str:
    doc = {
        "labels": list(graph.labels),
        "rates": [[float(v) for v in row] for row in graph.rates],
        "alpha": alpha,
        "ladder": list(ladder),
    }
    return hashlib.sha256(_canonical(doc).encode()).hexdigest()[:12]


# -- artifact plumbing -----------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


class ArtifactWriter:
    """Writes CSVs and JSON under one directory, hashing every file."""

    def __init__(self, out_dir: Path, header: str):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.header = header
        self.artifacts: list[dict] = []

    def _commit(self, name: str, data: bytes):
        path = self.out_dir / name
        path.write_bytes(data)
        self.artifacts.append(
            {
                "path": name,
                "sha256": hashlib.sha256(data).hexdigest(),
                "bytes": len(data),
            }
        )

    def write_csv(self, name: str, columns, rows):
        buf = io.StringIO()
        buf.write(f"# {self.header}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        self._commit(name, buf.getvalue().encode())

    def write_json(self, name: str, obj):
        text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
        self._commit(name, text.encode())

    def write_index(self, scenario: dict, scenario_hash: str, model_hash: str):
        index = {
            "tool": "zrplab",
            "version": __version__,
            "scenario": scenario,
            "scenario_hash": scenario_hash,
            "model_hash": model_hash,
            "artifacts": self.artifacts,
        }
        text = json.dumps(_jsonable(index), indent=2, sort_keys=True) + "\n"
        (self.out_dir / "index.json").write_bytes(text.encode())


# -- task context ----------------------------------------------------------


class TaskContext:
    def __init__(self, scenario: dict, writer: ArtifactWriter, jobs: int, cap):
        self.scenario = scenario
        self.graph = _build_graph(scenario["graph"])
        self.alpha = scenario["alpha"]
        self.ladder = scenario["ladder"]
        self.seed = scenario["seed"]
        self.params = scenario["params"]
        self.writer = writer
        self.jobs = jobs
        self.cap = cap
        self.figures: list[dict] = []
        self.sidecar: dict = {}

    def spaces(self):
        return [
            ConfigSpace(
                ZrpModel(graph=self.graph, alpha=self.alpha, N=N), cap=self.cap
            )
            for N in self.ladder
        ]

    def models(self):
        return [ZrpModel(graph=self.graph, alpha=self.alpha, N=N) for N in self.ladder]


def _decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# -- tasks -----------------------------------------------------------------


def _task_stationary(ctx: TaskContext) -> bool:
    variant = ctx.params.get("series_variant", "standard")
    kappa = ctx.graph.kappa
    z_limit = limiting_partition_function(kappa, ctx.alpha, variant)
    rows = []
    errors, interiors = [], []
    top = None
    for space in ctx.spaces():
        part = wells(space, ctx.params.get("ell"))
        masses = part.well_mass(space)
        interior = float(space.rho[part.interior].sum())
        err = abs(space.Z - z_limit)
        rows.append(
            [space.model.N, space.Z, z_limit, err, part.ell, interior, *masses]
        )
        errors.append(err)
        interiors.append(interior)
        top = space
    ctx.writer.write_csv(
        "partition_convergence.csv",
        ["N", "Z_N", "Z_limit", "abs_error", "ell", "interior_mass"]
        + [f"well_mass_{x}" for x in range(kappa)],
        rows,
    )
    ctx.writer.write_csv(
        "stationary_rho.csv",
        ["rank", *[f"eta_{x}" for x in range(kappa)], "rho"],
        [[i, *top.configs[i], top.rho[i]] for i in range(top.size)],
    )
    ctx.figures.append(
        {
            "name": "partition_convergence",
            "x": ctx.ladder,
            "series": {"abs_error": errors, "interior_mass": interiors},
            "xlabel": "N",
            "ylabel": "error / mass",
            "loglog": True,
        }
    )
    ctx.sidecar.update({"Z_limit": z_limit, "errors": errors, "interior_mass": interiors})
    ok = True
    if ctx.params.get("check_trend", True):
        ok = _decreasing(errors) and _decreasing(interiors)
    if "max_error" in ctx.params:
        ok = ok and errors[-1] < ctx.params["max_error"]
    return ok


def _task_resolvent(ctx: TaskContext) -> bool:
    g = np.asarray(
        ctx.params.get("g", [1.0] + [0.0] * (ctx.graph.kappa - 1)), dtype=float
    )
    lam = float(ctx.params.get("lam", 1.0))
    report = resolvent_check(ctx.spaces(), g, lam, ell=ctx.params.get("ell"))
    rows = [
        [r.N, lam, r.osc, r.deviation, *r.well_averages] for r in report.rows
    ]
    ctx.writer.write_csv(
        "resolvent.csv",
        ["N", "lambda", "osc", "deviation"]
        + [f"well_avg_{x}" for x in range(ctx.graph.kappa)],
        rows,
    )
    oscs = [r.osc for r in report.rows]
    devs = [r.deviation for r in report.rows]
    ctx.sidecar.update({"reduced_resolvent": report.reduced, "lam": lam})
    ctx.figures.append(
        {
            "name": "resolvent_trend",
            "x": ctx.ladder,
            "series": {"osc": oscs, "deviation": devs},
            "xlabel": "N",
            "ylabel": "oscillation / deviation",
            "loglog": True,
        }
    )
    ok = True
    if ctx.params.get("check_trend", True):
        ok = _decreasing(oscs)
    if "max_deviation" in ctx.params:
        ok = ok and devs[-1] < ctx.params["max_deviation"]
    return ok


def _task_jump_rates(ctx: TaskContext) -> bool:
    rows = []
    rel_err = None
    for space in ctx.spaces():
        est = mean_jump_rates(space, ell=ctx.params.get("ell"))
        kappa = ctx.graph.kappa
        for x in range(kappa):
            for y in range(kappa):
                if x != y:
                    rows.append(
                        [
                            est.N,
                            est.ell,
                            x,
                            y,
                            est.rates[x, y],
                            est.accelerated[x, y],
                            est.target[x, y],
                        ]
                    )
        with np.errstate(invalid="ignore"):
            off = ~np.eye(kappa, dtype=bool)
            rel = np.abs(est.accelerated[off] / est.target[off] - 1.0)
        rel_err = float(np.max(rel))
    ctx.writer.write_csv(
        "jump_rates.csv",
        ["N", "ell", "x", "y", "mean_rate", "accelerated", "target_R"],
        rows,
    )
    ctx.sidecar["top_rel_err"] = rel_err
    if "max_rel_err" in ctx.params:
        return rel_err < ctx.params["max_rel_err"]
    return True


def _task_face_energy(ctx: TaskContext) -> bool:
    kappa = ctx.graph.kappa
    A = tuple(ctx.params.get("face", range(kappa)))
    level = ctx.params.get("level", 0.09 if len(A) == 2 else 0.3 * len(A) ** (-float(len(A))))
    ladder = ctx.params.get("subdivisions", [200, 400, 800])
    v = product_bump(len(A), level=level, power=ctx.params.get("power", 3))
    if ctx.params.get("normalized", False):
        v = normalized(v, simplex_grid(len(A), ladder[-1]), ctx.alpha)
    rows, values = [], []
    for M in ladder:
        grid = simplex_grid(len(A), M)
        q = face_energy(ctx.graph, ctx.alpha, A, v, grid)
        rows.append([",".join(map(str, A)), M, grid.mesh, q])
        values.append(q)
    ctx.writer.write_csv(
        "quadrature.csv", ["face", "subdivisions", "mesh", "value"], rows
    )
    extra = richardson(values) if len(values) >= 3 else None
    sidecar = {"values": values, "margin": v.margin}
    if extra is not None:
        sidecar["richardson"] = {
            "estimate": extra.estimate,
            "error_bar": extra.error_bar,
            "exponent": extra.exponent,
        }
    if "mc_samples" in ctx.params:
        mean, stderr = face_energy_mc(
            ctx.graph, ctx.alpha, A, v, ctx.params["mc_samples"], seed=ctx.seed
        )
        sidecar["mc"] = {"mean": mean, "stderr": stderr}
    ctx.sidecar.update(sidecar)
    ctx.figures.append(
        {
            "name": "quadrature_convergence",
            "x": [row[2] for row in rows],
            "series": {"value": values},
            "xlabel": "mesh",
            "ylabel": "energy",
            "loglog": False,
        }
    )
    if "mesh_agreement" in ctx.params and len(values) >= 2:
        return abs(values[-1] - values[-2]) <= ctx.params["mesh_agreement"] * abs(values[-1])
    return True


def _task_rate_table(ctx: TaskContext) -> bool:
    tol = ctx.params.get("tol", 1e-6)
    n_random = int(ctx.params.get("random_measures", 3))
    rows = []
    worst = 0.0
    for space in ctx.spaces():
        measures = [("stationary", space.rho)]
        rng = np.random.default_rng([ctx.seed, space.model.N])
        for i in range(n_random):
            nu = space.rho * np.exp(0.5 * rng.standard_normal(space.size))
            measures.append((f"perturbed_{i}", nu / nu.sum()))
        for name, nu in measures:
            closed = rate_reversible(space, nu)
            res = rate_variational(space, nu, tol=1e-7)
            gap = abs(closed - res.value) / max(1.0, abs(closed))
            worst = max(worst, gap)
            rows.append([space.model.N, name, closed, res.value, gap, res.grad_norm])
    ctx.writer.write_csv(
        "rates.csv",
        ["N", "measure_id", "closed_form", "variational", "gap", "grad_norm"],
        rows,
    )
    ctx.sidecar["worst_gap"] = worst
    return worst < tol


def _task_gamma_expansion(ctx: TaskContext) -> bool:
    spaces = ctx.spaces()
    targets = default_targets(
        ctx.graph, ctx.alpha, subdivisions=ctx.params.get("subdivisions", 400)
    )
    selected = ctx.params.get("targets")
    if selected:
        targets = [t for t in targets if t.label in selected]
        if not targets:
            raise ScenarioError(f"no expansion target matches {selected}")
    reports = expansion_table(spaces, targets)
    value_rows, summary_rows = [], []
    for rep in reports:
        for N, value, dist in zip(rep.Ns, rep.values, rep.distances):
            value_rows.append([rep.target_label, rep.scale, N, value, dist])
        ex = rep.extrapolation
        finite = math.isfinite(rep.target) and rep.target != 0.0
        rel = abs(ex.estimate - rep.target) / abs(rep.target) if finite else ""
        summary_rows.append(
            [
                rep.target_label,
                rep.scale,
                ex.estimate,
                ex.error_bar,
                "" if ex.exponent is None else ex.exponent,
                rep.target,
                rel,
            ]
        )
    ctx.writer.write_csv(
        "expansion_values.csv",
        ["target", "scale", "N", "value", "bl_distance"],
        value_rows,
    )
    ctx.writer.write_csv(
        "expansion_summary.csv",
        ["target", "scale", "estimate", "error_bar", "exponent", "target_value", "rel_err"],
        summary_rows,
    )
    for rep in reports:
        if math.isfinite(rep.target) and rep.target != 0.0:
            ctx.figures.append(
                {
                    "name": f"expansion_{rep.target_label}_{rep.scale}",
                    "x": list(rep.Ns),
                    "series": {"value": list(rep.values), "target": [rep.target] * len(rep.Ns)},
                    "xlabel": "N",
                    "ylabel": "scaled rate",
                    "loglog": False,
                }
            )
    if "max_rel_err" in ctx.params:
        bound = ctx.params["max_rel_err"]
        for row in summary_rows:
            if row[6] != "" and row[6] > bound:
                return False
    return True


def _scaling_task(ctx: TaskContext, kind: str) -> bool:
    trials = int(ctx.params.get("trials", 2000))
    models = ctx.models()
    if kind == "condensation":
        fit = simulate.condensation_time_scaling(
            models, trials=trials, seed=ctx.seed, jobs=ctx.jobs, ell=ctx.params.get("ell")
        )
    else:
        fit = simulate.transition_time_scaling(
            models,
            trials=trials,
            seed=ctx.seed,
            jobs=ctx.jobs,
            start_site=int(ctx.params.get("start_site", 0)),
            ell=ctx.params.get("ell"),
        )
    rows = [
        [N, mean, stderr, trials]
        for N, mean, stderr in zip(fit.Ns, fit.means, fit.stderrs)
    ]
    ctx.writer.write_csv("scaling.csv", ["N", "mean", "stderr", "trials"], rows)
    ctx.sidecar.update(
        {
            "exponent": fit.exponent,
            "exponent_se": fit.exponent_se,
            "ci95": list(fit.ci95),
            "extras": fit.extras,
        }
    )
    ctx.figures.append(
        {
            "name": f"{kind}_scaling",
            "x": list(fit.Ns),
            "series": {"mean_time": [float(m) for m in fit.means]},
            "xlabel": "N",
            "ylabel": "mean time",
            "loglog": True,
        }
    )
    band = ctx.params.get("exponent_band")
    if band is not None:
        return band[0] <= fit.exponent <= band[1]
    return True


def _task_condensation_scaling(ctx: TaskContext) -> bool:
    return _scaling_task(ctx, "condensation")


def _task_transition_scaling(ctx: TaskContext) -> bool:
    return _scaling_task(ctx, "transition")


def _task_d0(ctx: TaskContext) -> bool:
    kappa = ctx.graph.kappa
    xi0 = ctx.params.get("xi0")
    if xi0 is None:
        xi0 = [0.3, 0.7] if kappa == 2 else [1.0 / kappa] * kappa
    xi0 = np.asarray(xi0, dtype=float)
    horizon = float(ctx.params.get("horizon", 0.1))
    paths = int(ctx.params.get("paths", 2000))
    rows, summary = [], []
    for model in ctx.models():
        rep = simulate.d0_diagnostic(
            model,
            xi0,
            horizon,
            n_paths=paths,
            dt=ctx.params.get("dt"),
            seed=ctx.seed,
            jobs=ctx.jobs,
        )
        for x in range(kappa):
            rows.append(
                [
                    model.N,
                    x,
                    rep["zrp_mean"][x],
                    rep["diffusion_mean"][x],
                    rep["zrp_var"][x],
                    rep["diffusion_var"][x],
                    rep["zrp_dead_fraction"][x],
                    rep["diffusion_dead_fraction"][x],
                ]
            )
        summary.append([model.N, rep["mean_discrepancy"], rep["var_discrepancy"]])
    ctx.writer.write_csv(
        "d0.csv",
        [
            "N",
            "coord",
            "zrp_mean",
            "diffusion_mean",
            "zrp_var",
            "diffusion_var",
            "zrp_dead_fraction",
            "diffusion_dead_fraction",
        ],
        rows,
    )
    ctx.writer.write_csv(
        "d0_summary.csv", ["N", "mean_discrepancy", "var_discrepancy"], summary
    )
    discs = [row[1] for row in summary]
    ctx.sidecar.update({"horizon": horizon, "xi0": xi0, "discrepancies": discs})
    ctx.figures.append(
        {
            "name": "d0_discrepancy",
            "x": ctx.ladder,
            "series": {"mean_discrepancy": discs},
            "xlabel": "N",
            "ylabel": "max coordinate-mean discrepancy",
            "loglog": True,
        }
    )
    ok = True
    if ctx.params.get("check_trend", True) and len(discs) >= 2:
        ok = _decreasing(discs)
    if "max_discrepancy" in ctx.params:
        ok = ok and discs[-1] < ctx.params["max_discrepancy"]
    return ok


def _task_trajectory(ctx: TaskContext) -> bool:
    engine = ctx.params.get("engine", "zrp")
    kappa = ctx.graph.kappa
    if engine == "diffusion":
        T = float(ctx.params.get("T", 0.1))
        dt = float(ctx.params.get("dt", 1e-5))
        xi0 = np.asarray(ctx.params.get("xi0", [1.0 / kappa] * kappa), dtype=float)
        traj = simulate.simulate_diffusion(
            ctx.graph, ctx.alpha, xi0, T, dt, seed=ctx.seed
        )
        columns = ["t", *[f"xi_{x}" for x in range(kappa)]]
    elif engine == "zrp":
        N = int(ctx.params.get("N", ctx.ladder[-1]))
        model = ZrpModel(graph=ctx.graph, alpha=ctx.alpha, N=N)
        start = ctx.params.get("start", "balanced")
        if start == "balanced":
            eta0 = balanced_config(N, kappa)
        elif start == "condensed":
            eta0 = condensed_config(N, kappa, int(ctx.params.get("start_site", 0)))
        else:
            eta0 = np.asarray(start, dtype=np.int64)
        traj = simulate.simulate_zrp(
            model, eta0, max_events=int(ctx.params.get("events", 10000)), seed=ctx.seed
        )
        columns = ["t", *[f"eta_{x}" for x in range(kappa)]]
    else:
        raise ScenarioError(f"unknown engine {engine!r}; use 'zrp' or 'diffusion'")
    thin = max(1, int(ctx.params.get("thin", 1)))
    idx = np.arange(0, len(traj.times), thin)
    if idx[-1] != len(traj.times) - 1:
        idx = np.append(idx, len(traj.times) - 1)
    rows = [[traj.times[i], *traj.states[i]] for i in idx]
    ctx.writer.write_csv("trajectory.csv", columns, rows)
    ctx.sidecar.update(
        {"descriptor": traj.descriptor, "truncated": traj.truncated, "events": len(traj.times) - 1}
    )
    return True


def _task_selftest(ctx: TaskContext) -> bool:
    from .chains import chain_capacity
    from .metastability import capacity_1d_exact, partition_sum_two_sites
    from .sitegraph import harmonic_extension, symmetrize, trace_graph

    checks = []

    def record(name, ok, detail):
        checks.append([name, "pass" if ok else "fail", detail])

    g2 = two_site_graph()
    space = ConfigSpace(ZrpModel(graph=g2, alpha=2.0, N=8))

    z_direct = partition_sum_two_sites(8, 2.0)
    record("partition_function_two_site", abs(space.Z - z_direct) < 1e-10,
           f"|{space.Z} - {z_direct}|")

    resid = float(np.max(np.abs(space.rho @ space.generator.toarray())))
    record("stationarity_residual", resid < 1e-12, f"{resid:.2e}")

    model30 = ZrpModel(graph=g2, alpha=2.0, N=30)
    space30 = ConfigSpace(model30)
    cap_exact = capacity_1d_exact(model30, 3)
    start = space30.rank(np.array([3, 27]))
    condensate = space30.rank(np.array([0, 30]))
    cap_gen = chain_capacity(space30.generator, space30.rho, [start], [condensate])
    rel = abs(cap_exact - cap_gen) / cap_exact
    record("capacity_closed_form", rel < 1e-10, f"rel err {rel:.2e}")

    rng = np.random.default_rng(ctx.seed)
    worst = 0.0
    for _ in range(3):
        nu = space.rho * np.exp(0.5 * rng.standard_normal(space.size))
        nu /= nu.sum()
        gap = abs(rate_reversible(space, nu) - rate_variational(space, nu, tol=1e-7).value)
        worst = max(worst, gap)
    record("rate_equivalence", worst < 1e-6, f"worst gap {worst:.2e}")
    record(
        "stationary_rate_zero",
        rate_reversible(space, space.rho) < 1e-12,
        f"{rate_reversible(space, space.rho):.2e}",
    )

    worst_tr = 0.0
    for _ in range(5):
        kappa = int(rng.integers(3, 6))
        raw = complete_graph(kappa)
        pert = SiteGraph(raw.rates * (1 + 0.3 * rng.random((kappa, kappa))))
        sym = symmetrize(pert)
        A = sorted(rng.choice(kappa, size=2, replace=False).tolist())
        tg = trace_graph(sym, A)
        U = harmonic_extension(sym, A)
        watched = U @ sym.generator @ U.T
        worst_tr = max(worst_tr, float(np.max(np.abs(watched - tg.generator))))
        for _ in range(20):
            f = rng.standard_normal(len(A))
            gap = abs(f @ watched @ f - f @ tg.generator @ f)
            worst_tr = max(worst_tr, gap)
    record("trace_identity", worst_tr < 1e-10, f"worst gap {worst_tr:.2e}")

    b = simulate.diffusion_drift(g2, 2.0, np.array([0.25, 0.75]))
    drift_err = float(np.max(np.abs(b - np.array([-16.0 / 3.0, 16.0 / 3.0]))))
    record("diffusion_drift_hand_value", drift_err < 1e-12, f"{drift_err:.2e}")

    t1 = simulate.simulate_zrp(space.model, balanced_config(8, 2), max_events=500, seed=7)
    t2 = simulate.simulate_zrp(space.model, balanced_config(8, 2), max_events=500, seed=7)
    same = np.array_equal(t1.states, t2.states) and np.array_equal(t1.times, t2.times)
    record("seeded_determinism", same, "bit-identical repeat")

    ctx.writer.write_csv("selftest.csv", ["check", "status", "detail"], checks)
    return all(row[1] == "pass" for row in checks)


TASKS = {
    "stationary": {
        "fn": _task_stationary,
        "description": "Partition-function convergence and stationary concentration across the ladder.",
        "params": {
            "series_variant": {"type": "string", "default": "standard"},
            "ell": {"type": "integer", "default": None},
            "check_trend": {"type": "boolean", "default": True},
            "max_error": {"type": "number", "default": None},
        },
    },
    "resolvent": {
        "fn": _task_resolvent,
        "description": "Accelerated resolvent flatness on wells vs the reduced-chain resolvent.",
        "params": {
            "lam": {"type": "number", "default": 1.0},
            "g": {"type": "array", "default": None},
            "ell": {"type": "integer", "default": None},
            "check_trend": {"type": "boolean", "default": True},
            "max_deviation": {"type": "number", "default": None},
        },
    },
    "jump-rates": {
        "fn": _task_jump_rates,
        "description": "Mean well-to-well jump rates and the metastable-scale comparison.",
        "params": {
            "ell": {"type": "integer", "default": None},
            "max_rel_err": {"type": "number", "default": None},
        },
    },
    "face-energy": {
        "fn": _task_face_energy,
        "description": "Face Dirichlet energy of a bump on a mesh ladder with extrapolation.",
        "params": {
            "face": {"type": "array", "default": None},
            "level": {"type": "number", "default": None},
            "power": {"type": "integer", "default": 3},
            "subdivisions": {"type": "array", "default": [200, 400, 800]},
            "normalized": {"type": "boolean", "default": False},
            "mc_samples": {"type": "integer", "default": None},
            "mesh_agreement": {"type": "number", "default": None},
        },
    },
    "rate-table": {
        "fn": _task_rate_table,
        "description": "Closed-form vs variational rate on stationary and perturbed measures.",
        "params": {
            "tol": {"type": "number", "default": 1e-6},
            "random_measures": {"type": "integer", "default": 3},
        },
    },
    "gamma-expansion": {
        "fn": _task_gamma_expansion,
        "description": "Recovery-sequence rates at all five time scales with extrapolations.",
        "params": {
            "subdivisions": {"type": "integer", "default": 400},
            "targets": {"type": "array", "default": None},
            "max_rel_err": {"type": "number", "default": None},
        },
    },
    "condensation-scaling": {
        "fn": _task_condensation_scaling,
        "description": "Mean condensation time from the balanced start with a log-log exponent fit.",
        "params": {
            "trials": {"type": "integer", "default": 2000},
            "ell": {"type": "integer", "default": None},
            "exponent_band": {"type": "array", "default": None},
        },
    },
    "transition-scaling": {
        "fn": _task_transition_scaling,
        "description": "Mean well-transition time with exponent fit and limiting-rate comparison.",
        "params": {
            "trials": {"type": "integer", "default": 2000},
            "ell": {"type": "integer", "default": None},
            "start_site": {"type": "integer", "default": 0},
            "exponent_band": {"type": "array", "default": None},
        },
    },
    "d0": {
        "fn": _task_d0,
        "description": "Marginal statistics of time-rescaled particle paths vs the diffusion.",
        "params": {
            "xi0": {"type": "array", "default": None},
            "horizon": {"type": "number", "default": 0.1},
            "paths": {"type": "integer", "default": 2000},
            "dt": {"type": "number", "default": None},
            "check_trend": {"type": "boolean", "default": True},
            "max_discrepancy": {"type": "number", "default": None},
        },
    },
    "trajectory": {
        "fn": _task_trajectory,
        "description": "One sampled path of either engine, thinned to CSV.",
        "params": {
            "engine": {"type": "string", "default": "zrp"},
            "N": {"type": "integer", "default": None},
            "start": {"type": "string|array", "default": "balanced"},
            "start_site": {"type": "integer", "default": 0},
            "events": {"type": "integer", "default": 10000},
            "thin": {"type": "integer", "default": 1},
            "T": {"type": "number", "default": 0.1},
            "dt": {"type": "number", "default": 1e-5},
            "xi0": {"type": "array", "default": None},
        },
    },
    "selftest": {
        "fn": _task_selftest,
        "description": "Fast invariant suite over all modules.",
        "params": {},
    },
}


# -- figures (optional extra) ----------------------------------------------


def _render_figures(ctx: TaskContext):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ScenarioError(
            "matplotlib is required for --figures; install the 'viz' extra"
        ) from exc
    for fig_spec in ctx.figures:
        fig, ax = plt.subplots(figsize=(5, 3.5), dpi=150)
        for label, ys in fig_spec["series"].items():
            ax.plot(fig_spec["x"], ys, marker="o", label=label)
        if fig_spec.get("loglog"):
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(fig_spec["xlabel"])
        ax.set_ylabel(fig_spec["ylabel"])
        ax.legend(fontsize=8)
        fig.tight_layout()
        name = f"{fig_spec['name']}.png"
        fig.savefig(ctx.writer.out_dir / name, metadata={"Software": None})
        plt.close(fig)
        data = (ctx.writer.out_dir / name).read_bytes()
        ctx.writer.artifacts.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        )


# -- entry points ----------------------------------------------------------


def run_scenario(
    scenario: dict, out_dir, jobs: int = 1, figures: bool = False
) -> tuple[int, ArtifactWriter]:
    """Run one validated scenario; returns (exit code, writer)."""
    scenario = validate_scenario(scenario)
    shash = _scenario_hash(scenario)
    cap = os.environ.get("ZRPLAB_CAP_STATES")
    cap = int(cap) if cap else None
    header = (
        f"zrplab {__version__} scenario={shash} task={scenario['task']} "
        f"seed={scenario['seed']}"
    )
    writer = ArtifactWriter(Path(out_dir), header)
    ctx = TaskContext(scenario, writer, jobs, cap)
    ok = TASKS[scenario["task"]]["fn"](ctx)
    if ctx.sidecar is not None:
        sidecar = {
            "seed": scenario["seed"],
            "model_hash": _model_hash(ctx.graph, ctx.alpha, ctx.ladder),
            "scenario_hash": shash,
            "task": scenario["task"],
            "ok": bool(ok),
            **ctx.sidecar,
        }
        writer.write_json("sidecar.json", sidecar)
    if figures:
        _render_figures(ctx)
    writer.write_index(scenario, shash, _model_hash(ctx.graph, ctx.alpha, ctx.ladder))
    return (0 if ok else 2), writer


def _catalog() -> dict:
    return {
        name: {"description": spec["description"], "params": spec["params"]}
        for name, spec in TASKS.items()
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zrplab",
        description="Condensing zero-range laboratory: scenarios in, CSV artifacts out.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one scenario")
    runp.add_argument("scenario_path", nargs="?", help="scenario file (JSON or TOML)")
    runp.add_argument("--scenario", dest="scenario_flag", help="scenario file")
    runp.add_argument("--task", help="override the scenario's task")
    runp.add_argument("--out", default=None, help="output directory")
    runp.add_argument("--seed", type=int, default=None, help="override the master seed")
    runp.add_argument(
        "--jobs", type=int, default=os.cpu_count() or 1, help="worker threads"
    )
    runp.add_argument(
        "--figures", action="store_true", help="also render PNG figures (needs matplotlib)"
    )

    sub.add_parser("list-tasks", help="print the task catalog as JSON")

    args = parser.parse_args(argv)

    if args.command == "list-tasks":
        print(json.dumps(_catalog(), indent=2, sort_keys=True))
        return 0

    path = args.scenario_flag or args.scenario_path
    if not path:
        print("error: a scenario file is required", file=sys.stderr)
        return 1
    try:
        scenario = load_scenario(path)
        if args.task:
            scenario["task"] = args.task
        if args.seed is not None:
            scenario["seed"] = args.seed
        if scenario.get("task", "") not in TASKS:
            print(
                f"error: unknown task {scenario.get('task')!r}\n"
                + json.dumps(_catalog(), indent=2, sort_keys=True),
                file=sys.stderr,
            )
            return 1
        out_dir = args.out or f"zrplab-out/{scenario['task']}"
        code, writer = run_scenario(
            scenario, out_dir, jobs=args.jobs, figures=args.figures
        )
    except SpaceTooLargeError as exc:
        print(
            f"error: {exc}\nhint: raise the cap with ZRPLAB_CAP_STATES or shrink the ladder",
            file=sys.stderr,
        )
        return 1
    except (ScenarioError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for art in writer.artifacts:
        print(f"wrote {writer.out_dir / art['path']}")
    if code == 2:
        print("threshold check failed (exit 2); see sidecar.json", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

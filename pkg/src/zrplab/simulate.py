"""Monte Carlo engines: exact jump-chain simulation of the particle system,
Euler-Maruyama simulation of the absorbed simplex diffusion, and the
time-scale regressions connecting the two.

The particle engine is a plain Gillespie loop over site pairs; the diffusion
engine integrates the singular-drift equation on the simplex with local step
halving near the boundary, absorbing coordinates at a dt-dependent threshold
and switching the drift and noise to the trace rates of the surviving sites.
Every trajectory is reproducible from its seed; trial batches draw
per-trial seeds from a seed sequence so results do not depend on the number
of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from numpy.random import SeedSequence

from .rates import limiting_chain
from .sitegraph import SiteGraph, trace_graph
from .zrp import (
    ConfigSpace,
    ZrpModel,
    balanced_config,
    condensed_config,
    default_well_radius,
)

__all__ = [
    "Trajectory",
    "ScalingFit",
    "simulate_zrp",
    "well_hitting_times",
    "condensation_time_scaling",
    "transition_time_scaling",
    "empirical_occupation",
    "trace_rate_tables",
    "diffusion_drift",
    "simulate_diffusion",
    "diffusion_endpoints",
    "zrp_endpoints",
    "d0_diagnostic",
    "fit_power_law",
]


@dataclass(frozen=True)
class Trajectory:
    """Sampled path: strictly increasing times and one state per time."""

    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    seed: int
    descriptor: str
    truncated: bool = False


@dataclass(frozen=True)
class ScalingFit:
    """Log-log regression of mean times against N."""

    Ns: tuple[int, ...]
    means: np.ndarray
    stderrs: np.ndarray
    trials: int
    exponent: float
    exponent_se: float
    ci95: tuple[float, float]
    extras: dict = field(default_factory=dict)


# -- particle-system kernels -----------------------------------------------


@njit(cache=True, nogil=True)
def _seed_rng(seed):
    np.random.seed(seed)


@njit(cache=True, nogil=True)
def _stick(n, alpha):
    if n <= 1:
        return 1.0
    x = float(n)
    return (x / (x - 1.0)) ** alpha


@njit(cache=True, nogil=True)
def _zrp_events(eta, rates, alpha, t, n_events, times, states):
    """Advance exactly n_events jumps, recording each; returns the end time."""
    kappa = eta.shape[0]
    for k in range(n_events):
        total = 0.0
        for x in range(kappa):
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    total += gx * rates[x, y]
        t += np.random.exponential() / total
        pick = np.random.random() * total
        acc = 0.0
        done = False
        for x in range(kappa):
            if done:
                break
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    acc += gx * rates[x, y]
                    if acc >= pick:
                        eta[x] -= 1
                        eta[y] += 1
                        done = True
                        break
        times[k] = t
        for x in range(kappa):
            states[k, x] = eta[x]
    return t


@njit(cache=True, nogil=True)
def _zrp_hit_well(seed, eta, rates, alpha, N, ell, skip_site, event_cap):
    """Time until some site (other than skip_site) holds at least N - ell.

    Returns (time, site, truncated)."""
    np.random.seed(seed)
    kappa = eta.shape[0]
    for x in range(kappa):
        if x != skip_site and eta[x] >= N - ell:
            return 0.0, x, False
    t = 0.0
    for _ in range(event_cap):
        total = 0.0
        for x in range(kappa):
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    total += gx * rates[x, y]
        t += np.random.exponential() / total
        pick = np.random.random() * total
        acc = 0.0
        moved_to = -1
        for x in range(kappa):
            if moved_to >= 0:
                break
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    acc += gx * rates[x, y]
                    if acc >= pick:
                        eta[x] -= 1
                        eta[y] += 1
                        moved_to = y
                        break
        if moved_to != skip_site and eta[moved_to] >= N - ell:
            return t, moved_to, False
    return t, -1, True


@njit(cache=True, nogil=True)
def _zrp_until_time(seed, eta, rates, alpha, horizon, event_cap):
    """Advance to the given process time; eta ends as the state at that time."""
    np.random.seed(seed)
    kappa = eta.shape[0]
    t = 0.0
    for _ in range(event_cap):
        total = 0.0
        for x in range(kappa):
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    total += gx * rates[x, y]
        dt = np.random.exponential() / total
        if t + dt > horizon:
            return True
        t += dt
        pick = np.random.random() * total
        acc = 0.0
        done = False
        for x in range(kappa):
            if done:
                break
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    acc += gx * rates[x, y]
                    if acc >= pick:
                        eta[x] -= 1
                        eta[y] += 1
                        done = True
                        break
    return False


@njit(cache=True, nogil=True)
def _zrp_occupation(seed, eta, rates, alpha, n_events, pascal, occupation):
    """Accumulate holding time per configuration rank over n_events jumps."""
    np.random.seed(seed)
    kappa = eta.shape[0]
    for _ in range(n_events):
        total = 0.0
        for x in range(kappa):
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    total += gx * rates[x, y]
        dwell = np.random.exponential() / total
        idx = 0
        m = eta[0]
        for j in range(1, kappa):
            m += eta[j]
            idx += pascal[m + j, j] - pascal[m - eta[j] + j, j]
        occupation[idx] += dwell
        pick = np.random.random() * total
        acc = 0.0
        done = False
        for x in range(kappa):
            if done:
                break
            if eta[x] >= 1:
                gx = _stick(eta[x], alpha)
                for y in range(kappa):
                    acc += gx * rates[x, y]
                    if acc >= pick:
                        eta[x] -= 1
                        eta[y] += 1
                        done = True
                        break


# -- particle-system wrappers ----------------------------------------------


def _check_start(model: ZrpModel, eta0) -> np.ndarray:
    eta = np.asarray(eta0, dtype=np.int64).copy()
    if eta.shape != (model.graph.kappa,) or np.any(eta < 0) or eta.sum() != model.N:
        raise ValueError("starting configuration must place N particles on the sites")
    return eta


def _trial_seeds(seed: int, trials: int) -> np.ndarray:
    children = SeedSequence(seed).spawn(trials)
    return np.array(
        [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children], dtype=np.int64
    )


def simulate_zrp(
    model: ZrpModel,
    eta0,
    stop=None,
    max_events: int = 10**6,
    chunk: int = 8192,
    seed: int = 0,
) -> Trajectory:
    """Exact continuous-time path of the particle system.

    `stop`, if given, maps an (n, kappa) block of states to a boolean mask;
    the trajectory ends at the first flagged state.  Without a stop the path
    runs for max_events jumps.  If the stop never fires within max_events
    the trajectory is returned with the truncated flag set.
    """
    eta = _check_start(model, eta0)
    rates = np.ascontiguousarray(model.graph.rates)
    _seed_rng(seed)
    all_times = [np.zeros(1)]
    all_states = [eta[None, :].copy()]
    t = 0.0
    produced = 0
    truncated = stop is not None
    while produced < max_events:
        n = min(chunk, max_events - produced)
        times = np.empty(n)
        states = np.empty((n, eta.shape[0]), dtype=np.int64)
        t = _zrp_events(eta, rates, model.alpha, t, n, times, states)
        produced += n
        if stop is not None:
            mask = np.asarray(stop(states), dtype=bool)
            if mask.any():
                cut = int(np.argmax(mask)) + 1
                all_times.append(times[:cut])
                all_states.append(states[:cut])
                truncated = False
                break
        all_times.append(times)
        all_states.append(states)
    return Trajectory(
        times=np.concatenate(all_times),
        states=np.vstack(all_states),
        seed=seed,
        descriptor=f"zrp(N={model.N}, alpha={model.alpha})",
        truncated=truncated,
    )


def _run_trials(worker, seeds, jobs: int):
    if jobs <= 1:
        return [worker(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, seeds))


def well_hitting_times(
    model: ZrpModel,
    eta0,
    trials: int,
    ell: int | None = None,
    skip_site: int = -1,
    event_cap: int = 10**9,
    seed: int = 0,
    jobs: int = 1,
) -> np.ndarray:
    """Independent samples of the time to enter a well (optionally excluding
    the well of one site, for transition runs)."""
    eta = _check_start(model, eta0)
    N, kappa = model.N, model.graph.kappa
    if ell is None:
        ell = default_well_radius(N, kappa)
    rates = np.ascontiguousarray(model.graph.rates)
    seeds = _trial_seeds(seed, trials)

    def worker(s):
        t, site, truncated = _zrp_hit_well(
            s, eta.copy(), rates, model.alpha, N, ell, skip_site, event_cap
        )
        if truncated:
            raise RuntimeError(
                f"no well reached within {event_cap} events (seed {s})"
            )
        return t

    return np.array(_run_trials(worker, seeds, jobs))


def fit_power_law(Ns, means, stderrs) -> tuple[float, float]:
    """Weighted least squares for log(mean) = a + b log(N); returns (b, se_b).

    Weights are the inverse variances of log(mean) by the delta method.
    """
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.log(np.asarray(means, dtype=float))
    sigma = np.asarray(stderrs, dtype=float) / np.asarray(means, dtype=float)
    w = 1.0 / sigma**2
    X = np.column_stack([np.ones_like(x), x])
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    return float(beta[1]), float(math.sqrt(cov[1, 1]))


def _scaling(models, trials, seed, jobs, start_fn, skip_fn, ell) -> ScalingFit:
    models = list(models)
    if len(models) < 3:
        raise ValueError("need a ladder of at least three system sizes")
    Ns, means, stderrs = [], [], []
    for i, model in enumerate(models):
        times = well_hitting_times(
            model,
            start_fn(model),
            trials,
            ell=ell,
            skip_site=skip_fn(model),
            seed=seed + i,
            jobs=jobs,
        )
        Ns.append(model.N)
        means.append(times.mean())
        stderrs.append(times.std(ddof=1) / math.sqrt(trials))
    b, se = fit_power_law(Ns, means, stderrs)
    return ScalingFit(
        Ns=tuple(Ns),
        means=np.array(means),
        stderrs=np.array(stderrs),
        trials=trials,
        exponent=b,
        exponent_se=se,
        ci95=(b - 1.96 * se, b + 1.96 * se),
    )


def condensation_time_scaling(
    models, trials: int = 400, seed: int = 0, jobs: int = 1, ell=None
) -> ScalingFit:
    """Mean time to first condensation from the most balanced start, with a
    fitted exponent of its growth in N (the pre-metastable scale)."""
    return _scaling(
        models,
        trials,
        seed,
        jobs,
        start_fn=lambda m: balanced_config(m.N, m.graph.kappa),
        skip_fn=lambda m: -1,
        ell=ell,
    )


def transition_time_scaling(
    models, trials: int = 400, seed: int = 0, jobs: int = 1, start_site: int = 0, ell=None
) -> ScalingFit:
    """Mean time for the condensate to move to a different well, with the
    fitted exponent and the comparison against the limiting chain's exit rate."""
    models = list(models)
    fit = _scaling(
        models,
        trials,
        seed,
        jobs,
        start_fn=lambda m: condensed_config(m.N, m.graph.kappa, start_site),
        skip_fn=lambda m: start_site,
        ell=ell,
    )
    model0 = models[0]
    chain = limiting_chain(model0.graph, model0.alpha)
    exit_rate = float(chain.rates[start_site].sum())
    rescaled = fit.means / np.array(
        [float(m.N) ** (1.0 + m.alpha) for m in models]
    )
    fit.extras.update(
        {"rescaled_means": rescaled, "chain_expected_time": 1.0 / exit_rate}
    )
    return fit


def empirical_occupation(
    space: ConfigSpace, eta0, n_events: int, seed: int = 0
) -> np.ndarray:
    """Long-run fraction of time in each configuration, for comparison with
    the stationary law."""
    eta = _check_start(space.model, eta0)
    occupation = np.zeros(space.size)
    _zrp_occupation(
        np.int64(seed),
        eta,
        np.ascontiguousarray(space.model.graph.rates),
        space.model.alpha,
        n_events,
        space._pascal,
        occupation,
    )
    return occupation / occupation.sum()


# -- diffusion engine ------------------------------------------------------


def trace_rate_tables(graph: SiteGraph) -> np.ndarray:
    """Trace rates for every subset of sites, indexed by bitmask.

    Entry [mask, x, y] is the watched-on-A rate from x to y when A is the
    subset encoded by mask; subsets with fewer than two sites are zero."""
    kappa = graph.kappa
    tables = np.zeros((1 << kappa, kappa, kappa))
    for mask in range(1 << kappa):
        sites = [x for x in range(kappa) if mask >> x & 1]
        if len(sites) < 2:
            continue
        if len(sites) == kappa:
            sub = graph.rates
        else:
            sub = trace_graph(graph, sites).rates
        for i, x in enumerate(sites):
            for j, y in enumerate(sites):
                tables[mask, x, y] = sub[i, j]
    return tables


@njit(cache=True, nogil=True)
def _drift_into(step, xi, mask, tables, alpha, h):
    """Add h times the singular drift of the live sites to step."""
    kappa = xi.shape[0]
    for x in range(kappa):
        if mask >> x & 1:
            c = alpha / xi[x] * h
            for y in range(kappa):
                if y != x and (mask >> y & 1):
                    r = tables[mask, x, y]
                    step[y] += c * r
                    step[x] -= c * r


@njit(cache=True, nogil=True)
def _diffusion_path(
    seed,
    xi,
    tables,
    alpha,
    n_steps,
    dt0,
    absorb_thr,
    max_halvings,
    stride,
    out_states,
):
    """Euler-Maruyama macro steps of size dt0 with local halving.

    Records the state every `stride` macro steps into out_states (row 0 is
    the start).  Returns 0 on success, 1 if the halving cap was hit."""
    np.random.seed(seed)
    kappa = xi.shape[0]
    mask = 0
    for x in range(kappa):
        if xi[x] > 0.0:
            mask |= 1 << x
    step = np.zeros(kappa)
    row = 1
    for k in range(n_steps):
        remaining = dt0
        while remaining > 1e-18:
            active = 0
            for x in range(kappa):
                if mask >> x & 1:
                    active += 1
            if active <= 1:
                remaining = 0.0
                break
            h = remaining
            halvings = 0
            while True:
                for x in range(kappa):
                    step[x] = 0.0
                _drift_into(step, xi, mask, tables, alpha, h)
                # one zero-sum noise term per live pair
                for x in range(kappa):
                    for y in range(x + 1, kappa):
                        if (mask >> x & 1) and (mask >> y & 1):
                            s = 0.5 * (tables[mask, x, y] + tables[mask, y, x])
                            if s > 0.0:
                                inc = math.sqrt(2.0 * s * h) * np.random.normal()
                                step[x] += inc
                                step[y] -= inc
                ok = True
                for x in range(kappa):
                    if mask >> x & 1:
                        if xi[x] + step[x] < -math.sqrt(h):
                            ok = False
                            break
                if ok:
                    break
                halvings += 1
                if halvings > max_halvings:
                    return 1
                h *= 0.5
            # apply, clamp, absorb; keep the total exactly one by dumping
            # clamp residue on the largest surviving coordinate
            residue = 0.0
            for x in range(kappa):
                if mask >> x & 1:
                    xi[x] += step[x]
                    if xi[x] < absorb_thr:
                        residue += xi[x]
                        xi[x] = 0.0
                        mask &= ~(1 << x)
            if residue != 0.0:
                big = -1
                for x in range(kappa):
                    if (mask >> x & 1) and (big < 0 or xi[x] > xi[big]):
                        big = x
                if big >= 0:
                    xi[big] += residue
                else:
                    # everything absorbed at once; reopen the largest site
                    big = 0
                    for x in range(1, kappa):
                        if step[x] > step[big]:
                            big = x
                    xi[big] = 1.0
                    mask |= 1 << big
            remaining -= h
        if (k + 1) % stride == 0:
            for x in range(kappa):
                out_states[row, x] = xi[x]
            row += 1
    return 0


def diffusion_drift(graph: SiteGraph, alpha: float, xi) -> np.ndarray:
    """Drift of the simplex diffusion at xi, with zero coordinates absorbed."""
    xi = np.asarray(xi, dtype=float)
    mask = 0
    for x in range(graph.kappa):
        if xi[x] > 0.0:
            mask |= 1 << x
    b = np.zeros(graph.kappa)
    _drift_into(b, xi, mask, trace_rate_tables(graph), alpha, 1.0)
    return b


def _check_simplex_point(graph: SiteGraph, xi0) -> np.ndarray:
    xi = np.asarray(xi0, dtype=float).copy()
    if xi.shape != (graph.kappa,) or np.any(xi < 0) or abs(xi.sum() - 1.0) > 1e-9:
        raise ValueError("xi0 must lie on the simplex")
    return xi


def simulate_diffusion(
    graph: SiteGraph,
    alpha: float,
    xi0,
    T: float,
    dt: float,
    seed: int = 0,
    stride: int | None = None,
    max_halvings: int = 40,
) -> Trajectory:
    """One path of the absorbed simplex diffusion up to time T.

    Coordinates reaching the absorption threshold dt^0.6 are clamped to zero
    for good; the drift and noise then run on the trace rates of the
    surviving sites.  dt must resolve the horizon (dt <= 1e-4 T).
    """
    if dt > 1e-4 * T:
        raise ValueError("dt too coarse: need dt <= 1e-4 * T")
    xi = _check_simplex_point(graph, xi0)
    n_steps = int(round(T / dt))
    if stride is None:
        stride = max(1, n_steps // 1000)
    tables = trace_rate_tables(graph)
    n_records = n_steps // stride + 1
    states = np.empty((n_records, graph.kappa))
    states[0] = xi
    flag = _diffusion_path(
        np.int64(seed),
        xi,
        tables,
        alpha,
        n_steps,
        dt,
        dt**0.6,
        max_halvings,
        stride,
        states,
    )
    if flag != 0:
        raise RuntimeError("step-halving cap exceeded near the boundary")
    times = np.arange(n_records) * (stride * dt)
    return Trajectory(
        times=times,
        states=states,
        seed=seed,
        descriptor=f"diffusion(kappa={graph.kappa}, alpha={alpha}, dt={dt})",
    )


def diffusion_endpoints(
    graph: SiteGraph,
    alpha: float,
    xi0,
    T: float,
    dt: float,
    n_paths: int,
    seed: int = 0,
    jobs: int = 1,
) -> np.ndarray:
    """Final states of independent diffusion paths at time T."""
    if dt > 1e-4 * T:
        raise ValueError("dt too coarse: need dt <= 1e-4 * T")
    xi = _check_simplex_point(graph, xi0)
    tables = trace_rate_tables(graph)
    n_steps = int(round(T / dt))
    seeds = _trial_seeds(seed, n_paths)

    def worker(s):
        state = np.empty((2, graph.kappa))
        state[0] = xi
        flag = _diffusion_path(
            s, xi.copy(), tables, alpha, n_steps, dt, dt**0.6, 40, n_steps, state
        )
        if flag != 0:
            raise RuntimeError("step-halving cap exceeded near the boundary")
        return state[1]

    return np.array(_run_trials(worker, seeds, jobs))


def zrp_endpoints(
    model: ZrpModel,
    eta0,
    horizon: float,
    n_paths: int,
    seed: int = 0,
    jobs: int = 1,
    event_cap: int = 10**9,
) -> np.ndarray:
    """Final configurations of independent particle paths at a fixed time."""
    eta = _check_start(model, eta0)
    rates = np.ascontiguousarray(model.graph.rates)
    seeds = _trial_seeds(seed, n_paths)

    def worker(s):
        state = eta.copy()
        finished = _zrp_until_time(s, state, rates, model.alpha, horizon, event_cap)
        if not finished:
            raise RuntimeError(f"event cap hit before the horizon (seed {s})")
        return state

    return np.array(_run_trials(worker, seeds, jobs))


def d0_diagnostic(
    model: ZrpModel,
    xi0,
    horizon: float,
    n_paths: int = 2000,
    dt: float | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> dict:
    """Marginal statistics of the time-rescaled particle system against the
    diffusion, from matched starts.

    The particle paths run to process time horizon * N^2 and are read off as
    eta / N; the diffusion runs to `horizon` directly.  Reports per-coordinate
    means, variances, dead-coordinate fractions, and their discrepancies.
    """
    graph, alpha, N = model.graph, model.alpha, model.N
    xi = _check_simplex_point(graph, xi0)
    if dt is None:
        dt = 1e-4 * horizon
    eta0 = np.floor(N * xi).astype(np.int64)
    eta0[0] += N - eta0.sum()  # rounding remainder to the first site

    zrp_final = zrp_endpoints(model, eta0, horizon * N**2, n_paths, seed=seed, jobs=jobs)
    diff_final = diffusion_endpoints(
        graph, alpha, xi, horizon, dt, n_paths, seed=seed + 1, jobs=jobs
    )
    zrp_points = zrp_final / N
    ell = default_well_radius(N, graph.kappa)
    report = {
        "N": N,
        "horizon": horizon,
        "paths": n_paths,
        "zrp_mean": zrp_points.mean(axis=0),
        "zrp_var": zrp_points.var(axis=0),
        "diffusion_mean": diff_final.mean(axis=0),
        "diffusion_var": diff_final.var(axis=0),
        "zrp_dead_fraction": (zrp_final <= ell).mean(axis=0),
        "diffusion_dead_fraction": (diff_final == 0.0).mean(axis=0),
    }
    report["mean_discrepancy"] = float(
        np.max(np.abs(report["zrp_mean"] - report["diffusion_mean"]))
    )
    report["var_discrepancy"] = float(
        np.max(np.abs(report["zrp_var"] - report["diffusion_var"]))
    )
    return report

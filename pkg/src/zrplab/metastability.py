"""Numerical metastability checks: resolvent condition, well-to-well rates,
and the closed-form potential theory of the two-site system.

The central question at the metastable time scale is whether the particle
system, accelerated by N^(1+alpha), behaves like the small condensate chain.
Three independent probes answer it here: solutions of resolvent equations
should be nearly constant on the wells and track the reduced chain's
resolvent; mean jump rates between wells should approach the limiting chain
rates; and for two sites everything can be cross-checked against an exact
resistance series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .chains import (
    chain_capacity,
    committor,
    expected_hitting_times,
    resolvent_solve,
)
from .rates import limiting_chain, rate_reversible, rate_variational
from .sitegraph import SiteGraph
from .zrp import ConfigSpace, WellPartition, condensed_config, wells

__all__ = [
    "ResolventRow",
    "ResolventReport",
    "JumpRateEstimate",
    "accelerated_generator",
    "resolvent_check",
    "mean_jump_rates",
    "capacity_1d_exact",
    "hitting_time_stats",
    "hitting_time_capacity_identity",
    "M0Row",
    "m0star_diagnostic",
    "h1_surrogate",
]


def accelerated_generator(space: ConfigSpace) -> sparse.csr_matrix:
    """Generator sped up to the metastable time scale: N^(1+alpha) L."""
    m = space.model
    return (m.N ** (1.0 + m.alpha)) * space.generator


def _well_partition(space: ConfigSpace, ell) -> WellPartition:
    if isinstance(ell, WellPartition):
        return ell
    if callable(ell):
        return wells(space, ell(space.model.N))
    return wells(space, ell)


@dataclass(frozen=True)
class ResolventRow:
    N: int
    osc: float
    deviation: float
    well_averages: np.ndarray


@dataclass(frozen=True)
class ResolventReport:
    lam: float
    g: np.ndarray
    reduced: np.ndarray
    rows: tuple[ResolventRow, ...]


def resolvent_check(spaces, g, lam: float, ell=None) -> ResolventReport:
    """Solve (lam - N^(1+alpha) L) F = sum_x g(x) 1{well x} across a ladder.

    Reports, per N, the largest oscillation of F inside any well and the
    deviation of the well averages from the reduced-chain resolvent
    (lam - L_chain)^(-1) g.  Metastability shows up as both going to zero.
    """
    spaces = list(spaces)
    if not spaces:
        raise ValueError("need at least one configuration space")
    if lam <= 0:
        raise ValueError("resolvent parameter must be positive")
    Ns = [sp.model.N for sp in spaces]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("ladder must be strictly increasing in N")
    model0 = spaces[0].model
    g = np.asarray(g, dtype=float)
    if g.shape != (model0.graph.kappa,):
        raise ValueError("g must assign a value to every site")
    chain = limiting_chain(model0.graph, model0.alpha)
    reduced = np.linalg.solve(lam * np.eye(chain.kappa) - chain.generator, g)

    rows = []
    for sp in spaces:
        wp = _well_partition(sp, ell)
        G = np.zeros(sp.size)
        for x, w in enumerate(wp.wells):
            G[w] = g[x]
        F = resolvent_solve(accelerated_generator(sp), lam, G)
        osc = 0.0
        averages = np.zeros(len(wp.wells))
        for x, w in enumerate(wp.wells):
            osc = max(osc, float(F[w].max() - F[w].min()))
            mass = sp.rho[w]
            averages[x] = float(F[w] @ mass / mass.sum())
        deviation = float(np.max(np.abs(averages - reduced)))
        rows.append(
            ResolventRow(N=sp.model.N, osc=osc, deviation=deviation, well_averages=averages)
        )
    return ResolventReport(lam=lam, g=g, reduced=reduced, rows=tuple(rows))


@dataclass(frozen=True)
class JumpRateEstimate:
    """Well-to-well mean jump rates and their metastable-scale comparison."""

    N: int
    ell: int
    rates: np.ndarray  # r_N(x, y)
    accelerated: np.ndarray  # N^(1+alpha) r_N(x, y)
    target: np.ndarray  # limiting chain rates
    exit_rates: np.ndarray  # independent total exit flux per well


def mean_jump_rates(space: ConfigSpace, ell=None) -> JumpRateEstimate:
    """Mean rate of moving from one well to another.

    For a start distributed as the stationary law restricted to well x, the
    rate toward well y is the expected flux into trajectories that reach
    well y before any other well:
        r_N(x,y) = E[ sum_zeta rate(eta, zeta) h_y(zeta) ],
    with h_y the committor of "well y before the rest".  The per-well total
    exit rate is recomputed from the complementary committor as a
    consistency check.
    """
    model = space.model
    kappa = model.graph.kappa
    wp = _well_partition(space, ell)
    L = space.generator
    Q = space.jump_rates
    rho = space.rho

    harmonics = []
    for y in range(kappa):
        rest = np.concatenate([wp.wells[z] for z in range(kappa) if z != y])
        harmonics.append(committor(L, hit=wp.wells[y], avoid=rest))

    rates = np.zeros((kappa, kappa))
    exit_rates = np.zeros(kappa)
    for x in range(kappa):
        w = wp.wells[x]
        weights = rho[w] / rho[w].sum()
        for y in range(kappa):
            if y == x:
                continue
            flux = np.asarray(Q[w] @ harmonics[y]).ravel()
            rates[x, y] = float(weights @ flux)
        stay = np.asarray(Q[w] @ (1.0 - harmonics[x])).ravel()
        exit_rates[x] = float(weights @ stay)

    accel = model.N ** (1.0 + model.alpha) * rates
    target = limiting_chain(model.graph, model.alpha).rates
    return JumpRateEstimate(
        N=model.N,
        ell=wp.ell,
        rates=rates,
        accelerated=accel,
        target=target,
        exit_rates=exit_rates,
    )


def _two_site_rate(graph: SiteGraph) -> float:
    if graph.kappa != 2:
        raise ValueError("closed form exists only for two sites")
    r = graph.rates[0, 1]
    if not np.isclose(r, graph.rates[1, 0]):
        raise ValueError("closed form needs a symmetric rate")
    return float(r)


def partition_sum_two_sites(N: int, alpha: float) -> float:
    """Two-site partition function N^alpha sum_j 1/(a(j) a(N-j))."""
    j = np.arange(N + 1)
    a = np.where(j == 0, 1.0, np.maximum(j, 1).astype(float) ** alpha)
    return float(N**alpha * np.sum(1.0 / (a * a[::-1])))


def capacity_1d_exact(model, eta_x: int) -> float:
    """Capacity between (eta_x, N - eta_x) and the condensate at the second
    site, by the exact resistance series of the two-site birth-death chain.

    The inverse capacity is (Z_N / (N^alpha r)) [ (N-1)^alpha +
    sum_{i=1}^{eta_x - 1} i^alpha (N-1-i)^alpha ].
    """
    r = _two_site_rate(model.graph)
    N, alpha = model.N, model.alpha
    if not 1 <= eta_x <= N:
        raise ValueError("eta_x must lie in 1..N")
    i = np.arange(1, eta_x)
    series = (N - 1.0) ** alpha + np.sum(i**alpha * (N - 1.0 - i) ** alpha)
    Z = partition_sum_two_sites(N, alpha)
    return float(N**alpha * r / (Z * series))


def hitting_time_stats(space: ConfigSpace, target) -> np.ndarray:
    """Expected time to reach the target set, from every configuration."""
    return expected_hitting_times(space.generator, np.asarray(target, dtype=int))


def hitting_time_capacity_identity(space: ConfigSpace, start: int, target) -> tuple[float, float]:
    """Both sides of E[tau] = (1/Cap(start, target)) sum rho P[start first].

    Returns (direct linear-system value, capacity-representation value);
    they agree for reversible models.
    """
    if not space.model.graph.reversible:
        raise ValueError("the capacity representation needs reversibility")
    target = np.asarray(target, dtype=int)
    direct = float(hitting_time_stats(space, target)[start])
    h = committor(space.generator, hit=[start], avoid=target)
    cap = chain_capacity(space.generator, space.rho, [start], target)
    return direct, float(space.rho @ h / cap)


@dataclass(frozen=True)
class M0Row:
    N: int
    scaled_rate: float
    interior_mass: float


def m0star_diagnostic(spaces, measures, ell=None, tol: float = 1e-8) -> list[M0Row]:
    """Pair the metastable-scale rate of each measure with its interior mass.

    A bounded rate should force the mass between the wells to vanish; the
    caller asserts the trend appropriate to the supplied sequence.
    """
    rows = []
    for sp, nu in zip(spaces, measures):
        nu = np.asarray(nu, dtype=float)
        wp = _well_partition(sp, ell)
        if sp.model.graph.reversible:
            rate = rate_reversible(sp, nu)
        else:
            rate = rate_variational(sp, nu, tol=tol).value
        scaled = sp.model.N ** (1.0 + sp.model.alpha) * rate
        rows.append(
            M0Row(N=sp.model.N, scaled_rate=scaled, interior_mass=float(nu[wp.interior].sum()))
        )
    return rows


def h1_surrogate(space: ConfigSpace, ell=None, samples: int = 20, seed: int = 0) -> np.ndarray:
    """Per-site max over sampled interior states of
    Cap(well x, other wells) / Cap(condensate x, state).

    A numeric stand-in for the capacity comparison behind the well
    construction; the interesting content is that it shrinks with N.
    """
    model = space.model
    kappa = model.graph.kappa
    wp = _well_partition(space, ell)
    if wp.interior.size == 0:
        raise ValueError("no interior states to sample")
    rng = np.random.default_rng(seed)
    k = min(samples, wp.interior.size)
    picks = rng.choice(wp.interior, size=k, replace=False)
    L, rho = space.generator, space.rho
    out = np.zeros(kappa)
    for x in range(kappa):
        rest = np.concatenate([wp.wells[z] for z in range(kappa) if z != x])
        cap_wells = chain_capacity(L, rho, wp.wells[x], rest)
        peak = int(space.rank(condensed_config(model.N, kappa, x)))
        ratios = [
            cap_wells / chain_capacity(L, rho, [peak], [int(eta)]) for eta in picks
        ]
        out[x] = max(ratios)
    return out

"""Occupation-measure rate functions for the particle system and its limit.

The condensing zero-range process carries a level-two (Donsker-Varadhan)
rate function at every time scale.  This module evaluates it on the finite
configuration space, both through the reversible closed form and through the
concave variational problem, and builds the limiting condensate-location
chain whose jump rates are site-graph capacities scaled by two model
constants.  The diffusion-level energies on simplex faces live in simplexfn.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .chains import (
    RateResult,
    rate_reversible_chain,
    rate_variational_chain,
    stationary_distribution,
)
from .sitegraph import SiteGraph, capacity
from .zrp import ConfigSpace, occupancy_series

__all__ = [
    "rate_reversible",
    "rate_variational",
    "beta_moment",
    "limiting_chain",
    "chain_rate",
    "vertex_measure_rate",
]


def rate_reversible(space: ConfigSpace, nu) -> float:
    """Closed-form occupation rate of the particle system at the measure nu.

    Equals half the sum over ordered transitions of
    rho(eta) g(eta_x) r(x,y) (sqrt(nu/rho)(eta) - sqrt(nu/rho)(eta'))^2,
    valid only when the site graph is reversible.
    """
    if not space.model.graph.reversible:
        raise ValueError(
            "closed form needs a reversible site graph; use rate_variational"
        )
    nu = np.asarray(nu, dtype=float)
    return rate_reversible_chain(space.generator, space.rho, nu)


def _generator_of(system):
    if isinstance(system, ConfigSpace):
        return system.generator
    if isinstance(system, SiteGraph):
        return system.generator
    return system


def rate_variational(system, nu, tol: float = 1e-9) -> RateResult:
    """Occupation rate as the supremum of -integral (L u)/u d nu over u > 0.

    Accepts a ConfigSpace, a SiteGraph, or a raw generator matrix; works for
    non-reversible chains, where no closed form exists.
    """
    return rate_variational_chain(_generator_of(system), nu, tol=tol)


def beta_moment(alpha: float) -> float:
    """integral_0^1 (u (1-u))^alpha du, by adaptive quadrature to 1e-12."""
    value, err = quad(lambda u: (u * (1.0 - u)) ** alpha, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12)
    if err > 1e-10:
        raise RuntimeError(f"quadrature error {err:g} too large")
    return value


def limiting_chain(graph: SiteGraph, alpha: float, variant: str = "standard") -> SiteGraph:
    """Chain followed by the condensate location on the metastable scale.

    Jump rates R(x,y) = kappa * Cap(x,y) / (series * moment), where Cap is
    the site-graph capacity between {x} and {y}, `series` the inverse
    occupancy-weight sum and `moment` the beta moment of order alpha.
    Symmetric output for reversible input.
    """
    kappa = graph.kappa
    denom = occupancy_series(alpha, variant) * beta_moment(alpha)
    R = np.zeros((kappa, kappa))
    for x in range(kappa):
        for y in range(kappa):
            if y != x:
                R[x, y] = kappa * capacity(graph, [x], [y]) / denom
    return SiteGraph(R, graph.labels)


def chain_rate(chain: SiteGraph, mu, tol: float = 1e-9) -> float:
    """Occupation rate of a site-level chain at the site measure mu.

    Closed form against the uniform stationary measure when the chain is
    reversible, the variational problem otherwise.
    """
    mu = np.asarray(mu, dtype=float)
    if chain.reversible:
        pi = np.full(chain.kappa, 1.0 / chain.kappa)
        return rate_reversible_chain(chain.generator, pi, mu)
    return rate_variational_chain(chain.generator, mu, tol=tol).value


def vertex_measure_rate(
    graph: SiteGraph,
    alpha: float,
    points,
    weights,
    *,
    chain: SiteGraph | None = None,
    atol: float = 1e-9,
) -> float:
    """Metastable-scale rate of a simplex measure given as weighted points.

    The measure must sit on the vertex embeddings (all mass of a point on a
    single site); any off-vertex mass makes the rate +inf.  The finite value
    is the occupation rate of the limiting chain at the induced site measure.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    weights = np.atleast_1d(np.asarray(weights, dtype=float))
    if points.shape[0] != weights.shape[0]:
        raise ValueError("one weight per point required")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-8:
        raise ValueError("weights must form a probability vector")
    kappa = graph.kappa
    if points.shape[1] != kappa:
        raise ValueError("points must have one coordinate per site")
    mu = np.zeros(kappa)
    for p, w in zip(points, weights):
        x = int(np.argmax(p))
        if p[x] < 1.0 - atol or np.any(np.delete(p, x) > atol):
            return math.inf
        mu[x] += w
    if chain is None:
        chain = limiting_chain(graph, alpha)
    return chain_rate(chain, mu)

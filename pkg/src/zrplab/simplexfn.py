"""Test functions and quadrature on faces of the probability simplex.

The diffusive-scale rate function evaluates energy forms of smooth functions
supported in the open interior of a simplex face.  The reference measures are
the uniform probability measure m on the face and the boundary-weighted
measure lambda with density (prod_x xi_x)^(-alpha) relative to m.  Both blow
nothing up in practice because every admissible test function vanishes on a
margin along the boundary; quadrature simply drops the margin cells, which
requires the mesh to resolve the margin (two mesh widths must fit inside it).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import math

import numpy as np
from scipy.optimize import brentq

from .sitegraph import SiteGraph, harmonic_extension, trace_graph
from .zrp import compositions

__all__ = [
    "SimplexGrid",
    "simplex_grid",
    "TestFunction",
    "product_bump",
    "scaled",
    "normalized",
    "face_integral",
    "face_energy",
    "face_energy_mc",
    "FaceComponent",
    "face_measure_rate",
]

_IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class SimplexGrid:
    """Midpoint-rule quadrature nodes for a simplex face.

    The nodes are the shifted barycentric lattice points (k + 1/2)/(M + d/2),
    k a composition of M into d parts, so every node is interior and the
    coordinates still sum to one.  All nodes carry equal weight and the
    weights sum to one: quadrature against the uniform probability measure.
    """

    dim: int
    subdivisions: int
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def mesh(self) -> float:
        return 1.0 / (self.subdivisions + 0.5 * self.dim)

    def refined(self, factor: int = 2) -> "SimplexGrid":
        return simplex_grid(self.dim, factor * self.subdivisions)


def simplex_grid(dim: int, subdivisions: int) -> SimplexGrid:
    if dim < 2:
        raise ValueError("a face grid needs at least two coordinates")
    if subdivisions < 1:
        raise ValueError("need at least one subdivision")
    lattice = compositions(subdivisions, dim).astype(float)
    points = (lattice + 0.5) / (subdivisions + 0.5 * dim)
    n = points.shape[0]
    weights = np.full(n, 1.0 / n)
    return SimplexGrid(dim=dim, subdivisions=subdivisions, points=points, weights=weights)


@dataclass(frozen=True)
class TestFunction:
    """Smooth function on a simplex face, vanishing near the boundary.

    `fn` and `grad` act on (n, d) point arrays and return (n,) values and
    (n, d) gradients.  `margin` certifies the support: the function is zero
    wherever any coordinate is <= margin.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    margin: float
    label: str = ""

    def __call__(self, points) -> np.ndarray:
        return self.fn(np.atleast_2d(np.asarray(points, dtype=float)))

    def gradient(self, points) -> np.ndarray:
        return self.grad(np.atleast_2d(np.asarray(points, dtype=float)))


def product_bump(dim: int, level: float = 0.09, power: int = 3) -> TestFunction:
    """Bump (prod_x xi_x - level)^power clipped at zero.

    C^{power-1} across the support boundary.  The support margin is the
    coordinate value below which the product cannot exceed `level`, found by
    solving t ((1-t)/(d-1))^(d-1) = level.
    """
    if dim < 2:
        raise ValueError("bump needs at least two coordinates")
    peak = dim ** (-float(dim))
    if not 0 < level < peak:
        raise ValueError(f"level must lie in (0, {peak:g}) for a nonempty support")
    if power < 2:
        raise ValueError("power >= 2 keeps the gradient continuous")

    def envelope(t):
        return t * ((1.0 - t) / (dim - 1)) ** (dim - 1) - level

    margin = float(brentq(envelope, 1e-14, 1.0 / dim, xtol=1e-15))

    def fn(xi):
        p = np.prod(xi, axis=1)
        return np.maximum(p - level, 0.0) ** power

    def grad(xi):
        p = np.prod(xi, axis=1)
        core = power * np.maximum(p - level, 0.0) ** (power - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            partial = np.where(xi > 0, p[:, None] / np.where(xi > 0, xi, 1.0), 0.0)
        return core[:, None] * partial

    return TestFunction(fn=fn, grad=grad, margin=margin, label=f"bump(level={level},power={power})")


def scaled(v: TestFunction, c: float) -> TestFunction:
    return TestFunction(
        fn=lambda xi: c * v.fn(xi),
        grad=lambda xi: c * v.grad(xi),
        margin=v.margin,
        label=f"{c:g}*{v.label}" if v.label else "",
    )


def _require_resolved(v: TestFunction, grid: SimplexGrid):
    if v.margin <= 2.0 * grid.mesh:
        needed = int(math.ceil(2.0 / v.margin - 0.5 * grid.dim)) + 1
        raise ValueError(
            f"grid too coarse for the support margin {v.margin:.4g}: mesh "
            f"{grid.mesh:.4g} must be below margin/2; use at least "
            f"{needed} subdivisions"
        )


def _kept(v: TestFunction, grid: SimplexGrid):
    _require_resolved(v, grid)
    keep = grid.points.min(axis=1) > v.margin
    return grid.points[keep], grid.weights[keep]


def face_integral(v: TestFunction, grid: SimplexGrid, alpha: float, power: int = 2) -> float:
    """integral of v^power against the boundary-weighted face measure.

    The density (prod xi)^(-alpha) is integrable here only because v
    vanishes on the margin; cells inside the margin are dropped.
    """
    xi, w = _kept(v, grid)
    if xi.size == 0:
        return 0.0
    density = np.prod(xi, axis=1) ** (-alpha)
    return float(np.sum(v(xi) ** power * density * w))


def _face_rates(graph: SiteGraph, A: tuple[int, ...]) -> np.ndarray:
    if len(A) == graph.kappa:
        return graph.rates
    return trace_graph(graph, A).rates


def _pair_energies(graph: SiteGraph, A, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-point energy sums along both equivalent routes.

    Route one contracts the gradient with the face's own trace rates; route
    two projects every whole-graph jump direction onto the face.  The trace
    identity makes them equal pointwise, which we use as a self-check.
    """
    d = len(A)
    rA = _face_rates(graph, A)
    direct = np.zeros(grad.shape[0])
    for i in range(d):
        for j in range(d):
            if i != j and rA[i, j] > 0:
                direct += 0.5 * rA[i, j] * (grad[:, i] - grad[:, j]) ** 2
    U = harmonic_extension(graph, A)
    projected = np.zeros(grad.shape[0])
    for x in range(graph.kappa):
        for y in range(graph.kappa):
            if x != y and graph.rates[x, y] > 0:
                direction = U[:, y] - U[:, x]
                projected += 0.5 * graph.rates[x, y] * (grad @ direction) ** 2
    return direct, projected


def face_energy(graph: SiteGraph, alpha: float, A, v: TestFunction, grid: SimplexGrid) -> float:
    """Energy of a test function on the face spanned by the site set A.

    Quadrature of sum_{x != y in A} (r^A(x,y)/2) (d_x v - d_y v)^2 weighted
    by (prod xi)^(-alpha), against the uniform probability measure on the
    face.  Always evaluates the projected form as well and refuses to return
    if the two disagree beyond 1e-10.
    """
    A = tuple(sorted(set(int(x) for x in A)))
    if len(A) < 2:
        raise ValueError("energy needs a face with at least two sites")
    if grid.dim != len(A):
        raise ValueError("grid dimension must match the face size")
    xi, w = _kept(v, grid)
    if xi.size == 0:
        return 0.0
    grad = v.gradient(xi)
    direct, projected = _pair_energies(graph, A, grad)
    gap = float(np.max(np.abs(direct - projected)))
    if gap > _IDENTITY_TOL * max(1.0, float(np.max(np.abs(direct)))):
        raise RuntimeError(
            f"trace-form identity violated at a quadrature point (gap {gap:g})"
        )
    density = np.prod(xi, axis=1) ** (-alpha)
    return float(np.sum(direct * density * w))


def face_energy_mc(
    graph: SiteGraph,
    alpha: float,
    A,
    v: TestFunction,
    samples: int = 10**6,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo version of face_energy: mean and standard error over
    uniform samples of the face.  Slow; meant as an independent check."""
    A = tuple(sorted(set(int(x) for x in A)))
    rng = np.random.default_rng(seed)
    xi = rng.dirichlet(np.ones(len(A)), size=samples)
    inside = xi.min(axis=1) > v.margin
    values = np.zeros(samples)
    if inside.any():
        grad = v.gradient(xi[inside])
        direct, _ = _pair_energies(graph, A, grad)
        values[inside] = direct * np.prod(xi[inside], axis=1) ** (-alpha)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples))
    return mean, stderr


@dataclass(frozen=True)
class FaceComponent:
    """One face of a simplex measure: the site set, its mass, and the square
    root of the density against the boundary-weighted face measure."""

    sites: tuple[int, ...]
    weight: float
    density_sqrt: TestFunction | None = None
    grid: SimplexGrid | None = None


def normalized(v: TestFunction, grid: SimplexGrid, alpha: float) -> TestFunction:
    """Rescale v so that its square integrates to one against the
    boundary-weighted face measure."""
    total = face_integral(v, grid, alpha)
    if total <= 0:
        raise ValueError("cannot normalize a function vanishing on the grid")
    return scaled(v, 1.0 / math.sqrt(total))


def face_measure_rate(graph: SiteGraph, alpha: float, components) -> float:
    """Diffusive-scale rate of a measure given by per-face components.

    Sums weight * face_energy over the faces.  Singleton faces are absorbed
    points and contribute zero.  Each face density must be normalized
    against the boundary-weighted face measure to within 1%.
    """
    components = list(components)
    weights = np.array([c.weight for c in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-8:
        raise ValueError("face weights must form a probability vector")
    total = 0.0
    for comp in components:
        A = tuple(sorted(set(int(x) for x in comp.sites)))
        if len(A) == 1:
            continue
        if comp.density_sqrt is None or comp.grid is None:
            raise ValueError("non-singleton faces need a density and a grid")
        mass = face_integral(comp.density_sqrt, comp.grid, alpha)
        if abs(mass - 1.0) > 0.01:
            raise ValueError(
                f"face density on {A} integrates to {mass:.4g}, not 1; "
                "rescale with normalized()"
            )
        total += comp.weight * face_energy(graph, alpha, A, comp.density_sqrt, comp.grid)
    return total

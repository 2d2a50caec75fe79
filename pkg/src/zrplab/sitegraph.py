"""Finite site graphs and their potential theory.

A site graph is a finite irreducible continuous-time Markov chain on kappa >= 2
sites, given by a nonnegative jump-rate table r(x, y).  Throughout the package
we work under the uniform-measure condition: the stationary distribution of the
site chain is uniform, which holds exactly when every column of the generator
sums to zero.  Under that condition the Dirichlet form

    D(f, h) = (1/2) sum_{x,y} (1/kappa) r(x, y) (f(y) - f(x)) (h(y) - h(x))

is the natural quadratic form of the chain, capacities between disjoint site
sets are Dirichlet energies of equilibrium potentials, and the chain watched
on a subset A of sites (the trace chain) has generator gamma_A L gamma_A^T,
where the rows of gamma_A are the harmonic extensions of the indicator
functions of the sites of A.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "SiteGraph",
    "complete_graph",
    "cycle_graph",
    "two_site_graph",
    "apply_generator",
    "symmetrize",
    "dirichlet_form",
    "solve_dirichlet",
    "capacity",
    "harmonic_extension",
    "face_projection",
    "trace_graph",
    "load_graph",
    "save_graph",
]


@dataclass(frozen=True)
class SiteGraph:
    """Irreducible jump-rate table on a finite site set.

    rates[x, y] is the jump rate from site x to site y; the diagonal is
    ignored and stored as zero.  Site labels are kept only for file IO and
    reporting; all operations address sites by index.
    """

    rates: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float).copy()
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValueError("rates must be a square matrix")
        kappa = r.shape[0]
        if kappa < 2:
            raise ValueError("a site graph needs at least two sites")
        np.fill_diagonal(r, 0.0)
        if np.any(r < 0):
            raise ValueError("jump rates must be nonnegative")
        adj = csr_matrix((r > 0).astype(np.int8))
        ncomp, _ = connected_components(adj, directed=True, connection="strong")
        if ncomp != 1:
            raise ValueError("site graph must be irreducible (strongly connected)")
        object.__setattr__(self, "rates", r)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(x) for x in range(kappa)))
        elif len(self.labels) != kappa:
            raise ValueError("label count does not match rate matrix size")

    @property
    def kappa(self) -> int:
        return self.rates.shape[0]

    @property
    def generator(self) -> np.ndarray:
        """Generator matrix: off-diagonal rates, diagonal minus row sums."""
        L = self.rates.copy()
        np.fill_diagonal(L, -L.sum(axis=1))
        return L

    @property
    def uniform_stationary(self) -> bool:
        """True when the uniform distribution is stationary (zero column sums)."""
        L = self.generator
        return bool(np.allclose(L.sum(axis=0), 0.0, atol=1e-12))

    @property
    def reversible(self) -> bool:
        """True when the rate table is symmetric (detailed balance under the
        uniform measure)."""
        return self.uniform_stationary and bool(
            np.allclose(self.rates, self.rates.T, atol=1e-12)
        )


def complete_graph(kappa: int, rate: float = 1.0) -> SiteGraph:
    r = np.full((kappa, kappa), float(rate))
    np.fill_diagonal(r, 0.0)
    return SiteGraph(r)


def two_site_graph(rate: float = 1.0) -> SiteGraph:
    return complete_graph(2, rate)


def cycle_graph(kappa: int, forward: float = 1.0, backward: float = 1.0) -> SiteGraph:
    """Cycle on kappa sites.  Unequal forward/backward rates give a
    non-reversible chain whose stationary measure is still uniform."""
    r = np.zeros((kappa, kappa))
    for x in range(kappa):
        r[x, (x + 1) % kappa] = forward
        r[x, (x - 1) % kappa] = backward
    return SiteGraph(r)


def apply_generator(graph: SiteGraph, f: np.ndarray) -> np.ndarray:
    """(L f)(x) = sum_y r(x,y) (f(y) - f(x))."""
    f = np.asarray(f, dtype=float)
    return graph.generator @ f


def symmetrize(graph: SiteGraph) -> SiteGraph:
    """Additive symmetrization r^s(x,y) = (r(x,y) + r(y,x)) / 2.

    Shares the Dirichlet form with the original graph; equal to it exactly
    when the original is reversible.
    """
    return SiteGraph(0.5 * (graph.rates + graph.rates.T), graph.labels)


def _require_uniform(graph: SiteGraph, what: str):
    if not graph.uniform_stationary:
        raise ValueError(
            f"{what} requires the uniform-measure condition "
            "(generator columns must sum to zero)"
        )


def dirichlet_form(graph: SiteGraph, f: np.ndarray, h: np.ndarray | None = None) -> float:
    """Dirichlet form D(f, h) with uniform weights m(x) = 1/kappa.

    With h omitted returns the energy D(f, f).  For non-reversible graphs this
    is the form of the additive symmetrization.
    """
    _require_uniform(graph, "dirichlet_form")
    f = np.asarray(f, dtype=float)
    h = f if h is None else np.asarray(h, dtype=float)
    df = f[None, :] - f[:, None]
    dh = h[None, :] - h[:, None]
    return float(0.5 * np.sum(graph.rates * df * dh) / graph.kappa)


def _check_sets(graph: SiteGraph, A, B):
    A = sorted(set(int(x) for x in A))
    B = sorted(set(int(x) for x in B))
    if not A or not B:
        raise ValueError("boundary sets must be non-empty")
    if set(A) & set(B):
        raise ValueError("boundary sets must be disjoint")
    for x in A + B:
        if not 0 <= x < graph.kappa:
            raise ValueError(f"site index {x} out of range")
    return A, B


def solve_dirichlet(graph: SiteGraph, A, B) -> np.ndarray:
    """Equilibrium potential: f = 0 on A, f = 1 on B, L f = 0 elsewhere."""
    A, B = _check_sets(graph, A, B)
    kappa = graph.kappa
    f = np.zeros(kappa)
    f[B] = 1.0
    interior = [x for x in range(kappa) if x not in A and x not in B]
    if interior:
        L = graph.generator
        Lii = L[np.ix_(interior, interior)]
        rhs = -L[np.ix_(interior, B)].sum(axis=1)
        f[interior] = np.linalg.solve(Lii, rhs)
    return f


def capacity(graph: SiteGraph, A, B) -> float:
    """Dirichlet energy of the equilibrium potential between A and B."""
    _require_uniform(graph, "capacity")
    f = solve_dirichlet(graph, A, B)
    return dirichlet_form(graph, f)


def harmonic_extension(graph: SiteGraph, A) -> np.ndarray:
    """Rows u^A_x, x in A: u^A_x = delta_x on A and harmonic off A.

    u^A_x(z) is the probability that the chain started at z enters A at x.
    Returned as an (|A|, kappa) matrix whose columns sum to one.
    """
    A = sorted(set(int(x) for x in A))
    if not A:
        raise ValueError("A must be non-empty")
    kappa = graph.kappa
    rest = [z for z in range(kappa) if z not in A]
    U = np.zeros((len(A), kappa))
    for i, x in enumerate(A):
        U[i, x] = 1.0
    if rest:
        L = graph.generator
        Lrr = L[np.ix_(rest, rest)]
        for i, x in enumerate(A):
            rhs = -L[np.ix_(rest, [x])].ravel()
            U[i, rest] = np.linalg.solve(Lrr, rhs)
    return U


def face_projection(graph: SiteGraph, A, xi: np.ndarray) -> np.ndarray:
    """Project a simplex point onto the face spanned by A.

    Mass sitting on sites outside A is reassigned to the sites of A by the
    harmonic entry probabilities: gamma_A(xi)_x = xi_x + sum_{y notin A}
    u^A_x(y) xi_y.  Returns coordinates indexed by A, in the order of sorted A.
    """
    A = sorted(set(int(x) for x in A))
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (graph.kappa,):
        raise ValueError("xi must have one coordinate per site")
    if np.any(xi < -1e-12) or abs(xi.sum() - 1.0) > 1e-9:
        raise ValueError("xi must lie on the simplex")
    U = harmonic_extension(graph, A)
    out = U @ xi
    return out


def trace_graph(graph: SiteGraph, A) -> SiteGraph:
    """Chain watched on the site subset A.

    The generator of the trace chain is gamma_A L gamma_A^T with gamma_A the
    harmonic-extension matrix; its off-diagonal entries are the effective
    rates r^A(x, y) = r(x, y) + sum_{z notin A} r(x, z) u^A_y(z).
    """
    A = sorted(set(int(x) for x in A))
    if len(A) < 2:
        raise ValueError("trace needs at least two sites")
    U = harmonic_extension(graph, A)
    LA = U @ graph.generator @ U.T
    rates = LA.copy()
    np.fill_diagonal(rates, 0.0)
    rates[np.abs(rates) < 1e-14] = 0.0
    labels = tuple(graph.labels[x] for x in A)
    return SiteGraph(rates, labels)


def load_graph(path) -> SiteGraph:
    """Read a graph from JSON: {"sites": [...], "rates": [[from, to, rate], ...]}.

    Site references may be labels or integer indices.
    """
    with open(path) as fh:
        doc = json.load(fh)
    return graph_from_dict(doc)


def graph_from_dict(doc: dict) -> SiteGraph:
    sites = [str(s) for s in doc["sites"]]
    index = {s: i for i, s in enumerate(sites)}
    r = np.zeros((len(sites), len(sites)))
    for entry in doc["rates"]:
        x, y, rate = entry
        xi = index[str(x)] if str(x) in index else int(x)
        yi = index[str(y)] if str(y) in index else int(y)
        r[xi, yi] = float(rate)
    return SiteGraph(r, tuple(sites))


def save_graph(graph: SiteGraph, path):
    doc = {
        "sites": list(graph.labels),
        "rates": [
            [graph.labels[x], graph.labels[y], graph.rates[x, y]]
            for x in range(graph.kappa)
            for y in range(graph.kappa)
            if graph.rates[x, y] > 0
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")

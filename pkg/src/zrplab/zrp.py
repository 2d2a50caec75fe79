"""Zero-range process on a site graph: state space, generator, stationary law.

A configuration places N indistinguishable particles on the sites of a graph;
the process moves one particle at a time, from x to y at rate g(eta_x) r(x, y),
with the sticky jump rate g(n) = (n/(n-1))^alpha for n >= 2 and g(0) = g(1) = 1.
For alpha > 1 the stationary measure rho_N(eta) = N^alpha / Z_{S,N} / a(eta),
a(eta) = prod_x max(eta_x, 1)^alpha, concentrates as N grows on configurations
with nearly all particles on a single site (condensation).  The per-site wells
E^x = {eta : eta_x >= N - ell} collect that mass; everything in between is the
interior Delta.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import json

import numpy as np
from scipy import sparse
from scipy.special import logsumexp, zeta

from .sitegraph import SiteGraph, graph_from_dict

__all__ = [
    "ZrpModel",
    "ConfigSpace",
    "WellPartition",
    "SpaceTooLargeError",
    "occupancy_weight",
    "stickiness",
    "occupancy_series",
    "limiting_partition_function",
    "compositions",
    "enumerate_space",
    "wells",
    "default_well_radius",
    "space_size",
    "condensed_config",
    "balanced_config",
    "load_model",
    "save_model",
]

_DEFAULT_STATE_CAP = 50_000_000
_CAP_ENV = "ZRPLAB_CAP_STATES"


class SpaceTooLargeError(ValueError):
    pass


def occupancy_weight(n, alpha: float):
    """a(n): 1 at n = 0, n^alpha otherwise.  Accepts arrays."""
    n = np.asarray(n)
    return np.where(n == 0, 1.0, np.maximum(n, 1).astype(float) ** alpha)


def stickiness(n, alpha: float):
    """g(n) = a(n)/a(n-1): jump rate multiplier of a site holding n particles.

    Equals 1 for n <= 1 and decreases from 2^alpha toward 1 as the pile grows,
    which is what makes large piles sticky in relative terms.
    """
    n = np.asarray(n)
    nf = np.maximum(n, 2).astype(float)
    return np.where(n <= 1, 1.0, (nf / (nf - 1.0)) ** alpha)


SERIES_VARIANTS = ("standard", "shifted")


def occupancy_series(alpha: float, variant: str = "standard") -> float:
    """Sum over pile heights of the inverse occupancy weight: sum_j 1/a(j).

    Equals 1 + zeta(alpha) and is the per-site factor in the large-N limit of
    the partition function.  The "shifted" variant uses the exponent alpha+1
    instead; it exists only as a sensitivity switch and is never the default.
    """
    if variant not in SERIES_VARIANTS:
        raise ValueError(f"unknown series variant {variant!r}; use one of {SERIES_VARIANTS}")
    s = alpha if variant == "standard" else alpha + 1.0
    if not s > 1:
        raise ValueError("the series diverges unless the exponent exceeds 1")
    return 1.0 + float(zeta(s))


def limiting_partition_function(kappa: int, alpha: float, variant: str = "standard") -> float:
    """Large-N limit of the partition function: kappa * series^(kappa-1)."""
    if kappa < 2:
        raise ValueError("need at least two sites")
    return kappa * occupancy_series(alpha, variant) ** (kappa - 1)


@dataclass(frozen=True)
class ZrpModel:
    graph: SiteGraph
    alpha: float
    N: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("condensation requires alpha > 1")
        if self.N < 1:
            raise ValueError("need at least one particle")


def space_size(N: int, kappa: int) -> int:
    return math.comb(N + kappa - 1, kappa - 1)


def _state_cap(cap: int | None) -> int:
    if cap is not None:
        return int(cap)
    env = os.environ.get(_CAP_ENV)
    return int(float(env)) if env else _DEFAULT_STATE_CAP


def compositions(total: int, parts: int) -> np.ndarray:
    """All compositions of `total` into `parts` nonnegative integers, in
    colexicographic order."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for last in range(total + 1):
        sub = compositions(total - last, parts - 1)
        col = np.full((sub.shape[0], 1), last, dtype=np.int64)
        blocks.append(np.hstack([sub, col]))
    return np.vstack(blocks)


class ConfigSpace:
    """Enumerated configuration space with generator and stationary measure.

    Configurations are indexed 0..size-1 in colexicographic order; the rank of
    a configuration is computed arithmetically from a Pascal table, so lookup
    does not need a hash map.
    """

    def __init__(self, model: ZrpModel, cap: int | None = None):
        self.model = model
        kappa = model.graph.kappa
        M = space_size(model.N, kappa)
        limit = _state_cap(cap)
        if M > limit:
            raise SpaceTooLargeError(
                f"configuration space has {M} states, above the cap {limit}; "
                f"raise the cap or the {_CAP_ENV} variable to proceed"
            )
        self.size = M
        self.configs = compositions(model.N, kappa)
        # Pascal table rows 0..N+kappa, columns 0..kappa-1; every value that
        # the rank formula touches is bounded by the state count, so int64
        # arithmetic is exact.
        n_rows = model.N + kappa + 1
        T = np.zeros((n_rows, kappa), dtype=np.int64)
        T[:, 0] = 1
        for k in range(1, kappa):
            T[k:, k] = np.cumsum(T[k - 1 :, k - 1])[:-1]
        self._pascal = T
        self._build_generator()

    # -- indexing ---------------------------------------------------------

    def rank(self, etas) -> np.ndarray | int:
        """Colexicographic index of one or many configurations."""
        arr = np.asarray(etas, dtype=np.int64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        kappa = arr.shape[1]
        m = np.cumsum(arr, axis=1)
        T = self._pascal
        out = np.zeros(arr.shape[0], dtype=np.int64)
        for J in range(1, kappa):
            out += T[m[:, J] + J, J] - T[m[:, J] - arr[:, J] + J, J]
        return int(out[0]) if single else out

    def config(self, index: int) -> np.ndarray:
        return self.configs[index]

    @cached_property
    def points(self) -> np.ndarray:
        """Embedded configurations eta / N on the simplex."""
        return self.configs.astype(float) / self.model.N

    # -- measure ----------------------------------------------------------

    @cached_property
    def log_weight(self) -> np.ndarray:
        """log(1 / a(eta)) per configuration."""
        occ = np.maximum(self.configs, 1).astype(float)
        return -self.model.alpha * np.sum(np.log(occ), axis=1)

    @cached_property
    def rho(self) -> np.ndarray:
        lw = self.log_weight
        return np.exp(lw - logsumexp(lw))

    @cached_property
    def Z(self) -> float:
        """Partition function N^alpha * sum 1/a(eta)."""
        return float(
            np.exp(self.model.alpha * np.log(self.model.N) + logsumexp(self.log_weight))
        )

    # -- generator --------------------------------------------------------

    def _build_generator(self):
        model = self.model
        kappa = model.graph.kappa
        rows, cols, vals = [], [], []
        all_idx = np.arange(self.size, dtype=np.int64)
        for x in range(kappa):
            movable = self.configs[:, x] >= 1
            if not movable.any():
                continue
            g_here = stickiness(self.configs[movable, x], model.alpha)
            src = all_idx[movable]
            for y in range(kappa):
                rate = model.graph.rates[x, y]
                if y == x or rate <= 0:
                    continue
                target = self.configs[movable].copy()
                target[:, x] -= 1
                target[:, y] += 1
                rows.append(src)
                cols.append(self.rank(target))
                vals.append(g_here * rate)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        off = sparse.coo_matrix((vals, (rows, cols)), shape=(self.size, self.size))
        off = off.tocsr()
        diag = np.asarray(off.sum(axis=1)).ravel()
        self.generator = (off - sparse.diags(diag)).tocsr()
        self._off_diagonal = off

    @cached_property
    def generator_adjoint(self) -> sparse.csr_matrix:
        """Adjoint in L^2(rho): D_rho^{-1} L^T D_rho.

        Coincides with the generator of the model with transposed site rates;
        equals the generator itself exactly when the site graph is reversible.
        """
        rho = self.rho
        D = sparse.diags(rho)
        Dinv = sparse.diags(1.0 / rho)
        return (Dinv @ self.generator.T @ D).tocsr()

    @property
    def jump_rates(self) -> sparse.csr_matrix:
        """Off-diagonal part of the generator: jump rates between configurations."""
        return self._off_diagonal

    def holding_rates(self) -> np.ndarray:
        """Total jump rate out of each configuration."""
        return np.asarray(self._off_diagonal.sum(axis=1)).ravel()


def enumerate_space(model: ZrpModel, cap: int | None = None) -> ConfigSpace:
    return ConfigSpace(model, cap=cap)


# -- wells ----------------------------------------------------------------


def default_well_radius(N: int, kappa: int) -> int:
    """ell_N = floor(N^(1/(2(kappa-1)))), the radius under which the wells
    are provably metastable."""
    return int(math.floor(N ** (1.0 / (2 * (kappa - 1)))))


@dataclass(frozen=True)
class WellPartition:
    ell: int
    wells: tuple[np.ndarray, ...]  # index arrays, one per site
    interior: np.ndarray

    def well_mass(self, space: ConfigSpace) -> np.ndarray:
        return np.array([space.rho[w].sum() for w in self.wells])

    def interior_mass(self, space: ConfigSpace) -> float:
        return float(space.rho[self.interior].sum())


def wells(space: ConfigSpace, ell: int | None = None) -> WellPartition:
    """Split the configuration space into per-site wells and the interior.

    The well of site x holds every configuration with eta_x >= N - ell.
    Disjointness requires 2 ell < N.
    """
    N = space.model.N
    kappa = space.model.graph.kappa
    if ell is None:
        ell = default_well_radius(N, kappa)
    ell = int(ell)
    if ell < 0:
        raise ValueError("well radius must be nonnegative")
    if 2 * ell >= N:
        raise ValueError(f"well radius {ell} >= N/2 would make the wells overlap")
    idx = np.arange(space.size)
    well_list = []
    covered = np.zeros(space.size, dtype=bool)
    for x in range(kappa):
        mask = space.configs[:, x] >= N - ell
        well_list.append(idx[mask])
        covered |= mask
    return WellPartition(ell=ell, wells=tuple(well_list), interior=idx[~covered])


# -- reference configurations ---------------------------------------------


def condensed_config(N: int, kappa: int, site: int = 0) -> np.ndarray:
    """All N particles on one site: the center of that site's well."""
    if not 0 <= site < kappa:
        raise ValueError("site index out of range")
    eta = np.zeros(kappa, dtype=np.int64)
    eta[site] = N
    return eta


def balanced_config(N: int, kappa: int) -> np.ndarray:
    """Most balanced configuration; leftover particles go to the lowest
    site indices."""
    base, extra = divmod(N, kappa)
    eta = np.full(kappa, base, dtype=np.int64)
    eta[:extra] += 1
    return eta


# -- model IO -------------------------------------------------------------


def load_model(path) -> ZrpModel:
    with open(path) as fh:
        doc = json.load(fh)
    return model_from_dict(doc)


def model_from_dict(doc: dict) -> ZrpModel:
    return ZrpModel(
        graph=graph_from_dict(doc["graph"]),
        alpha=float(doc["alpha"]),
        N=int(doc["N"]),
    )


def save_model(model: ZrpModel, path):
    doc = {
        "graph": {
            "sites": list(model.graph.labels),
            "rates": [
                [model.graph.labels[x], model.graph.labels[y], model.graph.rates[x, y]]
                for x in range(model.graph.kappa)
                for y in range(model.graph.kappa)
                if model.graph.rates[x, y] > 0
            ],
        },
        "alpha": model.alpha,
        "N": model.N,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")

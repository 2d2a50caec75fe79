"""Potential theory and rate functions for arbitrary finite Markov chains.

These helpers operate on a raw generator (dense ndarray or scipy sparse
matrix, off-diagonal entries = jump rates, rows summing to zero) together
with an explicit stationary or reference measure where one is needed.  The
site-graph and configuration-space modules both delegate here, so the same
linear algebra backs the small reduced chains and the full particle systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import minimize
from scipy.sparse.linalg import bicgstab, gmres, spsolve

__all__ = [
    "RateResult",
    "VariationalError",
    "stationary_distribution",
    "committor",
    "expected_hitting_times",
    "chain_dirichlet_form",
    "chain_capacity",
    "rate_reversible_chain",
    "rate_variational_chain",
    "resolvent_solve",
]

_ITERATION_CAP = 100_000
_H_BOUND = 40.0


class VariationalError(RuntimeError):
    """Raised when the variational ascent fails to certify convergence.

    Carries the best value found and the gradient norm at that point.
    """

    def __init__(self, value: float, grad_norm: float):
        super().__init__(
            f"variational ascent did not converge: value={value!r}, "
            f"gradient norm={grad_norm!r}"
        )
        self.value = value
        self.grad_norm = grad_norm


@dataclass(frozen=True)
class RateResult:
    """Outcome of the variational rate evaluation."""

    value: float
    potential: np.ndarray  # maximizing u = exp(h), anchored u[0] = 1
    grad_norm: float
    iterations: int


def _is_sparse(L) -> bool:
    return sparse.issparse(L)


def _solve(Lsub, rhs):
    if _is_sparse(Lsub):
        out = spsolve(Lsub.tocsc(), rhs)
        return np.atleast_1d(out)
    return np.linalg.solve(Lsub, rhs)


def resolvent_solve(L, lam: float, rhs, tol: float = 1e-10, dense_cutoff: int = 20_000):
    """Solve (lam - L) x = rhs with residual below tol (relative to |rhs|).

    Small systems go through the dense solver.  Large sparse ones use
    BiCGStab with Jacobi preconditioning and a GMRES retry; a residual that
    still misses the tolerance raises rather than returning a bad vector.
    """
    if lam <= 0:
        raise ValueError("resolvent parameter must be positive")
    n = L.shape[0]
    rhs = np.asarray(rhs, dtype=float)
    scale = max(1.0, float(np.max(np.abs(rhs))))

    if not _is_sparse(L):
        return np.linalg.solve(lam * np.eye(n) - L, rhs)

    A = (lam * sparse.identity(n, format="csr") - L).tocsr()
    if n < dense_cutoff:
        return np.linalg.solve(A.toarray(), rhs)

    M = sparse.diags(1.0 / A.diagonal())
    for solver in (bicgstab, gmres):
        x, _ = solver(A, rhs, M=M, rtol=tol * 1e-3, atol=0.0, maxiter=20 * n)
        residual = float(np.max(np.abs(A @ x - rhs)))
        if residual <= tol * scale:
            return x
    raise RuntimeError(
        f"resolvent solve did not reach residual {tol:g} (got {residual:g})"
    )


def stationary_distribution(L) -> np.ndarray:
    """Probability vector pi with pi L = 0.

    Replaces the last balance equation with the normalization constraint, so
    it needs an irreducible generator.
    """
    n = L.shape[0]
    if _is_sparse(L):
        A = L.T.tolil()
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = spsolve(A.tocsc(), b)
    else:
        A = np.array(L.T, dtype=float)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
    pi = np.maximum(pi, 0.0)
    return pi / pi.sum()


def _submatrix(L, rows, cols):
    if _is_sparse(L):
        return L.tocsr()[rows, :].tocsc()[:, cols]
    return L[np.ix_(rows, cols)]


def committor(L, hit, avoid) -> np.ndarray:
    """P[reach `hit` before `avoid`] for every state.

    `hit` and `avoid` are disjoint index arrays.  The result is 1 on `hit`,
    0 on `avoid`, and harmonic in between.
    """
    n = L.shape[0]
    hit = np.asarray(hit, dtype=int)
    avoid = np.asarray(avoid, dtype=int)
    if np.intersect1d(hit, avoid).size:
        raise ValueError("hit and avoid sets must be disjoint")
    h = np.zeros(n)
    h[hit] = 1.0
    mask = np.ones(n, dtype=bool)
    mask[hit] = False
    mask[avoid] = False
    interior = np.nonzero(mask)[0]
    if interior.size:
        Lii = _submatrix(L, interior, interior)
        Lib = _submatrix(L, interior, hit)
        rhs = -np.asarray(Lib.sum(axis=1)).ravel() if _is_sparse(L) else -Lib.sum(axis=1)
        h[interior] = _solve(Lii, rhs)
    return h


def expected_hitting_times(L, target) -> np.ndarray:
    """E[time to reach `target`] for every state (zero on the target)."""
    n = L.shape[0]
    target = np.asarray(target, dtype=int)
    t = np.zeros(n)
    mask = np.ones(n, dtype=bool)
    mask[target] = False
    interior = np.nonzero(mask)[0]
    if interior.size:
        Lii = _submatrix(L, interior, interior)
        t[interior] = _solve(Lii, -np.ones(interior.size))
    return t


def chain_dirichlet_form(L, m, f, h=None) -> float:
    """(1/2) sum_{i != j} m_i L_ij (f_j - f_i)(h_j - h_i)."""
    f = np.asarray(f, dtype=float)
    h = f if h is None else np.asarray(h, dtype=float)
    m = np.asarray(m, dtype=float)
    if _is_sparse(L):
        C = L.tocoo()
        off = C.row != C.col
        i, j, w = C.row[off], C.col[off], C.data[off]
        return float(0.5 * np.sum(m[i] * w * (f[j] - f[i]) * (h[j] - h[i])))
    df = f[None, :] - f[:, None]
    dh = h[None, :] - h[:, None]
    R = np.array(L, dtype=float)
    np.fill_diagonal(R, 0.0)
    return float(0.5 * np.sum(m[:, None] * R * df * dh))


def chain_capacity(L, m, A, B) -> float:
    """Capacity between disjoint state sets A and B under reference measure m."""
    f = committor(L, hit=np.asarray(B, int), avoid=np.asarray(A, int))
    return chain_dirichlet_form(L, m, f)


def rate_reversible_chain(L, pi, nu) -> float:
    """Closed-form occupation rate for a reversible chain.

    Equals (1/2) sum over ordered transitions of
    pi_i L_ij (sqrt(nu_i/pi_i) - sqrt(nu_j/pi_j))^2, which is the Dirichlet
    energy of sqrt(d nu / d pi).  Exact up to floating point; only valid
    when (L, pi) is in detailed balance.
    """
    pi = np.asarray(pi, dtype=float)
    nu = np.asarray(nu, dtype=float)
    s = np.sqrt(nu / pi)
    return chain_dirichlet_form(L, pi, s)


def _functional_and_grad(L, nu, h):
    """F(h) = -sum_x nu_x (L e^h)_x / e^{h_x} and its gradient; F is concave."""
    E = np.exp(h)
    LE = np.asarray(L @ E).ravel()
    ratio = LE / E
    F = -float(nu @ ratio)
    w = nu / E
    LTw = np.asarray(L.T @ w).ravel()
    grad = -E * LTw + nu * ratio
    return F, grad


def rate_variational_chain(L, nu, tol: float = 1e-9) -> RateResult:
    """Occupation rate by direct maximization of -integral (L u)/u d nu.

    Parametrizes u = exp(h) (the functional is concave in h), anchors
    h[0] = 0, and ascends with a quasi-Newton line search.  Convergence is
    certified by the gradient norm; failure raises VariationalError with the
    best value found.
    """
    n = L.shape[0]
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (n,):
        raise ValueError("measure size does not match the generator")
    if np.any(nu < 0) or abs(nu.sum() - 1.0) > 1e-8:
        raise ValueError("nu must be a probability vector")

    def objective(x):
        h = np.concatenate(([0.0], x))
        F, grad = _functional_and_grad(L, nu, h)
        return -F, -grad[1:]

    x0 = np.zeros(n - 1)
    res = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(-_H_BOUND, _H_BOUND)] * (n - 1),
        options={"maxiter": _ITERATION_CAP, "ftol": 1e-17, "gtol": tol * 1e-2},
    )
    h = np.concatenate(([0.0], res.x))
    F, grad = _functional_and_grad(L, nu, h)
    # The anchored coordinate is a gauge choice; measure convergence on the
    # free coordinates, ignoring components pressing against the box.
    free = grad[1:].copy()
    at_bound = (np.abs(res.x) >= _H_BOUND - 1e-9) & (np.sign(free) == np.sign(res.x))
    free[at_bound] = 0.0
    grad_norm = float(np.max(np.abs(free))) if free.size else 0.0
    iterations = int(res.nit)
    if grad_norm > tol:
        raise VariationalError(F, grad_norm)
    return RateResult(value=F, potential=np.exp(h), grad_norm=grad_norm, iterations=iterations)

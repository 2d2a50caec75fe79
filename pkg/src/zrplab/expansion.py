"""Recovery sequences for the two-scale expansion of the occupation rate.

The rate function of the particle system splits, as N grows, into a
diffusive part visible at scale N^2 and a metastable part visible at scale
N^(1+alpha); below, between, and above those scales the rescaled rate
degenerates to 0 or infinity.  Each constructor here builds a sequence of
measures whose rescaled rates converge to the corresponding limit value:
exponential tilts of the stationary measure for vertex-supported targets,
cutoff test functions on simplex faces for diffusive targets, and shrinking
bumps for the trivial scales.  expansion_table() assembles the whole picture
into one report per (target measure, time scale) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import root

from .chains import resolvent_solve, stationary_distribution
from .rates import chain_rate, limiting_chain, rate_reversible, rate_variational
from .simplexfn import (
    FaceComponent,
    SimplexGrid,
    TestFunction,
    face_integral,
    face_measure_rate,
    normalized,
    product_bump,
    simplex_grid,
)
from .sitegraph import SiteGraph, harmonic_extension
from .zrp import (
    ConfigSpace,
    limiting_partition_function,
    occupancy_series,
    wells,
)

__all__ = [
    "RecoveryStep",
    "RecoverySequence",
    "stationary_sequence",
    "tilt_potential",
    "tilted_recovery",
    "wn_recovery",
    "default_cutoff_gamma",
    "bump_recovery",
    "Extrapolation",
    "richardson",
    "lipschitz_dictionary",
    "bounded_lipschitz_distance",
    "SCALE_CLASSES",
    "scale_factor",
    "ExpansionTarget",
    "scale_targets",
    "build_recovery",
    "GammaReport",
    "expansion_table",
    "default_targets",
]

_STATIONARITY_TOL = 1e-10


# -- sequences -------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryStep:
    """One ladder entry: the measure nu on the configuration space of size N,
    plus constructor-specific diagnostics."""

    N: int
    space: ConfigSpace
    nu: np.ndarray
    info: dict


@dataclass(frozen=True)
class RecoverySequence:
    """Ladder of measures approaching a target measure on the simplex.

    The target is carried as a weighted point cloud so that weak convergence
    of the pushforwards can be measured uniformly for all constructors.
    """

    kind: str
    steps: tuple[RecoveryStep, ...]
    target_points: np.ndarray
    target_weights: np.ndarray

    def distances(self, seed: int = 20) -> np.ndarray:
        """Bounded-Lipschitz distance of each pushforward to the target."""
        return np.array(
            [
                bounded_lipschitz_distance(
                    s.space.points, s.nu, self.target_points, self.target_weights, seed=seed
                )
                for s in self.steps
            ]
        )


def _check_family(spaces) -> list[ConfigSpace]:
    spaces = list(spaces)
    if not spaces:
        raise ValueError("need a nonempty ladder of configuration spaces")
    Ns = [sp.model.N for sp in spaces]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("ladder must be strictly increasing in N")
    g0 = spaces[0].model.graph
    for sp in spaces[1:]:
        if sp.model.graph.kappa != g0.kappa or sp.model.alpha != spaces[0].model.alpha:
            raise ValueError("all spaces must share the site graph and alpha")
    return spaces


def _vertices(kappa: int) -> np.ndarray:
    return np.eye(kappa)


def stationary_sequence(spaces) -> RecoverySequence:
    """nu_N = rho_N: rate exactly zero at every scale, pushforwards
    converging to the uniform vertex measure."""
    spaces = _check_family(spaces)
    kappa = spaces[0].model.graph.kappa
    steps = tuple(
        RecoveryStep(N=sp.model.N, space=sp, nu=sp.rho, info={}) for sp in spaces
    )
    return RecoverySequence(
        kind="stationary",
        steps=steps,
        target_points=_vertices(kappa),
        target_weights=np.full(kappa, 1.0 / kappa),
    )


# -- tilted construction ---------------------------------------------------


def tilt_potential(chain: SiteGraph, mu, tol: float = 1e-12) -> np.ndarray:
    """Site potential h making mu stationary for the exponentially tilted
    chain with rates R(x,y) e^{h(y) - h(x)}.

    For a symmetric chain the answer is h = (1/2) log mu up to an additive
    constant; that also seeds the general nonlinear solve.  Returned with
    h[0] = 0.
    """
    mu = np.asarray(mu, dtype=float)
    kappa = chain.kappa
    if mu.shape != (kappa,):
        raise ValueError("mu must assign a mass to every site")
    if np.any(mu <= 0) or abs(mu.sum() - 1.0) > 1e-8:
        raise ValueError("tilting needs strictly positive masses summing to one")
    R = chain.rates

    def gauge(hfree):
        return np.concatenate(([0.0], hfree))

    def residual(hfree):
        h = gauge(hfree)
        flow = mu[:, None] * R * np.exp(h[None, :] - h[:, None])
        return (flow.sum(axis=0) - flow.sum(axis=1))[1:]

    h0 = 0.5 * np.log(mu * kappa)
    sol = root(residual, (h0 - h0[0])[1:], tol=tol)
    h = gauge(sol.x)
    if np.max(np.abs(residual(sol.x))) > 1e-9:
        raise RuntimeError("tilt potential solve did not converge")
    return h


def _tilted_jump_rates(space: ConfigSpace, H: np.ndarray):
    Q = space.jump_rates
    return Q.multiply(1.0 / H[:, None]).multiply(H[None, :]).tocsr()


def _stationarity_residual(space: ConfigSpace, H: np.ndarray, nu: np.ndarray) -> float:
    Qt = _tilted_jump_rates(space, H)
    out_rates = np.asarray(Qt.sum(axis=1)).ravel()
    return float(np.max(np.abs(Qt.T @ nu - out_rates * nu)))


def tilted_recovery(
    spaces,
    mu_sites,
    lam: float | None = None,
    max_doublings: int = 8,
) -> RecoverySequence:
    """Vertex-target recovery through a resolvent-regularized tilt.

    mu_sites is a strictly positive site measure, or a callable N -> measure
    for targets approached along the ladder.  Per N the construction tilts
    the accelerated particle system by the solution H of
    (lam - N^(1+alpha) L) H = sum_x k(x) 1{well x},  k = (lam - chain) e^h,
    and returns the stationary measure of the tilted process, which for
    reversible models is rho H^2 renormalized.  If H fails to be positive,
    lam is doubled and the solve retried.
    """
    spaces = _check_family(spaces)
    model0 = spaces[0].model
    kappa = model0.graph.kappa
    chain = limiting_chain(model0.graph, model0.alpha)

    steps = []
    mu_top = None
    for sp in spaces:
        N = sp.model.N
        mu = np.asarray(mu_sites(N) if callable(mu_sites) else mu_sites, dtype=float)
        mu_top = mu
        h = tilt_potential(chain, mu)
        u = np.exp(h)
        drift = float(np.max(np.abs((chain.generator @ u) / u)))
        lamN = lam if lam is not None else 2.0 + 1.2 * drift
        wp = wells(sp)
        accel = N ** (1.0 + sp.model.alpha)

        H = None
        for _ in range(max_doublings + 1):
            k = lamN * u - chain.generator @ u
            K = np.zeros(sp.size)
            for x, w in enumerate(wp.wells):
                K[w] = k[x]
            cand = resolvent_solve(accel * sp.generator, lamN, K)
            if np.all(cand > 0):
                H = cand
                break
            lamN *= 2.0
        if H is None:
            raise RuntimeError(
                f"tilt solution not positive at N={N} after {max_doublings} "
                f"doublings (min {cand.min():g})"
            )

        if sp.model.graph.reversible:
            nu = sp.rho * H**2
            nu /= nu.sum()
        else:
            Qt = _tilted_jump_rates(sp, H)
            out_rates = np.asarray(Qt.sum(axis=1)).ravel()
            nu = stationary_distribution(Qt - sparse.diags(out_rates))
        residual = _stationarity_residual(sp, H, nu)
        if residual > _STATIONARITY_TOL:
            raise RuntimeError(
                f"tilted measure fails stationarity at N={N}: residual {residual:g}"
            )
        info = {
            "lam": lamN,
            "H_min": float(H.min()),
            "stationarity_residual": residual,
            "well_masses": np.array([nu[w].sum() for w in wp.wells]),
            "interior_mass": float(nu[wp.interior].sum()),
        }
        if sp.model.graph.reversible:
            # exact identity for the rescaled rate of nu = rho H^2 / |H|^2
            info["resolvent_identity"] = float(-lamN + nu @ (K / H))
        steps.append(RecoveryStep(N=N, space=sp, nu=nu, info=info))

    return RecoverySequence(
        kind="tilted",
        steps=tuple(steps),
        target_points=_vertices(kappa),
        target_weights=mu_top,
    )


# -- face construction -----------------------------------------------------


def default_cutoff_gamma(alpha: float) -> float:
    """Cutoff exponent satisfying 2 gamma < (1 - gamma)(alpha - 1) with room."""
    return min(0.2, (alpha - 1.0) / (alpha + 3.0) / 1.5)


def _cutoff(t: np.ndarray, threshold: float) -> np.ndarray:
    """Piecewise-linear cutoff: 1 below the threshold, 0 beyond twice it."""
    return np.clip(2.0 - t / threshold, 0.0, 1.0)


def wn_recovery(
    spaces,
    A,
    v: TestFunction,
    gamma: float | None = None,
    grid: SimplexGrid | None = None,
) -> RecoverySequence:
    """Face-target recovery: W_N = cutoff(off-face mass) * v(face projection).

    nu_N is W_N^2 rho_N renormalized; its rescaled rate at scale N^2
    approaches the face energy of v.  The construction also records the
    normalization diagnostic: the rescaled mass of W_N^2 under rho_N against
    the face integral of v^2, whose ratio should drift to one.
    """
    spaces = _check_family(spaces)
    model0 = spaces[0].model
    alpha = model0.alpha
    kappa = model0.graph.kappa
    A = tuple(sorted(set(int(x) for x in A)))
    if len(A) < 2:
        raise ValueError("face recovery needs at least two sites in the face")
    B = tuple(x for x in range(kappa) if x not in A)
    if gamma is None:
        gamma = default_cutoff_gamma(alpha)
    if not 0 < gamma < 1 or not 2 * gamma < (1 - gamma) * (alpha - 1):
        raise ValueError(
            "cutoff exponent must satisfy 0 < gamma < 1 and "
            "2 gamma < (1 - gamma)(alpha - 1)"
        )
    if grid is None:
        grid = simplex_grid(len(A), 400)
    v_mass = face_integral(v, grid, alpha)
    if v_mass <= 0:
        raise ValueError("test function vanishes on its face")
    U = harmonic_extension(model0.graph, A)
    factor_const = (
        limiting_partition_function(kappa, alpha)
        * math.factorial(len(A) - 1)
        / occupancy_series(alpha) ** len(B)
    )

    steps = []
    for sp in spaces:
        N = sp.model.N
        margin_loss = 2.0 * N ** (-gamma) if B else 0.0
        eps_prime = v.margin - margin_loss
        if eps_prime <= 0:
            raise ValueError(
                f"support margin {v.margin:.3g} too small against the cutoff "
                f"width 2 N^-gamma = {margin_loss:.3g} at N={N}"
            )
        proj = sp.points @ U.T
        W = v(proj)
        if B:
            off_face = sp.configs[:, list(B)].sum(axis=1).astype(float)
            W = W * _cutoff(off_face, N ** (1.0 - gamma))
        support = W > 0
        if not support.any():
            raise ValueError(f"no configuration carries the face function at N={N}")
        if np.any(sp.configs[np.ix_(support, list(A))] <= eps_prime * N):
            raise RuntimeError(
                "support leaked into the boundary margin; the cutoff "
                "construction is inconsistent"
            )
        mass = float(np.sum(W**2 * sp.rho))
        rescale = factor_const * N ** (len(A) * alpha) / (N**alpha * N ** (len(A) - 1))
        nu = W**2 * sp.rho
        nu /= nu.sum()
        steps.append(
            RecoveryStep(
                N=N,
                space=sp,
                nu=nu,
                info={
                    "gamma": gamma,
                    "support_size": int(support.sum()),
                    "mass_ratio": mass * rescale / v_mass,
                    "cutoff_engaged": bool(B) and bool(np.any(_cutoff(off_face, N ** (1.0 - gamma)) < 1)),
                },
            )
        )

    # target cloud: the face density v^2 d(lambda_A), on the kept grid points
    keep = grid.points.min(axis=1) > v.margin
    xi = grid.points[keep]
    w = (
        v(xi) ** 2
        * np.prod(xi, axis=1) ** (-alpha)
        * grid.weights[keep]
    )
    w /= w.sum()
    cloud = np.zeros((xi.shape[0], kappa))
    cloud[:, list(A)] = xi
    return RecoverySequence(
        kind="face", steps=tuple(steps), target_points=cloud, target_weights=w
    )


# -- bump construction -----------------------------------------------------


def bump_recovery(spaces, xi0, ell=None, theta=None) -> RecoverySequence:
    """Point-target recovery by a bump of width ell_N around xi0.

    Psi_N(eta) = max(1 - |eta - N xi0|_1 / ell_N, 0) and nu_N is Psi_N^2
    rho_N renormalized.  Valid for scales theta_N with sqrt(theta_N) well
    below ell_N; pass the scale to have the precondition checked per rung.
    """
    spaces = _check_family(spaces)
    kappa = spaces[0].model.graph.kappa
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (kappa,) or np.any(xi0 < 0) or abs(xi0.sum() - 1.0) > 1e-9:
        raise ValueError("xi0 must lie on the simplex")
    if ell is None:
        ell = lambda N: int(N**0.75)
    elif not callable(ell):
        fixed = int(ell)
        ell = lambda N: fixed

    prev_ell = 0
    steps = []
    for sp in spaces:
        N = sp.model.N
        ellN = int(ell(N))
        if not 0 < ellN < N:
            raise ValueError(f"bump width {ellN} invalid at N={N}")
        if ellN < prev_ell:
            raise ValueError("bump width must not shrink along the ladder")
        if theta is not None and math.sqrt(theta(N)) >= ellN:
            raise ValueError(
                f"scale too fast for the bump: sqrt(theta)={math.sqrt(theta(N)):.3g} "
                f">= ell={ellN} at N={N}"
            )
        prev_ell = ellN
        distance = np.abs(sp.configs - N * xi0[None, :]).sum(axis=1)
        psi = np.maximum(1.0 - distance / ellN, 0.0)
        if not np.any(psi > 0):
            raise ValueError(f"empty bump at N={N}")
        nu = psi**2 * sp.rho
        total = nu.sum()
        if total <= 0:
            raise ValueError(f"bump carries no stationary mass at N={N}")
        nu /= total
        ball = psi > 0
        support_sites = int(np.sum(xi0 > 1e-12))
        ball_mass = float(sp.rho[ball].sum())
        steps.append(
            RecoveryStep(
                N=N,
                space=sp,
                nu=nu,
                info={
                    "ell": ellN,
                    "ball_mass": ball_mass,
                    "scaled_ball_mass": ball_mass * (N**sp.model.alpha / ellN) ** (support_sites - 1),
                },
            )
        )
    return RecoverySequence(
        kind="bump",
        steps=tuple(steps),
        target_points=xi0[None, :],
        target_weights=np.array([1.0]),
    )


# -- extrapolation and weak convergence ------------------------------------


@dataclass(frozen=True)
class Extrapolation:
    estimate: float
    error_bar: float
    exponent: float | None


def richardson(values) -> Extrapolation:
    """Limit estimate from the last three rungs of a doubling ladder.

    Fits value_k = limit + C 2^(-c k); when the decay ratio is not
    geometric the last value is returned with the last gap as the error bar,
    never pretending more accuracy than the data supports.
    """
    v = [float(x) for x in values]
    if len(v) < 3:
        last = v[-1]
        bar = abs(v[-1] - v[-2]) if len(v) == 2 else math.inf
        return Extrapolation(estimate=last, error_bar=bar, exponent=None)
    v1, v2, v3 = v[-3:]
    d1, d2 = v1 - v2, v2 - v3
    if d2 == 0:
        return Extrapolation(estimate=v3, error_bar=0.0, exponent=None)
    ratio = d1 / d2
    if ratio <= 1.0:
        return Extrapolation(estimate=v3, error_bar=abs(d2), exponent=None)
    correction = d2 / (ratio - 1.0)
    return Extrapolation(
        estimate=v3 - correction,
        error_bar=abs(correction),
        exponent=math.log2(ratio),
    )


def lipschitz_dictionary(kappa: int, size: int = 200, seed: int = 20):
    """Fixed dictionary of bounded 1-Lipschitz probe functions on the simplex."""
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 4.0, size=(size, kappa))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=size)
    scales = np.maximum(1.0, np.abs(W).sum(axis=1))
    return W, phases, scales


def bounded_lipschitz_distance(
    points_p, weights_p, points_q, weights_q, seed: int = 20, size: int = 200
) -> float:
    """Dudley-style distance: max dictionary-function mean discrepancy."""
    P = np.atleast_2d(np.asarray(points_p, dtype=float))
    Q = np.atleast_2d(np.asarray(points_q, dtype=float))
    wp = np.asarray(weights_p, dtype=float)
    wq = np.asarray(weights_q, dtype=float)
    W, phases, scales = lipschitz_dictionary(P.shape[1], size=size, seed=seed)
    fp = np.cos(P @ W.T + phases) / scales
    fq = np.cos(Q @ W.T + phases) / scales
    return float(np.max(np.abs(wp @ fp - wq @ fq)))


# -- the assembled table ---------------------------------------------------

SCALE_CLASSES = (
    "sub-diffusive",
    "diffusive",
    "intermediate",
    "metastable",
    "super-metastable",
)


def scale_factor(scale: str, N: int, alpha: float) -> float:
    """theta_N for each scale class."""
    n = float(N)
    if scale == "sub-diffusive":
        return n
    if scale == "diffusive":
        return n**2
    if scale == "intermediate":
        return n ** ((3.0 + alpha) / 2.0)
    if scale == "metastable":
        return n ** (1.0 + alpha)
    if scale == "super-metastable":
        return n ** (2.0 + alpha)
    raise ValueError(f"unknown scale {scale!r}")


@dataclass(frozen=True)
class ExpansionTarget:
    """A simplex measure split into face components.

    Singleton faces carry plain vertex masses; larger faces carry a
    normalized square-root density with its quadrature grid.
    """

    label: str
    components: tuple[FaceComponent, ...]
    gamma: float | None = None
    tilt_lambda: float | None = None

    def vertex_masses(self, kappa: int) -> np.ndarray | None:
        """Masses on the vertex embeddings, or None if a face carries mass."""
        mu = np.zeros(kappa)
        for c in self.components:
            if len(c.sites) != 1:
                return None
            mu[c.sites[0]] += c.weight
        return mu


def scale_targets(graph: SiteGraph, alpha: float, target: ExpansionTarget) -> dict:
    """Limit value of the rescaled rate for each scale class."""
    kappa = graph.kappa
    chain = limiting_chain(graph, alpha)
    K = face_measure_rate(graph, alpha, target.components)
    mu = target.vertex_masses(kappa)
    if mu is None:
        J = math.inf
    else:
        J = chain_rate(chain, mu)
    stationary = mu is not None and J <= 1e-12
    return {
        "sub-diffusive": 0.0,
        "diffusive": K,
        "intermediate": 0.0 if K <= 1e-12 else math.inf,
        "metastable": J,
        "super-metastable": 0.0 if stationary else math.inf,
    }


def _mix(seqs, weights) -> RecoverySequence:
    if len(seqs) == 1:
        return seqs[0]
    steps = []
    for rungs in zip(*(s.steps for s in seqs)):
        nu = sum(w * r.nu for w, r in zip(weights, rungs))
        steps.append(
            RecoveryStep(
                N=rungs[0].N,
                space=rungs[0].space,
                nu=nu,
                info={"pieces": [r.info for r in rungs]},
            )
        )
    points = np.vstack([s.target_points for s in seqs])
    w = np.concatenate([wt * s.target_weights for wt, s in zip(weights, seqs)])
    return RecoverySequence(
        kind="mixture",
        steps=tuple(steps),
        target_points=points,
        target_weights=w,
    )


def build_recovery(spaces, target: ExpansionTarget) -> RecoverySequence:
    """Choose and build the recovery sequence suited to the target's support."""
    spaces = _check_family(spaces)
    model0 = spaces[0].model
    kappa = model0.graph.kappa
    mu = target.vertex_masses(kappa)

    if mu is not None:
        chain = limiting_chain(model0.graph, model0.alpha)
        if chain_rate(chain, mu) <= 1e-12:
            return stationary_sequence(spaces)
        if np.all(mu > 0):
            return tilted_recovery(spaces, mu, lam=target.tilt_lambda)
        # vertex target with empty sites: drift toward it along the ladder
        uniform = np.full(kappa, 1.0 / kappa)

        def drifting(N):
            eps = 1.0 / math.sqrt(N)
            return (1.0 - eps) * mu + eps * uniform

        return tilted_recovery(spaces, drifting, lam=target.tilt_lambda)

    pieces, weights = [], []
    vertex_total = 0.0
    vertex_mu = np.zeros(kappa)
    for comp in target.components:
        if len(comp.sites) == 1:
            vertex_total += comp.weight
            vertex_mu[comp.sites[0]] += comp.weight
        else:
            pieces.append(
                wn_recovery(spaces, comp.sites, comp.density_sqrt, gamma=target.gamma, grid=comp.grid)
            )
            weights.append(comp.weight)
    if vertex_total > 0:
        sub = ExpansionTarget(
            label=f"{target.label}[vertices]",
            components=tuple(
                FaceComponent(sites=(x,), weight=vertex_mu[x] / vertex_total)
                for x in range(kappa)
                if vertex_mu[x] > 0
            ),
        )
        pieces.append(build_recovery(spaces, sub))
        weights.append(vertex_total)
    return _mix(pieces, weights)


@dataclass(frozen=True)
class GammaReport:
    """Rescaled rate of one recovery sequence at one time scale."""

    scale: str
    target_label: str
    Ns: tuple[int, ...]
    values: tuple[float, ...]
    extrapolation: Extrapolation
    target: float
    distances: tuple[float, ...]


def _occupation_rate(space: ConfigSpace, nu, tol: float = 1e-9) -> float:
    if space.model.graph.reversible:
        return rate_reversible(space, nu)
    return rate_variational(space, nu, tol=tol).value


def expansion_table(
    spaces, targets, scales=SCALE_CLASSES, tol: float = 1e-9
) -> list[GammaReport]:
    """One GammaReport per (target, scale): the full expansion at desk scale.

    The unscaled rate of each recovery measure is computed once per rung and
    reused across scales, which is exact since the scales only multiply it.
    """
    spaces = _check_family(spaces)
    model0 = spaces[0].model
    reports = []
    for target in targets:
        seq = build_recovery(spaces, target)
        rates = [
            _occupation_rate(step.space, step.nu, tol=tol) for step in seq.steps
        ]
        dists = tuple(float(d) for d in seq.distances())
        limits = scale_targets(model0.graph, model0.alpha, target)
        Ns = tuple(step.N for step in seq.steps)
        for scale in scales:
            values = tuple(
                scale_factor(scale, N, model0.alpha) * r for N, r in zip(Ns, rates)
            )
            reports.append(
                GammaReport(
                    scale=scale,
                    target_label=target.label,
                    Ns=Ns,
                    values=values,
                    extrapolation=richardson(values),
                    target=limits[scale],
                    distances=dists,
                )
            )
    return reports


def default_targets(graph: SiteGraph, alpha: float, subdivisions: int = 400) -> list[ExpansionTarget]:
    """The three canonical targets: the uniform vertex measure, a single
    vertex, and an interior face density."""
    kappa = graph.kappa
    uniform = ExpansionTarget(
        label="uniform-vertices",
        components=tuple(
            FaceComponent(sites=(x,), weight=1.0 / kappa) for x in range(kappa)
        ),
    )
    single = ExpansionTarget(
        label="single-vertex",
        components=(FaceComponent(sites=(0,), weight=1.0),),
    )
    grid = simplex_grid(kappa, subdivisions)
    level = 0.09 if kappa == 2 else 0.3 * kappa ** (-float(kappa))
    v = normalized(product_bump(kappa, level=level), grid, alpha)
    face = ExpansionTarget(
        label="interior-face",
        components=(
            FaceComponent(sites=tuple(range(kappa)), weight=1.0, density_sqrt=v, grid=grid),
        ),
    )
    return [uniform, single, face]

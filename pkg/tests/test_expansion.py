import math

import numpy as np
import pytest

from zrplab.expansion import (
    ExpansionTarget,
    bounded_lipschitz_distance,
    bump_recovery,
    build_recovery,
    default_cutoff_gamma,
    default_targets,
    expansion_table,
    richardson,
    scale_factor,
    scale_targets,
    stationary_sequence,
    tilt_potential,
    tilted_recovery,
    wn_recovery,
)
from zrplab.rates import limiting_chain, rate_reversible
from zrplab.simplexfn import FaceComponent, normalized, product_bump, simplex_grid
from zrplab.sitegraph import complete_graph, two_site_graph
from zrplab.zrp import ZrpModel, enumerate_space

R_TWO_SITE = 11.342437747701133


def _ladder(Ns, kappa=2, alpha=2.0):
    g = two_site_graph() if kappa == 2 else complete_graph(kappa)
    return [enumerate_space(ZrpModel(graph=g, alpha=alpha, N=N)) for N in Ns]


# -- extrapolation ----------------------------------------------------------


def test_richardson_exact_on_geometric_decay():
    values = [5.0 + 8.0 * 2.0 ** (-k) for k in range(3)]
    ex = richardson(values)
    assert ex.estimate == pytest.approx(5.0, abs=1e-12)
    assert ex.exponent == pytest.approx(1.0, abs=1e-12)


def test_richardson_exact_on_quarter_rate():
    values = [1.0 + 4.0 ** (-k) for k in range(4)]
    ex = richardson(values)
    assert ex.estimate == pytest.approx(1.0, abs=1e-12)
    assert ex.exponent == pytest.approx(2.0, abs=1e-12)


def test_richardson_refuses_non_geometric_data():
    ex = richardson([1.0, 0.5, 0.75])
    assert ex.estimate == 0.75
    assert ex.error_bar == pytest.approx(0.25)
    assert ex.exponent is None


def test_richardson_short_and_flat_inputs():
    ex2 = richardson([2.0, 1.5])
    assert ex2.estimate == 1.5 and ex2.error_bar == 0.5
    flat = richardson([5.0, 3.0, 3.0])
    assert flat.estimate == 3.0 and flat.error_bar == 0.0


# -- tilted construction ----------------------------------------------------


def test_tilt_potential_symmetric_closed_form():
    chain = limiting_chain(two_site_graph(), 2.0)
    mu = np.array([0.7, 0.3])
    h = tilt_potential(chain, mu)
    assert h[0] == 0.0
    assert h[1] == pytest.approx(0.5 * math.log(0.3 / 0.7), abs=1e-10)


def test_tilt_potential_validation():
    chain = limiting_chain(two_site_graph(), 2.0)
    with pytest.raises(ValueError):
        tilt_potential(chain, [0.7, 0.2])
    with pytest.raises(ValueError):
        tilt_potential(chain, [1.0, 0.0])


def test_tilted_recovery_internal_identities():
    seq = tilted_recovery(_ladder([20, 40, 80, 160]), [0.7, 0.3])
    masses = []
    for step in seq.steps:
        info = step.info
        assert info["stationarity_residual"] <= 1e-10
        assert info["H_min"] > 0
        # the resolvent identity evaluates the rescaled rate exactly
        accel = step.N ** 3 * rate_reversible(step.space, step.nu)
        assert info["resolvent_identity"] == pytest.approx(accel, abs=1e-7)
        masses.append(info["interior_mass"])
    assert masses[0] > masses[1] > masses[2] > masses[3]
    top = seq.steps[-1].info
    assert top["well_masses"][0] == pytest.approx(0.7, abs=0.05)
    assert top["well_masses"][1] == pytest.approx(0.3, abs=0.05)
    assert top["interior_mass"] < 0.05


def test_tilted_recovery_rates_approach_chain_rate():
    from zrplab.rates import chain_rate

    seq = tilted_recovery(_ladder([20, 40, 80, 160]), [0.7, 0.3])
    target = chain_rate(limiting_chain(two_site_graph(), 2.0), [0.7, 0.3])
    errs = [
        abs(s.N**3 * rate_reversible(s.space, s.nu) - target) for s in seq.steps
    ]
    # convergence overshoots, so compare ends rather than demand monotonicity
    assert errs[-1] < errs[0] / 4
    assert errs[-1] < 0.01 * target


# -- face construction ------------------------------------------------------


def test_default_cutoff_gamma_value_and_constraint():
    g = default_cutoff_gamma(2.0)
    assert g == pytest.approx(2.0 / 15.0, rel=1e-12)
    assert 2 * g < (1 - g) * (2.0 - 1.0)


def test_wn_recovery_mass_ratio_drifts_to_one():
    v = product_bump(2)
    grid = simplex_grid(2, 400)
    seq = wn_recovery(_ladder([20, 40, 80, 160]), (0, 1), v, grid=grid)
    ratios = [abs(s.info["mass_ratio"] - 1.0) for s in seq.steps]
    assert ratios[0] > ratios[1] > ratios[2] > ratios[3]
    assert ratios[-1] < 0.10
    # whole-simplex face: no off-face mass, cutoff never engages
    assert not any(s.info["cutoff_engaged"] for s in seq.steps)


def test_wn_recovery_rejects_bad_cutoff_exponent():
    v = product_bump(2)
    with pytest.raises(ValueError, match="gamma"):
        wn_recovery(_ladder([20, 40]), (0, 1), v, gamma=0.9)


def test_wn_recovery_proper_face_needs_wide_margin():
    # cutoff width 2 N^-gamma dwarfs any admissible margin at desk sizes
    v = product_bump(2)
    with pytest.raises(ValueError, match="margin"):
        wn_recovery(_ladder([20, 40], kappa=3), (0, 1), v)


def test_wn_recovery_needs_face_with_two_sites():
    v = product_bump(2)
    with pytest.raises(ValueError):
        wn_recovery(_ladder([20, 40]), (0,), v)


# -- bump construction ------------------------------------------------------


def test_bump_recovery_info_and_distances():
    xi0 = np.array([0.5, 0.5])
    seq = bump_recovery(_ladder([50, 100, 200]), xi0)
    for step in seq.steps:
        assert step.info["ell"] == int(step.N**0.75)
        assert 0 < step.info["ball_mass"] < 1
        assert abs(step.nu.sum() - 1.0) < 1e-12
    d = seq.distances()
    assert d[0] > d[1] > d[2]


def test_bump_recovery_preconditions():
    spaces = _ladder([50, 100])
    with pytest.raises(ValueError):
        bump_recovery(spaces, [0.6, 0.5])
    with pytest.raises(ValueError):
        bump_recovery(spaces, [0.5, 0.5], ell=60)
    with pytest.raises(ValueError, match="scale too fast"):
        bump_recovery(spaces, [0.5, 0.5], theta=lambda N: float(N) ** 2)


# -- scales and targets -----------------------------------------------------


def test_scale_factor_values():
    assert scale_factor("sub-diffusive", 10, 2.0) == 10.0
    assert scale_factor("diffusive", 10, 2.0) == 100.0
    assert scale_factor("intermediate", 10, 2.0) == pytest.approx(10.0**2.5)
    assert scale_factor("metastable", 10, 2.0) == pytest.approx(1000.0)
    assert scale_factor("super-metastable", 10, 2.0) == pytest.approx(10000.0)
    with pytest.raises(ValueError):
        scale_factor("bogus", 10, 2.0)


def test_scale_targets_for_vertex_measures():
    g = two_site_graph()
    uniform = ExpansionTarget(
        label="u",
        components=(
            FaceComponent(sites=(0,), weight=0.5),
            FaceComponent(sites=(1,), weight=0.5),
        ),
    )
    t = scale_targets(g, 2.0, uniform)
    assert t["metastable"] == pytest.approx(0.0, abs=1e-12)
    assert t["super-metastable"] == 0.0
    assert t["diffusive"] == 0.0

    single = ExpansionTarget(label="s", components=(FaceComponent(sites=(0,), weight=1.0),))
    t = scale_targets(g, 2.0, single)
    assert t["metastable"] == pytest.approx(R_TWO_SITE, rel=1e-10)
    assert t["super-metastable"] == math.inf


def test_scale_targets_for_face_measure():
    g = two_site_graph()
    grid = simplex_grid(2, 400)
    vhat = normalized(product_bump(2), grid, 2.0)
    face = ExpansionTarget(
        label="f",
        components=(FaceComponent(sites=(0, 1), weight=1.0, density_sqrt=vhat, grid=grid),),
    )
    t = scale_targets(g, 2.0, face)
    assert t["diffusive"] == pytest.approx(31.88767744685768, rel=1e-10)
    assert t["metastable"] == math.inf
    assert t["intermediate"] == math.inf
    assert t["sub-diffusive"] == 0.0


# -- assembled table --------------------------------------------------------


def test_stationary_sequence_pushforward_converges():
    seq = stationary_sequence(_ladder([20, 40, 80]))
    d = seq.distances()
    assert d[0] > d[1] > d[2]


def test_build_recovery_dispatches_by_support():
    spaces = _ladder([20, 40, 80])
    uniform = ExpansionTarget(
        label="u",
        components=(
            FaceComponent(sites=(0,), weight=0.5),
            FaceComponent(sites=(1,), weight=0.5),
        ),
    )
    assert build_recovery(spaces, uniform).kind == "stationary"
    tilted = ExpansionTarget(
        label="t",
        components=(
            FaceComponent(sites=(0,), weight=0.7),
            FaceComponent(sites=(1,), weight=0.3),
        ),
    )
    assert build_recovery(spaces, tilted).kind == "tilted"


def test_expansion_table_structure_and_limits():
    spaces = _ladder([10, 20, 40])
    targets = default_targets(two_site_graph(), 2.0)
    reports = expansion_table(spaces, targets)
    assert len(reports) == 15
    by_key = {(r.target_label, r.scale): r for r in reports}
    assert len(by_key) == 15

    # the stationary target has zero rate at every scale
    for scale in ("sub-diffusive", "diffusive", "metastable"):
        r = by_key[("uniform-vertices", scale)]
        assert all(abs(v) < 1e-9 for v in r.values)

    # the single-vertex target aims at the limiting-chain exit rate
    r = by_key[("single-vertex", "metastable")]
    assert r.target == pytest.approx(R_TWO_SITE, rel=1e-10)
    assert all(np.isfinite(r.values))

    # the face target carries the face energy at the diffusive scale
    r = by_key[("interior-face", "diffusive")]
    assert r.target == pytest.approx(31.88767744685768, rel=1e-10)
    errs = [abs(v - r.target) for v in r.values]
    assert errs[0] > errs[-1]
    assert r.distances[0] > r.distances[-1]


def test_bounded_lipschitz_distance_basic_properties():
    p = np.array([[1.0, 0.0], [0.0, 1.0]])
    w = np.array([0.5, 0.5])
    assert bounded_lipschitz_distance(p, w, p, w) == 0.0
    q = np.array([[0.5, 0.5]])
    d = bounded_lipschitz_distance(p, w, q, np.array([1.0]))
    assert d > 0.0

import numpy as np
import pytest

from zrplab.chains import chain_capacity
from zrplab.metastability import (
    capacity_1d_exact,
    h1_surrogate,
    hitting_time_capacity_identity,
    hitting_time_stats,
    m0star_diagnostic,
    mean_jump_rates,
    partition_sum_two_sites,
    resolvent_check,
)
from zrplab.sitegraph import two_site_graph
from zrplab.zrp import ZrpModel, enumerate_space, wells


def _space(N, alpha=2.0):
    return enumerate_space(ZrpModel(graph=two_site_graph(), alpha=alpha, N=N))


def test_partition_sum_two_sites_frozen():
    assert partition_sum_two_sites(8, 2.0) == pytest.approx(6.320022675736961, rel=1e-13)
    # agrees with the generic enumerated partition function
    assert _space(8).Z == pytest.approx(partition_sum_two_sites(8, 2.0), rel=1e-12)


def test_capacity_closed_form_matches_generic_solver():
    for N in (5, 12):
        space = _space(N)
        sink = int(space.rank(np.array([0, N])))
        for eta_x in range(1, N):
            idx = int(space.rank(np.array([eta_x, N - eta_x])))
            generic = chain_capacity(space.generator, space.rho, [idx], [sink])
            closed = capacity_1d_exact(space.model, eta_x)
            assert closed == pytest.approx(generic, rel=1e-12)


def test_capacity_closed_form_validates_input():
    space = _space(6)
    with pytest.raises(ValueError):
        capacity_1d_exact(space.model, 0)
    with pytest.raises(ValueError):
        capacity_1d_exact(space.model, 7)


def test_resolvent_reduced_chain_frozen_value():
    spaces = [_space(N) for N in (20, 40)]
    rep = resolvent_check(spaces, g=[1.0, 0.0], lam=1.0)
    assert rep.reduced[0] == pytest.approx(0.521110518402221, rel=1e-12)
    assert rep.reduced[1] == pytest.approx(0.47888948159777917, rel=1e-12)
    assert rep.reduced.sum() == pytest.approx(1.0, rel=1e-12)


def test_resolvent_flattens_inside_wells():
    spaces = [_space(N) for N in (20, 40, 80)]
    rep = resolvent_check(spaces, g=[1.0, 0.0], lam=1.0)
    oscs = [row.osc for row in rep.rows]
    devs = [row.deviation for row in rep.rows]
    assert oscs[0] > oscs[1] > oscs[2]
    assert devs[0] > devs[1] > devs[2]
    assert oscs[2] < 1e-3


def test_resolvent_validation():
    spaces = [_space(20), _space(10)]
    with pytest.raises(ValueError, match="increasing"):
        resolvent_check(spaces, g=[1.0, 0.0], lam=1.0)
    with pytest.raises(ValueError):
        resolvent_check([_space(10)], g=[1.0, 0.0], lam=0.0)
    with pytest.raises(ValueError):
        resolvent_check([_space(10)], g=[1.0, 0.0, 0.0], lam=1.0)


def test_mean_jump_rates_against_dense_birth_death_oracle():
    # independent construction: the two-site system is a birth-death chain in
    # the occupancy of site 0
    N, alpha, ell = 8, 2.0, 1
    space = _space(N, alpha)
    est = mean_jump_rates(space, ell=ell)

    def a(n):
        return 1.0 if n == 0 else float(n) ** alpha

    g = lambda n: 1.0 if n <= 1 else (n / (n - 1.0)) ** alpha
    Q = np.zeros((N + 1, N + 1))
    for j in range(N + 1):
        if j >= 1:
            Q[j, j - 1] = g(j)
        if j <= N - 1:
            Q[j, j + 1] = g(N - j)
    L = Q - np.diag(Q.sum(axis=1))
    rho = np.array([1.0 / (a(j) * a(N - j)) for j in range(N + 1)])
    rho /= rho.sum()
    well0 = [j for j in range(N + 1) if j >= N - ell]
    well1 = [j for j in range(N + 1) if j <= ell]
    # committor toward well1: solve on the complement
    h = np.zeros(N + 1)
    h[well1] = 1.0
    free = [j for j in range(N + 1) if j not in well0 + well1]
    A = L[np.ix_(free, free)]
    b = -L[np.ix_(free, well1)].sum(axis=1)
    h[free] = np.linalg.solve(A, b)
    w = rho[well0] / rho[well0].sum()
    oracle = float(w @ (Q[well0] @ h))

    i0 = space.rank(np.array([[j, N - j] for j in well0]))
    assert np.allclose(np.sort(i0), np.sort(space.rank(space.configs[space.configs[:, 0] >= N - ell])))
    assert est.rates[0, 1] == pytest.approx(oracle, rel=1e-12)


def test_mean_jump_rates_symmetry_and_exit_consistency():
    est = mean_jump_rates(_space(12), ell=2)
    assert est.rates[0, 1] == pytest.approx(est.rates[1, 0], rel=1e-12)
    # with two wells, leaving the well means entering the other one
    assert est.exit_rates[0] == pytest.approx(est.rates[0, 1], rel=1e-12)
    assert est.exit_rates[1] == pytest.approx(est.rates[1, 0], rel=1e-12)


def test_mean_jump_rates_accelerated_approaches_target():
    e20 = mean_jump_rates(_space(20))
    e60 = mean_jump_rates(_space(60))
    t = e20.target[0, 1]
    assert abs(e60.accelerated[0, 1] - t) < abs(e20.accelerated[0, 1] - t)


def test_hitting_time_capacity_identity_frozen():
    space = _space(8)
    start = int(space.rank(np.array([8, 0])))
    target = [int(space.rank(np.array([0, 8])))]
    direct, via_cap = hitting_time_capacity_identity(space, start, target)
    assert direct == pytest.approx(32.48886656746032, rel=1e-12)
    assert direct == pytest.approx(via_cap, rel=1e-10)


def test_hitting_time_stats_zero_on_target():
    space = _space(6)
    target = [0, 1]
    t = hitting_time_stats(space, target)
    assert np.all(t[target] == 0.0)
    assert np.all(t[2:] > 0.0)


def test_m0star_rows_match_direct_computation():
    from zrplab.rates import rate_reversible

    spaces = [_space(N) for N in (10, 20)]
    measures = []
    for sp in spaces:
        wp = wells(sp)
        nu = np.zeros(sp.size)
        for site, frac in ((0, 0.7), (1, 0.3)):
            w = wp.wells[site]
            nu[w] = frac * sp.rho[w] / sp.rho[w].sum()
        measures.append(nu)
    rows = m0star_diagnostic(spaces, measures)
    for sp, nu, row in zip(spaces, measures, rows):
        n = sp.model.N
        assert row.N == n
        assert row.interior_mass == pytest.approx(0.0, abs=1e-14)
        assert row.scaled_rate == pytest.approx(
            n**3 * rate_reversible(sp, nu), rel=1e-10
        )
    assert all(np.isfinite(r.scaled_rate) for r in rows)


def test_h1_surrogate_shrinks_with_system_size():
    h30 = h1_surrogate(_space(30))
    h80 = h1_surrogate(_space(80))
    assert np.all(h30 > h80)
    assert np.all(h80 > 1.0)  # wells beat any single interior state

import math

import numpy as np
import pytest

from zrplab.metastability import partition_sum_two_sites
from zrplab.sitegraph import complete_graph, two_site_graph
from zrplab.zrp import (
    ConfigSpace,
    SpaceTooLargeError,
    ZrpModel,
    balanced_config,
    compositions,
    condensed_config,
    default_well_radius,
    enumerate_space,
    limiting_partition_function,
    load_model,
    occupancy_series,
    occupancy_weight,
    save_model,
    space_size,
    stickiness,
    wells,
)


def _space(kappa, N, alpha=2.0, rate=1.0):
    return enumerate_space(ZrpModel(graph=complete_graph(kappa, rate=rate), alpha=alpha, N=N))


def test_occupancy_weight_hand_values():
    assert occupancy_weight(0, 2.0) == 1.0
    assert occupancy_weight(1, 2.0) == 1.0
    assert occupancy_weight(3, 2.0) == 9.0
    assert np.allclose(occupancy_weight([0, 1, 2, 4], 1.5), [1.0, 1.0, 2.0**1.5, 8.0])


def test_stickiness_hand_values():
    assert stickiness(0, 2.0) == 1.0
    assert stickiness(1, 2.0) == 1.0
    assert stickiness(2, 2.0) == 4.0
    assert stickiness(3, 2.0) == pytest.approx(2.25, rel=1e-15)
    # ratio consistency: g(n) = a(n)/a(n-1)
    for n in range(1, 8):
        assert stickiness(n, 1.7) == pytest.approx(
            occupancy_weight(n, 1.7) / occupancy_weight(n - 1, 1.7), rel=1e-14
        )


def test_occupancy_series_closed_form():
    assert occupancy_series(2.0) == pytest.approx(1.0 + math.pi**2 / 6.0, rel=1e-14)
    assert occupancy_series(2.0, variant="shifted") == pytest.approx(
        1.0 + 1.2020569031595943, rel=1e-12
    )
    with pytest.raises(ValueError):
        occupancy_series(2.0, variant="bogus")
    with pytest.raises(ValueError):
        occupancy_series(1.0)


def test_limiting_partition_function_two_and_three_sites():
    s = 1.0 + math.pi**2 / 6.0
    assert limiting_partition_function(2, 2.0) == pytest.approx(2.0 * s, rel=1e-14)
    assert limiting_partition_function(3, 2.0) == pytest.approx(3.0 * s**2, rel=1e-14)


def test_compositions_count_and_order():
    arr = compositions(5, 3)
    assert arr.shape == (space_size(5, 3), 3)
    assert arr.shape[0] == math.comb(7, 2)
    assert np.all(arr.sum(axis=1) == 5)
    assert len({tuple(row) for row in arr}) == arr.shape[0]


def test_rank_round_trip():
    space = _space(3, 9)
    ranks = space.rank(space.configs)
    assert np.array_equal(ranks, np.arange(space.size))
    eta = np.array([2, 3, 4])
    assert np.array_equal(space.config(space.rank(eta)), eta)


def test_partition_function_matches_direct_two_site_sum():
    space = _space(2, 8)
    assert space.Z == pytest.approx(partition_sum_two_sites(8, 2.0), rel=1e-12)
    assert partition_sum_two_sites(8, 2.0) == pytest.approx(6.320022675736961, rel=1e-13)


def test_stationary_measure_solves_adjoint_equation():
    space = _space(3, 7)
    residual = np.max(np.abs(space.rho @ space.generator))
    assert residual < 1e-12
    assert space.rho.sum() == pytest.approx(1.0, abs=1e-12)


def test_detailed_balance_on_reversible_graph():
    space = _space(2, 10, alpha=2.5)
    J = space.jump_rates.tocoo()
    rho = space.rho
    flow = {}
    for i, j, v in zip(J.row, J.col, J.data):
        flow[(i, j)] = rho[i] * v
    for (i, j), f in flow.items():
        assert f == pytest.approx(flow[(j, i)], rel=1e-12)


def test_generator_rows_sum_to_zero_and_holding_rates():
    space = _space(3, 6)
    rowsum = np.asarray(space.generator.sum(axis=1)).ravel()
    assert np.max(np.abs(rowsum)) < 1e-12
    hold = space.holding_rates()
    diag = -space.generator.diagonal()
    assert np.allclose(hold, diag)


def test_adjoint_equals_generator_when_reversible():
    space = _space(2, 8)
    gap = np.abs(space.generator_adjoint - space.generator).max()
    assert gap < 1e-10


def test_state_cap_raises_with_remediation_hint():
    model = ZrpModel(graph=complete_graph(3), alpha=2.0, N=200)
    with pytest.raises(SpaceTooLargeError, match="ZRPLAB_CAP_STATES"):
        ConfigSpace(model, cap=100)


def test_state_cap_env_variable(monkeypatch):
    monkeypatch.setenv("ZRPLAB_CAP_STATES", "50")
    model = ZrpModel(graph=complete_graph(2), alpha=2.0, N=200)
    with pytest.raises(SpaceTooLargeError):
        ConfigSpace(model)
    monkeypatch.setenv("ZRPLAB_CAP_STATES", "1e6")
    assert ConfigSpace(model).size == 201


def test_model_validation():
    with pytest.raises(ValueError):
        ZrpModel(graph=two_site_graph(), alpha=1.0, N=5)
    with pytest.raises(ValueError):
        ZrpModel(graph=two_site_graph(), alpha=2.0, N=0)


def test_default_well_radius_values():
    assert default_well_radius(100, 2) == 10
    assert default_well_radius(100, 3) == 3
    assert default_well_radius(64000, 2) == 252


def test_wells_partition_the_space():
    space = _space(3, 12)
    wp = wells(space)
    counts = np.zeros(space.size, dtype=int)
    for w in wp.wells:
        counts[w] += 1
    counts[wp.interior] += 1
    assert np.all(counts == 1)
    assert wp.well_mass(space).sum() + wp.interior_mass(space) == pytest.approx(
        1.0, abs=1e-12
    )


def test_wells_reject_overlapping_radius():
    space = _space(2, 10)
    with pytest.raises(ValueError):
        wells(space, ell=5)


def test_well_mass_concentrates_on_condensates():
    space = _space(2, 100)
    wp = wells(space)
    mass = wp.well_mass(space)
    # symmetric sites share the condensate mass evenly
    assert mass[0] == pytest.approx(mass[1], rel=1e-12)
    assert wp.interior_mass(space) < 0.1


def test_reference_configurations():
    assert np.array_equal(condensed_config(7, 3, site=1), [0, 7, 0])
    assert np.array_equal(balanced_config(7, 3), [3, 2, 2])
    assert np.array_equal(balanced_config(6, 3), [2, 2, 2])
    with pytest.raises(ValueError):
        condensed_config(5, 2, site=4)


def test_model_round_trip(tmp_path):
    model = ZrpModel(graph=complete_graph(3, rate=0.5), alpha=2.5, N=17)
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert back.alpha == model.alpha
    assert back.N == model.N
    assert np.allclose(back.graph.rates, model.graph.rates)

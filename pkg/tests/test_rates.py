import math

import numpy as np
import pytest

from zrplab.rates import (
    beta_moment,
    chain_rate,
    limiting_chain,
    rate_reversible,
    rate_variational,
    vertex_measure_rate,
)
from zrplab.sitegraph import cycle_graph, two_site_graph
from zrplab.zrp import ZrpModel, enumerate_space

# unit-rate two-site graph, alpha = 2: R = 2 Cap / (series * moment)
# with Cap = 1/4, series = 1 + pi^2/6, moment = 1/30
R_TWO_SITE = 11.342437747701133


def _space(N, alpha=2.0):
    return enumerate_space(ZrpModel(graph=two_site_graph(), alpha=alpha, N=N))


def test_beta_moment_closed_form():
    # integer alpha gives a Beta-function value: B(3,3) = 1/30
    assert beta_moment(2.0) == pytest.approx(1.0 / 30.0, rel=1e-12)
    assert beta_moment(3.0) == pytest.approx(1.0 / 140.0, rel=1e-12)


def test_limiting_chain_two_site_frozen_value():
    chain = limiting_chain(two_site_graph(), alpha=2.0)
    assert chain.rates[0, 1] == pytest.approx(R_TWO_SITE, rel=1e-12)
    assert chain.rates[1, 0] == pytest.approx(R_TWO_SITE, rel=1e-12)


def test_limiting_chain_symmetric_for_reversible_input():
    chain = limiting_chain(cycle_graph(4, forward=1.0, backward=1.0), alpha=2.0)
    assert np.allclose(chain.rates, chain.rates.T)
    assert chain.reversible


def test_chain_rate_frozen_value():
    chain = limiting_chain(two_site_graph(), alpha=2.0)
    assert chain_rate(chain, [0.7, 0.3]) == pytest.approx(
        0.9469218388681575, rel=1e-10
    )


def test_chain_rate_vanishes_at_uniform():
    chain = limiting_chain(two_site_graph(), alpha=2.0)
    assert chain_rate(chain, [0.5, 0.5]) == pytest.approx(0.0, abs=1e-13)


def test_chain_rate_at_delta_is_total_exit_rate():
    chain = limiting_chain(two_site_graph(), alpha=2.0)
    assert chain_rate(chain, [1.0, 0.0]) == pytest.approx(R_TWO_SITE, rel=1e-12)


def test_vertex_measure_rate_matches_chain_rate():
    g = two_site_graph()
    pts = np.array([[1.0, 0.0], [0.0, 1.0]])
    val = vertex_measure_rate(g, 2.0, pts, [0.7, 0.3])
    assert val == pytest.approx(0.9469218388681575, rel=1e-10)


def test_vertex_measure_rate_off_vertex_is_infinite():
    g = two_site_graph()
    assert vertex_measure_rate(g, 2.0, [[0.6, 0.4]], [1.0]) == math.inf


def test_vertex_measure_rate_validates_weights():
    g = two_site_graph()
    with pytest.raises(ValueError):
        vertex_measure_rate(g, 2.0, [[1.0, 0.0]], [0.5])


def test_rate_reversible_zero_at_stationary_measure():
    space = _space(12)
    assert rate_reversible(space, space.rho) <= 1e-12


def test_rate_reversible_requires_reversible_graph():
    model = ZrpModel(graph=cycle_graph(3, forward=2.0, backward=0.5), alpha=2.0, N=4)
    space = enumerate_space(model)
    with pytest.raises(ValueError, match="reversible"):
        rate_reversible(space, space.rho)


def test_variational_agrees_with_closed_form_on_particle_system():
    space = _space(8)
    rng = np.random.default_rng(10)
    for _ in range(5):
        nu = rng.uniform(0.05, 1.0, size=space.size)
        nu /= nu.sum()
        closed = rate_reversible(space, nu)
        res = rate_variational(space, nu, tol=1e-7)
        assert res.value == pytest.approx(closed, abs=1e-8)


def test_variational_accepts_site_graph_input():
    g = two_site_graph()
    res = rate_variational(g, [1.0, 0.0], tol=1e-7)
    assert res.value == pytest.approx(1.0, abs=1e-8)


def test_rate_is_supremum_over_potentials():
    space = _space(6)
    rng = np.random.default_rng(11)
    nu = rng.uniform(0.1, 1.0, size=space.size)
    nu /= nu.sum()
    val = rate_reversible(space, nu)
    L = space.generator
    for _ in range(50):
        u = np.exp(rng.uniform(-1.5, 1.5, size=space.size))
        lower = -nu @ (L @ u / u)
        assert lower <= val + 1e-9

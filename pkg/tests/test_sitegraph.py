import numpy as np
import pytest

from zrplab.sitegraph import (
    SiteGraph,
    apply_generator,
    capacity,
    complete_graph,
    cycle_graph,
    dirichlet_form,
    face_projection,
    graph_from_dict,
    harmonic_extension,
    load_graph,
    save_graph,
    solve_dirichlet,
    symmetrize,
    trace_graph,
    two_site_graph,
)


def _random_symmetric(rng, kappa):
    raw = rng.uniform(0.2, 1.2, size=(kappa, kappa))
    np.fill_diagonal(raw, 0.0)
    return symmetrize(SiteGraph(raw))


def test_generator_rows_sum_to_zero():
    g = complete_graph(4, rate=0.7)
    assert np.allclose(g.generator.sum(axis=1), 0.0)
    assert g.kappa == 4


def test_rejects_negative_rates_and_ignores_diagonal():
    with pytest.raises(ValueError):
        SiteGraph(np.array([[0.0, -1.0], [1.0, 0.0]]))
    # the diagonal is derived, any stored values are discarded
    g = SiteGraph(np.array([[7.0, 1.0], [1.0, 7.0]]))
    assert g.rates[0, 0] == 0.0 and g.rates[1, 1] == 0.0


def test_uniform_stationarity_detection():
    assert complete_graph(3).uniform_stationary
    assert cycle_graph(3, forward=2.0, backward=0.5).uniform_stationary
    lopsided = SiteGraph(np.array([[0.0, 2.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]))
    assert not lopsided.uniform_stationary


def test_reversibility_detection():
    assert two_site_graph().reversible
    assert not cycle_graph(3, forward=2.0, backward=0.5).reversible


def test_apply_generator_matches_matrix():
    g = complete_graph(4)
    f = np.arange(4.0)
    assert np.allclose(apply_generator(g, f), g.generator @ f)


def test_equilibrium_potential_boundary_and_harmonicity():
    rng = np.random.default_rng(2)
    g = _random_symmetric(rng, 5)
    f = solve_dirichlet(g, [0], [4])
    assert f[0] == 0.0 and f[4] == 1.0
    interior = [1, 2, 3]
    assert np.max(np.abs((g.generator @ f)[interior])) < 1e-12


def test_capacity_symmetric_in_arguments():
    rng = np.random.default_rng(3)
    g = _random_symmetric(rng, 5)
    assert capacity(g, [0], [3, 4]) == pytest.approx(capacity(g, [3, 4], [0]), rel=1e-12)


def test_two_site_capacity_hand_value():
    # single edge of conductance r between two sites, uniform weights 1/2:
    # equilibrium potential (0, 1), energy r/2
    g = two_site_graph(rate=0.6)
    assert capacity(g, [0], [1]) == pytest.approx(0.3, rel=1e-14)


def test_harmonic_extension_is_committor_matrix():
    rng = np.random.default_rng(4)
    g = _random_symmetric(rng, 6)
    A = [1, 4]
    U = harmonic_extension(g, A)
    assert U.shape == (2, 6)
    # delta on A, total mass one everywhere, harmonic off A
    assert np.allclose(U[:, A], np.eye(2))
    assert np.allclose(U.sum(axis=0), 1.0)
    rest = [0, 2, 3, 5]
    for row in U:
        assert np.max(np.abs((g.generator @ row)[rest])) < 1e-12


def test_face_projection_preserves_mass_and_fixes_face_points():
    rng = np.random.default_rng(5)
    g = _random_symmetric(rng, 4)
    A = [0, 2]
    xi = np.array([0.1, 0.3, 0.4, 0.2])
    out = face_projection(g, A, xi)
    assert out.shape == (2,)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)
    on_face = np.array([0.7, 0.0, 0.3, 0.0])
    assert np.allclose(face_projection(g, A, on_face), [0.7, 0.3])


def test_trace_rates_first_step_decomposition():
    # r^A(x,y) = r(x,y) + sum over outside z of r(x,z) u^A_y(z)
    rng = np.random.default_rng(6)
    g = _random_symmetric(rng, 5)
    A = [0, 2, 3]
    tg = trace_graph(g, A)
    U = harmonic_extension(g, A)
    outside = [1, 4]
    for i, x in enumerate(A):
        for j, y in enumerate(A):
            if x == y:
                continue
            expected = g.rates[x, y] + sum(
                g.rates[x, z] * U[j, z] for z in outside
            )
            assert tg.rates[i, j] == pytest.approx(expected, rel=1e-12)


def test_trace_three_site_hand_value():
    # complete graph at unit rate, watching two sites: direct hop plus the
    # detour through the third site, 1 + 1/2 = 3/2
    tg = trace_graph(complete_graph(3), [1, 2])
    assert tg.rates[0, 1] == pytest.approx(1.5, rel=1e-14)
    assert tg.rates[1, 0] == pytest.approx(1.5, rel=1e-14)


def test_trace_generator_identity():
    rng = np.random.default_rng(7)
    for _ in range(10):
        kappa = int(rng.integers(3, 7))
        g = _random_symmetric(rng, kappa)
        size = int(rng.integers(2, kappa + 1))
        A = sorted(rng.choice(kappa, size=size, replace=False).tolist())
        U = harmonic_extension(g, A)
        tg = trace_graph(g, A)
        assert np.max(np.abs(U @ g.generator @ U.T - tg.generator)) < 1e-12


def test_dirichlet_form_matches_generator_pairing():
    rng = np.random.default_rng(8)
    g = _random_symmetric(rng, 5)
    f = rng.standard_normal(5)
    # D(f) = -<f, Lf> under the uniform measure
    assert dirichlet_form(g, f) == pytest.approx(
        -f @ (g.generator @ f) / 5.0, rel=1e-12
    )


def test_dirichlet_form_requires_uniform_condition():
    lopsided = SiteGraph(np.array([[0.0, 2.0], [1.0, 0.0]]))
    with pytest.raises(ValueError, match="uniform"):
        dirichlet_form(lopsided, np.array([0.0, 1.0]))


def test_symmetrize_halves_rate_sums():
    g = SiteGraph(np.array([[0.0, 2.0], [1.0, 0.0]]))
    s = symmetrize(g)
    assert s.rates[0, 1] == pytest.approx(1.5)
    assert s.rates[1, 0] == pytest.approx(1.5)
    assert s.reversible


def test_graph_round_trip(tmp_path):
    g = cycle_graph(4, forward=1.25, backward=0.75)
    path = tmp_path / "graph.json"
    save_graph(g, path)
    back = load_graph(path)
    assert np.allclose(back.rates, g.rates)
    assert back.labels == g.labels


def test_graph_from_dict_accepts_labels():
    doc = {"sites": ["a", "b"], "rates": [["a", "b", 2.0], ["b", "a", 1.0]]}
    g = graph_from_dict(doc)
    assert g.rates[0, 1] == 2.0 and g.rates[1, 0] == 1.0

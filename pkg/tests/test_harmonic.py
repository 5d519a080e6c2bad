import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hatlab import harmonic as hm
from hatlab.lattice import Config, apply_dihedral, exposed_sites, make_line, make_pair

# exact values cross-checked against a sparse absorbing-chain solve on the
# fattened region (agreement to 1e-14); the endpoint harmonic measure of the
# three-site segment equals pi/8 and agrees with a large-disk solve to 3e-5
L3_ALPHA = (0.3926990816987242, 0.21460183660255164, 0.3926990816987242)
L3_ESCAPE = {4: 0.3192436534043971, 16: 0.19224985725649352, 64: 0.13536848922583122}
SINGLE_ESCAPE_8 = 0.4218164469159541
# accelerated Monte Carlo oracle: 2e5 walks from each outer neighbor of the endpoint
L3_ESCAPE_64_MC = (0.13549625, 0.00037215)
# walks started on a circle of radius 1e4 (4e6 walks), landing frequencies and standard errors
L3_ALPHA_MC = ((0.3925295, 0.21458175, 0.39288875), (0.00024416, 0.00020527, 0.00024420))

small_sets = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=2, max_size=7, unique=True)


def test_pair_measure_is_half(table):
    for d in (1, 5, 100):
        assert np.allclose(hm.harmonic_measure(make_pair(d), table), [0.5, 0.5], atol=1e-12)


def test_line_measure(table):
    alpha = hm.harmonic_measure(make_line(3), table)
    assert np.allclose(alpha, L3_ALPHA, atol=1e-12)
    assert alpha[1] < alpha[0] and alpha[1] < alpha[2]
    assert alpha[0] == pytest.approx(math.pi / 8, abs=1e-12)


def test_evaluate_on_target_is_delta(table):
    A = make_line(3)
    sol = hm.solve_hitting(A, table)
    assert np.array_equal(sol.evaluate((0, 1)), [0.0, 1.0, 0.0])


def test_two_point_examples(table):
    x, y = (0, 0), (4, 0)
    assert hm.two_point(x, y, (2, 7), table) == pytest.approx(0.5, abs=1e-14)
    assert hm.two_point(x, y, y, table) == 1.0
    assert hm.two_point(x, y, x, table) == 0.0
    sol = hm.solve_hitting(Config([x, y]), table)
    z = (-3, 11)
    assert sol.evaluate(z)[1] == pytest.approx(hm.two_point(x, y, z, table), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_sets)
def test_measure_is_a_probability_supported_on_exposed_sites(pts):
    from hatlab.potential import default_table

    A = Config(pts)
    alpha = hm.harmonic_measure(A, default_table(256))
    assert alpha.sum() == pytest.approx(1.0, abs=1e-10)
    assert (alpha > -1e-12).all()
    exposed = exposed_sites(A)
    assert {s for s, on in zip(A.sites, hm.support(alpha)) if on} == exposed


@settings(max_examples=40, deadline=None)
@given(small_sets, st.integers(0, 7), st.integers(-30, 30), st.integers(-30, 30))
def test_measure_is_equivariant(pts, g, sx, sy):
    from hatlab.potential import default_table

    t = default_table(256)
    A = Config(pts)
    B = A.transform(g).translate((sx, sy))
    image = {}
    for s, v in zip(A.sites, hm.harmonic_measure(A, t)):
        p = apply_dihedral(g, s)
        image[(p[0] + sx, p[1] + sy)] = v
    assert set(image) == set(B.sites)
    for s, v in zip(B.sites, hm.harmonic_measure(B, t)):
        assert v == pytest.approx(image[s], abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(small_sets, st.tuples(st.integers(-40, 40), st.integers(-40, 40)))
def test_hitting_rows_are_distributions(pts, v):
    from hatlab.potential import default_table

    sol = hm.solve_hitting(Config(pts), default_table(256))
    row = sol.evaluate(v)
    assert row.sum() == pytest.approx(1.0, abs=1e-10)
    assert (row > -1e-10).all()


def test_set_too_large(table):
    big = Config((x, y) for x in range(45) for y in range(45))
    with pytest.raises(hm.SetTooLarge):
        hm.solve_hitting(big, table)


def test_escape_values(table):
    for d, v in L3_ESCAPE.items():
        assert hm.escape_probability(make_line(3), (0, 0), d, table) == pytest.approx(v, abs=1e-12)
    vals = [hm.escape_probability(Config([(0, 0)]), (0, 0), d, table) for d in (2, 4, 8, 16)]
    assert vals[2] == pytest.approx(SINGLE_ESCAPE_8, abs=1e-12)
    assert all(0 < v < 1 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        hm.escape_probability(make_line(3), (5, 5), 4, table)


def test_escape_agrees_with_monte_carlo_oracle(table):
    est, se = L3_ESCAPE_64_MC
    assert abs(hm.escape_probability(make_line(3), (0, 0), 64, table) - est) < 3 * se


def test_segment_harmonic_measure_agrees_with_monte_carlo_oracle(table):
    est, se = (np.array(v) for v in L3_ALPHA_MC)
    alpha = np.asarray(hm.harmonic_measure(make_line(3), table))
    assert np.all(np.abs(alpha - est) < 3 * se)


def test_circle_escape_symmetry_and_sparse_oracle(table):
    A = Config([(0, 0), (1, 0)])
    left = hm.circle_escape(A, (0, 0), 50, table, center=(0, 0))
    # reflecting x -> 1 - x swaps the two sites; the circle is recentred accordingly
    right = hm.circle_escape(A, (1, 0), 50, table, center=(1, 0))
    assert left == pytest.approx(right, abs=1e-12)
    assert left == pytest.approx(hm.circle_escape_sparse(A, (0, 0), 50), abs=1e-12)


def test_circle_ratio_profile(table):
    r1 = hm.circle_hitting_ratio(10, 1000, table)
    r2 = hm.circle_hitting_ratio(10, 2000, table)
    assert r1.passed
    assert abs(r2.max_ratio - 1) < abs(r1.max_ratio - 1)
    # a start on the axis and its quarter turn give the same profile up to relabeling
    a = hm.circle_hitting_ratio(10, 1000, table, starts=[(1000, 0)]).ratios[0]
    b = hm.circle_hitting_ratio(10, 1000, table, starts=[(0, 1000)]).ratios[0]
    assert sorted(a) == pytest.approx(sorted(b), abs=1e-9)
    with pytest.raises(ValueError):
        hm.circle_hitting_ratio(5, 1000, table)


def test_tunnel():
    assert hm.tunnel_value(3, 2) == pytest.approx(0.25, abs=1e-15)
    assert hm.tunnel_value(10, 1) == 0.0 and hm.tunnel_value(10, 10) == 1.0
    for L in (5, 10, 30, 60):
        assert hm.tunnel_value(L, 2) == pytest.approx(hm.tunnel_closed_form(L), rel=1e-12)
    s = math.sqrt(3)
    assert hm.tunnel_closed_form(10) == pytest.approx(2 * s / ((2 + s) ** 9 - (2 - s) ** 9), rel=1e-14)


def test_spiral_structure():
    sp = hm.build_spiral(20)
    assert sp.sites.n == 20
    assert (0, 0) in sp.sites
    assert (0, 0) in exposed_sites(sp.sites)
    assert sp.path_length == hm.shortest_admissible_path(sp.sites)
    assert hm.build_spiral(40).path_length > sp.path_length
    with pytest.raises(ValueError):
        hm.build_spiral(3)


def test_deep_measure_matches_dense_solve(table):
    for n in (8, 12):
        sp = hm.build_spiral(n)
        dense = hm.harmonic_measure(sp.sites, table, check=False)[sp.sites.index((0, 0))]
        assert hm.harmonic_measure_deep(sp.sites, (0, 0), table) == pytest.approx(dense, rel=1e-6)
    assert hm.harmonic_measure_deep(hm.build_spiral(8).sites, (0, 0), table) == pytest.approx(1.7121663021824392e-3, rel=1e-9)


def test_deep_measure_decays(table):
    vals = [hm.harmonic_measure_deep(hm.build_spiral(n).sites, (0, 0), table) for n in (10, 20, 30)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_conditional_entrance(table):
    res = hm.conditional_entrance(0.01, 1e5, table)
    assert res["fitted_c"] > 0.4


def test_rectangle_exit():
    p0 = hm.rectangle_exit(0.0, 24, 24)
    assert 0 < p0 < 1
    assert hm.rectangle_exit(math.pi / 2, 24, 24) == pytest.approx(p0, rel=1e-10)
    assert hm.rectangle_exit(0.0, 24, 48) < p0
    with pytest.raises(ValueError):
        hm.rectangle_exit(0.0, 10, 24)

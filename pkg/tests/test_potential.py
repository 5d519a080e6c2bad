import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from hatlab.potential import (
    KAPPA,
    LAMBDA,
    audit_kernel_bounds,
    build_table,
    cached_table,
    circle_sites,
    error_bound,
    kernel_prime,
    load_table,
    save_table,
    write_triples,
)


def grid_oracle(N=100):
    """Solve (1/4) sum a(nbr) - a(x) = delta_0(x) on a (2N+1)^2 grid with asymptotic edges."""
    side = 2 * N + 1
    idx = lambda x, y: (x + N) * side + (y + N)
    n = side * side
    rows, cols, vals = [], [], []
    b = np.zeros(n)
    for x in range(-N, N + 1):
        for y in range(-N, N + 1):
            i = idx(x, y)
            if max(abs(x), abs(y)) == N:
                rows.append(i), cols.append(i), vals.append(1.0)
                b[i] = 2 / math.pi * math.log(math.hypot(x, y)) + KAPPA
                continue
            rows.append(i), cols.append(i), vals.append(-1.0)
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rows.append(i), cols.append(idx(x + dx, y + dy)), vals.append(0.25)
            b[i] = 1.0 if (x, y) == (0, 0) else 0.0
    sol = spla.spsolve(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)), b)
    sol = sol - sol[idx(0, 0)]
    return lambda x, y: sol[idx(x, y)]


@pytest.fixture(scope="module")
def oracle():
    return grid_oracle(100)


def test_small_values(table):
    assert table((0, 0)) == 0.0
    assert table((1, 0)) == pytest.approx(1.0, abs=1e-15)
    assert table((1, 1)) == pytest.approx(4 / math.pi, abs=1e-15)
    assert table((2, 0)) == pytest.approx(4 - 8 / math.pi, abs=1e-14)


def test_values_match_grid_oracle(table, oracle):
    for x, y in [(1, 0), (1, 1), (2, 0), (3, 2), (7, 5), (20, 0), (15, 15)]:
        assert table((x, y)) == pytest.approx(oracle(x, y), abs=1e-5)


def test_far_value_uses_asymptotic_form(table):
    x = (10**6, 0)
    assert abs(table(x) - (2 / math.pi * math.log(1e6) + KAPPA)) <= 7e-14
    assert error_bound(table, x) == pytest.approx(LAMBDA / 1e12)


def test_kappa_value():
    assert KAPPA == pytest.approx((2 * 0.5772156649015329 + 3 * math.log(2)) / math.pi, abs=1e-15)


def test_lambda_bound_is_tight(table):
    # the worst ratio |err| |x|^2 sits at (0, 3) and only just stays below LAMBDA
    ratio = max(
        abs(table((x, y)) - 2 / math.pi * math.log(math.hypot(x, y)) - KAPPA) * (x * x + y * y)
        for x in range(0, 12)
        for y in range(0, 12)
        if x or y
    )
    assert 0.0688 < ratio < LAMBDA


def test_kernel_prime():
    assert kernel_prime(1.0) == pytest.approx(KAPPA)
    assert kernel_prime(math.exp(math.pi / 2)) == pytest.approx(1 + KAPPA)
    with pytest.raises(ValueError):
        kernel_prime(0.0)


def test_harmonic_off_origin(table):
    for x, y in [(1, 0), (5, 3), (40, 17), (200, 3)]:
        avg = (table((x + 1, y)) + table((x - 1, y)) + table((x, y + 1)) + table((x, y - 1))) / 4
        assert avg == pytest.approx(table((x, y)), abs=1e-12)
    avg0 = (table((1, 0)) + table((-1, 0)) + table((0, 1)) + table((0, -1))) / 4
    assert avg0 == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(-300, 300), st.integers(-300, 300), st.integers(0, 7))
def test_kernel_symmetry_property(x, y, g):
    from hatlab.lattice import apply_dihedral
    from hatlab.potential import default_table

    t = default_table(256)
    assert t(apply_dihedral(g, (x, y))) == t((x, y))


@settings(max_examples=200, deadline=None)
@given(st.integers(-250, 250), st.integers(-250, 250))
def test_lower_bound_property(x, y):
    from hatlab.potential import default_table

    if x * x + y * y >= 4:
        assert default_table(256)((x, y)) >= 2 / math.pi * math.log(math.hypot(x, y))


def test_many_and_matrix_agree_with_scalar(table, rng):
    d = rng.integers(-400, 400, size=(50, 2))
    vals = table.many(d[:, 0], d[:, 1])
    assert np.allclose(vals, [table(tuple(p)) for p in d], rtol=0, atol=0)


def test_cache_roundtrip(tmp_path):
    t = build_table(32)
    save_table(t, tmp_path / "k.bin")
    u = load_table(tmp_path / "k.bin")
    assert np.array_equal(t.values, u.values) and u.exact_radius == 32
    (tmp_path / "bad.bin").write_bytes(b"nonsense")
    with pytest.raises(ValueError):
        load_table(tmp_path / "bad.bin")
    v = cached_table(32, cache_dir=tmp_path / "cache")
    assert np.array_equal(v.values, t.values)


def test_write_triples(tmp_path):
    t = build_table(8)
    rows = write_triples(t, tmp_path / "t.txt")
    lines = (tmp_path / "t.txt").read_text().splitlines()
    assert rows == len(lines) == sum(1 for x in range(-8, 9) for y in range(-8, 9) if x * x + y * y <= 64)
    x, y, v = lines[0].split()
    assert float(v) == t((int(x), int(y)))


def test_circle_sites():
    C = circle_sites(10)
    r = np.hypot(C[:, 0], C[:, 1])
    assert (r >= 10).all() and (r < 11.5).all()
    shifted = circle_sites(10, (5, -2))
    assert np.array_equal(shifted - [5, -2], C)


def test_kernel_audits_pass(table):
    items = audit_kernel_bounds(table, samples=2000, rng_seed=3)
    assert all(it.passed for it in items), [it.row() for it in items if not it.passed]

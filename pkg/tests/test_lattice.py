import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hatlab.lattice import (
    Config,
    CoordinateOverflow,
    Site,
    apply_dihedral,
    boundaries,
    canonical_key,
    canonicalize,
    classify,
    diameter,
    dist,
    exposed_sites,
    inverse_dihedral,
    is_connected,
    is_iso,
    make_line,
    make_pair,
    neighbors,
    outside_test,
    star_exterior_boundary,
    _outside_component,
)

site_lists = st.lists(st.tuples(st.integers(-8, 8), st.integers(-8, 8)), min_size=1, max_size=12)


def ring(k):
    """Hollow k x k square of sites."""
    return [(x, y) for x in range(k) for y in range(k) if x in (0, k - 1) or y in (0, k - 1)]


def brute_exposed(U):
    seen, _ = _outside_component(set(U.sites), pad=2)
    return {p for p in U if any(q in seen for q in neighbors(p))}


def test_make_line():
    assert make_line(1).sites == ((0, 0),)
    assert make_line(3).sites == ((0, 0), (0, 1), (0, 2))
    assert diameter(make_line(5)) == 4
    with pytest.raises(ValueError):
        make_line(0)


def test_diameter_examples():
    assert diameter(Config([(0, 0)])) == 0
    assert diameter(Config([(0, 0), (3, 4)])) == 5
    for n in range(2, 8):
        assert diameter(make_line(n)) == n - 1


def test_diameter_hull_branch_matches_brute_force(rng):
    pts = rng.integers(-50, 50, size=(100, 2))
    U = Config(map(tuple, pts))
    brute = max(dist([p], [q]) for p in U for q in U)
    assert diameter(U) == pytest.approx(brute)


def test_config_dedup_sort_and_text_roundtrip():
    U = Config([(2, 1), (0, 0), (2, 1)])
    assert U.sites == ((0, 0), (2, 1))
    assert Config.from_text(U.to_text()) == U
    assert Config.from_json(U.to_json()) == U
    assert Config.from_text("# comment\n1 2\n\n3 4  # trailing\n").sites == ((1, 2), (3, 4))


def test_coordinate_guard():
    with pytest.raises(CoordinateOverflow):
        Config([(2**30 + 1, 0)])


def test_move():
    U = make_line(3).move((0, 2), (1, 0))
    assert U.sites == ((0, 0), (0, 1), (1, 0))


def test_boundaries_examples():
    ext, inn = boundaries(Config([(0, 0)]))
    assert ext == {(1, 0), (-1, 0), (0, 1), (0, -1)} and inn == {(0, 0)}
    block = Config((x, y) for x in range(3) for y in range(3))
    _, inn = boundaries(block)
    assert inn == set(block.sites) - {(1, 1)}
    _, inn = boundaries(make_line(3))
    assert inn == set(make_line(3).sites)


def test_exposed_examples():
    assert exposed_sites(make_line(3)) == set(make_line(3).sites)
    block = Config((x, y) for x in range(3) for y in range(3))
    assert exposed_sites(block) == set(block.sites) - {(1, 1)}
    U = Config([*ring(5), (2, 2)])
    assert (2, 2) not in exposed_sites(U)
    assert set(ring(5)) <= exposed_sites(U)


def test_iso_classification():
    for n in range(2, 6):
        assert classify(make_line(n)) == "NonIso"
    assert is_iso(Config([(0, 0), (10, 0), (0, 10)]))
    assert classify(Config([(0, 0), (0, 1), (20, 0)])) == "NonIso"


def test_canonical_class_examples():
    U = Config([(0, 0), (1, 0), (1, 2)])
    assert canonicalize(U) == canonicalize(U.translate((7, -3)))
    horizontal = Config((x, 0) for x in range(4))
    assert canonicalize(horizontal) == canonicalize(make_line(4))


def test_star_exterior_boundary_examples():
    assert star_exterior_boundary(Config([(0, 0)])) == {
        (dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy
    }
    block = Config([(0, 0), (0, 1), (1, 0), (1, 1)])
    assert len(star_exterior_boundary(block)) == 12
    R = Config(ring(5))
    out = star_exterior_boundary(R)
    assert all(not (0 < p.x < 4 and 0 < p.y < 4) for p in out)
    assert len(out) == 24


def test_dihedral_group():
    assert inverse_dihedral(0) == 0
    for g in range(8):
        h = inverse_dihedral(g)
        for s in [(1, 0), (2, 3), (-1, 5)]:
            assert apply_dihedral(h, apply_dihedral(g, s)) == s


@settings(max_examples=200, deadline=None)
@given(site_lists)
def test_exposure_matches_whole_box_flood_fill(pts):
    U = Config(pts)
    assert exposed_sites(U) == brute_exposed(U)


@settings(max_examples=200, deadline=None)
@given(site_lists, st.integers(0, 7), st.integers(-50, 50), st.integers(-50, 50))
def test_canonical_key_invariant_and_consistent(pts, g, sx, sy):
    U = Config(pts)
    V = U.transform(g).translate((sx, sy))
    assert canonicalize(U) == canonicalize(V)
    rep, h, shift = canonical_key(V)
    mapped = Config(apply_dihedral(h, p) for p in V).translate(shift)
    assert mapped.sites == rep


@settings(max_examples=100, deadline=None)
@given(site_lists, st.integers(0, 7))
def test_exposure_and_diameter_are_symmetric(pts, g):
    U = Config(pts)
    V = U.transform(g)
    assert {apply_dihedral(g, p) for p in exposed_sites(U)} == exposed_sites(V)
    assert diameter(U) == pytest.approx(diameter(V))
    assert classify(U) == classify(V)


def test_outside_test_far_pieces_are_cheap():
    # two enclosing rings a million sites apart: each is filled on its own box
    U = Config([*ring(5), *[(x + 10**6, y) for x, y in ring(5)], (2, 2)])
    is_out = outside_test(U.sites)
    assert not is_out((2, 2)) and is_out((500000, 0)) and not is_out((10**6 + 2, 2))


def test_connectivity():
    assert is_connected(make_line(4))
    assert not is_connected([(0, 0), (1, 1)])
    assert is_connected([(0, 0), (1, 1)], star=True)


def test_site_arithmetic():
    assert Site(1, 2) + (3, 4) == (4, 6)
    assert Site(1, 2) - (1, 1) == (0, 1)
    assert list(itertools.islice(neighbors((0, 0)), 4)) == [(1, 0), (-1, 0), (0, 1), (0, -1)]

import itertools

import pytest
from hypothesis import given, strategies as st

from ffproj.regions import (HalfLatticeRegion, Region, boundary, box, enumerate_translates,
                            interval, shell, translate, window_family)

sites_2d = st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=8,
                    unique=True)


def test_canonical_order_and_duplicates():
    r = Region.from_sites([(2,), (0,), (1,)])
    assert r.sites == ((0,), (1,), (2,))
    assert r == interval(0, 3)
    with pytest.raises(ValueError):
        Region.from_sites([(0,), (0,)])
    with pytest.raises(ValueError):
        Region(((0, 1), (2,)), 2)


def test_empty_region_needs_dimension():
    with pytest.raises(ValueError):
        Region.from_sites([])
    assert len(Region.empty(2)) == 0


@given(sites_2d, st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_translate_roundtrip(sites, g):
    r = Region.from_sites(sites)
    back = translate(translate(r, g), tuple(-c for c in g))
    assert back == r
    assert len(translate(r, g)) == len(r)


@given(sites_2d, sites_2d)
def test_set_operations(a, b):
    ra, rb = Region.from_sites(a), Region.from_sites(b)
    assert set(ra.union(rb).sites) == set(a) | set(b)
    assert set(ra.intersection(rb).sites) == set(a) & set(b)
    assert ra.difference(rb).issubset(ra)
    assert ra.intersection(rb) <= ra


def brute_translates(delta, lam):
    """Shifts g within a bounding range such that delta + g lies in lam."""
    lo = min(min(s) for s in lam.sites) - max(max(s) for s in delta.sites) - 1
    hi = max(max(s) for s in lam.sites) - min(min(s) for s in delta.sites) + 1
    out = []
    for g in itertools.product(range(lo, hi + 1), repeat=lam.dim):
        if translate(delta, g).issubset(lam):
            out.append(g)
    return sorted(out)


@given(sites_2d, sites_2d)
def test_enumerate_translates_matches_brute_force(d_sites, l_sites):
    delta, lam = Region.from_sites(d_sites), Region.from_sites(l_sites)
    assert enumerate_translates(delta, lam) == brute_translates(delta, lam)


def test_enumerate_translates_chain():
    assert enumerate_translates(interval(0, 2), interval(0, 4)) == [(0,), (1,), (2,)]
    assert enumerate_translates(interval(0, 5), interval(0, 4)) == []


def test_box_and_bounds():
    b = box((2, 3), (1, -1))
    assert len(b) == 6
    assert b.bounds() == ((1, 2), (-1, 1))
    assert b.is_box()
    assert not Region.from_sites([(0, 0), (1, 1)]).is_box()


@pytest.mark.parametrize("shape,count", [((4,), 10), ((2, 2), 9), ((3, 3), 36)])
def test_window_family_counts(shape, count):
    fam = window_family(box(shape))
    assert len(fam) == count
    assert fam == sorted(fam, key=Region.key)


def test_window_family_closed_under_intersection():
    fam = set(window_family(box((3, 3))))
    for a in fam:
        for b in fam:
            c = a.intersection(b)
            if len(c):
                assert c in fam


def test_half_lattice_and_boundary():
    h = HalfLatticeRegion(interval(0, 3))
    assert boundary(h) == interval(0, 1)
    assert len(boundary(interval(1, 3))) == 0
    with pytest.raises(ValueError):
        HalfLatticeRegion(interval(-1, 2))
    sq = box((2, 2))
    assert boundary(sq) == Region.from_sites([(0, 0), (0, 1)])


def test_shell():
    assert shell(interval(2, 4)) == interval(1, 5)
    assert len(shell(box((1, 1)))) == 9


def test_json_roundtrip():
    r = box((2, 2), (3, 4))
    assert Region.from_json(r.to_json()) == r
    assert r.to_json()[0] == [3, 4]

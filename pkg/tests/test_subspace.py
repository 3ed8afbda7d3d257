import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, strategies as st

from ffproj import subspace as sub
from ffproj.regions import Region, box, interval


def random_projector(rng, dim, rank, region=None, d=2):
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    region = region if region is not None else interval(0, int(round(np.log(dim) / np.log(d))))
    return sub.proj_from_span(a.T, region, d)


def test_numerical_rank_policy():
    assert sub.numerical_rank([1.0, 1e-11]) == 1
    assert sub.numerical_rank([1.0, 1e-9]) == 2
    assert sub.numerical_rank([1e-13]) == 0
    assert sub.numerical_rank([]) == 0


def test_null_space_against_scipy(rng):
    a = rng.normal(size=(3, 7)) + 1j * rng.normal(size=(3, 7))
    ours = sub.null_space(a)
    ref = sl.null_space(a)
    assert ours.shape == ref.shape
    assert np.allclose(ours @ ours.conj().T, ref @ ref.conj().T)
    tall = np.vstack([a, a, a])
    assert sub.null_space(tall).shape[1] == 4


def test_projector_identities(rng):
    p = random_projector(rng, 8, 3)
    herm, idem = p.check()
    assert herm < 1e-12 and idem < 1e-12
    assert p.rank == 3 and p.corank == 5
    c = p.complement()
    assert np.allclose(p.matrix + c.matrix, np.eye(8))


def test_projector_rejects_wrong_size():
    with pytest.raises(ValueError):
        sub.Projector(np.eye(3), interval(0, 2), 2)
    with pytest.raises(ValueError):
        sub.Projector(np.diag([1.0, 0.5]), interval(0, 1), 2).check()


def test_zero_identity():
    r = interval(0, 2)
    assert sub.Projector.zero(r, 2).rank == 0
    assert sub.Projector.identity(r, 2).complement().rank == 0


@pytest.mark.parametrize("seed", range(5))
def test_meet_is_range_intersection(seed):
    rng = np.random.default_rng(seed)
    common = rng.normal(size=(16, 2)) + 1j * rng.normal(size=(16, 2))
    a = np.hstack([common, rng.normal(size=(16, 4))])
    b = np.hstack([common, rng.normal(size=(16, 5))])
    r = interval(0, 4)
    p, q = sub.proj_from_span(a.T, r, 2), sub.proj_from_span(b.T, r, 2)
    m = sub.meet(p, q)
    assert m.rank == 2
    ref = sub.proj_from_span(common.T, r, 2)
    assert sub.opnorm(m.matrix - ref.matrix) < 1e-9
    j = sub.join(p, q)
    assert j.rank == 11
    assert sub.leq(m, p) and sub.leq(m, q) and sub.leq(p, j) and sub.leq(q, j)


def test_leq():
    r = interval(0, 1)
    e0 = sub.proj_from_span([[1, 0]], r, 2)
    assert sub.leq(e0, sub.Projector.identity(r, 2))
    assert not sub.leq(sub.Projector.identity(r, 2), e0)
    assert sub.leq(sub.Projector.zero(r, 2), e0)


def test_embed_matrix_kron_and_permutation(rng):
    full = interval(0, 3)
    a = rng.normal(size=(2, 2))
    assert np.allclose(sub.embed_matrix(a, interval(1, 2), full, 2),
                       np.kron(np.kron(np.eye(2), a), np.eye(2)))
    # two-site operator on sites {0, 2}: compare with explicit leg relabelling
    b = rng.normal(size=(4, 4))
    emb = sub.embed_matrix(b, Region.from_sites([(0,), (2,)]), full, 2)
    swap = np.eye(8)[[0, 2, 1, 3, 4, 6, 5, 7]]  # exchange sites 1 and 2
    assert np.allclose(emb, swap @ np.kron(b, np.eye(2)) @ swap.T)


def test_apply_local_matches_embed(rng):
    full = box((2, 2))
    small = Region.from_sites([(0, 1), (1, 0)])
    a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    vecs = rng.normal(size=(81, 3)) + 0j
    assert np.allclose(sub.apply_local(a, small, full, 3, vecs),
                       sub.embed_matrix(a, small, full, 3) @ vecs)
    assert np.allclose(sub.apply_local(a, small, full, 3, vecs[:, 0]),
                       sub.embed_matrix(a, small, full, 3) @ vecs[:, 0])


def test_partial_trace_of_product(rng):
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(4, 4))
    full = interval(0, 3)
    rho = np.kron(a, b)
    assert np.allclose(sub.partial_trace(rho, full, interval(0, 1), 2), a * np.trace(b))
    assert np.allclose(sub.partial_trace(rho, full, interval(1, 3), 2), b * np.trace(a))


def test_cap(monkeypatch):
    with pytest.raises(sub.CapExceededError):
        sub.check_cap(15, 2)
    monkeypatch.setenv("FFPROJ_MAX_DIM", "64")
    with pytest.raises(sub.CapExceededError):
        sub.check_cap(7, 2)
    assert sub.check_cap(6, 2) == 64


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_matrix_json_roundtrip(rows, cols, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    assert np.array_equal(sub.matrix_from_json(sub.matrix_to_json(m)), m)


def test_operator_json_roundtrip(rng):
    p = random_projector(rng, 4, 2)
    q = sub.Projector.from_json(p.to_json())
    assert q.region == p.region and np.allclose(q.matrix, p.matrix)
    op = sub.LocalOperator(rng.normal(size=(4, 4)), interval(0, 2))
    assert op.d == 2
    assert np.allclose(sub.LocalOperator.from_json(op.to_json()).matrix, op.matrix)

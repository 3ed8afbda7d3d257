import itertools

import numpy as np
import pytest

from ffproj import models
from ffproj import subspace as sub
from ffproj.config import ghz_square_vbs
from ffproj.ffsys import check_equivariance, check_ff, check_proper
from ffproj.regions import Region, box, interval, window_family


def random_vbs(rng, generators, j, d):
    psi = rng.normal(size=tuple(j) + (d,)) + 1j * rng.normal(size=tuple(j) + (d,))
    gamma = rng.normal(size=tuple(j)) + 1j * rng.normal(size=tuple(j))
    return models.VbsSpec(generators, psi, gamma)


def brute_vbs_space(lam, spec):
    """Span of the valence-bond vectors by full enumeration over every leg.

    For each configuration of all decorated legs the vector
    ``C(X) ⊗_s psi(x_s)`` is formed; vectors sharing the same free-leg values
    are summed.
    """
    gens = spec.generators
    bonded = set(models.lambda_B(lam, gens))
    legs = [(s, t) for s in lam.sites for t in range(len(gens))]
    free = [leg for leg in legs if leg not in bonded]
    vecs = {}
    for values in itertools.product(*[range(spec.J[t]) for _, t in legs]):
        x = dict(zip(legs, values))
        amp = models.vbs_amplitude(x, lam, spec)
        vec = np.ones(1, dtype=complex)
        for s in lam.sites:
            vec = np.kron(vec, spec.psi[tuple(x[(s, t)] for t in range(len(gens)))])
        key = tuple(x[leg] for leg in free)
        vecs[key] = vecs.get(key, 0) + amp * vec
    return sub.proj_from_span(np.array(list(vecs.values())), lam, spec.d)


def test_lambda_t_b_chain():
    gens = ((0,), (1,))
    assert models.lambda_T(interval(0, 2), gens) == interval(0, 1)
    assert models.lambda_B(interval(0, 2), gens) == (((0,), 0), ((1,), 1))
    assert len(models.lambda_T(interval(0, 1), gens)) == 0
    assert models.lambda_B(interval(0, 1), gens) == ()


def test_lambda_t_square_brute_force():
    gens = ((0, 0), (1, 0), (0, 1))
    for lam in window_family(box((3, 3))):
        expect = [s for s in lam.sites
                  if all((s[0] + t[0], s[1] + t[1]) in lam for t in gens)]
        assert list(models.lambda_T(lam, gens).sites) == expect
    assert models.lambda_T(box((2, 2)), gens) == Region.from_sites([(0, 0)])


def test_chain_amplitude_unrolled(rng):
    spec = random_vbs(rng, ((0,), (1,)), (2, 3), 2)
    lam = interval(0, 3)
    g = spec.gamma
    for x00, x11, x10, x21 in itertools.product(range(2), range(3), range(2), range(3)):
        conf = {((0,), 0): x00, ((1,), 1): x11, ((1,), 0): x10, ((2,), 1): x21}
        assert np.isclose(models.vbs_amplitude(conf, lam, spec), g[x00, x11] * g[x10, x21])
    with pytest.raises(KeyError):
        models.vbs_amplitude({}, lam, spec)


def test_constant_data_collapses_to_product():
    psi = np.zeros((2, 2, 2))
    psi[...] = [1.0, 0.0]
    spec = models.VbsSpec(((0,), (1,)), psi, np.ones((2, 2)))
    for n in (2, 3, 4):
        assert models.vbs_subspace(interval(0, n), spec).rank == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_vbs_chain_matches_brute_force(n, rng):
    spec = random_vbs(rng, ((0,), (1,)), (2, 2), 2)
    lam = interval(0, n)
    ours = models.vbs_subspace(lam, spec)
    ref = brute_vbs_space(lam, spec)
    assert ours.rank == ref.rank
    assert sub.opnorm(ours.matrix - ref.matrix) < 1e-9


@pytest.mark.parametrize("shape", [(2, 2)])
def test_vbs_square_matches_brute_force(shape):
    spec = ghz_square_vbs(seed=1)
    lam = box(shape)
    ours = models.vbs_subspace(lam, spec)
    ref = brute_vbs_space(lam, spec)
    assert 0 < ours.rank < ours.dim
    assert sub.opnorm(ours.matrix - ref.matrix) < 1e-9


@pytest.mark.parametrize("backend", ["numpy", None])
def test_vbs_system_is_ff(backend, rng):
    spec = random_vbs(rng, ((0,), (1,)), (2, 2), 2)
    sys = models.vbs_system(interval(0, 6), spec, backend=backend)
    assert check_ff(sys).ok
    assert check_equivariance(sys, [(1,)], strict=False).ok
    # windows without a full bond carry p = 0
    assert sys[interval(0, 1)].rank == 0


def test_vbs_nested_inclusion(rng):
    spec = random_vbs(rng, ((0,), (1,)), (2, 2), 2)
    big, small = interval(0, 6), interval(2, 4)
    v_big = models.vbs_subspace(big, spec)
    v_small = models.vbs_subspace(small, spec)
    # V_big ⊆ H ⊗ V_small
    moved = sub.apply_local(np.eye(4) - v_small.matrix, small, big, 2, v_big.basis)
    assert sub.opnorm(moved) < 1e-9


def test_vbs_rejects_bad_data():
    with pytest.raises(ValueError):
        models.VbsSpec(((1,), (0,)), np.ones((2, 2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        models.VbsSpec(((0,), (1,)), np.ones((2, 2, 2)), np.zeros((2, 2)))


def test_aklt_normalization(aklt):
    res = models.mps_residuals(aklt)
    assert res["isometry"] < 1e-12 and res["fixed_point"] < 1e-12
    assert res["unit_multiplicity"] == 1 and res["rho_invertible"]
    assert np.allclose(aklt.rho, np.eye(2) / 2)


def test_aklt_matrices_are_spin_operators(aklt):
    # up to the overall normalization the matrices are sqrt(2/3) s+, -sqrt(1/3) sz, -sqrt(2/3) s-
    sp = np.array([[0, 1], [0, 0]])
    sz = np.diag([1.0, -1.0])
    expect = [np.sqrt(2 / 3) * sp, -np.sqrt(1 / 3) * sz, -np.sqrt(2 / 3) * sp.T]
    assert np.allclose(aklt.v, expect)


def test_gamma_scalar_case():
    spec = models.MpsSpec(np.ones((1, 1, 1)))
    assert np.allclose(models.mps_gamma(1, np.array([[2.5]]), spec), [2.5])
    assert models.mps_injectivity_length(spec, 3) == 1


def direct_gamma(n, b, spec):
    out = []
    for mus in itertools.product(range(spec.d), repeat=n):
        w = np.eye(spec.k, dtype=complex)
        for mu in mus:
            w = spec.v[mu] @ w
        out.append(np.trace(w @ b))
    return np.array(out)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gamma_trace_formula_and_linearity(n, aklt, rng):
    b1 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b2 = rng.normal(size=(2, 2))
    g1 = models.mps_gamma(n, b1, aklt)
    assert np.allclose(g1, direct_gamma(n, b1, aklt))
    assert np.allclose(models.mps_gamma(n, b1 + b2, aklt), g1 + models.mps_gamma(n, b2, aklt))


def test_gamma_recursion(aklt, rng):
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rec = sum(np.kron(np.eye(3)[mu], models.mps_gamma(3, aklt.v[mu] @ b, aklt)) for mu in range(3))
    assert np.allclose(models.mps_gamma(4, b, aklt), rec)


def test_aklt_gamma2_rank(aklt):
    g2 = np.array([direct_gamma(2, e.reshape(2, 2), aklt) for e in np.eye(4)]).T
    assert g2.shape == (9, 4)
    assert np.linalg.matrix_rank(g2) == 4
    assert models.mps_injectivity_length(aklt, 6) == 2


def test_degenerate_spec_not_injective():
    a = np.array([[0.5, 0.1], [0.0, 0.5]])
    spec = models.MpsSpec(np.array([a, a]))
    assert models.mps_injectivity_length(spec, 5) is None


def test_aklt_system_coranks(aklt_system):
    assert all(aklt_system[w].corank == 4 for w in aklt_system.windows)
    assert min(len(w) for w in aklt_system.windows) == 2
    assert check_ff(aklt_system).ok
    assert check_equivariance(aklt_system, [(1,), (2,)], strict=False).ok


def test_trivial_mps_is_product_system():
    spec = models.MpsSpec(np.ones((1, 1, 1)))
    sys = models.mps_system(4, spec)
    assert all(sys[w].corank == 1 for w in sys.windows)


def test_mps_as_vbs_reproduces_mps(aklt, aklt_system):
    vspec = models.mps_as_vbs(aklt)
    for w in aklt_system.windows:
        kern = models.vbs_subspace(w, vspec)
        assert sub.opnorm(kern.complement().matrix - aklt_system[w].matrix) < 1e-9


def test_mps_system_rejects_unnormalized():
    with pytest.raises(ValueError):
        models.mps_system(4, models.MpsSpec(2 * models.aklt_spec().v))


@pytest.mark.parametrize("psi0", [[1, 0], [1, 1j], [0.3, -2.0]])
def test_product_system(psi0):
    sys = models.product_system(psi0, box((2, 2)))
    assert check_ff(sys).worst_residual < 1e-12
    assert check_proper(sys)
    assert all(sys[w].corank == 1 for w in sys.windows)
    with pytest.raises(ValueError):
        models.product_system([0, 0], interval(0, 2))

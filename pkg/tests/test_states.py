import numpy as np
import pytest

from ffproj import models, states
from ffproj import subspace as sub
from ffproj.ffsys import FFSystem, check_ff, system_meet
from ffproj.regions import interval, window_family


def test_window_state_validation():
    w = [interval(0, 1)]
    with pytest.raises(ValueError):
        states.WindowState({w[0]: np.diag([0.7, 0.7])}, 2)
    with pytest.raises(ValueError):
        states.WindowState({w[0]: np.diag([1.5, -0.5])}, 2)
    with pytest.raises(ValueError):
        states.WindowState({interval(0, 1): np.diag([1.0, 0.0]),
                            interval(0, 2): np.eye(4) / 4}, 2)


def test_from_global_marginals_consistent(aklt_system):
    omega = states.WindowState.ground_state_mixture(aklt_system)
    assert omega.marginal_residual() < 1e-12
    for w in omega.windows:
        assert np.isclose(np.trace(omega[w]).real, 1.0)


def test_mixture_is_basis_independent(aklt_system, rng):
    top = interval(0, 6)
    k = aklt_system.kernel(top).basis
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    a = states.WindowState.from_pure_space(k, top, [top], 3)
    b = states.WindowState.from_pure_space(k @ u, top, [top], 3)
    assert np.allclose(a[top], b[top])


def test_localized_unit_of_product_state():
    windows = window_family(interval(0, 4))
    omega = states.WindowState.product([1, 0], windows)
    trunc = states.localized_unit(omega)
    ref = models.product_system([1, 0], interval(0, 4))
    for w in windows:
        assert sub.opnorm(trunc.unit[w].matrix - ref[w].matrix) < 1e-12
    assert trunc.monotone


def test_localized_unit_of_maximally_mixed():
    windows = window_family(interval(0, 3))
    trunc = states.localized_unit(states.WindowState.maximally_mixed(windows, 2))
    assert all(trunc.unit[w].rank == 0 for w in windows)
    assert np.allclose(trunc.w.matrix, 0)


def test_localized_unit_aklt(aklt_system):
    omega = states.WindowState.ground_state_mixture(aklt_system)
    trunc = states.localized_unit(omega)
    assert trunc.monotone
    for w in aklt_system.windows:
        assert sub.opnorm(trunc.unit[w].matrix - aklt_system[w].matrix) < 1e-8
    assert check_ff(trunc.unit).ok
    # w_N is the weighted sum along the ladder
    assert len(trunc.ladder) == 5 and trunc.ladder[-1] == interval(0, 6)
    assert np.isclose(np.trace(trunc.w.matrix).real,
                      sum(2.0**-m * aklt_system[w].rank * 3 ** (6 - len(w))
                          for m, w in enumerate(trunc.ladder, start=1)))


def test_ground_state_paths_agree(aklt_system, product_chain):
    omega = states.WindowState.ground_state_mixture(aklt_system)
    assert states.is_ff_ground_state(omega, aklt_system)
    assert states.is_ff_ground_state(omega, aklt_system, path="support")
    mixed = states.WindowState.maximally_mixed(aklt_system.windows, 3)
    assert not states.is_ff_ground_state(mixed, aklt_system)
    assert not states.is_ff_ground_state(mixed, aklt_system, path="support")
    prod = states.WindowState.product([1, 0], product_chain.windows)
    assert states.is_ff_ground_state(prod, product_chain)
    with pytest.raises(ValueError):
        states.is_ff_ground_state(prod, product_chain, path="nope")


def test_ground_state_window_mismatch(aklt_system):
    omega = states.WindowState.maximally_mixed([interval(0, 1)], 3)
    with pytest.raises(ValueError):
        states.is_ff_ground_state(omega, aklt_system)


def test_support_leq_and_heredity(aklt_system):
    windows = aklt_system.windows
    gs = states.WindowState.ground_state_mixture(aklt_system)
    k = aklt_system.kernel(interval(0, 6)).basis
    one = states.WindowState.from_pure_space(k[:, :1], interval(0, 6), windows, 3)
    mixed = states.WindowState.maximally_mixed(windows, 3)
    assert states.support_leq(gs, gs)
    assert states.support_leq(one, gs)
    assert states.support_leq(gs, mixed)
    assert not states.support_leq(mixed, gs)
    # a state supported inside a ground state is again a ground state
    assert states.is_ff_ground_state(one, aklt_system)


def test_product_vs_mixed_support():
    windows = window_family(interval(0, 3))
    prod = states.WindowState.product([0, 1], windows)
    mixed = states.WindowState.maximally_mixed(windows, 2)
    assert states.support_leq(prod, mixed)
    assert not states.support_leq(mixed, prod)


def twisted(unit, rng):
    """Same family with a random unitary applied on the top window only."""
    top = unit.windows[-1]
    a = rng.normal(size=(unit[top].dim,) * 2) + 1j * rng.normal(size=(unit[top].dim,) * 2)
    u, _ = np.linalg.qr(a)
    proj = dict(unit.proj)
    proj[top] = sub.Projector(u @ unit[top].matrix @ u.conj().T, top, unit.d)
    return FFSystem(proj, unit.d)


def test_property_f_residual(aklt_system, rng):
    trunc = states.localized_unit(states.WindowState.ground_state_mixture(aklt_system))
    assert states.property_f_residual(trunc.unit) < 1e-12
    assert states.property_f_residual(trunc.unit, depth=1) < 1e-12
    bad = twisted(trunc.unit, rng)
    assert states.property_f_residual(bad) > 0.1
    assert states.property_f_residual(bad, depth=1) < 1e-12


def test_ltqo_norm_basics(product_chain, aklt_system, rng):
    for w in product_chain.windows:
        a = sub.LocalOperator(rng.normal(size=(2, 2)), w.intersection(interval(0, 1)) or w, 2) \
            if interval(0, 1).issubset(w) else None
        if a is not None:
            assert states.ltqo_norm(product_chain, a, w) <= 1e-12
    one = sub.LocalOperator(np.eye(3), interval(2, 3), 3)
    assert states.ltqo_norm(aklt_system, one, interval(1, 4)) < 1e-12
    with pytest.raises(ValueError):
        states.ltqo_norm(aklt_system, one, interval(4, 6))


def test_ltqo_identity_kernel_error():
    sys = models.product_system([1, 0], interval(0, 2))
    proj = {w: sub.Projector.identity(w, 2) for w in sys.windows}
    full = FFSystem(proj, 2)
    with pytest.raises(ValueError):
        states.ltqo_norm(full, sub.LocalOperator(np.eye(2), interval(0, 1), 2), interval(0, 2))


def test_ltqo_aklt_decays_on_centered_windows(aklt_system):
    sz = sub.LocalOperator(np.diag([1.0, 0.0, -1.0]), interval(2, 3), 3)
    ladder = [interval(2, 4), interval(1, 4), interval(1, 5), interval(0, 5), interval(0, 6)]
    scan = states.ltqo_scan(aklt_system, {"z": sz}, ladder)
    norms = [v for _, _, v in scan.rows]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert not scan.unique_indicator
    assert set(scan.coranks.values()) == {4}


def test_ltqo_two_product_meet():
    s = system_meet(models.product_system([1, 0], interval(0, 4)),
                    models.product_system([0, 1], interval(0, 4)))
    a = sub.LocalOperator(np.diag([1.0, 0.0]), interval(0, 1), 2)
    for w in s.windows:
        if interval(0, 1).issubset(w):
            # kernel span{|0..0>, |1..1>}: compressed a = diag(1, 0), average 1/2
            assert np.isclose(states.ltqo_norm(s, a, w), 0.5)


def test_ltqo_scan_product_unique(product_chain):
    a = sub.LocalOperator(np.diag([1.0, -1.0]), interval(0, 1), 2)
    scan = states.ltqo_scan(product_chain, {"z": a}, [interval(0, n) for n in range(1, 6)])
    assert scan.unique_indicator
    assert all(v <= 1e-12 for _, _, v in scan.rows)
    assert scan.csv_rows()[0] == (1, "z", scan.rows[0][2], 1)
    with pytest.raises(ValueError):
        states.ltqo_scan(product_chain, {"z": a}, [interval(0, 2), interval(0, 2)])


def test_state_json_roundtrip(product_chain):
    omega = states.WindowState.product([1, 1j], product_chain.windows)
    back = states.WindowState.from_json(omega.to_json())
    for w in omega.windows:
        assert np.allclose(back[w], omega[w])

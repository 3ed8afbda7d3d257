"""Hot numerical kernels with a numba path and a pure-numpy path.

Every public kernel dispatches on ``backend``: ``"numba"``, ``"numpy"`` or
``None`` (numba if available and not disabled through the environment).
Both paths compute the same thing; the test-suite checks them against each
other and ``benchmarks/bench_kernels.py`` times them.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

__all__ = ["amplitude_tensor", "word_products", "default_backend"]


def default_backend():
    return "numba" if HAVE_NUMBA else "numpy"


def _resolve(backend):
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is disabled or missing")
    return backend


# --------------------------------------------------------------------------
# valence-bond amplitudes


@njit(cache=True)
def _amplitude_numba(gamma_flat, gamma_strides, bond_legs, radices):
    n_legs = radices.shape[0]
    total = 1
    for r in radices:
        total *= r
    out = np.empty(total, dtype=np.complex128)
    digits = np.zeros(n_legs, dtype=np.int64)
    n_bonds, arity = bond_legs.shape
    for flat in range(total):
        amp = 1.0 + 0.0j
        for b in range(n_bonds):
            idx = 0
            for t in range(arity):
                idx += digits[bond_legs[b, t]] * gamma_strides[t]
            amp *= gamma_flat[idx]
            if amp == 0:
                break
        out[flat] = amp
        # odometer step, last leg fastest (C order)
        j = n_legs - 1
        while j >= 0:
            digits[j] += 1
            if digits[j] < radices[j]:
                break
            digits[j] = 0
            j -= 1
    return out


def _amplitude_numpy(gamma, bond_legs, radices):
    n_legs = len(radices)
    out = np.ones(tuple(radices), dtype=np.complex128)
    letters = [chr(ord("a") + i) if i < 26 else chr(ord("A") + i - 26) for i in range(n_legs)]
    target = "".join(letters)
    for legs in bond_legs:
        sub = "".join(letters[j] for j in legs)
        out = np.einsum(f"{target},{sub}->{target}", out, gamma)
    return out.reshape(-1)


def amplitude_tensor(gamma, bond_legs, radices, backend=None):
    """Product of bond amplitudes over every configuration of the bonded legs.

    Parameters
    ----------
    gamma : ndarray
        Bond amplitude with one axis per generator, ``gamma[x_0, ..., x_k]``.
    bond_legs : int array, shape (n_bonds, n_generators)
        For each bond, the leg feeding each axis of ``gamma``. Legs may repeat
        across bonds but not within one bond.
    radices : int array
        Number of values carried by each leg.

    Returns
    -------
    ndarray of shape ``tuple(radices)`` with entry ``prod_b gamma[x[bond_legs[b]]]``.
    """
    gamma = np.ascontiguousarray(gamma, dtype=np.complex128)
    bond_legs = np.asarray(bond_legs, dtype=np.int64).reshape(-1, gamma.ndim)
    radices = np.asarray(radices, dtype=np.int64)
    if len(radices) > 52 and _resolve(backend) == "numpy":
        raise ValueError("numpy amplitude path supports at most 52 legs")
    if _resolve(backend) == "numba":
        strides = np.array([s // gamma.itemsize for s in gamma.strides], dtype=np.int64)
        flat = _amplitude_numba(gamma.reshape(-1), strides, bond_legs, radices)
    else:
        flat = _amplitude_numpy(gamma, bond_legs, radices)
    return flat.reshape(tuple(int(r) for r in radices))


# --------------------------------------------------------------------------
# matrix-product words


@njit(cache=True)
def _words_numba(v, n):
    d, k, _ = v.shape
    out = np.empty((d**n, k, k), dtype=np.complex128)
    out[:d] = v
    size = d
    # level by level: word (prefix, mu) = v[mu] @ word(prefix); mu is the
    # fastest digit, so mu_1 stays the slowest
    for _ in range(1, n):
        for p in range(size - 1, -1, -1):
            prev = out[p].copy()
            for m in range(d):
                dst = p * d + m
                for a in range(k):
                    for c in range(k):
                        s = 0j
                        for b in range(k):
                            s += v[m, a, b] * prev[b, c]
                        out[dst, a, c] = s
        size *= d
    return out


def _words_numpy(v, n):
    d, k, _ = v.shape
    words = v.copy()
    for _ in range(n - 1):
        words = np.einsum("mab,Pbc->Pmac", v, words).reshape(-1, k, k)
    return words


def word_products(v, n, backend=None):
    """All ordered products ``v[mu_n] @ ... @ v[mu_1]``.

    The first index of the result enumerates ``(mu_1, ..., mu_n)`` in C order,
    i.e. ``mu_1`` is the slowest digit.
    """
    v = np.ascontiguousarray(v, dtype=np.complex128)
    if n < 1:
        raise ValueError("word length must be >= 1")
    if _resolve(backend) == "numba":
        return _words_numba(v, int(n))
    return _words_numpy(v, int(n))

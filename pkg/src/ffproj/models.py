"""Constructors of frustration-free systems.

Three families are provided:

* valence-bond / PEPS-type systems built from bond amplitudes on the
  decorated lattice ``Z^d x T`` (:func:`vbs_system`),
* matrix-product systems on chains, ``p^perp = Ran Gamma_n``
  (:func:`mps_system`),
* product-state systems, the simplest baseline (:func:`product_system`).
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from . import subspace as sub
from .ffsys import FFSystem
from .regions import Region, interval, window_family

__all__ = [
    "VbsSpec",
    "MpsSpec",
    "ProductSpec",
    "InteractionSpec",
    "CompositeSpec",
    "lambda_T",
    "lambda_B",
    "vbs_amplitude",
    "vbs_subspace",
    "vbs_system",
    "mps_as_vbs",
    "transfer_matrix",
    "mps_residuals",
    "mps_gamma_matrix",
    "mps_gamma",
    "mps_injectivity_length",
    "mps_subspace",
    "mps_system",
    "aklt_spec",
    "product_vector",
    "product_system",
    "MAX_BOND_CONFIGS",
]

MAX_BOND_CONFIGS = 2**20


# --------------------------------------------------------------------------
# specs


@dataclass(frozen=True, eq=False)
class VbsSpec:
    """Valence-bond data.

    Parameters
    ----------
    generators : sequence of lattice vectors
        ``T``; the first entry must be the zero vector.
    psi : ndarray, shape (|J(t_0)|, ..., |J(t_k)|, d)
        Physical vector attached to each index tuple of a site.
    gamma : ndarray, shape (|J(t_0)|, ..., |J(t_k)|)
        Bond amplitude; not identically zero.
    """

    generators: tuple
    psi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        gens = tuple(tuple(int(c) for c in (g if hasattr(g, "__len__") else (g,)))
                     for g in self.generators)
        psi = np.asarray(self.psi, dtype=complex)
        gamma = np.asarray(self.gamma, dtype=complex)
        if not gens or any(gens[0]):
            raise ValueError("the first generator must be the zero vector")
        if len(set(gens)) != len(gens) or len({len(g) for g in gens}) != 1:
            raise ValueError("generators must be distinct vectors of one dimension")
        if psi.ndim != len(gens) + 1 or gamma.shape != psi.shape[:-1]:
            raise ValueError("psi must have shape (*J, d) and gamma shape J")
        if not np.abs(gamma).sum() > 0:
            raise ValueError("bond amplitudes are all zero")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "gamma", gamma)

    @property
    def J(self):
        return self.psi.shape[:-1]

    @property
    def d(self):
        return self.psi.shape[-1]

    @property
    def lattice_dim(self):
        return len(self.generators[0])


@dataclass(frozen=True, eq=False)
class MpsSpec:
    """Matrix-product data ``v[mu]`` (shape ``(d, k, k)``) and ``rho``.

    ``rho`` defaults to the fixed point of ``B -> sum_mu v_mu^* B v_mu``,
    normalized to unit trace.
    """

    v: np.ndarray
    rho: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError("v must have shape (d, k, k)")
        object.__setattr__(self, "v", v)
        if self.rho is None:
            object.__setattr__(self, "rho", _dual_fixed_point(v))
        else:
            object.__setattr__(self, "rho", np.asarray(self.rho, dtype=complex))

    @property
    def d(self):
        return self.v.shape[0]

    @property
    def k(self):
        return self.v.shape[1]


@dataclass(frozen=True, eq=False)
class ProductSpec:
    psi0: np.ndarray

    def __post_init__(self):
        psi0 = np.asarray(self.psi0, dtype=complex).reshape(-1)
        if not np.linalg.norm(psi0) > 0:
            raise ValueError("product vector must be nonzero")
        object.__setattr__(self, "psi0", psi0)

    @property
    def d(self):
        return self.psi0.size


@dataclass(frozen=True, eq=False)
class InteractionSpec:
    """An explicit Hermitian interaction ``q`` on the range ``delta``."""

    q: np.ndarray
    delta: Region
    d: int

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex)
        if q.shape != (self.d ** len(self.delta),) * 2:
            raise ValueError("interaction matrix does not match its range")
        object.__setattr__(self, "q", q)


@dataclass(frozen=True, eq=False)
class CompositeSpec:
    """Windowwise meet or join of the systems of several specs."""

    op: str
    parts: tuple

    def __post_init__(self):
        if self.op not in ("meet", "join"):
            raise ValueError("composite op must be 'meet' or 'join'")
        if len(self.parts) < 2:
            raise ValueError("composite needs at least two parts")
        object.__setattr__(self, "parts", tuple(self.parts))


# --------------------------------------------------------------------------
# valence bonds


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def lambda_T(lam, generators):
    """Sites ``g`` of ``lam`` with ``g + t`` in ``lam`` for every generator."""
    gens = [tuple(g) if hasattr(g, "__len__") else (g,) for g in generators]
    return Region(tuple(s for s in lam.sites if all(_add(s, t) in lam for t in gens)), lam.dim)


def lambda_B(lam, generators):
    """Decorated sites ``(g + t, t_index)`` bonded by some ``g`` in ``lambda_T``.

    Returned sorted by site, then generator index.
    """
    gens = [tuple(g) if hasattr(g, "__len__") else (g,) for g in generators]
    legs = {(_add(g, t), i) for g in lambda_T(lam, gens).sites for i, t in enumerate(gens)}
    return tuple(sorted(legs))


def vbs_amplitude(config, lam, spec):
    """``prod_{g in lambda_T} gamma(x_{g+t_0}(t_0), ..., x_{g+t_k}(t_k))``.

    ``config`` maps decorated sites ``(site, t_index)`` to index values and must
    cover ``lambda_B``.
    """
    lt = lambda_T(lam, spec.generators)
    if not len(lt):
        raise ValueError("lambda_T is empty: no amplitude is defined")
    missing = [leg for leg in lambda_B(lam, spec.generators) if leg not in config]
    if missing:
        raise KeyError(f"configuration does not cover {missing[:3]}")
    amp = 1.0 + 0j
    for g in lt.sites:
        idx = tuple(config[(_add(g, t), i)] for i, t in enumerate(spec.generators))
        amp *= spec.gamma[idx]
    return amp


def _vbs_basis(lam, spec, backend=None):
    """Orthonormal basis of ``V_lam``, or ``None`` when ``lambda_T`` is empty."""
    gens = spec.generators
    lt = lambda_T(lam, gens)
    if not len(lt):
        return None
    sub.check_cap(len(lam), spec.d)
    bonded = lambda_B(lam, gens)
    pos = {leg: i for i, leg in enumerate(bonded)}
    radices = [spec.J[t] for _, t in bonded]
    if math.prod(radices) > MAX_BOND_CONFIGS:
        raise sub.CapExceededError(
            f"{math.prod(radices)} bond configurations exceed {MAX_BOND_CONFIGS}")
    bond_legs = [[pos[(_add(g, t), i)] for i, t in enumerate(gens)] for g in lt.sites]
    amp = kernels.amplitude_tensor(spec.gamma, bond_legs, radices, backend)

    d, n_t = spec.d, len(gens)
    # axes of r: physical legs so far, unconsumed bonded legs, free-index span
    r = amp.reshape((1,) + amp.shape + (1,))
    remaining = list(range(len(bonded)))
    for site in lam.sites:
        b_ts = [t for t in range(n_t) if (site, t) in pos]
        f_ts = [t for t in range(n_t) if (site, t) not in pos]
        nb = math.prod(spec.J[t] for t in b_ts)
        nf = math.prod(spec.J[t] for t in f_ts)
        psi = spec.psi.transpose([n_t] + b_ts + f_ts).reshape(d, nb, nf)

        mine = [pos[(site, t)] for t in b_ts]
        axes_b = [1 + remaining.index(leg) for leg in mine]
        keep = [leg for leg in remaining if leg not in mine]
        axes_k = [1 + remaining.index(leg) for leg in keep]
        rest_shape = tuple(r.shape[a] for a in axes_k)
        nphys, nfree = r.shape[0], r.shape[-1]
        rt = r.transpose([0] + axes_k + [r.ndim - 1] + axes_b)
        rt = rt.reshape(nphys, math.prod(rest_shape), nfree, nb)
        new = np.einsum("prfb,dbe->pdrfe", rt, psi)
        mat = new.reshape(-1, nfree * nf)
        # only the column span matters: compress the free-index axis
        mat = sub.orth(mat)
        r = mat.reshape((nphys * d,) + rest_shape + (mat.shape[1],))
        remaining = keep
    return sub.orth(r.reshape(d ** len(lam), -1))


def vbs_subspace(lam, spec, tol=sub.DEFAULT_TOL, backend=None):
    """Projector onto ``V_lam`` (the whole space when ``lambda_T`` is empty)."""
    basis = _vbs_basis(lam, spec, backend)
    if basis is None:
        return sub.Projector.identity(lam, spec.d, tol)
    return sub.Projector.from_basis(basis, lam, spec.d, tol)


def vbs_system(bounding, spec, tol=sub.DEFAULT_TOL, windows=None, backend=None):
    """``p_lam = 1 - <V_lam>`` over every sub-box of ``bounding``."""
    windows = window_family(bounding) if windows is None else windows
    proj = {}
    for lam in windows:
        kern = vbs_subspace(lam, spec, tol, backend)
        proj[lam] = kern.complement()
    return FFSystem(proj, spec.d, tol, spec)


def mps_as_vbs(spec):
    """The valence-bond data reproducing the matrix-product kernel."""
    psi = np.moveaxis(spec.v, 0, -1)  # psi[i, j, mu] = v_mu[i, j]
    return VbsSpec(((0,), (1,)), psi, np.eye(spec.k))


# --------------------------------------------------------------------------
# matrix products


def transfer_matrix(v):
    """Matrix of ``B -> sum_mu v_mu B v_mu^*`` on row-major ``vec(B)``."""
    return sum(np.kron(m, m.conj()) for m in v)


def _dual_fixed_point(v):
    e_dual = transfer_matrix(v).conj().T
    w, vec = np.linalg.eig(e_dual)
    i = int(np.argmin(abs(w - 1)))
    k = v.shape[1]
    rho = vec[:, i].reshape(k, k)
    rho = (rho + rho.conj().T) / 2
    tr = np.trace(rho)
    if abs(tr) < 1e-14:
        return rho
    return rho / tr


def mps_residuals(spec):
    """Residuals of the two normalization identities and the transfer spectrum.

    Returns a dict with ``isometry`` = |sum v v^* - 1|, ``fixed_point`` =
    |sum v^* rho v - rho|, ``unit_multiplicity`` = number of transfer
    eigenvalues within 1e-8 of 1, and ``rho_invertible``.
    """
    v, rho = spec.v, spec.rho
    iso = sub.opnorm(sum(m @ m.conj().T for m in v) - np.eye(spec.k))
    fix = sub.opnorm(sum(m.conj().T @ rho @ m for m in v) - rho)
    w = np.linalg.eigvals(transfer_matrix(v))
    mult = int(np.count_nonzero(abs(w - 1) < 1e-8))
    inv = sub.numerical_rank(np.linalg.svd(rho, compute_uv=False)) == spec.k
    return {"isometry": iso, "fixed_point": fix, "unit_multiplicity": mult,
            "rho_invertible": bool(inv)}


def mps_gamma_matrix(n, spec, backend=None):
    """Matrix ``G`` of ``Gamma_n``: ``Gamma_n(B) = G @ B.ravel(order="F")``."""
    sub.check_cap(n, spec.d)
    words = kernels.word_products(spec.v, n, backend)
    return words.reshape(spec.d**n, spec.k * spec.k)


def mps_gamma(n, b, spec, backend=None):
    """``sum_mu psi_mu1 ⊗ ... ⊗ psi_mun Tr(v_mun ... v_mu1 B)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    b = np.asarray(b, dtype=complex)
    return mps_gamma_matrix(n, spec, backend) @ b.ravel(order="F")


def mps_injectivity_length(spec, n_max):
    """Smallest ``n <= n_max`` with ``Gamma_n`` injective, else ``None``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    for n in range(1, n_max + 1):
        g = mps_gamma_matrix(n, spec)
        if g.shape[0] < g.shape[1]:
            continue
        if sub.numerical_rank(np.linalg.svd(g, compute_uv=False)) == spec.k**2:
            return n
    return None


def mps_subspace(region, spec, tol=sub.DEFAULT_TOL):
    """Projector onto ``Ran Gamma_{|region|}`` placed on an interval ``region``."""
    g = mps_gamma_matrix(len(region), spec)
    return sub.Projector.from_basis(sub.orth(g), region, spec.d, tol)


def mps_system(n_sites, spec, tol=sub.DEFAULT_TOL, start=0, n_max=None, check=True):
    """Matrix-product system on every interval of ``[start, start + n_sites)``
    whose length is at least the injectivity length."""
    if check:
        res = mps_residuals(spec)
        if res["isometry"] > tol or res["fixed_point"] > tol or res["unit_multiplicity"] != 1:
            raise ValueError(f"matrix-product data violates its normalization: {res}")
    ell = mps_injectivity_length(spec, n_max or n_sites)
    if ell is None:
        raise ValueError("Gamma_n is not injective for any n up to the chain length")
    proj = {}
    for length in range(ell, n_sites + 1):
        kern = mps_subspace(interval(0, length), spec, tol)
        p = kern.complement()
        for a in range(start, start + n_sites - length + 1):
            lam = interval(a, a + length)
            proj[lam] = sub.Projector(p.matrix, lam, spec.d, tol, p.basis)
    return FFSystem(proj, spec.d, tol, spec)


def aklt_spec():
    """Spin-1 valence-bond chain as matrix-product data (d = 3, k = 2).

    Each site projects two virtual spin-1/2's onto spin 1; neighbouring
    virtual spins form singlets. The overall scale is fixed by
    ``sum_mu v_mu v_mu^* = 1``.
    """
    up, dn = np.eye(2)
    triplet = [np.kron(up, up),
               (np.kron(up, dn) + np.kron(dn, up)) / np.sqrt(2),
               np.kron(dn, dn)]
    singlet = np.array([[0.0, 1.0], [-1.0, 0.0]]) / np.sqrt(2)
    v = np.array([t.reshape(2, 2) @ singlet for t in triplet], dtype=complex)
    scale = np.trace(sum(m @ m.conj().T for m in v)).real / 2
    return MpsSpec(v / np.sqrt(scale))


# --------------------------------------------------------------------------
# product states


def product_vector(psi0, n):
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    out = np.ones(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, psi0)
    return out


def product_system(psi0, bounding, tol=sub.DEFAULT_TOL, windows=None):
    """``p_lam = 1 - |psi0^lam><psi0^lam|`` over every sub-box of ``bounding``."""
    spec = psi0 if isinstance(psi0, ProductSpec) else ProductSpec(psi0)
    windows = window_family(bounding) if windows is None else windows
    proj = {}
    for lam in windows:
        sub.check_cap(len(lam), spec.d)
        vec = product_vector(spec.psi0, len(lam))
        proj[lam] = sub.Projector.from_basis(vec[:, None], lam, spec.d, tol).complement()
    return FFSystem(proj, spec.d, tol, spec)

"""Projector and subspace arithmetic on tensor-product Hilbert spaces.

All operators are dense complex matrices acting on ``(C^d)^{\\otimes |region|}``
with tensor legs in the canonical site order of their region. One rank policy
is used everywhere: a singular value (or eigenvalue) counts as nonzero when it
exceeds ``max(RANK_RTOL * largest, RANK_ATOL)``.
"""
from dataclasses import dataclass, field
import os

import numpy as np

from .regions import Region

__all__ = [
    "RANK_RTOL",
    "RANK_ATOL",
    "DEFAULT_TOL",
    "CapExceededError",
    "max_hilbert_dim",
    "check_cap",
    "numerical_rank",
    "orth",
    "null_space",
    "opnorm",
    "LocalOperator",
    "Projector",
    "proj_from_span",
    "meet",
    "join",
    "leq",
    "embed",
    "embed_matrix",
    "apply_local",
    "partial_trace",
    "leg_permutation",
    "matrix_to_json",
    "matrix_from_json",
]

RANK_RTOL = 1e-10
RANK_ATOL = 1e-12
DEFAULT_TOL = 1e-9

# 2**14: fourteen spin-1/2 sites, eight spin-1 sites.
_DEFAULT_MAX_DIM = 16384


class CapExceededError(ValueError):
    """A region's Hilbert space is larger than the configured cap."""


def max_hilbert_dim():
    return int(os.environ.get("FFPROJ_MAX_DIM", _DEFAULT_MAX_DIM))


def check_cap(n_sites, d):
    dim = d**n_sites
    if dim > max_hilbert_dim():
        raise CapExceededError(
            f"Hilbert space of {n_sites} sites with d={d} has dimension {dim}, "
            f"above the cap {max_hilbert_dim()} (set FFPROJ_MAX_DIM to change)"
        )
    return dim


def numerical_rank(values, rtol=RANK_RTOL, atol=RANK_ATOL):
    values = np.abs(np.asarray(values))
    if values.size == 0:
        return 0
    cut = max(rtol * values.max(), atol)
    return int(np.count_nonzero(values > cut))


def orth(a, rtol=RANK_RTOL, atol=RANK_ATOL):
    """Orthonormal basis (as columns) of the column space of ``a``."""
    a = np.asarray(a)
    if a.size == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, : numerical_rank(s, rtol, atol)]


def null_space(a, rtol=RANK_RTOL, atol=RANK_ATOL):
    """Orthonormal basis of the (right) null space of ``a``."""
    a = np.atleast_2d(np.asarray(a))
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    # a thin SVD already yields every right singular vector when a is tall
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < n)
    r = numerical_rank(s, rtol, atol)
    return vh[r:].conj().T


def opnorm(a):
    """Spectral norm."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _site_dim(n_rows, n_sites):
    if n_sites == 0:
        return 1
    d = round(n_rows ** (1.0 / n_sites))
    if d**n_sites != n_rows:
        raise ValueError(f"matrix size {n_rows} is not d^{n_sites}")
    return d


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """A dense operator supported on ``region``."""

    matrix: np.ndarray
    region: Region
    d: int = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        d = self.d if self.d is not None else _site_dim(m.shape[0], len(self.region))
        if d ** len(self.region) != m.shape[0]:
            raise ValueError(
                f"matrix of size {m.shape[0]} does not match d^|region| = {d}^{len(self.region)}"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "d", int(d))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def dag(self):
        return LocalOperator(self.matrix.conj().T, self.region, self.d)

    def __matmul__(self, other):
        if other.region != self.region:
            raise ValueError("operators live on different regions")
        return LocalOperator(self.matrix @ other.matrix, self.region, self.d)

    def to_json(self):
        return {"region": self.region.to_json(), "d": self.d, **matrix_to_json(self.matrix)}

    @classmethod
    def from_json(cls, data):
        region = Region.from_json(data["region"])
        return cls(matrix_from_json(data), region, data.get("d"))


@dataclass(frozen=True, eq=False)
class Projector:
    """An orthogonal projector on the Hilbert space of ``region``.

    The orthonormal basis of the range is kept alongside the matrix because
    most downstream computations only need the range.
    """

    matrix: np.ndarray
    region: Region
    d: int = None
    tol: float = DEFAULT_TOL
    basis: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.d if self.d is not None else _site_dim(m.shape[0], len(self.region))
        if m.shape != (d ** len(self.region),) * 2:
            raise ValueError("projector matrix does not match its region")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "d", int(d))
        if self.basis is None:
            w, v = np.linalg.eigh((m + m.conj().T) / 2)
            object.__setattr__(self, "basis", v[:, w > 0.5])

    @classmethod
    def from_basis(cls, basis, region, d, tol=DEFAULT_TOL):
        """Projector onto the span of orthonormal columns ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        dim = d ** len(region)
        if basis.ndim != 2 or basis.shape[0] != dim:
            raise ValueError(f"basis must have {dim} rows")
        return cls(basis @ basis.conj().T, region, d, tol, basis)

    @classmethod
    def zero(cls, region, d, tol=DEFAULT_TOL):
        return cls.from_basis(np.zeros((d ** len(region), 0)), region, d, tol)

    @classmethod
    def identity(cls, region, d, tol=DEFAULT_TOL):
        return cls.from_basis(np.eye(d ** len(region)), region, d, tol)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def rank(self):
        return self.basis.shape[1]

    @property
    def corank(self):
        return self.dim - self.rank

    def complement(self):
        """``1 - P``."""
        if self.rank == 0:
            comp = np.eye(self.dim, dtype=complex)
        elif self.rank == self.dim:
            comp = np.zeros((self.dim, 0), dtype=complex)
        else:
            comp = null_space(self.basis.conj().T)
        return Projector.from_basis(comp, self.region, self.d, self.tol)

    def check(self, tol=None):
        """Residuals of the projector identities; raises if above ``tol``."""
        tol = self.tol if tol is None else tol
        m = self.matrix
        herm = opnorm(m - m.conj().T)
        idem = opnorm(m @ m - m)
        if herm > tol or idem > tol:
            raise ValueError(f"not a projector: |P-P^*|={herm:.2e}, |P^2-P|={idem:.2e}")
        return herm, idem

    def as_operator(self):
        return LocalOperator(self.matrix, self.region, self.d)

    def to_json(self):
        return {
            "region": self.region.to_json(),
            "d": self.d,
            "tol": self.tol,
            **matrix_to_json(self.matrix),
        }

    @classmethod
    def from_json(cls, data):
        region = Region.from_json(data["region"])
        return cls(matrix_from_json(data), region, data.get("d"), data.get("tol", DEFAULT_TOL))


def proj_from_span(vectors, region, d, tol=DEFAULT_TOL, rtol=RANK_RTOL):
    """Orthogonal projector onto the span of ``vectors``."""
    dim = d ** len(region)
    vecs = np.asarray(vectors, dtype=complex)
    if vecs.ndim == 1:
        vecs = vecs[None, :]
    if vecs.size and vecs.shape[1] != dim:
        raise ValueError(f"vectors must have length {dim}, got {vecs.shape[1]}")
    if vecs.size == 0:
        return Projector.zero(region, d, tol)
    return Projector.from_basis(orth(vecs.T, rtol), region, d, tol)


def _same_region(p, q):
    if p.region != q.region or p.d != q.d:
        raise ValueError("projectors live on different regions")


def meet(p, q):
    """Projector onto ``Ran P ∩ Ran Q``.

    Computed as the null space of ``(1-P) + (1-Q)``.
    """
    _same_region(p, q)
    s = 2 * np.eye(p.dim) - p.matrix - q.matrix
    w, v = np.linalg.eigh((s + s.conj().T) / 2)
    cut = max(RANK_RTOL * max(abs(w).max(), 1.0), RANK_ATOL)
    return Projector.from_basis(v[:, w <= cut], p.region, p.d, max(p.tol, q.tol))


def join(p, q):
    """Projector onto ``Ran P + Ran Q``, as ``1 - meet(1-P, 1-Q)``."""
    _same_region(p, q)
    return meet(p.complement(), q.complement()).complement()


def leq(p, q, tol=None):
    """``P <= Q``, tested as ``|PQ - P| <= tol``."""
    _same_region(p, q)
    tol = max(p.tol, q.tol) if tol is None else tol
    # |PQ - P| = |P (1 - Q)|, evaluated on the range of P
    if p.rank == 0:
        return True
    resid = p.basis.conj().T @ q.matrix - p.basis.conj().T
    return opnorm(resid) <= tol


# --------------------------------------------------------------------------
# tensor-leg bookkeeping


def leg_permutation(sub, full):
    """Positions in ``full`` of the sites of ``sub`` followed by the rest.

    Returns ``(perm, rest)`` with ``perm`` the order in which canonical legs
    of ``full`` appear in ``sub ⊗ rest`` and ``rest`` the complement region.
    """
    if not sub.issubset(full):
        raise ValueError(f"{sub} is not contained in {full}")
    rest = full.difference(sub)
    perm = [full.index(s) for s in sub.sites] + [full.index(s) for s in rest.sites]
    return perm, rest


def embed_matrix(matrix, sub, full, d):
    """Matrix of ``a ⊗ 1`` on ``full`` for ``a`` acting on ``sub``."""
    perm, rest = leg_permutation(sub, full)
    n = len(full)
    check_cap(n, d)
    big = np.kron(np.asarray(matrix, dtype=complex), np.eye(d ** len(rest)))
    if perm == list(range(n)):
        return big
    # legs of big are in order perm; move them to canonical order
    inv = np.argsort(perm)
    t = big.reshape((d,) * (2 * n))
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(d**n, d**n)


def embed(a, into):
    """Embed a local operator into a larger region (tensoring identities)."""
    return LocalOperator(embed_matrix(a.matrix, a.region, into, a.d), into, a.d)


def apply_local(matrix, sub, full, d, vectors):
    """Apply ``a ⊗ 1`` (``a`` on ``sub``) to the columns of ``vectors`` on ``full``."""
    perm, rest = leg_permutation(sub, full)
    n, k = len(full), len(sub)
    vecs = np.asarray(vectors, dtype=complex)
    cols = vecs.shape[1] if vecs.ndim == 2 else None
    t = vecs.reshape((d,) * n + ((cols,) if cols is not None else ()))
    extra = [n] if cols is not None else []
    t = t.transpose(perm + extra).reshape(d**k, -1)
    t = np.asarray(matrix) @ t
    t = t.reshape((d,) * n + ((cols,) if cols is not None else ()))
    inv = list(np.argsort(perm))
    t = t.transpose(inv + extra)
    return t.reshape(vecs.shape)


def partial_trace(rho, region, keep, d):
    """Reduce an operator on ``region`` to the sites of ``keep``."""
    perm, rest = leg_permutation(keep, region)
    n = len(region)
    t = np.asarray(rho).reshape((d,) * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    dk, dr = d ** len(keep), d ** len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("ajbj->ab", t)


# --------------------------------------------------------------------------
# JSON matrix exchange format: row-major list of [re, im] pairs


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    rows, cols = m.shape
    flat = m.reshape(-1)
    return {
        "rows": int(rows),
        "cols": int(cols),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(data):
    rows, cols = int(data["rows"]), int(data["cols"])
    arr = np.asarray(data["data"], dtype=float).reshape(rows * cols, 2)
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)

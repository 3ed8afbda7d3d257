"""Finite-volume Hamiltonians assembled from translates of an interaction.

Normalization follows ``h_lam = sum_g alpha_g(q - eps_lam(q) 1)`` with
``eps_lam`` fixed by ``min Spec(h_lam) = 0``; ``eps_lam`` is therefore the
per-term shift, and the model is frustration free on ``lam`` exactly when
``eps_lam(q) = min Spec(q)``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .ffsys import FFSystem, check_ff
from .regions import enumerate_translates, shell, translate

__all__ = [
    "Interaction",
    "Hamiltonian",
    "FFModelReport",
    "zero_threshold",
    "raw_sum",
    "assemble",
    "is_ff_model",
    "assemble_from_system",
    "supporting_projection",
    "spectral_gap",
    "derivation_action",
    "supporting_system",
]


@dataclass(frozen=True, eq=False)
class Interaction:
    """Hermitian ``q`` supported on its range ``delta``."""

    q: sub.LocalOperator
    tol: float = sub.DEFAULT_TOL

    def __post_init__(self):
        m = self.q.matrix
        if sub.opnorm(m - m.conj().T) > self.tol:
            raise ValueError("interaction is not Hermitian")

    @property
    def delta(self):
        return self.q.region

    @property
    def d(self):
        return self.q.d

    @classmethod
    def from_matrix(cls, matrix, delta, d=None, tol=sub.DEFAULT_TOL):
        return cls(sub.LocalOperator(matrix, delta, d), tol)


@dataclass(eq=False)
class Hamiltonian:
    h: sub.LocalOperator
    epsilon: float
    n_terms: int
    spectrum: np.ndarray
    eigvecs: np.ndarray = field(repr=False, default=None)

    @property
    def region(self):
        return self.h.region

    @property
    def shift(self):
        """Total constant removed from the raw sum, ``n_terms * epsilon``."""
        return self.n_terms * self.epsilon


def zero_threshold(spectrum):
    """Eigenvalues at or below this count as zero modes."""
    spectrum = np.asarray(spectrum)
    scale = max(np.abs(spectrum).max(initial=0.0), 1.0)
    return 100 * np.finfo(float).eps * scale


def raw_sum(q, lam):
    """``sum_g alpha_g(q)`` over every translate of the range inside ``lam``."""
    shifts = enumerate_translates(q.delta, lam)
    if not shifts:
        raise ValueError(f"no translate of {q.delta} fits in {lam}")
    sub.check_cap(len(lam), q.d)
    total = np.zeros((q.d ** len(lam),) * 2, dtype=complex)
    for g in shifts:
        total += sub.embed_matrix(q.q.matrix, translate(q.delta, g), lam, q.d)
    return total, len(shifts)


def assemble(q, lam):
    """Assemble and normalize ``h_lam(q)`` by exact diagonalization."""
    total, n_terms = raw_sum(q, lam)
    total = (total + total.conj().T) / 2
    w, v = np.linalg.eigh(total)
    eps = float(w[0]) / n_terms
    h = total - w[0] * np.eye(total.shape[0])
    return Hamiltonian(sub.LocalOperator(h, lam, q.d), eps, n_terms, w - w[0], v)


@dataclass
class FFModelReport:
    ok: bool
    min_spec_q: float
    epsilon: dict
    violations: list
    tol: float

    def to_json(self):
        return {
            "ok": bool(self.ok),
            "tol": self.tol,
            "min_spec_q": self.min_spec_q,
            "windows": [{"window": w.to_json(), "epsilon": e} for w, e in self.epsilon.items()],
            "violations": [w.to_json() for w in self.violations],
        }


def is_ff_model(q, windows, tol=sub.DEFAULT_TOL):
    """Check ``eps_lam(q) = min Spec(q)`` on every window that fits a translate."""
    q_min = float(np.linalg.eigvalsh(q.q.matrix)[0])
    eps, bad = {}, []
    for lam in windows:
        if not enumerate_translates(q.delta, lam):
            continue
        e = assemble(q, lam).epsilon
        eps[lam] = e
        if abs(e - q_min) > tol:
            bad.append(lam)
    return FFModelReport(not bad, q_min, eps, bad, tol)


def assemble_from_system(sys, delta, lam, tol=None):
    """``sum_g p_{delta + g}`` on ``lam`` for a frustration-free system.

    The interaction windows ``delta + g`` must be stored in ``sys``. The
    frustration-freeness of the involved windows (and of ``lam`` if stored) is
    verified first; the kernel is checked to contain ``Ran p_lam^perp``.
    """
    tol = sys.tol if tol is None else tol
    shifts = enumerate_translates(delta, lam)
    if not shifts:
        raise ValueError(f"no translate of {delta} fits in {lam}")
    windows = [translate(delta, g) for g in shifts]
    missing = [w for w in windows if w not in sys]
    if missing:
        raise KeyError(f"interaction windows {missing[:3]} are not stored")
    involved = windows + ([lam] if lam in sys else [])
    rep = check_ff(sys.restrict(involved), tol)
    if not rep.ok:
        raise ValueError(f"system is not frustration free: residual {rep.worst_residual:.2e}")
    sub.check_cap(len(lam), sys.d)
    total = np.zeros((sys.d ** len(lam),) * 2, dtype=complex)
    for w in windows:
        total += sub.embed_matrix(sys[w].matrix, w, lam, sys.d)
    total = (total + total.conj().T) / 2
    wv, v = np.linalg.eigh(total)
    ham = Hamiltonian(sub.LocalOperator(total - wv[0] * np.eye(len(wv)), lam, sys.d),
                      float(wv[0]) / len(windows), len(windows), wv - wv[0], v)
    if lam in sys:
        k = sys.kernel(lam).basis
        if k.shape[1] and sub.opnorm(ham.h.matrix @ k) > tol * max(1, len(windows)):
            raise ValueError("Ran p_lam^perp is not annihilated by the assembled Hamiltonian")
    return ham


def supporting_projection(ham, tol=sub.DEFAULT_TOL):
    """Spectral projector of ``h`` onto ``Spec h \\ {0}``."""
    cut = zero_threshold(ham.spectrum)
    v = ham.eigvecs
    if v is None:
        w, v = np.linalg.eigh(ham.h.matrix)
    else:
        w = ham.spectrum
    return sub.Projector.from_basis(v[:, w > cut], ham.region, ham.h.d, tol)


def supporting_system(q, windows, tol=sub.DEFAULT_TOL):
    """Supporting projections of ``h_lam(q)`` over ``windows``."""
    proj = {lam: supporting_projection(assemble(q, lam), tol)
            for lam in windows if enumerate_translates(q.delta, lam)}
    return FFSystem(proj, q.d, tol, q)


def spectral_gap(ham):
    """Smallest eigenvalue above the zero cluster; ``inf`` if there is none."""
    w = np.asarray(ham.spectrum)
    above = w[w > zero_threshold(w)]
    return float(above.min()) if above.size else float("inf")


def derivation_action(q, a, lam, tol=sub.DEFAULT_TOL):
    """``[h_lam(q), a]`` and whether it is unchanged by growing ``lam`` one shell.

    Returns ``(commutator, stabilized)``. The stabilization test compares the
    commutator on ``lam`` (embedded) with the commutator on the enlarged
    window; it is skipped (``None``) when the enlarged window exceeds the cap.
    """
    if not a.region.issubset(lam):
        raise ValueError("observable is not supported inside the window")
    ham = assemble(q, lam)
    ea = sub.embed_matrix(a.matrix, a.region, lam, a.d)
    comm = ham.h.matrix @ ea - ea @ ham.h.matrix
    big = shell(lam)
    try:
        sub.check_cap(len(big), a.d)
    except sub.CapExceededError:
        return sub.LocalOperator(comm, lam, a.d), None
    ham2 = assemble(q, big)
    ea2 = sub.embed_matrix(a.matrix, a.region, big, a.d)
    comm2 = ham2.h.matrix @ ea2 - ea2 @ ham2.h.matrix
    diff = sub.opnorm(comm2 - sub.embed_matrix(comm, lam, big, a.d))
    return sub.LocalOperator(comm, lam, a.d), bool(diff <= tol)

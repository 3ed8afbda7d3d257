"""States on a finite window family, ground-state tests, hereditary
truncations and local topological quantum order diagnostics.

A state is represented by its marginals ``rho_lam`` on every window of a
family; marginals of nested windows must agree under partial trace.
"""
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .ffsys import FFSystem, check_ff, nested_pairs
from .regions import Region

__all__ = [
    "WindowState",
    "HereditaryTruncation",
    "support_projection",
    "default_ladder",
    "localized_unit",
    "ground_state_residuals",
    "is_ff_ground_state",
    "support_leq",
    "property_f_residual",
    "ltqo_norm",
    "ltqo_scan",
    "LtqoScan",
]


def support_projection(rho, region, d, tol=sub.DEFAULT_TOL):
    """Projector onto the range of a positive semidefinite ``rho``.

    Eigenvalues above the shared rank threshold (relative to the largest
    eigenvalue) count as support.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    top = max(abs(w).max(initial=0.0), 0.0)
    cut = max(sub.RANK_RTOL * top, sub.RANK_ATOL)
    return sub.Projector.from_basis(v[:, w > cut], region, d, tol)


@dataclass(frozen=True, eq=False)
class WindowState:
    """Density matrices ``rho[lam]`` on a family of windows.

    Parameters
    ----------
    rho : dict
        ``Region -> ndarray``; each matrix must be Hermitian, positive
        semidefinite and of unit trace.
    d : int
        Site dimension.
    tol : float
        Tolerance for the state axioms and for marginal consistency.
    check : bool
        Validate marginal consistency on every nested pair (default).
    """

    rho: dict
    d: int
    tol: float = sub.DEFAULT_TOL
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        ordered = {}
        for lam, r in sorted(self.rho.items(), key=lambda kv: kv[0].key()):
            r = np.asarray(r, dtype=complex)
            if r.shape != (self.d ** len(lam),) * 2:
                raise ValueError(f"density matrix on {lam} has shape {r.shape}")
            if sub.opnorm(r - r.conj().T) > self.tol:
                raise ValueError(f"density matrix on {lam} is not Hermitian")
            if abs(np.trace(r) - 1) > self.tol:
                raise ValueError(f"density matrix on {lam} does not have unit trace")
            if np.linalg.eigvalsh((r + r.conj().T) / 2)[0] < -self.tol:
                raise ValueError(f"density matrix on {lam} is not positive")
            ordered[lam] = r
        object.__setattr__(self, "rho", ordered)
        if self.check:
            worst = self.marginal_residual()
            if worst > self.tol:
                raise ValueError(f"marginals are inconsistent: residual {worst:.2e}")

    @property
    def windows(self):
        return tuple(self.rho)

    def __getitem__(self, lam):
        return self.rho[lam]

    def marginal_residual(self):
        """Largest ``|Tr_{xi \\ lam} rho_xi - rho_lam|`` over nested pairs."""
        worst = 0.0
        for small, large in nested_pairs(self.windows):
            red = sub.partial_trace(self.rho[large], large, small, self.d)
            worst = max(worst, sub.opnorm(red - self.rho[small]))
        return worst

    def support(self, lam):
        return support_projection(self.rho[lam], lam, self.d, self.tol)

    @classmethod
    def from_global(cls, rho, region, windows, d, tol=sub.DEFAULT_TOL):
        """Marginals of ``rho`` (on ``region``) on every window inside it."""
        out = {}
        for lam in windows:
            if not lam.issubset(region):
                raise ValueError(f"window {lam} is not inside {region}")
            out[lam] = rho if lam == region else sub.partial_trace(rho, region, lam, d)
        return cls(out, d, tol, check=False)

    @classmethod
    def from_pure_space(cls, basis, region, windows, d, tol=sub.DEFAULT_TOL):
        """Uniform mixture over the orthonormal columns of ``basis``.

        The mixture ``K K^* / rank`` does not depend on the choice of
        orthonormal basis of the space.
        """
        basis = np.asarray(basis, dtype=complex)
        if basis.shape[1] == 0:
            raise ValueError("cannot build a state on the zero space")
        rho = basis @ basis.conj().T / basis.shape[1]
        return cls.from_global(rho, region, windows, d, tol)

    @classmethod
    def ground_state_mixture(cls, sys, top=None):
        """Uniform mixture over ``ker p_top`` restricted to every window of ``sys``.

        ``top`` defaults to the largest stored window, which must contain all
        others.
        """
        top = sys.windows[-1] if top is None else top
        return cls.from_pure_space(sys.kernel(top).basis, top, sys.windows, sys.d, sys.tol)

    @classmethod
    def product(cls, psi0, windows, tol=sub.DEFAULT_TOL):
        """Pure product state ``|psi0 ... psi0>``."""
        psi0 = np.asarray(psi0, dtype=complex)
        psi0 = psi0 / np.linalg.norm(psi0)
        one = np.outer(psi0, psi0.conj())
        out = {}
        for lam in windows:
            sub.check_cap(len(lam), len(psi0))
            r = np.ones((1, 1), dtype=complex)
            for _ in range(len(lam)):
                r = np.kron(r, one)
            out[lam] = r
        return cls(out, len(psi0), tol)

    @classmethod
    def maximally_mixed(cls, windows, d, tol=sub.DEFAULT_TOL):
        out = {}
        for lam in windows:
            sub.check_cap(len(lam), d)
            n = d ** len(lam)
            out[lam] = np.eye(n, dtype=complex) / n
        return cls(out, d, tol)

    def to_json(self):
        return {
            "d": self.d,
            "tol": self.tol,
            "windows": [{"region": lam.to_json(), **sub.matrix_to_json(r)}
                        for lam, r in self.rho.items()],
        }

    @classmethod
    def from_json(cls, data):
        rho = {Region.from_json(w["region"]): sub.matrix_from_json(w) for w in data["windows"]}
        return cls(rho, int(data["d"]), data.get("tol", sub.DEFAULT_TOL))


def _shared(omega, windows):
    missing = [w for w in omega.windows if w not in set(windows)]
    if missing:
        raise ValueError(f"windows {missing[:3]} are not shared")


@dataclass(eq=False)
class HereditaryTruncation:
    """Corner projections ``p_lam(B)`` and the truncated strictly positive element.

    ``w_N = sum_{m <= N} 2^-m p_{lam_m}(B)`` is embedded on the last ladder
    window ``lam_N``.
    """

    unit: FFSystem
    ladder: tuple
    w: sub.LocalOperator
    monotone: bool
    monotone_residual: float

    @property
    def weights(self):
        return [2.0 ** -(m + 1) for m in range(len(self.ladder))]


def default_ladder(windows):
    """A maximal increasing chain ending at the largest window.

    Built backwards: from each window step to the largest (by key) proper
    sub-window stored in the family.
    """
    ws = sorted(windows, key=Region.key)
    if not ws:
        return ()
    chain = [ws[-1]]
    while True:
        below = [w for w in ws if w < chain[-1]]
        if not below:
            break
        chain.append(below[-1])
    return tuple(reversed(chain))


def truncation_element(unit, ladder):
    """``sum_m 2^-m p_{lam_m}`` embedded on the last window of ``ladder``."""
    top = ladder[-1]
    for a, b in zip(ladder, ladder[1:]):
        if not a < b:
            raise ValueError("ladder must be strictly increasing")
    w = np.zeros((unit.d ** len(top),) * 2, dtype=complex)
    for m, lam in enumerate(ladder, start=1):
        w += 2.0**-m * sub.embed_matrix(unit[lam].matrix, lam, top, unit.d)
    return sub.LocalOperator(w, top, unit.d)


def localized_unit(omega, ladder=None):
    """``p_lam(B_omega) = 1 - supp(rho_lam)`` on every window of ``omega``.

    ``B_omega`` is the hereditary subalgebra of operators ``a`` with
    ``omega(a^* a) = omega(a a^*) = 0``; inside a window this is the corner
    cut out by the complement of the support of ``rho_lam``.
    """
    if omega.check is False:
        worst = omega.marginal_residual()
        if worst > omega.tol:
            raise ValueError(f"marginals are inconsistent: residual {worst:.2e}")
    unit = {lam: omega.support(lam).complement() for lam in omega.windows}
    unit = FFSystem(unit, omega.d, omega.tol, "localized unit")
    rep = check_ff(unit)
    ladder = default_ladder(unit.windows) if ladder is None else tuple(ladder)
    return HereditaryTruncation(unit, ladder, truncation_element(unit, ladder),
                                rep.ok, rep.worst_residual)


def ground_state_residuals(omega, sys):
    """Per window: ``Tr(rho p)`` and whether ``supp(rho) <= p^perp``."""
    _shared(omega, sys.windows)
    out = {}
    for lam in omega.windows:
        trace = float(np.real(np.trace(omega[lam] @ sys[lam].matrix)))
        inside = sub.leq(omega.support(lam), sys.kernel(lam), sys.tol)
        out[lam] = (trace, bool(inside))
    return out


def is_ff_ground_state(omega, sys, tol=None, path="trace"):
    """``omega(p_lam) = 0`` on every shared window.

    ``path="trace"`` tests ``Tr(rho p) <= tol``; ``path="support"`` tests the
    equivalent range inclusion ``supp(rho) <= p^perp``.
    """
    tol = sys.tol if tol is None else tol
    res = ground_state_residuals(omega, sys)
    if path == "trace":
        return all(t <= tol for t, _ in res.values())
    if path == "support":
        return all(s for _, s in res.values())
    raise ValueError(f"unknown path {path!r}")


def support_leq(omega, eta, tol=None):
    """Windowwise ``supp(rho^omega) <= supp(rho^eta)``."""
    if set(omega.windows) != set(eta.windows):
        raise ValueError("states live on different window families")
    tol = max(omega.tol, eta.tol) if tol is None else tol
    return all(sub.leq(omega.support(lam), eta.support(lam), tol) for lam in omega.windows)


def property_f_residual(unit, ladder=None, depth=None):
    """Distance of ``w_N`` from the corner ``p_N S p_N`` at depth ``N``.

    ``w_N`` is built from the presentation ``unit`` along the first ``depth``
    rungs of ``ladder``. When the family is increasing every lower corner
    sits inside the top one and the residual vanishes; a family twisted on
    the top window alone leaves part of ``w_N`` outside.

    Returns ``|w_N - P w_N P|`` with ``P = p_{lam_N}(B)``.
    """
    ladder = default_ladder(unit.windows) if ladder is None else tuple(ladder)
    depth = len(ladder) if depth is None else int(depth)
    if not 1 <= depth <= len(ladder):
        raise ValueError("depth must be between 1 and the ladder length")
    ladder = ladder[:depth]
    w = truncation_element(unit, ladder).matrix
    p = unit[ladder[-1]].matrix
    return sub.opnorm(w - p @ w @ p)


def ltqo_norm(sys, a, lam):
    """``|p^perp a p^perp - omega_lam(a) p^perp|`` on window ``lam``.

    ``omega_lam(a) = Tr(a p^perp) / rank(p^perp)``; ``a`` is embedded into
    ``lam`` first.
    """
    if not a.region.issubset(lam):
        raise ValueError("observable is not supported inside the window")
    kern = sys.kernel(lam).basis
    r = kern.shape[1]
    if r == 0:
        raise ValueError(f"p is the identity on {lam}: no kernel")
    compressed = kern.conj().T @ sub.apply_local(a.matrix, a.region, lam, sys.d, kern)
    omega = np.trace(compressed) / r
    return sub.opnorm(compressed - omega * np.eye(r))


@dataclass
class LtqoScan:
    rows: list
    coranks: dict
    unique_indicator: bool

    def csv_rows(self):
        return [(len(lam), oid, value, self.coranks[lam]) for lam, oid, value in self.rows]


def ltqo_scan(sys, observables, ladder):
    """LTQO norms for every observable on every window of an increasing ladder.

    ``observables`` maps an identifier to a :class:`LocalOperator`. The
    unique-state indicator is true when the corank is 1 on every rung; it is
    a finite-size heuristic only.
    """
    ladder = tuple(ladder)
    for a, b in zip(ladder, ladder[1:]):
        if not a < b:
            raise ValueError("ladder must be strictly increasing")
    rows, coranks = [], {}
    for lam in ladder:
        coranks[lam] = sys[lam].corank
        for oid in sorted(observables):
            rows.append((lam, oid, ltqo_norm(sys, observables[oid], lam)))
    unique = bool(coranks) and all(c == 1 for c in coranks.values())
    return LtqoScan(rows, coranks, unique)

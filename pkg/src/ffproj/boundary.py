"""Half-lattice boundary algebras, relative commutants and trace estimates.

For a window ``lam`` touching the physical boundary and an ambient window
``gam ⊇ lam`` the finite boundary algebra is

    T_gam(lam) = {x in p_lam^perp S_lam p_lam^perp : [x ⊗ 1, p_gam^perp] = 0},

with ``p_gam^perp`` standing in for the infinite-volume ground-state
projection. Elements are parametrized as ``x = U X U^*`` with ``U`` an
orthonormal basis of ``ker p_lam`` and ``X`` an ``r x r`` matrix.
"""
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .regions import HalfLatticeRegion, boundary

__all__ = [
    "BoundaryAlgebraBasis",
    "boundary_basis",
    "boundary_dim_scan",
    "BoundaryRow",
    "CommutantReport",
    "commutant_structure_check",
    "commutant_dimension",
    "TraceRow",
    "cuntz_trace_estimate",
    "MAX_COMMUTANT_DIM",
]

MAX_COMMUTANT_DIM = 256
_N_NEAR_NULL = 4


def _hs_orthonormal(mats, rtol=sub.RANK_RTOL):
    """Hilbert-Schmidt orthonormal basis of the span of ``mats`` (k, n, n)."""
    if len(mats) == 0:
        return np.zeros((0,) + tuple(np.shape(mats)[1:]), dtype=complex)
    flat = np.asarray(mats, dtype=complex).reshape(len(mats), -1).T
    q = sub.orth(flat, rtol)
    return q.T.reshape((q.shape[1],) + np.shape(mats)[1:])


@dataclass(eq=False)
class BoundaryAlgebraBasis:
    """Solutions of the boundary-algebra constraints on ``(lam, gam)``.

    Attributes
    ----------
    coefficients : ndarray, shape (dim, r, r)
        Hilbert-Schmidt orthonormal solutions ``X`` in the corner basis.
    corner : ndarray, shape (d^|lam|, r)
        Orthonormal basis ``U`` of ``ker p_lam``.
    ground : ndarray, shape (d^|gam|, s)
        Orthonormal basis of ``ker p_gam``.
    image_rank : int
        Rank of ``x -> x p_gam^perp`` on the solution space; equal to
        ``dim`` when that map is injective.
    near_null : ndarray
        Smallest singular values of the constraint matrix (ascending).
    invariant_dim : int
        Dimension of the one-sided solutions ``x Ran p_gam^perp ⊆ Ran p_gam^perp``.
    """

    lam: HalfLatticeRegion
    gam: HalfLatticeRegion
    d: int
    coefficients: np.ndarray = field(repr=False)
    corner: np.ndarray = field(repr=False)
    ground: np.ndarray = field(repr=False)
    image_rank: int = 0
    near_null: np.ndarray = field(default=None, repr=False)
    invariant_dim: int = 0
    tol: float = sub.DEFAULT_TOL

    @property
    def dim(self):
        return len(self.coefficients)

    @property
    def injective(self):
        return self.image_rank == self.dim

    def corner_element(self, i):
        """``x_i = U X_i U^*`` on ``lam``."""
        u = self.corner
        return sub.LocalOperator(u @ self.coefficients[i] @ u.conj().T, self.lam.region, self.d)

    def element(self, i):
        """``x_i p_gam^perp`` on ``gam``, the representative of ``x_i``."""
        x = self.corner_element(i)
        w = self.ground
        xw = sub.apply_local(x.matrix, x.region, self.gam.region, self.d, w)
        return sub.LocalOperator(xw @ w.conj().T, self.gam.region, self.d)

    @property
    def basis(self):
        """Hilbert-Schmidt orthonormal basis of ``{x p_gam^perp}`` on ``gam``."""
        sub.check_cap(2 * len(self.gam), self.d)
        mats = [self.element(i).matrix for i in range(self.dim)]
        return [sub.LocalOperator(m, self.gam.region, self.d) for m in _hs_orthonormal(mats)]

    def closure_residual(self):
        """Distance of products and adjoints of solutions from their span."""
        xs = self.coefficients
        if not len(xs):
            return 0.0
        q = xs.reshape(len(xs), -1).T
        worst = 0.0
        cands = [a.conj().T for a in xs] + [a @ b for a in xs for b in xs]
        for c in cands:
            v = c.reshape(-1)
            worst = max(worst, float(np.linalg.norm(v - q @ (q.conj().T @ v))))
        return worst


def _as_half(r):
    return r if isinstance(r, HalfLatticeRegion) else HalfLatticeRegion(r)


def _constraint_blocks(u, w, lam, gam, d):
    """Columns ``vec`` of the two constraint families for every unit ``E_ab``.

    ``E1[a, b] = (u_a u_b^* ⊗ 1) W - W W^* (u_a u_b^* ⊗ 1) W`` vanishes on
    ``X`` iff ``x`` maps ``Ran p_gam^perp`` into itself; applying the same to
    ``x^*`` gives the second block (conjugate coefficients, transposed
    indices).
    """
    r, s = u.shape[1], w.shape[1]
    out = np.empty((r, r, w.shape[0], s), dtype=complex)
    wdag = w.conj().T
    for a in range(r):
        for b in range(r):
            e = np.outer(u[:, a], u[:, b].conj())
            ew = sub.apply_local(e, lam, gam, d, w)
            out[a, b] = ew - w @ (wdag @ ew)
    e1 = out.reshape(r * r, -1).T
    e2 = out.transpose(1, 0, 2, 3).conj().reshape(r * r, -1).T
    return e1, e2


def boundary_basis(sys, lam, gam, tol=None):
    """Solve ``{x in p_lam^perp S_lam p_lam^perp : [x ⊗ 1, p_gam^perp] = 0}``.

    Parameters
    ----------
    sys : FFSystem
        System on half-lattice windows.
    lam, gam : Region or HalfLatticeRegion
        Window and ambient window, ``lam ⊆ gam``, both stored in ``sys``.

    Returns
    -------
    BoundaryAlgebraBasis
    """
    tol = sys.tol if tol is None else tol
    lam, gam = _as_half(lam), _as_half(gam)
    if lam.region not in sys or gam.region not in sys:
        raise ValueError("window and ambient window must both be stored in the system")
    if not lam.region.issubset(gam.region):
        raise ValueError("window is not contained in the ambient window")
    if not len(boundary(lam)):
        raise ValueError("window does not touch the physical boundary")
    d = sys.d
    u = sys.kernel(lam.region).basis
    w = sys.kernel(gam.region).basis
    r, s, big = u.shape[1], w.shape[1], w.shape[0]
    units = np.eye(r * r, dtype=complex).reshape(r * r, r, r)
    if r == 0:
        empty = np.zeros((0, 0, 0), dtype=complex)
        return BoundaryAlgebraBasis(lam, gam, d, empty, u, w, 0, np.zeros(0), 0, tol)
    if s == 0 or s == big:
        # p_gam^perp is 0 or 1: every corner element commutes with it
        image = 0 if s == 0 else r * r
        return BoundaryAlgebraBasis(lam, gam, d, units, u, w, image, np.zeros(0), r * r, tol)
    e1, e2 = _constraint_blocks(u, w, lam.region, gam.region, d)
    sv1 = np.linalg.svd(e1, compute_uv=False)
    invariant_dim = r * r - sub.numerical_rank(sv1)
    m = np.vstack([e1, e2])
    sv = np.linalg.svd(m, compute_uv=False)
    coeffs = sub.null_space(m).T.reshape(-1, r, r)
    near = np.sort(np.concatenate([sv, np.zeros(max(0, r * r - len(sv)))]))[:_N_NEAR_NULL]
    # injectivity of x -> x p_gam^perp: Gram matrix of x_i W
    if len(coeffs):
        ys = [sub.apply_local(u @ x @ u.conj().T, lam.region, gam.region, d, w) for x in coeffs]
        flat = np.array([y.reshape(-1) for y in ys]).T
        image = sub.numerical_rank(np.linalg.svd(flat, compute_uv=False))
    else:
        image = 0
    return BoundaryAlgebraBasis(lam, gam, d, coeffs, u, w, int(image), near, int(invariant_dim), tol)


@dataclass
class BoundaryRow:
    lam: object
    gam: object
    boundary_dim: int
    stabilized: bool
    consistent: bool
    injective: bool
    invariant_dim: int
    near_null: tuple
    trace_estimate: float
    lower_bound: float

    def csv_row(self):
        return (len(self.lam), len(self.gam), self.boundary_dim, self.stabilized,
                self.trace_estimate, self.lower_bound)


def _embeds_into(small, large, tol):
    """Whether the previous rung's solutions survive on the current rung.

    Each small-rung solution ``x`` (tensored with identities) must commute
    with the new ``p_gam^perp`` and its representative ``x p_gam^perp`` must
    lie in the span of the current representatives.
    """
    if not small.dim:
        return True
    w = large.ground
    lam2, gam2 = large.lam.region, large.gam.region
    if large.dim:
        reps = np.array([
            sub.apply_local(large.corner_element(j).matrix, lam2, gam2, large.d, w).reshape(-1)
            for j in range(large.dim)
        ]).T
        q = sub.orth(reps)
    else:
        q = np.zeros((w.size, 0), dtype=complex)
    for i in range(small.dim):
        x = small.corner_element(i).matrix
        for op in (x, x.conj().T):
            xw = sub.apply_local(op, small.lam.region, gam2, small.d, w)
            if sub.opnorm(xw - w @ (w.conj().T @ xw)) > tol:
                return False
        v = sub.apply_local(x, small.lam.region, gam2, small.d, w).reshape(-1)
        if np.linalg.norm(v - q @ (q.conj().T @ v)) > tol * max(1.0, np.linalg.norm(v)):
            return False
    return True


def boundary_dim_scan(sys, ladder, tol=None):
    """Boundary-algebra dimension along a nested ladder of ``(lam, gam)`` rungs.

    ``stabilized`` is true when a rung's dimension equals the previous one;
    ``consistent`` is true when the previous rung's solutions embed into the
    current solution space.
    """
    tol = sys.tol if tol is None else tol
    rows, prev = [], None
    for lam, gam in ladder:
        lam, gam = _as_half(lam), _as_half(gam)
        if prev is not None and not (prev.lam.region.issubset(lam.region)
                                     and prev.gam.region.issubset(gam.region)):
            raise ValueError("ladder rungs must be nested")
        res = boundary_basis(sys, lam, gam, tol)
        p = sys[lam.region]
        est = float(np.trace(p.matrix).real) / p.dim
        rows.append(BoundaryRow(
            lam.region, gam.region, res.dim,
            prev is not None and prev.dim == res.dim,
            True if prev is None else _embeds_into(prev, res, tol),
            res.injective, res.invariant_dim,
            tuple(float(x) for x in res.near_null), est, 1.0 - p.corank / p.dim,
        ))
        prev = res
    return rows


def commutant_dimension(generators, rtol=sub.RANK_RTOL):
    """Dimension of ``{x : [x, b] = 0 for every b}`` for Hermitian generators.

    The commutant of the first generator is parametrized block-diagonally in
    its eigenbasis; the remaining generators are imposed as linear
    constraints on those parameters.
    """
    b0 = generators[0]
    n = b0.shape[0]
    w, v = np.linalg.eigh(b0)
    gaps = np.flatnonzero(np.diff(w) > 1e-6 * max(1.0, abs(w).max()))
    edges = np.concatenate([[0], gaps + 1, [n]])
    params = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        block = v[:, lo:hi]
        for i in range(hi - lo):
            for j in range(hi - lo):
                params.append(np.outer(block[:, i], block[:, j].conj()))
    if len(generators) == 1:
        return len(params)
    cols = []
    for x in params:
        cols.append(np.concatenate([(x @ b - b @ x).reshape(-1) for b in generators[1:]]))
    m = np.array(cols).T
    sv = np.linalg.svd(m, compute_uv=False)
    return len(params) - sub.numerical_rank(sv, rtol)


@dataclass
class CommutantReport:
    window: object
    dimension: int
    expected: int
    corank: int
    degenerate: bool

    @property
    def matches(self):
        return self.dimension == self.expected

    def to_json(self):
        return {"window": self.window.to_json(), "dimension": self.dimension,
                "expected": self.expected, "corank": self.corank,
                "degenerate": self.degenerate, "matches": self.matches}


def commutant_structure_check(sys, lam):
    """Relative commutant of the corner ``p_lam S_lam p_lam`` inside ``S_lam``.

    The corner is generated by ``b1 = sum_j j |v_j><v_j|`` and the hopping
    ``b2 = sum_j |v_j><v_j+1| + h.c.`` over an orthonormal basis ``v`` of
    ``Ran p_lam``. The expected dimension is ``1 + rank(p_lam^perp)^2``; when
    ``p_lam = 0`` the commutant is all of ``S_lam`` and the report is flagged
    degenerate.
    """
    p = sys[lam]
    n = p.dim
    if n > MAX_COMMUTANT_DIM:
        raise sub.CapExceededError(f"commutant solve on dimension {n} > {MAX_COMMUTANT_DIM}")
    corank = p.corank
    if p.rank == 0:
        return CommutantReport(lam, n * n, 1 + corank**2, corank, True)
    v = p.basis
    r = v.shape[1]
    b1 = v @ np.diag(np.arange(1, r + 1, dtype=float)) @ v.conj().T
    hop = np.diag(np.ones(r - 1), 1)
    b2 = v @ (hop + hop.T) @ v.conj().T
    dim = commutant_dimension([b1, b2])
    return CommutantReport(lam, int(dim), 1 + corank**2, corank, False)


@dataclass
class TraceRow:
    window: object
    estimate: float
    lower_bound: float
    corank: int


def cuntz_trace_estimate(sys, ladder):
    """``Tr(p_lam) / d^|lam|`` and ``1 - rank(p_lam^perp) / d^|lam|`` per rung."""
    ladder = tuple(ladder)
    for a, b in zip(ladder, ladder[1:]):
        if not a < b:
            raise ValueError("ladder must be strictly increasing")
    rows = []
    for lam in ladder:
        p = sys[lam]
        rows.append(TraceRow(lam, float(np.trace(p.matrix).real) / p.dim,
                             1.0 - p.corank / p.dim, p.corank))
    return rows

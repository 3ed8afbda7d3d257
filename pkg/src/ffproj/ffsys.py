"""Frustration-free systems of projections over a finite window family."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sub
from .regions import Region, translate

__all__ = [
    "FFSystem",
    "FFReport",
    "EquivarianceReport",
    "check_ff",
    "check_proper",
    "check_equivariance",
    "shift_conjugate",
    "nested_pairs",
    "ff_residual",
    "system_meet",
    "system_join",
    "system_leq",
]


@dataclass(frozen=True, eq=False)
class FFSystem:
    """A family ``window -> p_window`` of projectors.

    ``generator`` records where the family came from (a model spec or a short
    description) and is carried along for reports only.
    """

    proj: dict
    d: int
    tol: float = sub.DEFAULT_TOL
    generator: object = None

    def __post_init__(self):
        ordered = dict(sorted(self.proj.items(), key=lambda kv: kv[0].key()))
        for lam, p in ordered.items():
            if p.region != lam:
                raise ValueError(f"projector stored under {lam} lives on {p.region}")
            if p.d != self.d:
                raise ValueError("site dimension mismatch inside the system")
        object.__setattr__(self, "proj", ordered)

    @property
    def windows(self):
        return tuple(self.proj)

    def __getitem__(self, lam):
        return self.proj[lam]

    def __contains__(self, lam):
        return lam in self.proj

    def kernel(self, lam):
        """``p_lam^perp`` as a projector (cached)."""
        cache = self.__dict__.setdefault("_kernels", {})
        if lam not in cache:
            cache[lam] = self.proj[lam].complement()
        return cache[lam]

    def restrict(self, windows):
        return FFSystem({w: self.proj[w] for w in windows}, self.d, self.tol, self.generator)


@dataclass
class FFReport:
    ok: bool
    worst_pair: tuple
    worst_residual: float
    residuals: list = field(default_factory=list)
    tol: float = sub.DEFAULT_TOL

    def to_json(self):
        return {
            "ok": bool(self.ok),
            "tol": self.tol,
            "worst_pair": None if self.worst_pair is None
            else [w.to_json() for w in self.worst_pair],
            "worst_residual": self.worst_residual,
            "residuals": [
                {"pair": [a.to_json(), b.to_json()], "value": v} for (a, b), v in self.residuals
            ],
        }


def nested_pairs(windows):
    """All pairs ``(small, large)`` of stored windows with ``small ⊊ large``."""
    ws = sorted(windows, key=Region.key)
    return [(a, b) for i, a in enumerate(ws) for b in ws[i + 1:] if a < b]


def ff_residual(sys, small, large):
    """``|(p_small ⊗ 1) p_large - (p_small ⊗ 1)|``.

    Evaluated as ``|(p_small ⊗ 1) K|`` with ``K`` an orthonormal basis of
    ``ker p_large``, which has the same norm.
    """
    kern = sys.kernel(large).basis
    if kern.shape[1] == 0:
        return 0.0
    moved = sub.apply_local(sys[small].matrix, small, large, sys.d, kern)
    return sub.opnorm(moved)


def _ff_residual(sys, pair):
    return ff_residual(sys, *pair)


def _pmap(fn, items, jobs):
    if jobs is None or jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def check_ff(sys, tol=None, pairs=None, jobs=None):
    """Check ``p_small p_large = p_small`` on nested window pairs.

    By default every nested pair of stored windows is checked.
    """
    tol = sys.tol if tol is None else tol
    pairs = nested_pairs(sys.windows) if pairs is None else list(pairs)
    values = _pmap(lambda pr: _ff_residual(sys, pr), pairs, jobs)
    residuals = list(zip(pairs, values))
    if not residuals:
        return FFReport(True, None, 0.0, [], tol)
    i = int(np.argmax(values))
    return FFReport(values[i] <= tol, pairs[i], float(values[i]), residuals, tol)


def check_proper(sys):
    """Every ``p_window`` is strictly below the identity."""
    return all(p.rank < p.dim for p in sys.proj.values())


def shift_conjugate(p, g):
    """The translated projector ``alpha_g(p)`` on ``translate(p.region, g)``.

    Translation preserves lexicographic order, so the leg relabelling is the
    identity; it is computed anyway to keep the convention explicit.
    """
    target = translate(p.region, g)
    order = [target.index(translate(Region((s,), p.region.dim), g).sites[0])
             for s in p.region.sites]
    n = len(order)
    m = p.matrix
    if order != list(range(n)):
        t = m.reshape((p.d,) * (2 * n))
        inv = list(np.argsort(order))
        m = t.transpose(inv + [n + i for i in inv]).reshape(m.shape)
    return sub.Projector(m, target, p.d, p.tol)


@dataclass
class EquivarianceReport:
    ok: bool
    residuals: list
    tol: float

    def to_json(self):
        return {
            "ok": bool(self.ok),
            "tol": self.tol,
            "residuals": [
                {"window": w.to_json(), "shift": list(g), "value": v} for w, g, v in self.residuals
            ],
        }


def check_equivariance(sys, shifts, tol=None, strict=True):
    """Compare ``alpha_g(p_window)`` with ``p_{window + g}`` for every stored pair.

    With ``strict`` a window whose translate is not stored raises ``KeyError``;
    otherwise such windows are skipped.
    """
    tol = sys.tol if tol is None else tol
    rows = []
    for g in shifts:
        g = tuple(g) if hasattr(g, "__len__") else (g,)
        for lam in sys.windows:
            moved = translate(lam, g)
            if moved not in sys:
                if strict:
                    raise KeyError(f"translate of {lam} by {g} is not stored")
                continue
            r = sub.opnorm(shift_conjugate(sys[lam], g).matrix - sys[moved].matrix)
            rows.append((lam, g, r))
    ok = all(v <= tol for _, _, v in rows)
    return EquivarianceReport(ok, rows, tol)


def _same_windows(s1, s2):
    if set(s1.windows) != set(s2.windows) or s1.d != s2.d:
        raise ValueError("systems are defined on different window families")


def system_meet(s1, s2):
    """Windowwise meet ``p^1 ∧ p^2``."""
    _same_windows(s1, s2)
    proj = {w: sub.meet(s1[w], s2[w]) for w in s1.windows}
    return FFSystem(proj, s1.d, max(s1.tol, s2.tol), ("meet", s1.generator, s2.generator))


def system_join(s1, s2):
    """Windowwise join ``p^1 ∨ p^2``."""
    _same_windows(s1, s2)
    proj = {w: sub.join(s1[w], s2[w]) for w in s1.windows}
    return FFSystem(proj, s1.d, max(s1.tol, s2.tol), ("join", s1.generator, s2.generator))


def system_leq(s1, s2, tol=None):
    _same_windows(s1, s2)
    return all(sub.leq(s1[w], s2[w], tol) for w in s1.windows)

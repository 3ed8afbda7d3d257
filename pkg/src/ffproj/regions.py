"""Finite regions of the lattice Z^d and of the half lattice N x Z^(d-1).

Sites are stored as tuples of ints in lexicographic order. That order fixes
the tensor-leg order of every operator built on a region.
"""
from dataclasses import dataclass
import itertools

__all__ = [
    "Region",
    "HalfLatticeRegion",
    "translate",
    "enumerate_translates",
    "boundary",
    "interval",
    "box",
    "window_family",
    "shell",
]


@dataclass(frozen=True)
class Region:
    """A finite set of lattice sites in canonical (lexicographic) order."""

    sites: tuple
    dim: int

    def __post_init__(self):
        sites = tuple(tuple(int(c) for c in s) for s in self.sites)
        if any(len(s) != self.dim for s in sites):
            raise ValueError(f"all sites must have {self.dim} coordinates")
        ordered = tuple(sorted(sites))
        if len(set(ordered)) != len(ordered):
            raise ValueError("duplicate sites in region")
        object.__setattr__(self, "sites", ordered)

    @classmethod
    def from_sites(cls, sites, dim=None):
        sites = [tuple(s) if hasattr(s, "__len__") else (s,) for s in sites]
        if dim is None:
            if not sites:
                raise ValueError("dimension required for an empty region")
            dim = len(sites[0])
        return cls(tuple(sites), dim)

    @classmethod
    def empty(cls, dim):
        return cls((), dim)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, site):
        return tuple(site) in self._set

    @property
    def _set(self):
        cached = self.__dict__.get("_site_set")
        if cached is None:
            cached = frozenset(self.sites)
            object.__setattr__(self, "_site_set", cached)
        return cached

    def index(self, site):
        return self.sites.index(tuple(site))

    def issubset(self, other):
        return self._set <= other._set

    def __le__(self, other):
        return self.issubset(other)

    def __lt__(self, other):
        return self._set < other._set

    def union(self, other):
        return Region(tuple(self._set | other._set), self.dim)

    def intersection(self, other):
        return Region(tuple(self._set & other._set), self.dim)

    def difference(self, other):
        return Region(tuple(self._set - other._set), self.dim)

    def key(self):
        """Total order on regions: size first, then site sequence."""
        return (len(self.sites), self.sites)

    def bounds(self):
        """Per-axis (min, max) of the sites."""
        if not self.sites:
            raise ValueError("empty region has no bounds")
        return tuple((min(s[i] for s in self.sites), max(s[i] for s in self.sites))
                     for i in range(self.dim))

    def is_box(self):
        if not self.sites:
            return False
        n = 1
        for lo, hi in self.bounds():
            n *= hi - lo + 1
        return n == len(self.sites)

    def to_json(self):
        return [list(s) for s in self.sites]

    @classmethod
    def from_json(cls, data, dim=None):
        return cls.from_sites([tuple(s) for s in data], dim=dim)

    def __repr__(self):
        if self.dim == 1:
            return "Region(" + ",".join(str(s[0]) for s in self.sites) + ")"
        return f"Region({list(self.sites)})"


@dataclass(frozen=True)
class HalfLatticeRegion:
    """A region of the half lattice: every site has first coordinate >= 0."""

    region: Region

    def __post_init__(self):
        if any(s[0] < 0 for s in self.region.sites):
            raise ValueError("half-lattice regions need first coordinate >= 0")

    def __len__(self):
        return len(self.region)


def translate(r, g):
    """Shift every site of ``r`` by the lattice vector ``g``."""
    g = tuple(int(c) for c in (g if hasattr(g, "__len__") else (g,)))
    if len(g) != r.dim:
        raise ValueError("shift has the wrong dimension")
    return Region(tuple(tuple(a + b for a, b in zip(s, g)) for s in r.sites), r.dim)


def enumerate_translates(delta, lam):
    """All shifts ``g`` with ``translate(delta, g)`` inside ``lam``, sorted."""
    if not len(delta):
        raise ValueError("delta must be non-empty")
    anchor = delta.sites[0]
    out = []
    for site in lam.sites:
        g = tuple(a - b for a, b in zip(site, anchor))
        if all(tuple(x + y for x, y in zip(s, g)) in lam for s in delta.sites):
            out.append(g)
    return sorted(out)


def boundary(h):
    """Sites of a half-lattice region that touch the physical boundary."""
    if isinstance(h, Region):
        h = HalfLatticeRegion(h)
    r = h.region
    return Region(tuple(s for s in r.sites if s[0] == 0), r.dim)


def interval(start, stop):
    """The 1D region ``{start, ..., stop - 1}``."""
    return Region(tuple((i,) for i in range(start, stop)), 1)


def box(shape, origin=None):
    """Axis-aligned box with the given extents."""
    shape = tuple(int(n) for n in shape)
    origin = tuple(origin) if origin is not None else (0,) * len(shape)
    ranges = [range(o, o + n) for o, n in zip(origin, shape)]
    return Region(tuple(itertools.product(*ranges)), len(shape))


def window_family(bounding, min_size=1, max_size=None):
    """Every axis-aligned sub-box of ``bounding`` (intervals when d = 1).

    The family is closed under non-empty intersection. Windows are returned
    sorted by :meth:`Region.key`.
    """
    if not bounding.is_box():
        raise ValueError("bounding region must be a box")
    per_axis = []
    for lo, hi in bounding.bounds():
        per_axis.append([(a, b) for a in range(lo, hi + 1) for b in range(a, hi + 1)])
    out = []
    for choice in itertools.product(*per_axis):
        shape = [b - a + 1 for a, b in choice]
        size = 1
        for n in shape:
            size *= n
        if size < min_size or (max_size is not None and size > max_size):
            continue
        out.append(box(shape, [a for a, _ in choice]))
    return sorted(out, key=Region.key)


def shell(r):
    """``r`` together with every site at Chebyshev distance one from it."""
    offsets = list(itertools.product((-1, 0, 1), repeat=r.dim))
    sites = {tuple(a + b for a, b in zip(s, o)) for s in r.sites for o in offsets}
    return Region(tuple(sites), r.dim)

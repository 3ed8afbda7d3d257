"""Declarative model specifications, bundled fixtures and run configurations.

A model spec is a JSON object::

    {
      "name": "aklt",
      "kind": "mps" | "vbs" | "product" | "interaction" | "composite",
      "d": 3,
      "bounding": {"shape": [6], "origin": [0]},
      "tol": 1e-9,
      "params": {...},
      "metadata": {...}
    }

Complex arrays are nested lists whose innermost entries are ``[re, im]``
pairs. Randomized specs are described by a generator block with an explicit
seed (``{"random": {"seed": 7, ...}}``) so that every run is reproducible.
"""
from dataclasses import dataclass, field
import copy
import json

import numpy as np

from . import models
from . import subspace as sub
from .ffsys import FFSystem, system_join, system_meet
from .hamiltonian import Interaction, supporting_system
from .regions import Region, box, window_family

__all__ = [
    "ConfigError",
    "ModelSpec",
    "RunConfig",
    "ANALYSES",
    "complex_to_nested",
    "nested_to_complex",
    "random_projector",
    "ghz_square_vbs",
    "build_spec",
    "build_system",
    "build_interaction",
    "fixture",
    "fixture_names",
    "list_fixtures",
    "load_run_config",
]

ANALYSES = ("verify-ff", "spectra", "ltqo", "boundary", "trace", "hereditary")
KINDS = ("mps", "vbs", "product", "interaction", "composite")


class ConfigError(ValueError):
    """Invalid or malformed configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def complex_to_nested(a):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def nested_to_complex(data, where=None):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a numeric nested array ({exc})", where) from None
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise ConfigError("complex arrays need [re, im] pairs innermost", where)
    return arr[..., 0] + 1j * arr[..., 1]


def random_projector(dim, rank, seed):
    """Orthogonal projector onto a Gaussian-random ``rank``-dimensional subspace."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    q, _ = np.linalg.qr(a)
    return q @ q.conj().T


def ghz_square_vbs(seed=0):
    """Two-dimensional bond data with small, nontrivial kernels.

    Each site carries three binary indices (on-site, left, below); ``psi``
    vanishes unless the three agree and the bond amplitude forces agreement
    across each bond, so bonded clusters are locked together.
    """
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    psi = np.zeros((2, 2, 2, 2), dtype=complex)
    gamma = np.zeros((2, 2, 2), dtype=complex)
    for x in range(2):
        psi[x, x, x] = phi[x]
        gamma[x, x, x] = 1.0 + 0.5 * x
    return models.VbsSpec(((0, 0), (1, 0), (0, 1)), psi, gamma)


@dataclass
class ModelSpec:
    name: str
    kind: str
    d: int
    shape: tuple
    origin: tuple = None
    tol: float = sub.DEFAULT_TOL
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {KINDS}", "kind")
        self.shape = tuple(int(n) for n in self.shape)
        if not self.shape or any(n < 1 for n in self.shape):
            raise ConfigError("shape must be a non-empty list of positive ints", "bounding.shape")
        self.origin = (0,) * len(self.shape) if self.origin is None else tuple(
            int(o) for o in self.origin)
        if len(self.origin) != len(self.shape):
            raise ConfigError("origin and shape differ in length", "bounding.origin")
        if int(self.d) < 1:
            raise ConfigError("site dimension must be positive", "d")
        self.d = int(self.d)
        self.tol = float(self.tol)

    @property
    def bounding(self):
        return box(self.shape, self.origin)

    @property
    def lattice_dim(self):
        return len(self.shape)

    def to_json(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "d": self.d,
            "bounding": {"shape": list(self.shape), "origin": list(self.origin)},
            "tol": self.tol,
            "params": copy.deepcopy(self.params),
            "metadata": copy.deepcopy(self.metadata),
        }

    @classmethod
    def from_json(cls, data, where="model"):
        if not isinstance(data, dict):
            raise ConfigError("model spec must be an object", where)
        for key in ("kind", "d", "bounding"):
            if key not in data:
                raise ConfigError("missing required field", f"{where}.{key}")
        bnd = data["bounding"]
        if not isinstance(bnd, dict) or "shape" not in bnd:
            raise ConfigError("needs {'shape': [...]}", f"{where}.bounding")
        try:
            return cls(data.get("name", data["kind"]), data["kind"], data["d"], bnd["shape"],
                       bnd.get("origin"), data.get("tol", sub.DEFAULT_TOL),
                       data.get("params", {}), data.get("metadata", {}))
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1],
                              f"{where}.{exc.field}" if exc.field else where) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), where) from None


def _param(model, key, where):
    if key not in model.params:
        raise ConfigError("missing parameter", f"{where}.params.{key}")
    return model.params[key]


def build_spec(model, where="model"):
    """The model-level spec object (``MpsSpec``, ``VbsSpec``, ...)."""
    p = model.params
    try:
        if model.kind == "mps":
            v = nested_to_complex(_param(model, "v", where), f"{where}.params.v")
            rho = p.get("rho")
            rho = None if rho is None else nested_to_complex(rho, f"{where}.params.rho")
            spec = models.MpsSpec(v, rho)
        elif model.kind == "product":
            spec = models.ProductSpec(nested_to_complex(_param(model, "psi0", where),
                                                        f"{where}.params.psi0"))
        elif model.kind == "vbs":
            gens = _param(model, "generators", where)
            if "random" in p:
                r = p["random"]
                j = tuple(int(x) for x in r.get("J", [2] * len(gens)))
                rng = np.random.default_rng(int(r["seed"]))
                psi = rng.normal(size=j + (model.d,)) + 1j * rng.normal(size=j + (model.d,))
                gamma = rng.normal(size=j) + 1j * rng.normal(size=j)
            else:
                psi = nested_to_complex(_param(model, "psi", where), f"{where}.params.psi")
                gamma = nested_to_complex(_param(model, "gamma", where), f"{where}.params.gamma")
            spec = models.VbsSpec(tuple(tuple(g) for g in gens), psi, gamma)
        elif model.kind == "interaction":
            delta = Region.from_json(_param(model, "delta", where), model.lattice_dim)
            if "random" in p:
                r = p["random"]
                q = random_projector(model.d ** len(delta), int(r["rank"]), int(r["seed"]))
            else:
                q = nested_to_complex(_param(model, "q", where), f"{where}.params.q")
            spec = models.InteractionSpec(q, delta, model.d)
        else:
            parts = [ModelSpec.from_json(part, f"{where}.params.parts[{i}]")
                     for i, part in enumerate(_param(model, "parts", where))]
            spec = models.CompositeSpec(_param(model, "op", where), parts)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), f"{where}.params") from None
    if getattr(spec, "d", model.d) != model.d:
        raise ConfigError(f"spec has site dimension {spec.d}, config says {model.d}", f"{where}.d")
    return spec


def build_interaction(model):
    spec = build_spec(model)
    if not isinstance(spec, models.InteractionSpec):
        raise ConfigError("analysis needs an interaction model", "model.kind")
    return Interaction.from_matrix(spec.q, spec.delta, spec.d, model.tol)


def build_system(model, tol=None):
    """The frustration-free system (or supporting system) described by ``model``."""
    tol = model.tol if tol is None else tol
    spec = build_spec(model)
    bounding = model.bounding
    if model.kind == "mps":
        if model.lattice_dim != 1:
            raise ConfigError("matrix-product models live on chains", "model.bounding.shape")
        return models.mps_system(model.shape[0], spec, tol, start=model.origin[0])
    if model.kind == "product":
        return models.product_system(spec, bounding, tol)
    if model.kind == "vbs":
        if spec.lattice_dim != model.lattice_dim:
            raise ConfigError("generators and bounding box differ in dimension", "model")
        return models.vbs_system(bounding, spec, tol)
    if model.kind == "interaction":
        q = Interaction.from_matrix(spec.q, spec.delta, spec.d, tol)
        windows = [w for w in window_family(bounding) if len(w) >= len(spec.delta)]
        return supporting_system(q, windows, tol)
    systems = []
    for part in spec.parts:
        if part.shape != model.shape or part.origin != model.origin or part.d != model.d:
            raise ConfigError("composite parts must share d and bounding box", "model.params")
        systems.append(build_system(part, tol))
    combine = system_meet if spec.op == "meet" else system_join
    out = systems[0]
    for s in systems[1:]:
        out = combine(out, s)
    return FFSystem(out.proj, out.d, tol, (spec.op, model.name))


# --------------------------------------------------------------------------
# fixtures


def _aklt():
    spec = models.aklt_spec()
    ell = models.mps_injectivity_length(spec, 6)
    return ModelSpec(
        "aklt", "mps", 3, (6,), params={"v": complex_to_nested(spec.v)},
        metadata={"injectivity_length": ell, "bond_dimension": spec.k,
                  "provenance": "spin-1 valence-bond chain; v from Clebsch-Gordan "
                                "coefficients, scaled so sum v v^* = 1"},
    )


def _product():
    return ModelSpec("product", "product", 2, (6,), params={"psi0": complex_to_nested([1, 0])},
                     metadata={"provenance": "rank-one kernels |0...0>"})


def _two_product_meet():
    parts = [ModelSpec(f"product-{i}", "product", 2, (5,),
                       params={"psi0": complex_to_nested(np.eye(2)[i])}).to_json()
             for i in range(2)]
    return ModelSpec("two-product-meet", "composite", 2, (5,),
                     params={"op": "meet", "parts": parts},
                     metadata={"provenance": "kernels span{|0..0>, |1..1>}"})


def _frustrated():
    return ModelSpec("frustrated-random", "interaction", 3, (3,),
                     params={"delta": [[0], [1]], "random": {"seed": 11, "rank": 6}},
                     metadata={"provenance": "random rank-6 two-site projector, d = 3; "
                                             "frustrated on the 3-chain"})


def _vbs_chain():
    return ModelSpec("vbs-chain", "vbs", 2, (8,),
                     params={"generators": [[0], [1]], "random": {"seed": 5, "J": [2, 2]}},
                     metadata={"provenance": "random bond data, two indices per bond"})


def _vbs_square():
    spec = ghz_square_vbs(seed=3)
    return ModelSpec("vbs-square", "vbs", 2, (3, 3),
                     params={"generators": [list(g) for g in spec.generators],
                             "psi": complex_to_nested(spec.psi),
                             "gamma": complex_to_nested(spec.gamma)},
                     metadata={"provenance": "agreement-locked bonds on the square lattice, "
                                             "two indices per bond"})


_FIXTURES = {
    "aklt": _aklt,
    "product": _product,
    "two-product-meet": _two_product_meet,
    "frustrated-random": _frustrated,
    "vbs-chain": _vbs_chain,
    "vbs-square": _vbs_square,
}


def fixture_names():
    return tuple(_FIXTURES)


def fixture(name):
    try:
        return _FIXTURES[name]()
    except KeyError:
        raise ConfigError(f"unknown fixture {name!r}; known: {', '.join(_FIXTURES)}",
                          "model.fixture") from None


def list_fixtures():
    """``(name, kind, d, shape, provenance)`` for each bundled fixture."""
    rows = []
    for name in _FIXTURES:
        m = fixture(name)
        rows.append((name, m.kind, m.d, m.shape, m.metadata.get("provenance", "")))
    return rows


# --------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """What to run: a model, an analysis name and ladder/tolerance options.

    ``ladder`` is either ``None`` (analysis default) or a list of window sizes
    (chains) / windows given as site lists. ``extra`` is the number of sites
    by which the ambient window exceeds the window in boundary scans.
    """

    model: ModelSpec
    analysis: str
    ladder: list = None
    extra: int = 2
    tol: float = None
    observables: dict = None
    seed: int = 0

    def __post_init__(self):
        if self.analysis not in ANALYSES:
            raise ConfigError(f"unknown analysis {self.analysis!r}; expected one of "
                              f"{', '.join(ANALYSES)}", "analysis")
        if self.ladder is not None:
            sizes = [len(w) if isinstance(w, list) else int(w) for w in self.ladder]
            if any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ConfigError("ladder must be strictly increasing", "ladder")
        if int(self.extra) < 1:
            raise ConfigError("must be at least 1", "extra")


def _model_from(data, where="model"):
    if isinstance(data, str):
        return fixture(data[len("fixture:"):] if data.startswith("fixture:") else data)
    if isinstance(data, dict) and "fixture" in data and len(data) == 1:
        return fixture(data["fixture"])
    return ModelSpec.from_json(data, where)


def load_run_config(text, analysis=None, tol=None):
    """Parse a run configuration (or a bare model spec) from JSON text.

    ``analysis`` and ``tol`` override the file's values.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          "config") from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", "config")
    if "model" in data:
        model = _model_from(data["model"])
    elif "kind" in data:
        model = ModelSpec.from_json(data, "config")
    else:
        raise ConfigError("expected a 'model' field or a bare model spec", "config")
    name = analysis or data.get("analysis")
    if name is None:
        raise ConfigError("no analysis given (use --analysis)", "analysis")
    obs = data.get("observables")
    if obs is not None:
        if not isinstance(obs, dict):
            raise ConfigError("must map ids to nested [re, im] matrices", "observables")
        obs = {k: nested_to_complex(v, f"observables.{k}") for k, v in obs.items()}
    ladder = data.get("ladder")
    if ladder is not None and not isinstance(ladder, list):
        raise ConfigError("must be a list of sizes or site lists", "ladder")
    t = tol if tol is not None else data.get("tol")
    try:
        return RunConfig(model, name, ladder, int(data.get("extra", 2)),
                         None if t is None else float(t), obs, int(data.get("seed", 0)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "config") from None

"""Frustration-free systems of projections on lattices.

Submodules
----------
regions      finite regions of Z^d and the half lattice
subspace     projectors, meets/joins, tensor-leg embedding
ffsys        frustration-free systems and their checks
models       valence-bond, matrix-product and product constructions
hamiltonian  finite-volume Hamiltonians and their spectra
states       window states, hereditary truncations, LTQO
boundary     boundary algebras, relative commutants, trace estimates
config, cli  declarative configs, fixtures and the command line
"""
from . import boundary, config, ffsys, hamiltonian, models, regions, states, subspace
from .ffsys import FFSystem, check_ff
from .regions import Region, box, interval
from .subspace import CapExceededError, LocalOperator, Projector

__version__ = "0.1.0"

__all__ = [
    "boundary",
    "config",
    "ffsys",
    "hamiltonian",
    "models",
    "regions",
    "states",
    "subspace",
    "FFSystem",
    "check_ff",
    "Region",
    "box",
    "interval",
    "CapExceededError",
    "LocalOperator",
    "Projector",
]

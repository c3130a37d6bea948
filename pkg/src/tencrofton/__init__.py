"""Tensorial Crofton formulae for polytopes: exact coefficients, measures and Monte Carlo checks."""

__version__ = "0.1.0"

from .crofton import FORMULAS, coefficient_table, rhs_tensor
from .exact import ExactScalar, gamma, rgamma
from .grassmann_mc import LhsSpec, crofton_lhs_mc, verify
from .polytope import Box, FlatFrame, Polytope, build, catalog, load_body
from .symtensor import SymTensor
from .tencm import MeasureSpec, minkowski_tensor, phi

__all__ = [
    "FORMULAS",
    "coefficient_table",
    "rhs_tensor",
    "ExactScalar",
    "gamma",
    "rgamma",
    "LhsSpec",
    "crofton_lhs_mc",
    "verify",
    "Box",
    "FlatFrame",
    "Polytope",
    "build",
    "catalog",
    "load_body",
    "SymTensor",
    "MeasureSpec",
    "minkowski_tensor",
    "phi",
]

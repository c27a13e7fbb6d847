"""Exact operator algebra: coefficients, operators, and their text form."""

from .gauss import GaussQ
from .poly import Poly
from .coeff import AtomError, CoeffExpr, ATOM_DEPTH_LIMIT
from .operator import (
    DiffOperator,
    OperatorError,
    OperatorSystem,
    VectorField,
    apply,
    commutator,
    commutes,
    transpose,
)
from .dsl import (
    DSLError,
    NonRationalLiteralError,
    UnknownVariableError,
    format_coeff,
    format_operator,
    parse_coeff,
    parse_operator,
)

__all__ = [
    "GaussQ", "Poly", "AtomError", "CoeffExpr", "ATOM_DEPTH_LIMIT",
    "DiffOperator", "OperatorError", "OperatorSystem", "VectorField",
    "apply", "commutator", "commutes", "transpose",
    "DSLError", "NonRationalLiteralError", "UnknownVariableError",
    "format_coeff", "format_operator", "parse_coeff", "parse_operator",
]

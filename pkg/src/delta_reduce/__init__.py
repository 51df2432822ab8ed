"""delta_reduce: exact differential algebra with certified elimination.

The package computes differential tangent spaces of nonlinear ODE systems
and mechanically reduces the resulting linear differential systems to a
single solvable equation through audited chains of linear substitutions,
each carrying a nonvanishing certificate for its denominator.
"""

from .algebra import (
    DerivativeSymbol,
    DiffPolynomial,
    Indeterminate,
    Kind,
    Monomial,
    RationalExpr,
    Registry,
    derive,
    is_zero,
    partial,
    substitute,
    try_divide,
)
from .config import Limits, active_limits, limits
from .jets import JetAssignment, jet_eval, random_jet, random_nonzero_witness

__all__ = [
    "DerivativeSymbol",
    "DiffPolynomial",
    "Indeterminate",
    "JetAssignment",
    "Kind",
    "Limits",
    "Monomial",
    "RationalExpr",
    "Registry",
    "active_limits",
    "derive",
    "is_zero",
    "jet_eval",
    "limits",
    "partial",
    "random_jet",
    "random_nonzero_witness",
    "substitute",
    "try_divide",
]

__version__ = "0.1.0"

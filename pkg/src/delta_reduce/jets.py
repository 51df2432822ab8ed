"""Truncated-jet evaluation and randomized nonvanishing witnesses.

A jet assignment gives exact rational values to derivative symbols up to a
truncation order.  Evaluating a rational expression at a random jet is a
fast, sound pre-check for nonvanishing: any nonzero value certifies the
expression is not identically zero (the converse direction is only
probabilistic, so callers fall back to the exact zero test).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .algebra import DerivativeSymbol, Expr, RationalExpr
from .errors import DenominatorVanished

# sampling window for numerators/denominators of random jet values
SAMPLE_BOUND = 10**6
MAX_RESAMPLES = 5


@dataclass(frozen=True)
class JetAssignment:
    """Exact rational values for derivative symbols up to a truncation order."""

    truncation: int
    values: Mapping[DerivativeSymbol, Fraction] = field(default_factory=dict)

    def value_of(self, sym: DerivativeSymbol) -> Fraction:
        if sym.order > self.truncation:
            raise LookupError(f"{sym} exceeds jet truncation {self.truncation}")
        if sym not in self.values:
            raise LookupError(f"no value assigned to {sym}")
        return self.values[sym]

    def as_map(self) -> dict[DerivativeSymbol, Fraction]:
        return dict(self.values)


def jet_eval(e: Expr, jet: JetAssignment) -> Fraction:
    """Exact value of e under the assignment.

    Raises DenominatorVanished when the assignment lies on the zero set of
    the denominator; the caller should resample.
    """
    values = jet.values
    if isinstance(e, RationalExpr):
        num, den = e.evaluate_at(values)
        if den == 0:
            raise DenominatorVanished("assignment lies on the denominator's zero set")
        return num / den
    return e.evaluate(values)


def random_jet(
    symbols, rng: random.Random, truncation: Optional[int] = None
) -> JetAssignment:
    """Uniform rational values with numerator/denominator in the sample window."""
    symbols = sorted(symbols, key=lambda s: s.sort_key)
    values = {
        s: Fraction(rng.randint(-SAMPLE_BOUND, SAMPLE_BOUND), rng.randint(1, SAMPLE_BOUND))
        for s in symbols
    }
    if truncation is None:
        truncation = max((s.order for s in symbols), default=0)
    return JetAssignment(truncation, values)


def random_nonzero_witness(
    e: Expr, trials: int = 20, seed: int = 0
) -> Optional[JetAssignment]:
    """Search for a jet at which e evaluates to a nonzero rational.

    A returned witness is an unconditional proof that e != 0.  Returning
    None is inconclusive; callers fall back to the exact zero test.
    """
    if is_structurally_zero(e):
        return None
    symbols = e.symbols() if isinstance(e, RationalExpr) else e.symbols()
    rng = random.Random(seed)
    for _ in range(max(1, trials)):
        for _ in range(MAX_RESAMPLES):
            jet = random_jet(symbols, rng)
            try:
                value = jet_eval(e, jet)
            except DenominatorVanished:
                continue
            if value != 0:
                return jet
            break
    return None


def is_structurally_zero(e: Expr) -> bool:
    return e.is_zero

"""Shared generators for the test suite.

Random values are always drawn from an explicitly seeded Random so every
test run is reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction

from delta_reduce import (
    DerivativeSymbol,
    DiffPolynomial,
    Indeterminate,
    Monomial,
    RationalExpr,
    Registry,
)


def fresh_registry() -> Registry:
    return Registry()


def random_coeff(rng: random.Random, bound: int = 9) -> Fraction:
    num = rng.randint(-bound, bound)
    if num == 0:
        num = 1
    return Fraction(num, rng.randint(1, bound))


def random_monomial(
    rng: random.Random,
    inds: list[Indeterminate],
    max_order: int = 3,
    max_degree: int = 4,
) -> Monomial:
    degree = rng.randint(0, max_degree)
    pairs: dict[DerivativeSymbol, int] = {}
    for _ in range(degree):
        sym = DerivativeSymbol(rng.choice(inds), rng.randint(0, max_order))
        pairs[sym] = pairs.get(sym, 0) + 1
    return Monomial(pairs.items())


def random_poly(
    rng: random.Random,
    inds: list[Indeterminate],
    terms: int = 4,
    max_order: int = 3,
    max_degree: int = 4,
) -> DiffPolynomial:
    acc: dict[Monomial, Fraction] = {}
    for _ in range(rng.randint(1, terms)):
        m = random_monomial(rng, inds, max_order, max_degree)
        acc[m] = acc.get(m, Fraction(0)) + random_coeff(rng)
    return DiffPolynomial(acc)


def random_nonzero_poly(rng, inds, **kw) -> DiffPolynomial:
    while True:
        p = random_poly(rng, inds, **kw)
        if not p.is_zero:
            return p


def random_rational(rng, inds, **kw) -> RationalExpr:
    return RationalExpr(random_poly(rng, inds, **kw), random_nonzero_poly(rng, inds, **kw))

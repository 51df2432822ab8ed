"""Linear differential systems and linear substitutions.

A linear differential equation is stored as a signed coefficient map
``(variable, order) -> RationalExpr`` meaning "sum equals zero", together
with the set of variables displayed on the right-hand side (whose displayed
coefficients are the negated stored ones).  Coefficients are rational
expressions over free transcendentals only; the dependent variables appear
linearly and homogeneously.

The central transformation is the linear change of variables

    target  =  fresh  +  sum_j  rho_j * other^(j)

applied differentially to every equation: an occurrence target^(k) expands
through the Leibniz rule into contributions C(k,r) * rho_j^(k-r) * other^(j+r).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Optional

from .algebra import (
    DiffPolynomial,
    Indeterminate,
    Kind,
    RationalExpr,
    substitute,
)
from .errors import MalformedSystem

Key = tuple[Indeterminate, int]
CoeffMap = dict[Key, RationalExpr]
CoeffVec = dict[int, RationalExpr]


def _clean(coeffs: Mapping[Key, RationalExpr]) -> CoeffMap:
    return {k: v for k, v in coeffs.items() if not v.is_zero}


class LinearEquation:
    """One linear homogeneous equation over the dependent variables."""

    __slots__ = ("_coeffs", "_rhs_vars")

    def __init__(self, coeffs: Mapping[Key, RationalExpr], rhs_vars: Iterable[Indeterminate] = ()):
        self._coeffs = _clean(coeffs)
        self._rhs_vars = frozenset(rhs_vars)
        for (var, order), c in self._coeffs.items():
            if any(ind.kind is Kind.DEPENDENT for ind in c.indeterminates()):
                raise MalformedSystem(
                    f"coefficient of {var.name}^({order}) contains dependent variables"
                )

    @staticmethod
    def from_sides(
        lhs: Mapping[Key, RationalExpr], rhs: Mapping[Key, RationalExpr]
    ) -> "LinearEquation":
        coeffs: CoeffMap = dict(_clean(lhs))
        for k, v in _clean(rhs).items():
            coeffs[k] = coeffs.get(k, RationalExpr.ZERO) - v
        return LinearEquation(_clean(coeffs), {var for var, _ in rhs})

    @property
    def coeffs(self) -> CoeffMap:
        return dict(self._coeffs)

    @property
    def rhs_vars(self) -> frozenset[Indeterminate]:
        return self._rhs_vars

    def variables(self) -> set[Indeterminate]:
        return {var for var, _ in self._coeffs}

    def coefficient(self, var: Indeterminate, order: int) -> RationalExpr:
        return self._coeffs.get((var, order), RationalExpr.ZERO)

    def order_of(self, var: Indeterminate) -> Optional[int]:
        orders = [k for v, k in self._coeffs if v == var]
        return max(orders) if orders else None

    def block(self, var: Indeterminate, signed: bool = True) -> CoeffVec:
        """Coefficient vector of one variable; rhs variables are negated unless signed."""
        flip = not signed and var in self._rhs_vars
        return {
            k: (-c if flip else c) for (v, k), c in self._coeffs.items() if v == var
        }

    def lhs(self) -> CoeffMap:
        return {
            (v, k): c for (v, k), c in self._coeffs.items() if v not in self._rhs_vars
        }

    def rhs(self) -> CoeffMap:
        return {
            (v, k): -c for (v, k), c in self._coeffs.items() if v in self._rhs_vars
        }

    def assemble(self) -> RationalExpr:
        """The equation as a single expression (lhs minus rhs), for oracle checks."""
        total = RationalExpr.ZERO
        for (var, order), c in sorted(
            self._coeffs.items(), key=lambda t: (t[0][0].name, t[0][1])
        ):
            total = total + c * RationalExpr.of(var, order)
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearEquation):
            return NotImplemented
        if set(self._coeffs) != set(other._coeffs):
            return False
        return all(other._coeffs[k] == v for k, v in self._coeffs.items())

    __hash__ = None

    def __repr__(self) -> str:
        from .frontend.printer import equation_text

        return f"LinearEquation({equation_text(self)})"


@dataclass(frozen=True)
class LinearDiffSystem:
    """Ordered list of linear equations over an ordered list of variables."""

    equations: tuple[LinearEquation, ...]
    variables: tuple[Indeterminate, ...]

    def __post_init__(self):
        declared = set(self.variables)
        for eq in self.equations:
            missing = eq.variables() - declared
            if missing:
                raise MalformedSystem(
                    f"equation uses undeclared variables {sorted(v.name for v in missing)}"
                )

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearDiffSystem):
            return NotImplemented
        return (
            self.variables == other.variables
            and len(self.equations) == len(other.equations)
            and all(a == b for a, b in zip(self.equations, other.equations))
        )

    __hash__ = None


# -- the linear substitution engine ------------------------------------------------


def _rho_derivatives(rho: RationalExpr, depth: int) -> list[RationalExpr]:
    out = [rho]
    for _ in range(depth):
        out.append(out[-1].derive())
    return out


def substitute_equation(
    eq: LinearEquation,
    target: Indeterminate,
    fresh: Optional[Indeterminate],
    terms: Mapping[Key, RationalExpr],
) -> LinearEquation:
    """Apply target = fresh + sum_j terms[(w, j)] * w^(j) to one equation."""
    max_k = eq.order_of(target)
    if max_k is None:
        if fresh is None or target not in eq.variables():
            return eq
        max_k = 0
    derivs = {key: _rho_derivatives(rho, max_k) for key, rho in terms.items() if not rho.is_zero}
    out: CoeffMap = {}

    def put(key: Key, val: RationalExpr) -> None:
        acc = out.get(key)
        total = val if acc is None else acc + val
        if total.is_zero:
            out.pop(key, None)
        else:
            out[key] = total

    for (var, k), c in eq.coeffs.items():
        if var != target:
            put((var, k), c)
            continue
        if fresh is not None:
            put((fresh, k), c)
        for (w, j), rho_list in derivs.items():
            for r in range(k + 1):
                put((w, j + r), c * comb(k, r) * rho_list[k - r])

    rhs_vars = set(eq.rhs_vars)
    if target in rhs_vars:
        rhs_vars.discard(target)
        if fresh is not None:
            rhs_vars.add(fresh)
    return LinearEquation(out, rhs_vars)


def substitute_system(
    system: LinearDiffSystem,
    target: Indeterminate,
    fresh: Optional[Indeterminate],
    terms: Mapping[Key, RationalExpr],
) -> LinearDiffSystem:
    equations = tuple(
        substitute_equation(eq, target, fresh, terms) for eq in system.equations
    )
    variables = []
    for v in system.variables:
        if v == target:
            if fresh is not None:
                variables.append(fresh)
            for w, _ in terms:
                if w not in variables and w not in system.variables:
                    variables.append(w)
        else:
            variables.append(v)
    for w, _ in terms:
        if w not in variables:
            variables.append(w)
    return LinearDiffSystem(equations, tuple(variables))


def replacement_expression(
    fresh: Optional[Indeterminate], terms: Mapping[Key, RationalExpr]
) -> RationalExpr:
    """The substitution's right-hand side as a single expression."""
    total = RationalExpr.ZERO if fresh is None else RationalExpr.of(fresh)
    for (w, j), rho in sorted(terms.items(), key=lambda t: (t[0][0].name, t[0][1])):
        total = total + rho * RationalExpr.of(w, j)
    return total


def oracle_substituted(
    eq: LinearEquation,
    target: Indeterminate,
    fresh: Optional[Indeterminate],
    terms: Mapping[Key, RationalExpr],
) -> RationalExpr:
    """Brute-force path: assemble the equation and run the core differential
    substitution, bypassing the coefficient-level Leibniz convolution."""
    return substitute(eq.assemble(), target, replacement_expression(fresh, terms))


# -- coefficient-vector helpers (block form) ---------------------------------------


def vec_clean(vec: Mapping[int, RationalExpr]) -> CoeffVec:
    return {k: v for k, v in vec.items() if not v.is_zero}


def vec_order(vec: Mapping[int, RationalExpr]) -> Optional[int]:
    clean = [k for k, v in vec.items() if not v.is_zero]
    return max(clean) if clean else None


def vec_add(a: Mapping[int, RationalExpr], b: Mapping[int, RationalExpr]) -> CoeffVec:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, RationalExpr.ZERO) + v
    return vec_clean(out)

def vec_sub(a: Mapping[int, RationalExpr], b: Mapping[int, RationalExpr]) -> CoeffVec:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, RationalExpr.ZERO) - v
    return vec_clean(out)


def vec_convolve(
    src: Mapping[int, RationalExpr],
    rho: RationalExpr,
    shift: int,
    derivs: Optional[list[RationalExpr]] = None,
) -> CoeffVec:
    """Collect sum_k src[k] * d^k(rho * v^(shift)) by the order of v."""
    if rho.is_zero or not src:
        return {}
    max_k = max(src)
    if derivs is None or len(derivs) <= max_k:
        derivs = _rho_derivatives(rho, max_k)
    out: CoeffVec = {}
    for k, c in src.items():
        if c.is_zero:
            continue
        for r in range(k + 1):
            key = shift + r
            term = c * comb(k, r) * derivs[k - r]
            out[key] = out.get(key, RationalExpr.ZERO) + term
    return vec_clean(out)


def vec_convolve_multi(
    src: Mapping[int, RationalExpr], terms: Mapping[int, RationalExpr]
) -> CoeffVec:
    """Collect sum_i src[i] * d^i( sum_j terms[j] * u^(j) ) by the order of u."""
    out: CoeffVec = {}
    for j, rho in terms.items():
        for key, val in vec_convolve(src, rho, j).items():
            out[key] = out.get(key, RationalExpr.ZERO) + val
    return vec_clean(out)


# -- block form of a system mid-elimination -----------------------------------------


@dataclass
class LowerEquation:
    """c-block on the kept variable, e-block on the variable being eliminated,
    beta-block on the equation's own right-hand variable."""

    w: Indeterminate
    c: CoeffVec
    e: CoeffVec
    beta: CoeffVec

    def copy(self) -> "LowerEquation":
        return LowerEquation(self.w, dict(self.c), dict(self.e), dict(self.beta))


@dataclass
class BlockSystem:
    """Elimination state: one top equation a(u) = b(z) plus lower equations
    c(u) + e(z) = beta(w), all coefficients over free transcendentals."""

    u: Indeterminate
    z: Indeterminate
    a: CoeffVec
    b: CoeffVec
    lower: list[LowerEquation] = field(default_factory=list)

    @property
    def ell(self) -> int:
        order = vec_order(self.a)
        if order is None:
            raise MalformedSystem("top equation has empty kept-variable block")
        return order

    @property
    def z_order(self) -> Optional[int]:
        return vec_order(self.b)

    @property
    def h(self) -> int:
        orders = [vec_order(low.beta) for low in self.lower]
        orders = [o for o in orders if o is not None]
        return max(orders) if orders else self.ell

    def copy(self) -> "BlockSystem":
        return BlockSystem(
            self.u, self.z, dict(self.a), dict(self.b), [lo.copy() for lo in self.lower]
        )

    def to_linear(self) -> LinearDiffSystem:
        eqs = [_block_top_equation(self)]
        variables = [self.u, self.z]
        for low in self.lower:
            coeffs: CoeffMap = {}
            for k, v in low.c.items():
                coeffs[(self.u, k)] = v
            for k, v in low.e.items():
                coeffs[(self.z, k)] = coeffs.get((self.z, k), RationalExpr.ZERO) + v
            for k, v in low.beta.items():
                coeffs[(low.w, k)] = -v
            eqs.append(LinearEquation(coeffs, {low.w}))
            variables.append(low.w)
        return LinearDiffSystem(tuple(eqs), tuple(variables))


def _block_top_equation(bs: BlockSystem) -> LinearEquation:
    coeffs: CoeffMap = {}
    for k, v in bs.a.items():
        coeffs[(bs.u, k)] = v
    for k, v in bs.b.items():
        coeffs[(bs.z, k)] = coeffs.get((bs.z, k), RationalExpr.ZERO) - v
    return LinearEquation(coeffs, {bs.z})


def block_from_equations(
    top: LinearEquation, lowers: Iterable[LinearEquation], u: Indeterminate, z: Indeterminate
) -> BlockSystem:
    """Read a block system off equations already in the required shape."""
    a = vec_clean(top.block(u))
    b = vec_clean(top.block(z, signed=False))
    if z not in top.rhs_vars or top.variables() - {u, z}:
        raise MalformedSystem("top equation must relate exactly the kept and eliminated variables")
    lower_eqs: list[LowerEquation] = []
    for eq in lowers:
        rhs = eq.rhs_vars
        if len(rhs) != 1:
            raise MalformedSystem("lower equation must have exactly one right-hand variable")
        w = next(iter(rhs))
        extra = eq.variables() - {u, z, w}
        if extra:
            raise MalformedSystem("lower equation has stray variables")
        lower_eqs.append(
            LowerEquation(
                w,
                vec_clean(eq.block(u)),
                vec_clean(eq.block(z)),
                vec_clean(eq.block(w, signed=False)),
            )
        )
    return BlockSystem(u, z, a, b, lower_eqs)

"""Exact arithmetic for differential polynomials over Q.

A differential polynomial is a sparse multivariate polynomial whose
variables are derivative symbols ``x, x', x'', ...`` of named
indeterminates.  Indeterminates come in two kinds:

  * dependent variables -- the unknowns of differential equations;
  * free transcendentals -- coefficient symbols whose derivatives of every
    order are treated as fresh, algebraically independent variables.

Under that convention a polynomial is zero exactly when its canonical term
map is empty, which makes zero testing (and hence equality of rational
expressions by cross multiplication) decidable by plain expansion.

Representation:

  Monomial        packed-exponent integer key (16 bits per symbol slot,
                  slots assigned by a process-wide append-only table), so a
                  monomial product is a single integer addition and
                  divisibility is a guard-bit test
  DiffPolynomial  frozen map  key -> nonzero rational coefficient
  RationalExpr    expanded numerator over a multiset of denominator factors

Coefficients use gmpy2.mpq when available (fractions.Fraction otherwise);
both are exact rationals with arbitrary-precision integers.

All values are immutable after construction; every operation is a pure
function of its inputs, so values can be shared freely between threads.
"""

from __future__ import annotations

import heapq
import re
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping, Optional, Union

from .config import active_limits
from .errors import (
    RegistryConflict,
    ResourceLimit,
    UnknownIndeterminate,
    ZeroDenominator,
)

try:  # pragma: no cover - environment dependent
    from gmpy2 import mpq as _ratio
except ImportError:  # pragma: no cover
    _ratio = Fraction

_RATIO_T = type(_ratio(1))


def _to_ratio(x):
    if type(x) is _RATIO_T:
        return x
    if isinstance(x, Fraction):
        return _ratio(x.numerator, x.denominator)
    return _ratio(x)


Rat = Union[int, Fraction]

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Kind(str, Enum):
    DEPENDENT = "dependent-variable"
    FREE = "free-transcendental"


@dataclass(frozen=True)
class Indeterminate:
    """A named generator of the differential ring.  Kind is immutable."""

    name: str
    kind: Kind

    def d(self, order: int = 0) -> "DerivativeSymbol":
        return DerivativeSymbol(self, order)

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Indeterminate({self.name!r}, {self.kind.value})"


class Registry:
    """Session-scoped table of indeterminate names.

    Names are unique; re-declaring a name with the same kind returns the
    existing indeterminate, with a different kind it raises.  The table is
    append-only and safe for concurrent reads.
    """

    def __init__(self) -> None:
        self._by_name: dict[str, Indeterminate] = {}
        self._lock = threading.Lock()

    def declare(self, name: str, kind: Kind) -> Indeterminate:
        if not _NAME_RE.match(name):
            raise ValueError(f"invalid indeterminate name {name!r}")
        with self._lock:
            existing = self._by_name.get(name)
            if existing is not None:
                if existing.kind is not kind:
                    raise RegistryConflict(
                        f"{name} already declared as {existing.kind.value}"
                    )
                return existing
            ind = Indeterminate(name, kind)
            self._by_name[name] = ind
            return ind

    def dependent(self, *names: str):
        made = tuple(self.declare(n, Kind.DEPENDENT) for n in names)
        return made[0] if len(made) == 1 else made

    def free(self, *names: str):
        made = tuple(self.declare(n, Kind.FREE) for n in names)
        return made[0] if len(made) == 1 else made

    def lookup(self, name: str) -> Indeterminate:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownIndeterminate(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> tuple[str, ...]:
        return tuple(self._by_name)


@dataclass(frozen=True)
class DerivativeSymbol:
    """The k-th derivative of an indeterminate, treated as an algebraic variable."""

    base: Indeterminate
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("derivative order must be >= 0")

    def d(self, times: int = 1) -> "DerivativeSymbol":
        return DerivativeSymbol(self.base, self.order + times)

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.base.name, self.order)

    def __str__(self) -> str:
        if self.order == 0:
            return self.base.name
        if self.order <= 3:
            return self.base.name + "'" * self.order
        return f"{self.base.name}^({self.order})"

    def __repr__(self) -> str:
        return f"<{self}>"


# -- packed exponent keys -----------------------------------------------------------
#
# Every DerivativeSymbol is assigned a process-wide slot; a monomial is the
# integer whose 16-bit field at slot i holds the exponent of symbol i.  The
# guard bit 0x8000 of each field stays clear (exponents are capped well
# below it), which allows the classic packed comparison: b divides a
# slot-wise exactly when ((a | H) - b) keeps every guard bit set.

SLOT_BITS = 16
SLOT_MASK = (1 << SLOT_BITS) - 1
GUARD_BIT = 1 << (SLOT_BITS - 1)
EXP_LIMIT = GUARD_BIT - 1


class _SymbolTable:
    __slots__ = ("_slots", "_symbols", "_guard", "_lock")

    def __init__(self) -> None:
        self._slots: dict[DerivativeSymbol, int] = {}
        self._symbols: list[DerivativeSymbol] = []
        self._guard = 0
        self._lock = threading.Lock()

    def slot(self, sym: DerivativeSymbol) -> int:
        slot = self._slots.get(sym)
        if slot is not None:
            return slot
        with self._lock:
            slot = self._slots.get(sym)
            if slot is None:
                slot = len(self._symbols)
                self._symbols.append(sym)
                self._guard |= GUARD_BIT << (SLOT_BITS * slot)
                self._slots[sym] = slot
            return slot

    def symbol(self, slot: int) -> DerivativeSymbol:
        return self._symbols[slot]

    @property
    def guard(self) -> int:
        return self._guard


_TABLE = _SymbolTable()


def _encode(pairs: Iterable[tuple[DerivativeSymbol, int]]) -> int:
    key = 0
    for sym, e in pairs:
        if e < 0:
            raise ValueError("negative exponent in monomial")
        if e > EXP_LIMIT:
            raise ResourceLimit(f"exponent {e} exceeds packed-field capacity")
        if e:
            key += e << (SLOT_BITS * _TABLE.slot(sym))
    return key


def _decode(key: int) -> list[tuple[int, int]]:
    """(slot, exponent) pairs of a packed key, ascending by slot."""
    out = []
    slot = 0
    while key:
        e = key & SLOT_MASK
        if e:
            out.append((slot, e))
        key >>= SLOT_BITS
        slot += 1
    return out


def _key_degree(key: int) -> int:
    total = 0
    while key:
        total += key & SLOT_MASK
        key >>= SLOT_BITS
    return total


class Monomial:
    """A finite power product of derivative symbols.  The empty product is 1."""

    __slots__ = ("_key",)

    def __init__(self, exps: Iterable[tuple[DerivativeSymbol, int]] = ()):
        merged: dict[DerivativeSymbol, int] = {}
        for s, e in exps:
            merged[s] = merged.get(s, 0) + e
        self._key = _encode(merged.items())

    ONE: "Monomial"

    @staticmethod
    def of(sym: DerivativeSymbol, exp: int = 1) -> "Monomial":
        return Monomial(((sym, exp),))

    @staticmethod
    def _from_key(key: int) -> "Monomial":
        m = Monomial.__new__(Monomial)
        m._key = key
        return m

    @property
    def key(self) -> int:
        return self._key

    @property
    def exps(self) -> tuple[tuple[DerivativeSymbol, int], ...]:
        pairs = [(_TABLE.symbol(slot), e) for slot, e in _decode(self._key)]
        pairs.sort(key=lambda p: p[0].sort_key)
        return tuple(pairs)

    def degree(self) -> int:
        return _key_degree(self._key)

    def symbols(self) -> Iterator[DerivativeSymbol]:
        return (s for s, _ in self.exps)

    def exp(self, sym: DerivativeSymbol) -> int:
        return (self._key >> (SLOT_BITS * _TABLE.slot(sym))) & SLOT_MASK

    def is_one(self) -> bool:
        return not self._key

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial._from_key(self._key + other._key)

    def without(self, sym: DerivativeSymbol, times: int = 1) -> "Monomial":
        """Divide by sym**times; requires the exponent to be large enough."""
        shift = SLOT_BITS * _TABLE.slot(sym)
        if ((self._key >> shift) & SLOT_MASK) < times:
            raise ValueError("monomial not divisible")
        return Monomial._from_key(self._key - (times << shift))

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def display_key(self):
        # graded, then lexicographic on the symbol sequence; used for stable printing
        return (self.degree(), tuple((s.base.name, s.order, e) for s, e in self.exps))

    def __str__(self) -> str:
        if not self._key:
            return "1"
        parts = []
        for s, e in self.exps:
            parts.append(str(s) if e == 1 else f"{s}^{e}")
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"Monomial({self})"


Monomial.ONE = Monomial()


def _format_coeff(c) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class DiffPolynomial:
    """Sparse differential polynomial with exact rational coefficients.

    The term map is canonical: no zero coefficients are stored, so two
    polynomials are equal exactly when their term maps are equal and the
    zero polynomial is the empty map.
    """

    __slots__ = ("_terms", "_hash", "_degree", "_symbols", "_sym_degrees")

    def __init__(self, terms: Optional[Mapping[Monomial, Rat]] = None):
        clean: dict[int, object] = {}
        if terms:
            for m, c in terms.items():
                c = _to_ratio(c)
                if c:
                    k = m.key if isinstance(m, Monomial) else int(m)
                    acc = clean.get(k)
                    c = c if acc is None else acc + c
                    if c:
                        clean[k] = c
                    elif k in clean:
                        del clean[k]
        self._init_raw(clean)

    def _init_raw(self, terms: dict[int, object]) -> None:
        if len(terms) > active_limits().max_terms:
            raise ResourceLimit(f"term count {len(terms)} exceeds cap")
        self._terms = terms
        self._hash: Optional[int] = None
        self._degree: Optional[int] = None
        self._symbols: Optional[frozenset[DerivativeSymbol]] = None
        self._sym_degrees: Optional[dict[DerivativeSymbol, int]] = None

    # -- construction helpers -------------------------------------------------

    ZERO: "DiffPolynomial"
    ONE: "DiffPolynomial"

    @staticmethod
    def const(c: Rat) -> "DiffPolynomial":
        c = _to_ratio(c)
        return DiffPolynomial._raw({0: c} if c else {})

    @staticmethod
    def of(x: Union[Indeterminate, DerivativeSymbol], order: int = 0) -> "DiffPolynomial":
        sym = x if isinstance(x, DerivativeSymbol) else DerivativeSymbol(x, order)
        return DiffPolynomial._raw({1 << (SLOT_BITS * _TABLE.slot(sym)): _ratio(1)})

    @staticmethod
    def _raw(terms: dict[int, object]) -> "DiffPolynomial":
        # internal: keys packed, no zero coefficients
        p = DiffPolynomial.__new__(DiffPolynomial)
        p._init_raw(terms)
        return p

    # -- inspection ------------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return {Monomial._from_key(k): Fraction(c) for k, c in self._terms.items()}

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def term_count(self) -> int:
        return len(self._terms)

    def degree(self) -> int:
        if self._degree is None:
            self._degree = max((_key_degree(k) for k in self._terms), default=0)
        return self._degree

    def support_key(self) -> int:
        out = 0
        for k in self._terms:
            out |= k
        return out

    def symbols(self) -> frozenset[DerivativeSymbol]:
        if self._symbols is None:
            self._symbols = frozenset(
                _TABLE.symbol(slot) for slot, _ in _decode(self.support_key())
            )
        return self._symbols

    def symbol_degrees(self) -> Mapping[DerivativeSymbol, int]:
        """Max exponent of each symbol across all terms."""
        if self._sym_degrees is None:
            degs: dict[int, int] = {}
            for k in self._terms:
                for slot, e in _decode(k):
                    if degs.get(slot, 0) < e:
                        degs[slot] = e
            self._sym_degrees = {_TABLE.symbol(s): e for s, e in degs.items()}
        return self._sym_degrees

    def indeterminates(self) -> set[Indeterminate]:
        return {s.base for s in self.symbols()}

    def max_order(self) -> int:
        """Highest derivative order of any symbol; 0 for constants."""
        return max((s.order for s in self.symbols()), default=0)

    def order(self) -> Optional[int]:
        """Highest derivative order among dependent-variable symbols."""
        orders = [s.order for s in self.symbols() if s.base.kind is Kind.DEPENDENT]
        return max(orders) if orders else None

    def order_in(self, x: Indeterminate) -> Optional[int]:
        """Highest derivative order of x occurring, or None if x is absent."""
        orders = [s.order for s in self.symbols() if s.base == x]
        return max(orders) if orders else None

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and 0 in self._terms)

    def constant_value(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return Fraction(self._terms[0])

    def coefficient(self, m: Monomial) -> Fraction:
        return Fraction(self._terms.get(m.key, 0))

    def content(self) -> Fraction:
        """gcd of coefficient numerators over lcm of denominators (positive)."""
        if not self._terms:
            return Fraction(1)
        num_gcd = 0
        den_lcm = 1
        for c in self._terms.values():
            n, d = int(c.numerator), int(c.denominator)
            num_gcd = gcd(num_gcd, abs(n))
            den_lcm = den_lcm * d // gcd(den_lcm, d)
        return Fraction(num_gcd, den_lcm)

    def _lead_key(self) -> int:
        return max(self._terms, key=lambda k: (_key_degree(k), k))

    def leading_sign(self) -> int:
        if not self._terms:
            return 0
        return 1 if self._terms[self._lead_key()] > 0 else -1

    def as_univariate_in(self, sym: DerivativeSymbol) -> dict[int, "DiffPolynomial"]:
        """Split into {exponent of sym: cofactor polynomial}."""
        shift = SLOT_BITS * _TABLE.slot(sym)
        buckets: dict[int, dict[int, object]] = {}
        for k, c in self._terms.items():
            e = (k >> shift) & SLOT_MASK
            buckets.setdefault(e, {})[k - (e << shift)] = c
        return {e: DiffPolynomial._raw(t) for e, t in buckets.items()}

    # -- ring operations ---------------------------------------------------------

    def __add__(self, other) -> "DiffPolynomial":
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        if not self._terms:
            return other
        if not other._terms:
            return self
        out = dict(self._terms)
        for k, c in other._terms.items():
            acc = out.get(k)
            s = c if acc is None else acc + c
            if s:
                out[k] = s
            elif acc is not None:
                del out[k]
        return DiffPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPolynomial":
        return DiffPolynomial._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "DiffPolynomial":
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        if not other._terms:
            return self
        out = dict(self._terms)
        for k, c in other._terms.items():
            acc = out.get(k)
            s = -c if acc is None else acc - c
            if s:
                out[k] = s
            elif acc is not None:
                del out[k]
        return DiffPolynomial._raw(out)

    def __rsub__(self, other) -> "DiffPolynomial":
        other = _coerce_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def scale(self, c: Rat) -> "DiffPolynomial":
        c = _to_ratio(c)
        if not c:
            return DiffPolynomial.ZERO
        return DiffPolynomial._raw({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other) -> "DiffPolynomial":
        if isinstance(other, (int, Fraction)) or type(other) is _RATIO_T:
            return self.scale(other)
        if not isinstance(other, DiffPolynomial):
            return NotImplemented
        if not self._terms or not other._terms:
            return DiffPolynomial.ZERO
        cap = active_limits().max_degree
        if self.degree() + other.degree() > cap:
            raise ResourceLimit(
                f"product degree {self.degree() + other.degree()} exceeds cap {cap}"
            )
        return DiffPolynomial._raw(_mul_terms(self._terms, other._terms))

    def __rmul__(self, other) -> "DiffPolynomial":
        if isinstance(other, (int, Fraction)) or type(other) is _RATIO_T:
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "DiffPolynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers take non-negative integer exponents")
        result = DiffPolynomial.ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- differential structure ---------------------------------------------------

    def derive(self, times: int = 1) -> "DiffPolynomial":
        """Apply the derivation: additive, Leibniz, sends s to s' for every symbol."""
        p = self
        for _ in range(times):
            p = p._derive_once()
        return p

    def _derive_once(self) -> "DiffPolynomial":
        cap = active_limits().max_order
        # shift map from each occupied slot to the slot of the next derivative
        shifts: dict[int, tuple[int, int]] = {}
        for slot, _ in _decode(self.support_key()):
            sym = _TABLE.symbol(slot)
            if sym.order + 1 > cap:
                raise ResourceLimit(f"derivative order {sym.order + 1} exceeds cap")
            shifts[slot] = (
                SLOT_BITS * slot,
                SLOT_BITS * _TABLE.slot(sym.d()),
            )
        out: dict[int, object] = {}
        for k, c in self._terms.items():
            for slot, e in _decode(k):
                down, up = shifts[slot]
                nk = k - (1 << down) + (1 << up)
                coeff = c * e
                acc = out.get(nk)
                val = coeff if acc is None else acc + coeff
                if val:
                    out[nk] = val
                elif acc is not None:
                    del out[nk]
        return DiffPolynomial._raw(out)

    def partial(self, sym: DerivativeSymbol) -> "DiffPolynomial":
        """Formal partial derivative, treating every symbol as algebraic."""
        shift = SLOT_BITS * _TABLE.slot(sym)
        out: dict[int, object] = {}
        for k, c in self._terms.items():
            e = (k >> shift) & SLOT_MASK
            if not e:
                continue
            nk = k - (1 << shift)
            coeff = c * e
            acc = out.get(nk)
            val = coeff if acc is None else acc + coeff
            if val:
                out[nk] = val
            elif acc is not None:
                del out[nk]
        return DiffPolynomial._raw(out)

    def evaluate(self, values: Mapping[DerivativeSymbol, Fraction]) -> Fraction:
        cache: dict[int, Fraction] = {}
        for slot, _ in _decode(self.support_key()):
            sym = _TABLE.symbol(slot)
            if sym not in values:
                raise LookupError(f"no value assigned to {sym}")
            cache[slot] = _to_ratio(values[sym])
        total = _ratio(0)
        for k, c in self._terms.items():
            v = c
            for slot, e in _decode(k):
                v *= cache[slot] ** e
            total += v
        return Fraction(total)

    def rename(self, old: Indeterminate, new: Indeterminate) -> "DiffPolynomial":
        """Replace every derivative of old with the same derivative of new."""
        moves: dict[int, tuple[int, int]] = {}
        for slot, _ in _decode(self.support_key()):
            sym = _TABLE.symbol(slot)
            if sym.base == old:
                moves[slot] = (
                    SLOT_BITS * slot,
                    SLOT_BITS * _TABLE.slot(DerivativeSymbol(new, sym.order)),
                )
        if not moves:
            return self
        out: dict[int, object] = {}
        for k, c in self._terms.items():
            nk = k
            for slot, (down, up) in moves.items():
                e = (k >> down) & SLOT_MASK
                if e:
                    nk = nk - (e << down) + (e << up)
            acc = out.get(nk)
            val = c if acc is None else acc + c
            if val:
                out[nk] = val
            elif acc is not None:
                del out[nk]
        return DiffPolynomial._raw(out)

    # -- comparison / rendering ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPolynomial.const(other)
        if not isinstance(other, DiffPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset((k, Fraction(c)) for k, c in self._terms.items()))
        return self._hash

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        pairs = [(Monomial._from_key(k), Fraction(c)) for k, c in self._terms.items()]
        pairs.sort(key=lambda t: t[0].display_key(), reverse=True)
        return pairs

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        chunks: list[str] = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            neg = c < 0
            mag = -c if neg else c
            if m.is_one():
                body = _format_coeff(mag)
            elif mag == 1:
                body = str(m)
            else:
                body = f"{_format_coeff(mag)}*{m}"
            if i == 0:
                chunks.append(f"-{body}" if neg else body)
            else:
                chunks.append(f" - {body}" if neg else f" + {body}")
        return "".join(chunks)

    def __repr__(self) -> str:
        return f"DiffPolynomial({self})"


DiffPolynomial.ZERO = DiffPolynomial()
DiffPolynomial.ONE = DiffPolynomial.const(1)


def _mul_terms(a: dict[int, object], b: dict[int, object]) -> dict[int, object]:
    if len(a) > len(b):
        a, b = b, a
    out: dict[int, object] = {}
    get = out.get
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            k = k1 + k2
            acc = get(k)
            s = c1 * c2 if acc is None else acc + c1 * c2
            if s:
                out[k] = s
            elif acc is not None:
                del out[k]
    return out


def _coerce_poly(v) -> DiffPolynomial:
    if isinstance(v, DiffPolynomial):
        return v
    if isinstance(v, (int, Fraction)) or type(v) is _RATIO_T:
        return DiffPolynomial.const(v)
    return NotImplemented


# -- exact sparse division ------------------------------------------------------


def try_divide(p: DiffPolynomial, q: DiffPolynomial) -> Optional[DiffPolynomial]:
    """Return t with p == q*t if q divides p exactly, else None.

    Sparse division against the graded leading term of q with a
    lazy-deletion max-heap over the remainder; bails out at the first
    non-divisible leading term.  Cheap necessary conditions (degree and
    per-symbol degree containment) reject most non-divisors up front.
    """
    if q.is_zero:
        return None
    if p.is_zero:
        return DiffPolynomial.ZERO
    if q.is_constant():
        return p.scale(Fraction(1) / Fraction(q._terms[0]))
    if p.degree() < q.degree():
        return None
    guard = _TABLE.guard
    psup = p.support_key()
    qsup = q.support_key()
    # every symbol of q must occur in p
    if ((psup | guard) - qsup) & guard != guard:
        return None
    p_degs = p.symbol_degrees()
    for s, d in q.symbol_degrees().items():
        if p_degs.get(s, 0) < d:
            return None

    qlead = max(q._terms, key=lambda k: (_key_degree(k), k))
    qlc = q._terms[qlead]
    qdeg = _key_degree(qlead)
    qrest = [(k, _key_degree(k), c) for k, c in q._terms.items() if k != qlead]

    rem = dict(p._terms)
    degs = {k: _key_degree(k) for k in rem}
    heap = [(-d, -k) for k, d in degs.items()]
    heapq.heapify(heap)
    quotient: dict[int, object] = {}

    while rem:
        while True:
            nd, nk = heap[0]
            lead = -nk
            if lead in rem:
                lead_deg = -nd
                break
            heapq.heappop(heap)
        # divisibility of the leading monomials, guard-bit test
        if ((lead | guard) - qlead) & guard != guard:
            return None
        diff = lead - qlead
        diff_deg = lead_deg - qdeg
        coeff = rem.pop(lead) / qlc
        del degs[lead]
        heapq.heappop(heap)
        quotient[diff] = coeff
        for k, d, c in qrest:
            m = diff + k
            acc = rem.get(m)
            if acc is None:
                rem[m] = -coeff * c
                degs[m] = diff_deg + d
                heapq.heappush(heap, (-(diff_deg + d), -m))
            else:
                val = acc - coeff * c
                if val:
                    rem[m] = val
                else:
                    del rem[m]
                    del degs[m]

    return DiffPolynomial._raw(quotient)


# -- rational expressions ---------------------------------------------------------


def _mul_unchecked(a: DiffPolynomial, b: DiffPolynomial) -> DiffPolynomial:
    """Product without the degree cap; used only to expand denominators."""
    if not a._terms or not b._terms:
        return DiffPolynomial.ZERO
    return DiffPolynomial._raw(_mul_terms(a._terms, b._terms))


Factors = dict[DiffPolynomial, int]


def _expand_factors(factors: Mapping[DiffPolynomial, int]) -> DiffPolynomial:
    out = DiffPolynomial.ONE
    for f, e in sorted(factors.items(), key=lambda t: str(t[0])):
        for _ in range(e):
            out = _mul_unchecked(out, f)
    return out


def _cancel_against(num: DiffPolynomial, factors: Factors) -> tuple[DiffPolynomial, Factors]:
    """Divide num by denominator atoms as long as the division is exact."""
    out = dict(factors)
    for f in list(out):
        while out.get(f, 0) > 0 and not num.is_zero:
            q = try_divide(num, f)
            if q is None:
                break
            num = q
            out[f] -= 1
            if not out[f]:
                del out[f]
    return num, out


def _normalize_atom(p: DiffPolynomial) -> tuple[Fraction, DiffPolynomial]:
    """Scale to content 1 with positive leading coefficient; return (scale, atom)."""
    scale = p.content() * p.leading_sign()
    return scale, (p if scale == 1 else p.scale(1 / scale))


class RationalExpr:
    """A quotient of differential polynomials with exact equality testing.

    The numerator is kept in expanded canonical form, so the zero test is a
    glance at the term map.  The denominator is kept as a multiset of
    content-normalised, non-constant factor polynomials: the substitution
    chains this engine runs produce denominators that are products of a few
    recurring atoms, and the factored form lets those atoms cancel
    structurally instead of swelling through repeated quotient rules.  No
    polynomial factorisation is ever performed; atoms arise only as whole
    denominators of earlier operations.  Equality and zero tests reduce to
    cross multiplication, which is sound because the coefficient symbols are
    algebraically independent.
    """

    __slots__ = ("_num", "_factors", "_den_cache")

    def __init__(self, num, den=None):
        num = _coerce_poly(num)
        if num is NotImplemented:
            raise TypeError("numerator must be polynomial or rational")
        factors: Factors = {}
        if den is not None:
            den = _coerce_poly(den)
            if den is NotImplemented:
                raise TypeError("denominator must be polynomial or rational")
            if den.is_zero:
                raise ZeroDenominator("rational expression with zero denominator")
            if den.is_constant():
                num = num.scale(1 / den.constant_value())
            else:
                scale, atom = _normalize_atom(den)
                num = num.scale(1 / scale)
                factors = {atom: 1}
        self._init_normalized(num, factors)

    def _init_normalized(self, num: DiffPolynomial, factors: Factors) -> None:
        if num.is_zero:
            self._num, self._factors = DiffPolynomial.ZERO, {}
        else:
            self._num, self._factors = _cancel_against(num, factors)
        self._den_cache: Optional[DiffPolynomial] = None

    @staticmethod
    def _make(num: DiffPolynomial, factors: Factors) -> "RationalExpr":
        e = RationalExpr.__new__(RationalExpr)
        e._init_normalized(num, factors)
        return e

    ZERO: "RationalExpr"
    ONE: "RationalExpr"

    @staticmethod
    def of(x: Union[Indeterminate, DerivativeSymbol], order: int = 0) -> "RationalExpr":
        return RationalExpr(DiffPolynomial.of(x, order))

    @staticmethod
    def const(c: Rat) -> "RationalExpr":
        return RationalExpr(DiffPolynomial.const(c))

    @property
    def numerator(self) -> DiffPolynomial:
        return self._num

    @property
    def denominator(self) -> DiffPolynomial:
        if self._den_cache is None:
            self._den_cache = _expand_factors(self._factors)
        return self._den_cache

    @property
    def denominator_factors(self) -> tuple[tuple[DiffPolynomial, int], ...]:
        return tuple(sorted(self._factors.items(), key=lambda t: str(t[0])))

    @property
    def is_zero(self) -> bool:
        return self._num.is_zero

    def is_constant(self) -> bool:
        return self._num.is_constant() and not self._factors

    def constant_value(self) -> Fraction:
        if self._factors:
            raise ValueError("expression is not constant")
        return self._num.constant_value()

    def symbols(self) -> set[DerivativeSymbol]:
        out = set(self._num.symbols())
        for f in self._factors:
            out |= f.symbols()
        return out

    def indeterminates(self) -> set[Indeterminate]:
        return {s.base for s in self.symbols()}

    def max_order(self) -> int:
        return max((s.order for s in self.symbols()), default=0)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "RationalExpr":
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        f1, f2 = self._factors, other._factors
        if f1 == f2:
            return RationalExpr._make(self._num + other._num, dict(f1))
        common: Factors = {}
        for f, e in f1.items():
            if f in f2:
                common[f] = min(e, f2[f])
        r1 = {f: e - common.get(f, 0) for f, e in f1.items() if e - common.get(f, 0)}
        r2 = {f: e - common.get(f, 0) for f, e in f2.items() if e - common.get(f, 0)}
        num = _mul_unchecked(self._num, _expand_factors(r2)) + _mul_unchecked(
            other._num, _expand_factors(r1)
        )
        merged = dict(common)
        for f, e in r1.items():
            merged[f] = merged.get(f, 0) + e
        for f, e in r2.items():
            merged[f] = merged.get(f, 0) + e
        return RationalExpr._make(num, merged)

    __radd__ = __add__

    def __neg__(self) -> "RationalExpr":
        return RationalExpr._make(-self._num, dict(self._factors))

    def __sub__(self, other) -> "RationalExpr":
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RationalExpr":
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "RationalExpr":
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return RationalExpr.ZERO
        n1, f2 = _cancel_against(self._num, other._factors)
        n2, f1 = _cancel_against(other._num, self._factors)
        merged = dict(f1)
        for f, e in f2.items():
            merged[f] = merged.get(f, 0) + e
        return RationalExpr._make(_mul_unchecked(n1, n2), merged)

    __rmul__ = __mul__

    def inverse(self) -> "RationalExpr":
        if self.is_zero:
            raise ZeroDenominator("inverse of zero expression")
        num = _expand_factors(self._factors)
        if self._num.is_constant():
            return RationalExpr._make(num.scale(1 / self._num.constant_value()), {})
        scale, atom = _normalize_atom(self._num)
        return RationalExpr._make(num.scale(1 / scale), {atom: 1})

    def __truediv__(self, other) -> "RationalExpr":
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RationalExpr":
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int) -> "RationalExpr":
        if not isinstance(n, int):
            raise ValueError("rational powers take integer exponents")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return RationalExpr.ONE
        num = self._num**n
        factors = {f: e * n for f, e in self._factors.items()}
        return RationalExpr._make(num, factors)

    def _derive_with(self, d_poly) -> "RationalExpr":
        """Shared quotient rule for the derivation and for formal partials.

        With denominator D = prod f_i^(e_i) the derivative of n/D is
        n^/D - sum_i e_i (n * f_i^) / (D * f_i).  The sum is accumulated
        pairwise so that each partial result cancels structurally before the
        next atom's contribution multiplies in; this keeps the peak
        intermediate near the size of the reduced result.
        """
        n = self._num
        if not self._factors:
            return RationalExpr._make(d_poly(n), {})
        out = RationalExpr._make(d_poly(n), dict(self._factors))
        for f, e in sorted(self._factors.items(), key=lambda t: str(t[0])):
            bumped = dict(self._factors)
            bumped[f] = bumped[f] + 1
            out = out + RationalExpr._make(
                _mul_unchecked(n, d_poly(f)).scale(-e), bumped
            )
        return out

    def derive(self, times: int = 1) -> "RationalExpr":
        e = self
        for _ in range(times):
            e = e._derive_with(lambda p: p.derive())
        return e

    def partial(self, sym: DerivativeSymbol) -> "RationalExpr":
        return self._derive_with(lambda p: p.partial(sym))

    def evaluate_at(self, values: Mapping[DerivativeSymbol, Fraction]) -> tuple[Fraction, Fraction]:
        """(numerator value, denominator value) without expanding the denominator."""
        den = Fraction(1)
        for f, e in self._factors.items():
            den *= f.evaluate(values) ** e
        return self._num.evaluate(values), den

    # -- comparison / rendering -------------------------------------------------

    def __eq__(self, other) -> bool:
        other = _coerce_rational(other)
        if other is NotImplemented:
            return NotImplemented
        f1, f2 = self._factors, other._factors
        if f1 == f2:
            return self._num == other._num
        r1: Factors = {}
        r2: Factors = {}
        for f in set(f1) | set(f2):
            d = f1.get(f, 0) - f2.get(f, 0)
            if d > 0:
                r1[f] = d
            elif d < 0:
                r2[f] = -d
        return _mul_unchecked(self._num, _expand_factors(r2)) == _mul_unchecked(
            other._num, _expand_factors(r1)
        )

    __hash__ = None  # equality is by cross multiplication, not by structure

    def __str__(self) -> str:
        if not self._factors:
            return str(self._num)
        num = str(self._num)
        if self._num.term_count() > 1:
            num = f"({num})"
        parts = [
            f"({f})" if e == 1 else f"({f})^{e}" for f, e in self.denominator_factors
        ]
        den = "*".join(parts)
        if len(parts) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RationalExpr({self})"


RationalExpr.ZERO = RationalExpr(DiffPolynomial.ZERO)
RationalExpr.ONE = RationalExpr(DiffPolynomial.ONE)


def _coerce_rational(v) -> RationalExpr:
    if isinstance(v, RationalExpr):
        return v
    if isinstance(v, (int, Fraction)) or type(v) is _RATIO_T:
        return RationalExpr.const(v)
    if isinstance(v, DiffPolynomial):
        return RationalExpr(v)
    return NotImplemented


# -- module-level operations --------------------------------------------------------

Expr = Union[DiffPolynomial, RationalExpr]


def derive(e: Expr, times: int = 1) -> Expr:
    return e.derive(times)


def partial(e: Expr, sym: DerivativeSymbol) -> Expr:
    return e.partial(sym)


def is_zero(e: Expr) -> bool:
    """Exact zero test: true iff the canonical numerator is the zero polynomial."""
    return e.is_zero


def substitute(e: Expr, target: Indeterminate, replacement) -> RationalExpr:
    """Differential substitution: every derivative target^(k) becomes the
    k-th derivative of the replacement, consistently across the expression."""
    replacement = _coerce_rational(replacement)
    if replacement is NotImplemented:
        raise TypeError("replacement must be a rational expression")
    if isinstance(e, DiffPolynomial):
        return _substitute_poly(e, target, replacement)
    num = _substitute_poly(e.numerator, target, replacement)
    den = RationalExpr._make(DiffPolynomial.ONE, dict(e._factors))
    moved = [f for f in e._factors if f.order_in(target) is not None]
    if moved:
        den = RationalExpr.ONE
        for f, k in e._factors.items():
            den = den * _substitute_poly(f, target, replacement) ** k
    return num / den


def _substitute_poly(
    p: DiffPolynomial, target: Indeterminate, replacement: RationalExpr
) -> RationalExpr:
    orders = sorted({s.order for s in p.symbols() if s.base == target})
    if not orders:
        return RationalExpr(p)
    reps: dict[int, RationalExpr] = {}
    cur = replacement
    for k in range(orders[-1] + 1):
        if k:
            cur = cur.derive()
        reps[k] = cur
    shift_of = {
        k: SLOT_BITS * _TABLE.slot(DerivativeSymbol(target, k)) for k in range(orders[-1] + 1)
    }
    total = RationalExpr.ZERO
    for key, c in p._terms.items():
        acc = RationalExpr.const(Fraction(c))  # scalar of this term
        static_key = key
        for k, shift in shift_of.items():
            e = (key >> shift) & SLOT_MASK
            if e:
                static_key -= e << shift
                acc = acc * reps[k] ** e
        if static_key:
            acc = acc * RationalExpr(DiffPolynomial._raw({static_key: _ratio(1)}))
        total = total + acc
    return total

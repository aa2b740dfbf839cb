"""Exact sparse multivariate polynomials over the rationals.

Variables are identified by name.  A monomial is a tuple of ``(name, exponent)``
pairs sorted by name in descending order, so that comparing two monomials of
equal total degree as tuples is lexicographic comparison with later names
being more significant.  Together with the total degree this gives the graded
lexicographic order used for printing and for leading terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Union

from pairdim.errors import NotUnivariate, ZeroDegree

Monomial = tuple[tuple[str, int], ...]
Number = Union[int, Fraction]


class Sort(Enum):
    FIELD = "field"
    SMALL = "small"
    TRANSCENDENTAL = "transcendental"


@dataclass(frozen=True)
class Var:
    """A named variable with its sort.

    Polynomials only store names; the sort is tracked by the formula layer.
    """

    name: str
    sort: Sort = Sort.FIELD

    def __str__(self) -> str:
        return self.name


def _name(v: Union[str, Var]) -> str:
    return v.name if isinstance(v, Var) else v


def _mono(exps: Mapping[str, int]) -> Monomial:
    return tuple(sorted(((n, e) for n, e in exps.items() if e), reverse=True))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for n, e in b:
        d[n] = d.get(n, 0) + e
    return _mono(d)


def _mono_deg(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    return (_mono_deg(m), m)


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    db = dict(b)
    return all(db.get(n, 0) >= e for n, e in a)


def _mono_div(b: Monomial, a: Monomial) -> Monomial:
    d = dict(b)
    for n, e in a:
        d[n] -= e
    return _mono(d)


class Polynomial:
    """Immutable sparse polynomial with :class:`~fractions.Fraction` coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | Iterable = ()):
        clean: dict[Monomial, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, c in items:
            c = Fraction(c)
            if c:
                m = _mono(dict(m))
                c = clean.get(m, 0) + c
                if c:
                    clean[m] = c
                else:
                    clean.pop(m, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> Polynomial:
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: Number) -> Polynomial:
        c = Fraction(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def var(cls, v: Union[str, Var], exponent: int = 1) -> Polynomial:
        return cls._raw({((_name(v), exponent),): Fraction(1)} if exponent else {(): Fraction(1)})

    @classmethod
    def coerce(cls, x: Union[Polynomial, Number]) -> Polynomial:
        return x if isinstance(x, Polynomial) else cls.const(x)

    # -- inspection -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    @property
    def constant(self) -> Fraction:
        """Constant term (the value, if the polynomial is constant)."""
        return self._terms.get((), Fraction(0))

    def terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in descending graded lexicographic order."""
        return sorted(self._terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)

    def leading_term(self) -> tuple[Monomial, Fraction]:
        m = max(self._terms, key=_mono_key)
        return m, self._terms[m]

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(n for m in self._terms for n, _ in m)

    def degree(self, v: Union[str, Var]) -> int:
        """Degree in ``v``; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        v = _name(v)
        return max(dict(m).get(v, 0) for m in self._terms)

    @property
    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(_mono_deg(m) for m in self._terms)

    def coeffs_in(self, v: Union[str, Var]) -> list[Polynomial]:
        v = _name(v)
        buckets: dict[int, dict[Monomial, Fraction]] = {}
        for m, c in self._terms.items():
            e = 0
            rest = []
            for n, k in m:
                if n == v:
                    e = k
                else:
                    rest.append((n, k))
            buckets.setdefault(e, {})[tuple(rest)] = c
        if not buckets:
            return []
        d = max(buckets)
        return [Polynomial._raw(buckets.get(j, {})) for j in range(d + 1)]

    def lc(self, v: Union[str, Var]) -> Polynomial:
        cs = self.coeffs_in(v)
        return cs[-1] if cs else ZERO

    def reductum(self, v: Union[str, Var]) -> Polynomial:
        """The polynomial with its leading part in ``v`` removed."""
        v = _name(v)
        d = self.degree(v)
        return Polynomial._raw({m: c for m, c in self._terms.items() if dict(m).get(v, 0) != d})

    def content(self) -> Fraction:
        """Positive rational ``c`` such that ``self / c`` has coprime integer coefficients."""
        if not self._terms:
            return Fraction(0)
        nums = [c.numerator for c in self._terms.values()]
        dens = [c.denominator for c in self._terms.values()]
        return Fraction(math.gcd(*nums), math.lcm(*dens))

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = Polynomial.coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Polynomial.coerce(other))

    def __rsub__(self, other):
        return Polynomial.coerce(other) - self

    def __mul__(self, other):
        other = Polynomial.coerce(other)
        if not self._terms or not other._terms:
            return ZERO
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c: Number) -> Polynomial:
        c = Fraction(c)
        if not c:
            return ZERO
        return Polynomial._raw({m: c * a for m, a in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # -- substitution -----------------------------------------------------

    def substitute(self, mapping: Mapping[Union[str, Var], Union[Polynomial, Number]]) -> Polynomial:
        """Replace variables by polynomials or numbers; others stay symbolic."""
        mapping = {_name(k): Polynomial.coerce(v) for k, v in mapping.items()}
        if not mapping or not (self.variables & mapping.keys()):
            return self
        powers: dict[tuple[str, int], Polynomial] = {}
        out = ZERO
        for m, c in self._terms.items():
            kept = []
            term = Polynomial.const(c)
            for n, e in m:
                if n in mapping:
                    key = (n, e)
                    if key not in powers:
                        powers[key] = mapping[n] ** e
                    term = term * powers[key]
                else:
                    kept.append((n, e))
            out = out + term * Polynomial._raw({tuple(kept): Fraction(1)})
        return out

    def reduce_mod(self, p: int) -> Polynomial:
        """Image in characteristic ``p`` with coefficients in ``range(p)``."""
        out = {}
        for m, c in self._terms.items():
            if c.denominator % p == 0:
                raise ZeroDivisionError(f"coefficient {c} is not defined in characteristic {p}")
            r = c.numerator * pow(c.denominator, -1, p) % p
            if r:
                out[m] = Fraction(r)
        return Polynomial._raw(out)

    def in_char(self, char: int) -> Polynomial:
        return self if char == 0 else self.reduce_mod(char)

    def primitive(self, char: int = 0) -> Polynomial:
        """Canonical associate: the same zero set, integer coefficients.

        In characteristic 0 the result has coprime integer coefficients and a
        positive leading coefficient; in characteristic ``p`` it is monic with
        coefficients in ``range(p)``.
        """
        if char:
            q = self.reduce_mod(char)
            if q.is_zero:
                return q
            _, c = q.leading_term()
            return q.scale(pow(int(c), -1, char)).reduce_mod(char)
        if not self._terms:
            return self
        c = self.content()
        if self.leading_term()[1] < 0:
            c = -c
        if c == 1:
            return self
        return Polynomial._raw({m: a / c for m, a in self._terms.items()})

    # -- printing ---------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (m, c) in enumerate(self.terms()):
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in reversed(m))
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


ZERO = Polynomial._raw({})
ONE = Polynomial._raw({(): Fraction(1)})


def from_coeffs(coeffs: Iterable[Polynomial], v: Union[str, Var]) -> Polynomial:
    out = ZERO
    for j, c in enumerate(coeffs):
        out = out + c * Polynomial.var(v, j)
    return out


def arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


def coeffs_in(p: Polynomial, v: Union[str, Var]) -> list[Polynomial]:
    return p.coeffs_in(v)


def evaluate(p: Polynomial, assignment: Mapping[Union[str, Var], Number]) -> Polynomial:
    return p.substitute(assignment)


def exact_div(p: Polynomial, q: Polynomial) -> Polynomial:
    """Quotient ``p / q``; raises ``ValueError`` unless ``q`` divides ``p``."""
    if q.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    qm, qc = q.leading_term()
    quot: dict[Monomial, Fraction] = {}
    r = p
    while not r.is_zero:
        rm, rc = r.leading_term()
        if not _mono_divides(qm, rm):
            raise ValueError(f"{q} does not divide {p}")
        m = _mono_div(rm, qm)
        c = rc / qc
        quot[m] = quot.get(m, 0) + c
        r = r - q * Polynomial._raw({m: c})
    return Polynomial._raw({m: c for m, c in quot.items() if c})


def _det(rows: list[list[Polynomial]]) -> Polynomial:
    # Bareiss fraction-free elimination; every division below is exact.
    m = [r[:] for r in rows]
    n = len(m)
    if n == 0:
        return ONE
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if m[k][k].is_zero:
            for i in range(k + 1, n):
                if not m[i][k].is_zero:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return ZERO
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = exact_div(m[i][j] * pivot - m[i][k] * m[k][j], prev)
        prev = pivot
    return m[n - 1][n - 1] if sign > 0 else -m[n - 1][n - 1]


def sylvester_matrix(p: Polynomial, q: Polynomial, v: Union[str, Var]) -> list[list[Polynomial]]:
    """Sylvester matrix with coefficients laid out in ascending powers of ``v``."""
    a = p.coeffs_in(v)
    b = q.coeffs_in(v)
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    rows = []
    for r in range(n):
        row = [ZERO] * size
        for i, c in enumerate(a):
            row[r + i] = c
        rows.append(row)
    for s in range(m):
        row = [ZERO] * size
        for j, c in enumerate(b):
            row[s + j] = c
        rows.append(row)
    return rows


def resultant(p: Polynomial, q: Polynomial, v: Union[str, Var]) -> Polynomial:
    """Sylvester resultant of ``p`` and ``q`` with respect to ``v``.

    With the ascending layout the value is ``(-1)^(deg p * deg q)`` times the
    textbook ``Res(p, q)``, i.e. the textbook ``Res(q, p)``.  Its vanishing
    locus is the same either way.
    """
    if p.degree(v) < 1 or q.degree(v) < 1:
        raise ZeroDegree(f"resultant needs positive degree in {_name(v)}")
    return _det(sylvester_matrix(p, q, v))


def pseudo_divide(p: Polynomial, q: Polynomial, v: Union[str, Var], *, field_lc: bool = True):
    """Return ``(quotient, remainder, power)`` with
    ``lc(q)**power * p == quotient * q + remainder`` and
    ``deg_v(remainder) < deg_v(q)``.

    When ``field_lc`` is set and the leading coefficient of ``q`` is a
    constant, division is carried out over the rationals and ``power`` is 0.
    """
    v = _name(v)
    dq = q.degree(v)
    if dq < 1:
        raise ZeroDegree(f"divisor has degree {dq} in {v}")
    lcq = q.lc(v)
    quot = ZERO
    rem = p
    if field_lc and lcq.is_constant:
        c = lcq.constant
        while rem.degree(v) >= dq:
            k = rem.degree(v) - dq
            t = rem.lc(v).scale(1 / c) * Polynomial.var(v, k)
            quot = quot + t
            rem = rem - t * q
        return quot, rem, 0
    power = 0
    while rem.degree(v) >= dq:
        k = rem.degree(v) - dq
        t = rem.lc(v) * Polynomial.var(v, k)
        quot = lcq * quot + t
        rem = lcq * rem - t * q
        power += 1
    return quot, rem, power


def prem(p: Polynomial, q: Polynomial, v: Union[str, Var]) -> Polynomial:
    return pseudo_divide(p, q, v, field_lc=False)[1]


def _dense(p: Polynomial, v: str) -> list[Fraction]:
    extra = p.variables - {v}
    if extra:
        raise NotUnivariate(f"{p} involves {sorted(extra)} besides {v}")
    return [c.constant for c in p.coeffs_in(v)]


def _from_dense(cs: list[Fraction], v: str) -> Polynomial:
    return Polynomial._raw({((v, j),) if j else (): c for j, c in enumerate(cs) if c})


def _dense_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = a[:]
    while len(a) >= len(b):
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def gcd_univariate(p: Polynomial, q: Polynomial, v: Union[str, Var]) -> Polynomial:
    """Monic gcd over the rationals of two polynomials in ``v`` alone."""
    v = _name(v)
    a, b = _dense(p, v), _dense(q, v)
    while b:
        a, b = b, _dense_rem(a, b)
    if not a:
        return ZERO
    lead = a[-1]
    return _from_dense([c / lead for c in a], v)


def squarefree_degree(p: Polynomial, v: Union[str, Var]) -> int:
    """Number of distinct roots over the algebraic closure of the rationals."""
    v = _name(v)
    if p.is_zero:
        raise ValueError("the zero polynomial has infinitely many roots")
    deriv = _from_dense([c * j for j, c in enumerate(_dense(p, v))][1:], v)
    g = gcd_univariate(p, deriv, v) if not deriv.is_zero else ONE
    return p.degree(v) - max(g.degree(v), 0)


def coefficients_wrt(p: Polynomial, names: Iterable[Union[str, Var]]) -> list[Polynomial]:
    """Nonzero coefficients of ``p`` viewed as a polynomial in ``names``.

    The result is ordered by the monomial in ``names`` (descending) and is
    empty exactly when ``p`` is zero.
    """
    names = {_name(n) for n in names}
    buckets: dict[Monomial, dict[Monomial, Fraction]] = {}
    for m, c in p._terms.items():
        outer = tuple((n, k) for n, k in m if n in names)
        inner = tuple((n, k) for n, k in m if n not in names)
        buckets.setdefault(outer, {})[inner] = c
    return [Polynomial._raw(buckets[m]) for m in sorted(buckets, key=_mono_key, reverse=True)]

"""Reference procedures used to cross-check the engines.

These deliberately take different routes from the engines they check:

* :func:`exists_root_not_root` decides ``exists y. /\\ p_i = 0 & q != 0`` for
  univariate rational polynomials by gcd stripping;
* :func:`evaluate` decides a formula at a concrete assignment by substituting
  first and translating the resulting sentence into a sentence about the small
  field directly, without building normal forms;
* :func:`ffield_dim_estimate` counts points over prime fields.  It is a
  heuristic and is labelled as such.
"""
from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from pairdim.acfqe import decide_sentence, qe
from pairdim.errors import NotUnivariate, UnsupportedFragment
from pairdim.formula import (
    FALSE, TRUE, And, Eq, Exists, Forall, Formula, InU, Neq, Not, Or, all_names, conj, disj,
    exists_block, free_vars, mentions_u, nnf, rename, substitute,
)
from pairdim.poly import Polynomial, gcd_univariate

HEURISTIC = "HEURISTIC"
Value = Union[int, Fraction, Polynomial]


# -- univariate solvability -------------------------------------------------------------


def _single_var(polys: Sequence[Polynomial]) -> str | None:
    names = frozenset().union(*(p.variables for p in polys))
    if len(names) > 1:
        raise NotUnivariate(f"polynomials mention {sorted(names)}")
    return next(iter(names), None)


def exists_root_not_root(ps: Sequence[Polynomial], q: Polynomial) -> bool:
    """``exists y. p_1(y) = ... = p_k(y) = 0 & q(y) != 0`` over the algebraic numbers."""
    v = _single_var(list(ps) + [q])
    nonzero = [p for p in ps if not p.is_zero]
    if not nonzero:
        return not q.is_zero
    if any(p.is_constant for p in nonzero):
        return False
    if q.is_zero:
        return False
    g = nonzero[0]
    for p in nonzero[1:]:
        g = gcd_univariate(g, p, v)
    if q.is_constant:
        return g.degree(v) > 0
    while g.degree(v) > 0:
        h = gcd_univariate(g, q, v)
        if h.degree(v) == 0:
            break
        g = _div_univariate(g, h, v)
    return g.degree(v) > 0


def _div_univariate(a: Polynomial, b: Polynomial, v: str) -> Polynomial:
    """Exact quotient of univariate polynomials by long division."""
    quotient = Polynomial.const(0)
    rem = a
    db, lb = b.degree(v), b.lc(v).constant
    while not rem.is_zero and rem.degree(v) >= db:
        term = Polynomial.var(v, rem.degree(v) - db).scale(rem.lc(v).constant / lb)
        quotient = quotient + term
        rem = rem - term * b
    return quotient


# -- evaluation at a point ------------------------------------------------------------------


def _is_small_value(p: Polynomial, trans: Sequence[str]) -> bool:
    # Polynomials in the transcendentals lie in the small field iff they are constant.
    return not (p.variables & set(trans))


def evaluate(f: Formula, assignment: Mapping[str, Value], char: int = 0,
             trans: Sequence[str] = ()) -> bool:
    """Truth of ``f`` at ``assignment``.

    Values are rationals or polynomials in the declared transcendentals.
    """
    values = {k: Polynomial.coerce(v) if not isinstance(v, Polynomial) else v
              for k, v in assignment.items()}
    missing = free_vars(f) - set(values) - set(trans)
    if missing:
        raise ValueError(f"no value for {sorted(missing)}")
    g = _resolve_membership(f, values, trans)
    g = substitute(g, {k: v for k, v in values.items() if k in free_vars(g)})
    return _eval(nnf(g), char, tuple(trans))


def _resolve_membership(f: Formula, values, trans, bound=frozenset()) -> Formula:
    if isinstance(f, InU):
        if f.var in bound:
            return f
        if f.var in values:
            return TRUE if _is_small_value(values[f.var], trans) else FALSE
        if f.var in trans:
            return FALSE
        return f
    if isinstance(f, Not):
        return Not(_resolve_membership(f.arg, values, trans, bound))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_resolve_membership(a, values, trans, bound) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _resolve_membership(f.body, values, trans, bound | {f.var}), f.small)
    return f


def _vacuous(f: Formula) -> bool:
    # Both domains are nonempty, so such a quantifier can be dropped.
    return isinstance(f, (Exists, Forall)) and f.var not in free_vars(f.body)


def _eval(f: Formula, char: int, trans: tuple[str, ...]) -> bool:
    if _vacuous(f):
        return _eval(f.body, char, trans)
    if not mentions_u(f):
        return decide_sentence(f, char, trans)
    if isinstance(f, And):
        return all(_eval(a, char, trans) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(a, char, trans) for a in f.args)
    if isinstance(f, Forall) or isinstance(f, Not):
        return not _eval(nnf(Not(f)), char, trans)
    if isinstance(f, Exists):
        used = set(all_names(f)) | set(trans)
        xs, matrix = _pull(f, used)
        return _decide_small(xs, matrix, char, trans)
    raise UnsupportedFragment("cannot evaluate", subformula=str(f))


def _pull(f: Formula, used: set) -> tuple[tuple[str, ...], Formula]:
    """Write an existential formula as ``exists xs in U. matrix`` with ``matrix`` free of U."""
    if not mentions_u(f):
        return (), f
    if _vacuous(f):
        return _pull(f.body, used)
    if isinstance(f, InU):
        u = _fresh(used)
        return (u,), Eq(Polynomial.var(f.var) - Polynomial.var(u))
    if isinstance(f, (And, Or)):
        xs, parts = (), []
        for a in f.args:
            ys, m = _pull(a, used)
            xs += ys
            parts.append(m)
        return xs, (conj if isinstance(f, And) else disj)(*parts)
    if isinstance(f, Exists):
        if f.small:
            u = _fresh(used)
            ys, m = _pull(rename(f.body, {f.var: u}), used)
            return (u,) + ys, m
        ys, m = _pull(f.body, used)
        return ys, Exists(f.var, m)
    raise UnsupportedFragment("cannot evaluate", subformula=str(f))


def _fresh(used: set) -> str:
    for i in itertools.count(1):
        name = f"_x{i}"
        if name not in used:
            used.add(name)
            return name
    raise AssertionError  # pragma: no cover


def _decide_small(xs, matrix, char, trans) -> bool:
    body = qe(matrix, char)
    return decide_sentence(exists_block(xs, _split_trans(nnf(body), trans)), char)


def _split_trans(f: Formula, trans) -> Formula:
    """Replace each atom by the corresponding conditions on its coefficients in ``trans``."""
    if isinstance(f, (Eq, Neq)):
        coeffs = _trans_coefficients(f.poly, trans)
        if isinstance(f, Eq):
            return conj(*(Eq(c) for c in coeffs))
        return disj(*(Neq(c) for c in coeffs))
    if isinstance(f, And):
        return conj(*(_split_trans(a, trans) for a in f.args))
    if isinstance(f, Or):
        return disj(*(_split_trans(a, trans) for a in f.args))
    raise TypeError(f)


def _trans_coefficients(p: Polynomial, trans) -> list[Polynomial]:
    out = [p]
    for t in trans:
        out = [c for q in out for c in q.coeffs_in(t) if not c.is_zero]
    return out


# -- sampling -----------------------------------------------------------------------


@dataclass
class SampleReport:
    total: int = 0
    agreements: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "agreements": self.agreements,
            "disagreements": [
                {"assignment": {k: str(v) for k, v in a.items()}, "engine": e, "oracle": o}
                for a, e, o in self.disagreements
            ],
        }


def sample_check(engine_formula: Formula, reference_formula: Formula,
                 assignments: Sequence[Mapping[str, Value]], char: int = 0,
                 trans: Sequence[str] = ()) -> SampleReport:
    """Compare two formulas pointwise at each assignment."""
    report = SampleReport()
    for a in assignments:
        e = evaluate(engine_formula, a, char, trans)
        o = evaluate(reference_formula, a, char, trans)
        report.total += 1
        if e == o:
            report.agreements += 1
        else:
            report.disagreements.append((dict(a), e, o))
    return report


# -- finite fields -------------------------------------------------------------------


@dataclass(frozen=True)
class DimEstimate:
    estimate: float
    counts: tuple[tuple[int, int], ...]
    label: str = HEURISTIC

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "counts": [list(c) for c in self.counts],
                "label": self.label}


def count_points(eqs: Sequence[Polynomial], variables: Sequence[str], p: int) -> int:
    """Number of points of ``F_p^n`` on which every polynomial vanishes."""
    compiled = [[(int(c.numerator * pow(c.denominator, -1, p)) % p, dict(m))
                 for m, c in e.terms()] for e in eqs]
    count = 0
    for point in itertools.product(range(p), repeat=len(variables)):
        env = dict(zip(variables, point))
        if all(sum(c * math.prod(pow(env[n], k, p) for n, k in m.items()) for c, m in terms) % p == 0
               for terms in compiled):
            count += 1
    return count


def ffield_dim_estimate(eqs: Sequence[Polynomial], primes: Sequence[int],
                        variables: Sequence[str] | None = None) -> DimEstimate:
    """Least-squares slope of ``log(count)`` against ``log(p)``.  Heuristic only."""
    if variables is None:
        variables = sorted(frozenset().union(*(e.variables for e in eqs)))
    counts = tuple((p, count_points(eqs, variables, p)) for p in primes)
    xs = [math.log(p) for p, c in counts if c > 0]
    ys = [math.log(c) for p, c in counts if c > 0]
    if len(xs) < 2:
        return DimEstimate(-math.inf if not xs else 0.0, counts)
    slope, _ = statistics.linear_regression(xs, ys)
    return DimEstimate(slope, counts)

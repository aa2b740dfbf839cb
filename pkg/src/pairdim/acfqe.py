"""Quantifier elimination for the ring language over algebraically closed fields.

One existential quantifier is eliminated from a conjunction of equations and
inequations by recursive case splits on leading coefficients together with
pseudo-remainder reduction.  Every branch ends in one of two closed cases:

* no equations left:  ``exists v. Q != 0``  iff some coefficient of Q is nonzero;
* one equation ``p`` with leading coefficient assumed nonzero:
  ``exists v. p = 0 & Q != 0``  iff ``p`` does not divide ``Q^deg(p)``, i.e. the
  pseudo-remainder of ``Q^deg(p)`` by ``p`` has a nonzero coefficient.

All polynomial arithmetic is carried out in the working characteristic.
"""
from __future__ import annotations

from functools import reduce
from typing import Iterable, Iterator, Sequence

from pairdim.errors import FreeVariable, UnsupportedAtom
from pairdim.formula import (
    DEFAULT_MAX_CLAUSES, FALSE, TRUE, And, Eq, Exists, Forall, Formula, InU, Neq, Not, Or,
    conj, disj, dnf_clauses, free_vars, is_quantifier_free, mentions_u, nnf,
)
from pairdim.poly import ONE, Polynomial, _mono_key, prem


def check_char(char: int) -> int:
    """Validate a characteristic: 0 or a prime."""
    char = int(char)
    if char < 0 or char == 1 or (char > 1 and any(char % d == 0 for d in range(2, int(char**0.5) + 1))):
        raise ValueError(f"characteristic must be 0 or a prime, got {char}")
    return char


def _order_key(p: Polynomial):
    return [_mono_key(m) for m, _ in p.terms()]


# -- simplification ------------------------------------------------------------


def simplify(f: Formula, char: int = 0) -> Formula:
    """Constant folding, flattening and duplicate removal.

    Atom polynomials are replaced by their primitive associates; quantifier
    bodies are simplified in place.
    """
    if isinstance(f, (Eq, Neq)):
        p = f.poly.primitive(char)
        if p.is_constant:
            holds = p.is_zero if isinstance(f, Eq) else not p.is_zero
            return TRUE if holds else FALSE
        return type(f)(p)
    if isinstance(f, InU):
        return f
    if isinstance(f, Not):
        if isinstance(f.arg, InU):
            return f
        return simplify(nnf(f), char)
    if isinstance(f, And):
        return _junction(f.args, char, conj_mode=True)
    if isinstance(f, Or):
        return _junction(f.args, char, conj_mode=False)
    if isinstance(f, (Exists, Forall)):
        body = simplify(f.body, char)
        if f.var not in free_vars(body) and not f.small:
            return body
        return type(f)(f.var, body, f.small)
    raise TypeError(f)


def _junction(args, char, conj_mode):
    absorbing, neutral = (FALSE, TRUE) if conj_mode else (TRUE, FALSE)
    kind = And if conj_mode else Or
    out: list[Formula] = []
    seen = set()
    for a in args:
        a = simplify(a, char)
        parts = a.args if isinstance(a, kind) else (a,)
        for b in parts:
            if b == absorbing:
                return absorbing
            if b == neutral or b in seen:
                continue
            seen.add(b)
            out.append(b)
    for b in out:
        if isinstance(b, Eq) and Neq(b.poly) in seen:
            return absorbing
    if not out:
        return neutral
    if len(out) == 1:
        return out[0]
    return kind(tuple(out))


# -- single elimination ----------------------------------------------------------


def eliminate_one(v: str, clause: Iterable[Formula], char: int = 0) -> Formula:
    """Quantifier-free equivalent of ``exists v. /\\ clause`` over ACF of ``char``.

    ``clause`` is a sequence of ``Eq``/``Neq`` literals (a single ``And`` is
    also accepted).
    """
    if isinstance(clause, And):
        clause = clause.args
    elif isinstance(clause, (Eq, Neq)):
        clause = (clause,)
    eqs: list[Polynomial] = []
    neqs: list[Polynomial] = []
    outside: list[Formula] = []
    for lit in clause:
        if isinstance(lit, (InU, Not)) or not isinstance(lit, (Eq, Neq)):
            raise UnsupportedAtom(f"cannot eliminate over the literal {lit}")
        if v not in lit.poly.variables:
            outside.append(lit)
        elif isinstance(lit, Eq):
            eqs.append(lit.poly)
        else:
            neqs.append(lit.poly)
    q = reduce(lambda a, b: a * b, neqs, ONE)
    branches = [conj(*c) for c in _solve(v, eqs, q, (), frozenset(), frozenset(), char)]
    return simplify(conj(*outside, disj(*branches)), char)


def _solve(v, eqs, q, cond, nonzero, zero, char) -> Iterator[tuple[Formula, ...]]:
    q = q.in_char(char)
    live: list[Polynomial] = []
    for p in eqs:
        p = p.in_char(char)
        if p.is_zero:
            continue
        if p.degree(v) > 0:
            live.append(p)
            continue
        pp = p.primitive(char)
        if pp.is_constant or pp in nonzero:
            return
        if pp not in zero:
            cond = cond + (Eq(pp),)
            zero = zero | {pp}
    if q.is_zero:
        return
    if q.degree(v) == 0:
        qq = q.primitive(char)
        if not qq.is_constant:
            if qq in zero:
                return
            if qq not in nonzero:
                cond = cond + (Neq(qq),)
                nonzero = nonzero | {qq}
        q = ONE

    if not live:
        if q == ONE:
            yield cond
        else:
            yield cond + (disj(*(Neq(c) for c in q.coeffs_in(v) if not c.is_zero)),)
        return

    # Split on the first undetermined leading coefficient, highest degree first.
    live.sort(key=lambda p: (p.degree(v), _order_key(p)), reverse=True)
    for i, p in enumerate(live):
        lc = p.lc(v).primitive(char)
        if lc.is_constant or lc in nonzero:
            continue
        reduced = live[:i] + [p.reductum(v)] + live[i + 1:]
        if lc in zero:
            yield from _solve(v, reduced, q, cond, nonzero, zero, char)
            return
        yield from _solve(v, reduced, q, cond + (Eq(lc),), nonzero, zero | {lc}, char)
        yield from _solve(v, live, q, cond + (Neq(lc),), nonzero | {lc}, zero, char)
        return

    if len(live) > 1:
        high, low = live[0], live[-1]
        r = prem(high, low, v)
        yield from _solve(v, [r] + live[1:], q, cond, nonzero, zero, char)
        return

    p = live[0]
    q1 = prem(q, p, v).in_char(char)
    acc = ONE
    for _ in range(p.degree(v)):
        acc = prem(acc * q1, p, v).in_char(char)
        if acc.is_zero:
            return
    yield cond + (disj(*(Neq(c) for c in acc.coeffs_in(v) if not c.is_zero)),)


# -- full elimination ---------------------------------------------------------------


def qe(f: Formula, char: int = 0, max_clauses: int = DEFAULT_MAX_CLAUSES) -> Formula:
    """Quantifier-free formula equivalent to ``f`` over ACF of characteristic ``char``.

    Quantifier-free input is returned unchanged.
    """
    if mentions_u(f):
        raise UnsupportedAtom(f"U occurs in {f}")
    if is_quantifier_free(f):
        return f
    return _qe(f, char, max_clauses)


def _qe(f, char, budget):
    if isinstance(f, (Eq, Neq)):
        return f
    if isinstance(f, Not):
        return Not(_qe(f.arg, char, budget))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_qe(a, char, budget) for a in f.args))
    if isinstance(f, Exists):
        body = simplify(_qe(f.body, char, budget), char)
        return _exists(f.var, body, char, budget)
    if isinstance(f, Forall):
        body = simplify(_qe(f.body, char, budget), char)
        inner = _exists(f.var, simplify(Not(body), char), char, budget)
        return simplify(Not(inner), char)
    raise TypeError(f)


def _exists(v, body, char, budget):
    if v not in free_vars(body):
        return body
    parts = [eliminate_one(v, c, char) for c in dnf_clauses(body, budget)]
    return simplify(disj(*parts), char)


def truth_value(f: Formula, char: int = 0) -> bool:
    """Truth of a quantifier-free formula whose atoms only involve constants that
    are algebraically independent over the prime field."""
    if isinstance(f, Eq):
        return f.poly.in_char(char).is_zero
    if isinstance(f, Neq):
        return not f.poly.in_char(char).is_zero
    if isinstance(f, Not):
        return not truth_value(f.arg, char)
    if isinstance(f, And):
        return all(truth_value(a, char) for a in f.args)
    if isinstance(f, Or):
        return any(truth_value(a, char) for a in f.args)
    raise ValueError(f"not a quantifier-free ring formula: {f}")


def decide_sentence(f: Formula, char: int = 0, trans: Sequence[str] = (),
                    max_clauses: int = DEFAULT_MAX_CLAUSES) -> bool:
    """Decide an ACF sentence whose only free names are transcendental constants."""
    extra = free_vars(f) - set(trans)
    if extra:
        raise FreeVariable(f"undeclared free variable(s) {sorted(extra)}")
    return truth_value(qe(f, char, max_clauses), char)

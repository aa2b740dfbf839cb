"""Special and very special formulas, and the pair normal form.

A *special* formula has the shape ``exists x in U. phi(x, y)`` with ``phi``
free of ``U``.  A *very special* one has matrix ``P_1 = ... = P_r = 0 & Q != 0``.
A :class:`PairNormalForm` is a disjunction of ``psi_0 & ~psi_1 & ... & ~psi_r``
with every ``psi`` very special.

Only a fragment of the language is normalized: after negation normal form,
small existentials may only scope over ``U``-free material and other small
existentials (and field existentials may only commute past them), dually for
universals.  Anything else raises :class:`UnsupportedFragment`.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce

from pairdim.acfqe import qe, simplify
from pairdim.errors import SizeLimit, UnsupportedFragment
from pairdim.formula import (
    DEFAULT_MAX_CLAUSES, FALSE, TRUE, And, Eq, Exists, Forall, Formula, InU, Neq, Not, Or,
    all_names, conj, disj, dnf_clauses, exists_block, free_vars, nnf, rename, rename_poly,
)
from pairdim.poly import ONE, ZERO, Polynomial


@dataclass(frozen=True)
class SpecialFormula:
    u_vars: tuple[str, ...]
    matrix: Formula

    def to_formula(self) -> Formula:
        return exists_block(self.u_vars, self.matrix, small=True)


@dataclass(frozen=True)
class VerySpecial:
    u_vars: tuple[str, ...]
    eqs: tuple[Polynomial, ...]
    ineq: Polynomial = ONE

    def __post_init__(self):
        if not self.eqs:
            raise ValueError("a very special formula needs at least one equation")

    @property
    def is_true(self) -> bool:
        return all(p.is_zero for p in self.eqs) and self.ineq.is_constant and not self.ineq.is_zero

    @property
    def polys(self) -> tuple[Polynomial, ...]:
        return self.eqs + (self.ineq,)

    @property
    def variables(self) -> frozenset[str]:
        names = frozenset().union(*(p.variables for p in self.polys))
        return names - set(self.u_vars)

    def matrix(self) -> Formula:
        atoms = [Eq(p) for p in self.eqs if not p.is_zero]
        if self.ineq != ONE:
            atoms.append(Neq(self.ineq))
        return conj(*atoms)

    def to_formula(self) -> Formula:
        return exists_block(self.u_vars, self.matrix(), small=True)

    def __str__(self) -> str:
        return str(self.to_formula())


TRUE_VS = VerySpecial((), (ZERO,), ONE)


@dataclass(frozen=True)
class PairDisjunct:
    positive: VerySpecial
    negatives: tuple[VerySpecial, ...] = ()

    def to_formula(self) -> Formula:
        return conj(self.positive.to_formula(), *(Not(n.to_formula()) for n in self.negatives))

    @property
    def variables(self) -> frozenset[str]:
        return self.positive.variables.union(*(n.variables for n in self.negatives))


@dataclass(frozen=True)
class PairNormalForm:
    disjuncts: tuple[PairDisjunct, ...] = field(default=())

    def to_formula(self) -> Formula:
        return disj(*(d.to_formula() for d in self.disjuncts))

    @property
    def variables(self) -> frozenset[str]:
        return frozenset().union(*(d.variables for d in self.disjuncts))

    def __str__(self) -> str:
        return str(self.to_formula())


# -- specials -------------------------------------------------------------------


def _disjoint(a: SpecialFormula, b: SpecialFormula) -> SpecialFormula:
    clash = set(b.u_vars) & (set(a.u_vars) | free_vars(a.matrix))
    if not clash:
        return b
    used = set(a.u_vars) | set(b.u_vars) | all_names(a.matrix) | all_names(b.matrix)
    mapping = {}
    for v in sorted(clash):
        n = _fresh("u", used)
        used.add(n)
        mapping[v] = n
    return SpecialFormula(tuple(mapping.get(v, v) for v in b.u_vars), rename(b.matrix, mapping))


def special_and(a: SpecialFormula, b: SpecialFormula) -> SpecialFormula:
    b = _disjoint(a, b)
    return SpecialFormula(a.u_vars + b.u_vars, conj(a.matrix, b.matrix))


def special_or(a: SpecialFormula, b: SpecialFormula) -> SpecialFormula:
    # The small field is nonempty, so the unused block always has a witness.
    b = _disjoint(a, b)
    return SpecialFormula(a.u_vars + b.u_vars, disj(a.matrix, b.matrix))


def to_very_special(s: SpecialFormula, char: int = 0, max_clauses: int = DEFAULT_MAX_CLAUSES,
                    prefix: str | None = None) -> list[VerySpecial]:
    """Disjunction of very special formulas equivalent to ``s``."""
    if prefix is None:
        prefix = _u_prefix(free_vars(s.to_formula()))
    body = simplify(qe(s.matrix, char, max_clauses), char)
    out = []
    for clause in dnf_clauses(body, max_clauses):
        eqs = [lit.poly for lit in clause if isinstance(lit, Eq)]
        q = reduce(lambda x, y: x * y, (lit.poly for lit in clause if isinstance(lit, Neq)), ONE)
        vs = canonical_vs(VerySpecial(s.u_vars, tuple(eqs) or (ZERO,), q), char, prefix)
        if vs is not None and vs not in out:
            out.append(vs)
    return out


def canonical_vs(vs: VerySpecial, char: int = 0, prefix: str = "u") -> VerySpecial | None:
    """Primitive, sorted, deduplicated form; ``None`` if visibly unsatisfiable.

    Unused small variables are dropped and the rest are renamed ``prefix1``,
    ``prefix2``, ... in order of first use.
    """
    q = vs.ineq.primitive(char)
    if q.is_zero:
        return None
    if q.is_constant:
        q = ONE
    eqs = set()
    for p in vs.eqs:
        p = p.primitive(char)
        if p.is_zero:
            continue
        if p.is_constant:
            return None
        eqs.add(p)
    ordered = sorted(eqs, key=str) or [ZERO]
    used = [v for v in vs.u_vars if any(v in p.variables for p in ordered + [q])]
    mapping = {v: f"{prefix}{i}" for i, v in enumerate(used, 1)}
    ordered = sorted((rename_poly(p, mapping) for p in ordered), key=str)
    return VerySpecial(tuple(mapping[v] for v in used), tuple(ordered), rename_poly(q, mapping))


# -- fragment classification ---------------------------------------------------------


class Polarity(Enum):
    NEUTRAL = "neutral"      # no U at all
    EXIST = "exist"          # a special formula
    UNIV = "univ"            # a negated special formula
    MIXED = "mixed"          # boolean combination of both kinds


def _unsupported(f: Formula, why: str):
    return UnsupportedFragment(why, subformula=str(f))


def classify(f: Formula) -> Polarity:
    """Polarity of a formula in negation normal form; raises on unsupported quantifiers."""
    if isinstance(f, (Eq, Neq)):
        return Polarity.NEUTRAL
    if isinstance(f, InU):
        return Polarity.EXIST
    if isinstance(f, Not):
        return Polarity.UNIV
    if isinstance(f, (And, Or)):
        kinds = {classify(a) for a in f.args} - {Polarity.NEUTRAL}
        if not kinds:
            return Polarity.NEUTRAL
        if len(kinds) == 1:
            return kinds.pop()
        return Polarity.MIXED
    if isinstance(f, (Exists, Forall)):
        inner = classify(f.body)
        ok = Polarity.EXIST if isinstance(f, Exists) else Polarity.UNIV
        if inner == Polarity.NEUTRAL:
            return ok if f.small else Polarity.NEUTRAL
        if inner == ok:
            return ok
        kind = "small" if f.small else "field"
        raise _unsupported(f, f"{kind} quantifier over {inner.value} U-content")
    raise TypeError(f)


def _prepare(f: Formula, small: frozenset = frozenset()) -> Formula:
    """Replace ``U(x)`` for small-bound ``x`` by true and drop vacuous quantifiers.

    Both domains are nonempty, so a quantifier whose variable does not occur
    can be removed.
    """
    if isinstance(f, InU):
        return TRUE if f.var in small else f
    if isinstance(f, Not):
        inner = _prepare(f.arg, small)
        return FALSE if inner == TRUE else Not(inner)
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_prepare(a, small) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        inner = small | {f.var} if f.small else small - {f.var}
        body = _prepare(f.body, inner)
        if f.var not in free_vars(body):
            return body
        return type(f)(f.var, body, f.small)
    return f


class _Namer:
    def __init__(self, used):
        self.used = set(used)

    def fresh(self, base: str = "u") -> str:
        n = _fresh(base, self.used)
        self.used.add(n)
        return n


def _fresh(base: str, used) -> str:
    for i in itertools.count(1):
        cand = f"_{base}{i}"
        if cand not in used:
            return cand
    raise AssertionError  # pragma: no cover


def to_special(f: Formula, namer: _Namer) -> SpecialFormula:
    """Special formula equivalent to an ``EXIST``/``NEUTRAL`` formula in nnf."""
    if isinstance(f, (Eq, Neq)):
        return SpecialFormula((), f)
    if isinstance(f, InU):
        u = namer.fresh()
        return SpecialFormula((u,), Eq(Polynomial.var(f.var) - Polynomial.var(u)))
    if isinstance(f, (And, Or)):
        parts = [to_special(a, namer) for a in f.args]
        op = special_and if isinstance(f, And) else special_or
        return reduce(op, parts)
    if isinstance(f, Exists):
        if f.small:
            u = namer.fresh()
            inner = to_special(rename(f.body, {f.var: u}), namer)
            return SpecialFormula((u,) + inner.u_vars, inner.matrix)
        inner = to_special(f.body, namer)
        return SpecialFormula(inner.u_vars, Exists(f.var, inner.matrix))
    if isinstance(f, Forall) and not f.small and classify(f) == Polarity.NEUTRAL:
        return SpecialFormula((), f)
    raise _unsupported(f, "not a special formula")


# -- normalization ---------------------------------------------------------------------


def _leaf_dnf(f: Formula, budget: int) -> list[tuple[tuple[bool, Formula], ...]]:
    kind = classify(f)
    if kind in (Polarity.NEUTRAL, Polarity.EXIST):
        return [((True, f),)]
    if kind == Polarity.UNIV:
        return [((False, nnf(Not(f))),)]
    if isinstance(f, Or):
        out = []
        for a in f.args:
            out.extend(_leaf_dnf(a, budget))
            if len(out) > budget:
                raise _size(budget)
        return out
    if isinstance(f, And):
        out = [()]
        for a in f.args:
            part = _leaf_dnf(a, budget)
            if len(out) * len(part) > budget:
                raise _size(budget)
            out = [c + d for c in out for d in part]
        return out
    raise _unsupported(f, "unsupported combination")  # pragma: no cover


def _size(budget):
    return SizeLimit(f"normal form exceeds {budget} clauses")


def _u_prefix(names) -> str:
    prefix = "u"
    while any(re.fullmatch(re.escape(prefix) + r"\d+", n) for n in names):
        prefix += "u"
    return prefix


def normalize(f: Formula, char: int = 0, max_clauses: int = DEFAULT_MAX_CLAUSES) -> PairNormalForm:
    """Pair normal form of ``f`` (which must lie in the supported fragment)."""
    g = nnf(_prepare(f))
    free = free_vars(f)
    prefix = _u_prefix(free)
    namer = _Namer(all_names(f) | {prefix})
    clauses = _leaf_dnf(g, max_clauses)
    cache: dict[Formula, list[VerySpecial]] = {}

    def very(leaf: Formula) -> list[VerySpecial]:
        if leaf not in cache:
            cache[leaf] = to_very_special(to_special(leaf, namer), char, max_clauses, prefix)
        return cache[leaf]

    disjuncts: set[PairDisjunct] = set()
    for clause in clauses:
        pos = [leaf for sign, leaf in clause if sign]
        negs: list[VerySpecial] = []
        for sign, leaf in clause:
            if not sign:
                negs.extend(very(leaf))
        special = reduce(special_and, (to_special(p, namer) for p in pos), SpecialFormula((), TRUE))
        for p0 in to_very_special(special, char, max_clauses, prefix):
            for d in _fold(p0, negs, char, prefix):
                disjuncts.add(d)
            if len(disjuncts) > max_clauses:
                raise _size(max_clauses)
    return PairNormalForm(tuple(sorted(disjuncts, key=_disjunct_key)))


def _fold(pos: VerySpecial, negs: list[VerySpecial], char: int, prefix: str) -> list[PairDisjunct]:
    """Move negatives without small variables into the positive part.

    ``~(P_1 = ... = 0 & Q != 0)`` with no small variables is ``\\/ P_i != 0 | Q = 0``,
    which splits the positive into several very special formulas.
    """
    current = [pos]
    rest: list[VerySpecial] = []
    for n in negs:
        if n.u_vars:
            rest.append(n)
            continue
        nxt = []
        for p in current:
            options = [VerySpecial(p.u_vars, p.eqs, p.ineq * e) for e in n.eqs if not e.is_zero]
            if n.ineq != ONE:
                options.append(VerySpecial(p.u_vars, p.eqs + (n.ineq,), p.ineq))
            for o in options:
                c = canonical_vs(o, char, prefix)
                if c is not None and c not in nxt:
                    nxt.append(c)
        current = nxt
    out = []
    negatives = tuple(sorted(set(rest), key=str))
    for p in current:
        if p in negatives:
            continue
        out.append(PairDisjunct(p, negatives))
    return out


def _disjunct_key(d: PairDisjunct) -> str:
    return str(d.to_formula())


def nf_and(a: PairNormalForm, b: PairNormalForm, char: int = 0) -> PairNormalForm:
    return normalize(conj(a.to_formula(), b.to_formula()), char)


def nf_or(a: PairNormalForm, b: PairNormalForm, char: int = 0) -> PairNormalForm:
    return normalize(disj(a.to_formula(), b.to_formula()), char)


def nf_not(a: PairNormalForm, char: int = 0) -> PairNormalForm:
    return normalize(Not(a.to_formula()), char)

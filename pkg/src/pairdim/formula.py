"""First-order formulas over the ring language extended by the predicate ``U``.

Trees are immutable.  Atoms are ``p = 0``, ``p != 0`` and ``U(x)``; the
connectives are ``Not``, ``And`` and ``Or`` (``->`` is parsed into ``~a | b``);
quantifiers carry a ``small`` flag, where a small quantifier ranges over the
subfield named by ``U``:

    Exists(x, body, small=True)   means  exists x (U(x) & body)
    Forall(x, body, small=True)   means  forall x (U(x) -> body)

Grammar (UTF-8 text)::

    document   := ('#trans' ident (',' ident)* '.')* formula
    formula    := disj ('->' formula)?
    disj       := conj ('|' conj)*
    conj       := unary ('&' unary)*
    unary      := '~' unary | quant | '(' formula ')' | atom
    quant      := ('exists' | 'forall') ident (',' ident)* ['in' 'U'] '.' formula
    atom       := 'U' '(' ident ')' | term ('=' | '!=') term
    term       := ['-'] prod (('+' | '-') prod)*
    prod       := power ('*' power)*
    power      := factor ['^' int]
    factor     := number | ident | '(' term ')' | '-' factor
    number     := int ['/' int]
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from pairdim.errors import BoundVarSubstitution, FormulaSyntaxError, SizeLimit, SortError
from pairdim.poly import ONE, ZERO, Polynomial

DEFAULT_MAX_CLAUSES = 10_000


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return disj(self, other)

    def __invert__(self) -> Formula:
        return Not(self)


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    poly: Polynomial

    def __repr__(self):
        return f"Eq({self.poly})"


@dataclass(frozen=True, repr=False)
class Neq(Formula):
    poly: Polynomial

    def __repr__(self):
        return f"Neq({self.poly})"


@dataclass(frozen=True, repr=False)
class InU(Formula):
    var: str

    def __repr__(self):
        return f"InU({self.var})"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula
    small: bool = False


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula
    small: bool = False


Atom = Union[Eq, Neq, InU]
Quantifier = Union[Exists, Forall]

TRUE = Eq(ZERO)
FALSE = Eq(ONE)


def conj(*args: Formula) -> Formula:
    """Conjunction that flattens nested ``And`` and drops the ``TRUE`` atom."""
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif a != TRUE:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args: Formula) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif a != FALSE:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def exists_block(names, body: Formula, small: bool = False) -> Formula:
    for n in reversed(tuple(names)):
        body = Exists(n, body, small)
    return body


def forall_block(names, body: Formula, small: bool = False) -> Formula:
    for n in reversed(tuple(names)):
        body = Forall(n, body, small)
    return body


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, (Exists, Forall)) for g in walk(f))


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from walk(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from walk(a)
    elif isinstance(f, (Exists, Forall)):
        yield from walk(f.body)


def mentions_u(f: Formula) -> bool:
    return any(isinstance(g, InU) or (isinstance(g, (Exists, Forall)) and g.small) for g in walk(f))


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Eq, Neq)):
        return f.poly.variables
    if isinstance(f, InU):
        return frozenset({f.var})
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_vars(a) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f)


def bound_vars(f: Formula) -> frozenset[str]:
    return frozenset(g.var for g in walk(f) if isinstance(g, (Exists, Forall)))


def all_names(f: Formula) -> frozenset[str]:
    return free_vars(f) | bound_vars(f)


# -- renaming and substitution ------------------------------------------------


def fresh_name(base: str, used) -> str:
    base = re.sub(r"_\d+$", "", base) or "v"
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in used:
            return cand
    raise AssertionError  # pragma: no cover


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename variables (free and bound occurrences alike)."""
    if not mapping:
        return f
    if isinstance(f, Eq):
        return Eq(rename_poly(f.poly, mapping))
    if isinstance(f, Neq):
        return Neq(rename_poly(f.poly, mapping))
    if isinstance(f, InU):
        return InU(mapping.get(f.var, f.var))
    if isinstance(f, Not):
        return Not(rename(f.arg, mapping))
    if isinstance(f, And):
        return And(tuple(rename(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(rename(a, mapping) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        return type(f)(mapping.get(f.var, f.var), rename(f.body, mapping), f.small)
    raise TypeError(f)


def rename_poly(p: Polynomial, mapping: Mapping[str, str]) -> Polynomial:
    hit = {k: Polynomial.var(v) for k, v in mapping.items() if k in p.variables}
    return p.substitute(hit) if hit else p


def substitute(f: Formula, sigma: Mapping[str, Polynomial]) -> Formula:
    """Capture-avoiding substitution of polynomials for free variables.

    ``U`` may only be applied to variables, so a substitution for a variable
    under ``U`` must itself be a variable.
    """
    sigma = {k: Polynomial.coerce(v) for k, v in sigma.items()}
    bound = bound_vars(f)
    clash = bound & sigma.keys()
    if clash:
        raise BoundVarSubstitution(f"cannot substitute for bound variable(s) {sorted(clash)}")
    incoming = frozenset().union(*(p.variables for p in sigma.values())) if sigma else frozenset()
    used = set(all_names(f)) | set(incoming)
    return _subst(f, {k: v for k, v in sigma.items()}, incoming, used)


def _subst(f, sigma, incoming, used):
    if not sigma:
        return f
    if isinstance(f, Eq):
        return Eq(f.poly.substitute(sigma))
    if isinstance(f, Neq):
        return Neq(f.poly.substitute(sigma))
    if isinstance(f, InU):
        if f.var not in sigma:
            return f
        p = sigma[f.var]
        target = _as_variable(p)
        if target is None:
            raise SortError(f"U applied to the non-variable term {p}")
        return InU(target)
    if isinstance(f, Not):
        return Not(_subst(f.arg, sigma, incoming, used))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_subst(a, sigma, incoming, used) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        var, body = f.var, f.body
        if var in incoming:
            new = fresh_name(var, used)
            used.add(new)
            body = rename(body, {var: new})
            var = new
        inner = {k: v for k, v in sigma.items() if k != var}
        return type(f)(var, _subst(body, inner, incoming, used), f.small)
    raise TypeError(f)


def _as_variable(p: Polynomial) -> str | None:
    terms = p.terms()
    if len(terms) == 1:
        m, c = terms[0]
        if c == 1 and len(m) == 1 and m[0][1] == 1:
            return m[0][0]
    return None


# -- normal forms ---------------------------------------------------------------


def nnf(f: Formula) -> Formula:
    """Push negations to the atoms; ``~U(x)`` stays as a negated atom."""
    return _nnf(f, False)


def _nnf(f: Formula, neg: bool) -> Formula:
    if isinstance(f, Eq):
        return Neq(f.poly) if neg else f
    if isinstance(f, Neq):
        return Eq(f.poly) if neg else f
    if isinstance(f, InU):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.arg, not neg)
    if isinstance(f, And):
        parts = tuple(_nnf(a, neg) for a in f.args)
        return Or(parts) if neg else And(parts)
    if isinstance(f, Or):
        parts = tuple(_nnf(a, neg) for a in f.args)
        return And(parts) if neg else Or(parts)
    if isinstance(f, Exists):
        body = _nnf(f.body, neg)
        return Forall(f.var, body, f.small) if neg else Exists(f.var, body, f.small)
    if isinstance(f, Forall):
        body = _nnf(f.body, neg)
        return Exists(f.var, body, f.small) if neg else Forall(f.var, body, f.small)
    raise TypeError(f)


def is_literal(f: Formula) -> bool:
    return isinstance(f, (Eq, Neq, InU)) or (isinstance(f, Not) and isinstance(f.arg, InU))


def dnf_clauses(f: Formula, max_clauses: int = DEFAULT_MAX_CLAUSES) -> list[tuple[Formula, ...]]:
    """Clauses (tuples of literals) of a disjunctive normal form of ``f``."""
    if not is_quantifier_free(f):
        raise ValueError("dnf requires a quantifier-free formula")
    return _dnf(nnf(f), max_clauses)


def _dnf(f: Formula, budget: int) -> list[tuple[Formula, ...]]:
    if is_literal(f):
        return [(f,)]
    if isinstance(f, Or):
        out: list[tuple[Formula, ...]] = []
        for a in f.args:
            out.extend(_dnf(a, budget))
            if len(out) > budget:
                raise SizeLimit(f"DNF exceeds {budget} clauses")
        return out
    if isinstance(f, And):
        out = [()]
        for a in f.args:
            part = _dnf(a, budget)
            if len(out) * len(part) > budget:
                raise SizeLimit(f"DNF exceeds {budget} clauses")
            out = [c + d for c in out for d in part]
        return out
    raise TypeError(f"not in negation normal form: {f!r}")


def dnf(f: Formula, max_clauses: int = DEFAULT_MAX_CLAUSES) -> Formula:
    return disj(*(conj(*c) if len(c) > 1 else c[0] for c in dnf_clauses(f, max_clauses)))


def holds(f: Formula, assignment: Mapping[str, Union[int, Fraction]], char: int = 0) -> bool:
    """Truth of a quantifier-free formula under a full rational assignment.

    Rationals lie in the prime field, which is inside the small field, so
    ``U(x)`` is true for every assigned ``x``.
    """
    if isinstance(f, (Eq, Neq)):
        val = f.poly.substitute(assignment)
        if not val.is_constant:
            raise ValueError(f"unassigned variables {sorted(val.variables)}")
        zero = val.in_char(char).is_zero
        return zero if isinstance(f, Eq) else not zero
    if isinstance(f, InU):
        if f.var not in assignment:
            raise ValueError(f"unassigned variable {f.var}")
        return True
    if isinstance(f, Not):
        return not holds(f.arg, assignment, char)
    if isinstance(f, And):
        return all(holds(a, assignment, char) for a in f.args)
    if isinstance(f, Or):
        return any(holds(a, assignment, char) for a in f.args)
    raise ValueError("holds() needs a quantifier-free formula")


# -- printing -------------------------------------------------------------------


def to_text(f: Formula) -> str:
    if isinstance(f, Eq):
        return f"{f.poly} = 0"
    if isinstance(f, Neq):
        return f"{f.poly} != 0"
    if isinstance(f, InU):
        return f"U({f.var})"
    if isinstance(f, Not):
        if isinstance(f.arg, InU):
            return f"~{to_text(f.arg)}"
        return f"~({to_text(f.arg)})"
    if isinstance(f, And):
        return " & ".join(_wrap(a, (And, Or, Exists, Forall)) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_wrap(a, (And, Or, Exists, Forall)) for a in f.args)
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        dom = " in U" if f.small else ""
        return f"{q} {f.var}{dom}. {to_text(f.body)}"
    raise TypeError(f)


def _wrap(f: Formula, kinds) -> str:
    s = to_text(f)
    return f"({s})" if isinstance(f, kinds) else s


# -- parsing --------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>->|!=|#trans|[-+*^=()~&|.,]))"
)
_KEYWORDS = {"exists", "forall", "in", "U"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def eat(self, text: str) -> _Tok:
        if not self.at(text):
            raise FormulaSyntaxError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id" or t.text in _KEYWORDS:
            raise FormulaSyntaxError(f"expected a variable, found {t.text or 'end of input'!r}", t.pos)
        self.i += 1
        return t.text

    def header(self) -> list[str]:
        names = []
        while self.at("#trans"):
            self.eat("#trans")
            names.append(self.ident())
            while self.at(","):
                self.eat(",")
                names.append(self.ident())
            self.eat(".")
        return names

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.eat("->")
            right = self.formula()
            return Or((Not(left), right))
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.at("|"):
            self.eat("|")
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.at("&"):
            self.eat("&")
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.at("~"):
            self.eat("~")
            return Not(self.unary())
        if self.tok.kind == "id" and self.tok.text in ("exists", "forall"):
            return self.quantifier()
        if self.at("("):
            start = self.i
            try:
                self.eat("(")
                f = self.formula()
                self.eat(")")
                if self.tok.text not in ("=", "!=", "+", "-", "*", "^"):
                    return f
            except FormulaSyntaxError:
                pass
            self.i = start
        return self.atom()

    def quantifier(self) -> Formula:
        kind = self.eat(self.tok.text).text
        names = [self.ident()]
        while self.at(","):
            self.eat(",")
            names.append(self.ident())
        small = False
        if self.tok.kind == "id" and self.tok.text == "in":
            self.eat("in")
            self.eat("U")
            small = True
        self.eat(".")
        body = self.formula()
        cls = Exists if kind == "exists" else Forall
        for n in reversed(names):
            body = cls(n, body, small)
        return body

    def atom(self) -> Formula:
        if self.tok.kind == "id" and self.tok.text == "U":
            self.eat("U")
            self.eat("(")
            start = self.i
            term = self.term()
            var = _as_variable(term)
            if var is None:
                raise SortError(f"U applied to the non-variable term {term} (at position {self.toks[start].pos})")
            self.eat(")")
            return InU(var)
        lhs = self.term()
        if self.at("="):
            self.eat("=")
            return Eq(lhs - self.term())
        if self.at("!="):
            self.eat("!=")
            return Neq(lhs - self.term())
        raise FormulaSyntaxError(f"expected '=' or '!=', found {self.tok.text or 'end of input'!r}", self.tok.pos)

    def term(self) -> Polynomial:
        if self.at("-"):
            self.eat("-")
            acc = -self.product()
        else:
            acc = self.product()
        while self.at("+") or self.at("-"):
            op = self.eat(self.tok.text).text
            rhs = self.product()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def product(self) -> Polynomial:
        acc = self.power()
        while self.at("*"):
            self.eat("*")
            acc = acc * self.power()
        return acc

    def power(self) -> Polynomial:
        base = self.factor()
        if self.at("^"):
            self.eat("^")
            t = self.tok
            if t.kind != "num" or "/" in t.text:
                raise FormulaSyntaxError("expected an integer exponent", t.pos)
            self.i += 1
            base = base ** int(t.text)
        return base

    def factor(self) -> Polynomial:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            num, _, den = t.text.partition("/")
            if den and int(den) == 0:
                raise FormulaSyntaxError("zero denominator", t.pos)
            return Polynomial.const(Fraction(int(num), int(den or 1)))
        if self.at("-"):
            self.eat("-")
            return -self.factor()
        if self.at("("):
            self.eat("(")
            p = self.term()
            self.eat(")")
            return p
        return Polynomial.var(self.ident())

    def expect_end(self):
        if self.tok.kind != "eof":
            raise FormulaSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)


def read_trans_header(text: str) -> tuple[tuple[str, ...], str]:
    """Split off ``#trans`` directives; returns the declared names and the rest."""
    p = _Parser(text)
    names = p.header()
    rest = text[p.tok.pos:] if p.tok.kind != "eof" else ""
    return tuple(names), rest


def parse(text: str, trans=()) -> Formula:
    """Parse a formula, alpha-renaming bound variables apart.

    ``trans`` names transcendental constants in addition to any declared by a
    ``#trans`` header; they may not be quantified.
    """
    p = _Parser(text)
    declared = set(p.header()) | set(trans)
    f = p.formula()
    p.expect_end()
    return _alpha(f, declared)


def parse_term(text: str) -> Polynomial:
    p = _Parser(text)
    t = p.term()
    p.expect_end()
    return t


def _alpha(f: Formula, constants) -> Formula:
    for g in walk(f):
        if isinstance(g, (Exists, Forall)) and g.var in constants:
            raise SortError(f"transcendental constant {g.var} cannot be quantified")
    used = set(free_vars(f)) | set(constants)
    return _alpha_rec(f, {}, used)


def _alpha_rec(f, env, used):
    if isinstance(f, (Eq, Neq, InU)):
        return rename(f, env)
    if isinstance(f, Not):
        return Not(_alpha_rec(f.arg, env, used))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_alpha_rec(a, env, used) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        var = f.var
        if var in used:
            var = fresh_name(var, used)
        used.add(var)
        return type(f)(var, _alpha_rec(f.body, {**env, f.var: var}, used), f.small)
    raise TypeError(f)


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    return _alpha_eq(f, g, {}, {})


def _alpha_eq(f, g, lf, lg):
    if type(f) is not type(g):
        return False
    if isinstance(f, (Eq, Neq, InU)):
        return rename(f, lf) == rename(g, lg)
    if isinstance(f, Not):
        return _alpha_eq(f.arg, g.arg, lf, lg)
    if isinstance(f, (And, Or)):
        return len(f.args) == len(g.args) and all(_alpha_eq(a, b, lf, lg) for a, b in zip(f.args, g.args))
    if isinstance(f, (Exists, Forall)):
        if f.small != g.small:
            return False
        tag = f"#{len(lf)}"
        return _alpha_eq(f.body, g.body, {**lf, f.var: tag}, {**lg, g.var: tag})
    raise TypeError(f)

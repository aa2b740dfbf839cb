"""Dimension of definable sets in a pair of algebraically closed fields.

For a very special ``psi(y, z)`` and a parameter ``a`` the fiber ``psi(a, K)``
is the union over ``x`` in the small field of the sets
``{z : P_i(x, a, z) = 0, Q(x, a, z) != 0}``.  Each of these is finite when some
``P_i(x, a, Z)`` is a nonzero polynomial in ``Z``, empty when every ``P_i`` and
``Q`` vanish identically, and cofinite otherwise.  So the fiber is small
(dimension at most 0) exactly when no ``x`` lands in the cofinite case, and
otherwise it is cofinite.

Dimensions are ints or ``NEG_INF`` (the empty set).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

from pairdim.acfqe import decide_sentence, qe, simplify
from pairdim.errors import (
    FreeVariable, InternalInconsistency, UnsupportedFragment, ZeroDegree, ZeroPolynomial,
)
from pairdim.formula import (
    DEFAULT_MAX_CLAUSES, FALSE, Eq, Exists, Formula, Neq, Not, conj, disj, exists_block,
    forall_block, free_vars,
)
from pairdim.pairnf import PairDisjunct, PairNormalForm, VerySpecial, normalize
from pairdim.poly import Polynomial, coefficients_wrt

NEG_INF = -math.inf
Dimension = Union[int, float]


def dim_to_json(d: Dimension):
    return "neg_inf" if d == NEG_INF else int(d)


def _dim_add(a: Dimension, b: Dimension) -> Dimension:
    return NEG_INF if NEG_INF in (a, b) else a + b


# -- fiber formulas ------------------------------------------------------------------


def _nonzero_in(p: Polynomial, z: str) -> Formula:
    """``p`` is not the zero polynomial in ``z``."""
    return disj(*(Neq(c) for c in p.coeffs_in(z)))


def _zero_in(p: Polynomial, z: str) -> Formula:
    """``p`` is the zero polynomial in ``z``."""
    return conj(*(Eq(c) for c in p.coeffs_in(z)))


def fiber_dim0_formula(psi: VerySpecial, z: str, char: int = 0) -> Formula:
    """Parameters at which the ``z``-fiber of ``psi`` is small.

    ``forall x in U. \\/_i P_i(x, y, Z) != 0  |  P_1 = ... = P_r = Q = 0`` where
    both conditions are taken as polynomials in ``Z``.
    """
    some_nonzero = disj(*(_nonzero_in(p, z) for p in psi.eqs))
    all_zero = conj(*(_zero_in(p, z) for p in psi.polys))
    return forall_block(psi.u_vars, simplify(disj(some_nonzero, all_zero), char), small=True)


def fiber_cofinite_formula(psi: VerySpecial, z: str, char: int = 0) -> Formula:
    """Parameters at which the ``z``-fiber of ``psi`` is cofinite (the negation of the above)."""
    body = conj(*(_zero_in(p, z) for p in psi.eqs), _nonzero_in(psi.ineq, z))
    return exists_block(psi.u_vars, simplify(body, char), small=True)


def fiber_full_formula(psi: VerySpecial, z: str, char: int = 0) -> Formula:
    """A sufficient condition for the ``z``-fiber of ``psi`` to be all of ``K``."""
    q = psi.ineq.coeffs_in(z)
    body = conj(*(_zero_in(p, z) for p in psi.eqs),
                *(Eq(c) for c in q[1:]), Neq(q[0]) if q else FALSE)
    return exists_block(psi.u_vars, simplify(body, char), small=True)


def fiber_nonempty_formula(psi: VerySpecial, z: str, char: int = 0,
                           max_clauses: int = DEFAULT_MAX_CLAUSES) -> Formula:
    """Special formula equivalent to ``exists z. psi``."""
    inner = qe(Exists(z, psi.matrix()), char, max_clauses)
    return exists_block(psi.u_vars, simplify(inner, char), small=True)


def disjunct_small_formula(d: PairDisjunct, z: str, char: int = 0) -> Formula:
    return disj(fiber_dim0_formula(d.positive, z, char),
                *(fiber_cofinite_formula(n, z, char) for n in d.negatives))


def set_small_formula(nf: PairNormalForm, z: str, char: int = 0) -> Formula:
    """Parameters at which the ``z``-fiber of the set is small."""
    return conj(*(disjunct_small_formula(d, z, char) for d in nf.disjuncts))


# -- sentences ----------------------------------------------------------------------------


def decide_vs_sentence(vs: VerySpecial, char: int = 0, trans: Sequence[str] = ()) -> bool:
    """Truth of a very special sentence whose only free names are transcendentals.

    An element of the small field satisfies a polynomial relation with
    coefficients in the transcendentals iff every coefficient relation holds.
    """
    extra = vs.variables - set(trans)
    if extra:
        raise FreeVariable(f"undeclared free variable(s) {sorted(extra)}")
    eqs = [Eq(c) for p in vs.eqs for c in coefficients_wrt(p, trans)]
    ineq = disj(*(Neq(c) for c in coefficients_wrt(vs.ineq, trans)))
    return decide_sentence(exists_block(vs.u_vars, conj(*eqs, ineq)), char)


def decide_nf(nf: PairNormalForm, char: int = 0, trans: Sequence[str] = ()) -> bool:
    cache: dict[VerySpecial, bool] = {}

    def holds(vs):
        if vs not in cache:
            cache[vs] = decide_vs_sentence(vs, char, trans)
        return cache[vs]

    return any(holds(d.positive) and not any(holds(n) for n in d.negatives)
               for d in nf.disjuncts)


def decide_pair_sentence(f: Formula, char: int = 0, trans: Sequence[str] = (),
                         max_clauses: int = DEFAULT_MAX_CLAUSES) -> bool:
    """Truth of a sentence of the supported fragment in the pair."""
    extra = free_vars(f) - set(trans)
    if extra:
        raise FreeVariable(f"undeclared free variable(s) {sorted(extra)}")
    return decide_nf(normalize(f, char, max_clauses), char, trans)


# -- dichotomy ----------------------------------------------------------------------------


class Label(str, Enum):
    SMALL = "Small"
    COSMALL = "CoSmall"


@dataclass(frozen=True)
class DichotomyResult:
    label: Label
    small_formula: Formula
    complement_small_formula: Formula
    complement: PairNormalForm


def dichotomy(nf: PairNormalForm, z: str, char: int = 0, trans: Sequence[str] = (),
              max_clauses: int = DEFAULT_MAX_CLAUSES) -> DichotomyResult:
    """Decide whether a subset of ``K`` (closed parameters) is small or co-small."""
    extra = nf.variables - set(trans) - {z}
    if extra:
        raise FreeVariable(f"undeclared free variable(s) {sorted(extra)}")
    comp = normalize(Not(nf.to_formula()), char, max_clauses)
    sf = set_small_formula(nf, z, char)
    cf = set_small_formula(comp, z, char)
    small = decide_pair_sentence(sf, char, trans, max_clauses)
    cosmall = decide_pair_sentence(cf, char, trans, max_clauses)
    if small == cosmall:
        raise InternalInconsistency(
            f"set and complement are {'both' if small else 'neither'} small: {nf}")
    return DichotomyResult(Label.SMALL if small else Label.COSMALL, sf, cf, comp)


# -- dimension -----------------------------------------------------------------------------


@dataclass
class DimCertificate:
    """Dimension of a set together with the fiber partition that justifies it.

    At a peeling node ``formulas`` holds the parameter regions ``empty``,
    ``small`` (small nonempty fibers) and ``cosmall``; a union node has one
    child per disjunct.
    """
    dimension: Dimension
    variables: tuple[str, ...]
    kind: str
    formulas: dict[str, Formula] = field(default_factory=dict)
    children: dict[str, "DimCertificate"] = field(default_factory=dict)
    note: str = ""

    def to_json(self) -> dict:
        out = {
            "dimension": dim_to_json(self.dimension),
            "variables": list(self.variables),
            "kind": self.kind,
        }
        if self.formulas:
            out["formulas"] = {k: str(v) for k, v in self.formulas.items()}
        if self.children:
            out["children"] = {k: c.to_json() for k, c in self.children.items()}
        if self.note:
            out["note"] = self.note
        return out


def dim(nf: PairNormalForm, variables: Sequence[str], char: int = 0, trans: Sequence[str] = (),
        max_clauses: int = DEFAULT_MAX_CLAUSES) -> DimCertificate:
    """Dimension of the set defined by ``nf`` in ``K^n``, ``n = len(variables)``."""
    variables = tuple(variables)
    extra = nf.variables - set(variables) - set(trans)
    if extra:
        raise FreeVariable(f"variables {sorted(extra)} are neither coordinates nor transcendentals")
    return _Engine(char, tuple(trans), max_clauses).run(nf, variables)


class _Engine:
    def __init__(self, char, trans, max_clauses):
        self.char = char
        self.trans = trans
        self.max_clauses = max_clauses

    def normalize(self, f: Formula) -> PairNormalForm:
        return normalize(f, self.char, self.max_clauses)

    def run(self, nf: PairNormalForm, variables: tuple[str, ...]) -> DimCertificate:
        if not variables:
            ok = decide_nf(nf, self.char, self.trans)
            return DimCertificate(0 if ok else NEG_INF, (), "point", {"set": nf.to_formula()})
        if not nf.disjuncts:
            return DimCertificate(NEG_INF, variables, "empty")
        if len(nf.disjuncts) == 1:
            return self.disjunct(nf.disjuncts[0], variables)
        children = {}
        for i, d in enumerate(nf.disjuncts):
            children[f"part{i}"] = self.disjunct(d, variables)
        best = max(c.dimension for c in children.values())
        return DimCertificate(best, variables, "union", {"set": nf.to_formula()}, children)

    def disjunct(self, d: PairDisjunct, variables: tuple[str, ...]) -> DimCertificate:
        z, rest = variables[-1], variables[:-1]
        if z not in d.variables:
            base = self.run(PairNormalForm((d,)), rest)
            return DimCertificate(_dim_add(base.dimension, 1), variables, "cylinder",
                                  {"set": d.to_formula()}, {"base": base})
        char = self.char
        guard = conj(*(Not(n.to_formula()) for n in d.negatives if z not in n.variables))
        moving = [n for n in d.negatives if z in n.variables]
        small = disj(fiber_dim0_formula(d.positive, z, char),
                     *(fiber_cofinite_formula(n, z, char) for n in moving))
        nonempty = fiber_nonempty_formula(d.positive, z, char, self.max_clauses)
        cosmall_region = conj(guard, Not(small))
        empty_region = Not(conj(guard, nonempty))
        formulas = {"set": d.to_formula(), "cosmall": cosmall_region}

        c1 = self.run(self.normalize(cosmall_region), rest)
        if not moving:
            small_region = conj(guard, small, nonempty)
            formulas["small"] = small_region
            formulas["empty"] = empty_region
            c0 = self.run(self.normalize(small_region), rest)
            result = max(c0.dimension, _dim_add(c1.dimension, 1))
            return DimCertificate(result, variables, "fiber", formulas, {"small": c0, "cosmall": c1})

        # Negatives that move with z: small fibers may still be empty, which is
        # not decidable here, so bound them by the region where they could live.
        not_full = conj(*(Not(fiber_full_formula(n, z, char)) for n in moving))
        hard_region = conj(guard, nonempty, small, not_full)
        formulas["small_bound"] = hard_region
        ch = self.run(self.normalize(hard_region), rest)
        top = _dim_add(c1.dimension, 1)
        if ch.dimension == NEG_INF or ch.dimension <= top:
            return DimCertificate(top, variables, "fiber", formulas, {"small_bound": ch, "cosmall": c1},
                                  note="small fibers bounded by the co-small part")
        raise UnsupportedFragment(
            "cannot decide emptiness of small fibers",
            subformula=str(d.to_formula()))


def dim_of_formula(f: Formula, variables: Sequence[str], char: int = 0, trans: Sequence[str] = (),
                   max_clauses: int = DEFAULT_MAX_CLAUSES) -> DimCertificate:
    return dim(normalize(f, char, max_clauses), variables, char, trans, max_clauses)


# -- almost internality ---------------------------------------------------------------------


@dataclass(frozen=True)
class InternalityWitness:
    """``relation(u, z)`` with ``|relation(u, K)| <= bound`` for every small ``u``."""
    relation: Formula
    bound: int
    u_vars: tuple[str, ...]
    field_var: str

    def image_formula(self) -> Formula:
        """The set covered by the relation: ``exists u in U. relation(u, z)``."""
        return exists_block(self.u_vars, self.relation, small=True)

    def to_json(self) -> dict:
        return {"relation": str(self.relation), "bound": self.bound,
                "uVars": list(self.u_vars), "fieldVar": self.field_var}


def almost_internal_witness(p: Polynomial, z: str, u_vars: Sequence[str],
                            params: Mapping[str, Union[Polynomial, int]] | None = None,
                            char: int = 0) -> InternalityWitness:
    """Finite-to-one relation from small tuples onto ``{z : exists u in U. P(u, a, z) = 0}``."""
    if p.is_zero:
        raise ZeroPolynomial("P must be nonzero")
    sigma = {k: Polynomial.coerce(v) for k, v in (params or {}).items()}
    pa = p.substitute(sigma) if sigma else p
    if pa.is_zero:
        raise ZeroPolynomial("P vanishes at the given parameters")
    d = pa.degree(z)
    if d < 1:
        raise ZeroDegree(f"P has degree 0 in {z}")
    relation = simplify(conj(Eq(pa), _nonzero_in(pa, z)), char)
    return InternalityWitness(relation, d, tuple(u_vars), z)

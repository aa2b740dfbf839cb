"""Finite closure systems, pregeometry axioms and relative rank."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from pairdim.errors import DimensionMismatch, NotPregeometry, TooLarge

MAX_GROUND = 12

Point = Hashable


@dataclass(frozen=True)
class FiniteClosureSystem:
    ground: tuple[Point, ...]
    closure: Callable[[frozenset], frozenset] = field(compare=False)

    def __post_init__(self):
        if not self.ground:
            raise ValueError("ground set must be nonempty")

    def cl(self, a: Iterable[Point]) -> frozenset:
        return frozenset(self.closure(frozenset(a)))


@dataclass
class AxiomResult:
    ok: bool = True
    witness: tuple | None = None

    def fail(self, *witness):
        if self.ok:
            self.ok = False
            self.witness = witness


@dataclass
class AxiomReport:
    extensive: AxiomResult
    monotone: AxiomResult
    idempotent: AxiomResult
    finite_character: AxiomResult
    exchange: AxiomResult

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self._results().values())

    def _results(self) -> dict[str, AxiomResult]:
        return {"extensive": self.extensive, "monotone": self.monotone,
                "idempotent": self.idempotent, "finiteCharacter": self.finite_character,
                "exchange": self.exchange}

    def to_json(self) -> dict:
        return {k: {"pass": r.ok, "witness": _witness_json(r.witness)}
                for k, r in self._results().items()}


def _witness_json(w):
    if w is None:
        return None
    return [sorted(map(repr, x)) if isinstance(x, frozenset) else repr(x) for x in w]


def _subsets(ground):
    for r in range(len(ground) + 1):
        for c in itertools.combinations(ground, r):
            yield frozenset(c)


def check_axioms(sys: FiniteClosureSystem, max_ground: int = MAX_GROUND) -> AxiomReport:
    """Exhaustive check of the pregeometry axioms; failures carry a witness."""
    if len(sys.ground) > max_ground:
        raise TooLarge(f"{len(sys.ground)} points exceed the exhaustive budget of {max_ground}")
    subsets = list(_subsets(sys.ground))
    cl = {a: sys.cl(a) for a in subsets}
    # Finite character is automatic on a finite carrier: every A is its own
    # finite subset, so that result is always a pass.
    rep = AxiomReport(*(AxiomResult() for _ in range(5)))
    for a in subsets:
        if not a <= cl[a]:
            rep.extensive.fail(a)
        if cl[cl[a] & frozenset(sys.ground)] != cl[a]:
            rep.idempotent.fail(a)
        for p in sys.ground:
            if p in a:
                continue
            b = a | {p}
            if not cl[a] <= cl[b]:
                rep.monotone.fail(a, b)
            for q in sys.ground:
                # exchange: q in cl(A + p) \ cl(A) implies p in cl(A + q)
                if q in cl[b] and q not in cl[a] and p not in cl[a | {q}]:
                    rep.exchange.fail(a, p, q)
    return rep


def rank(sys: FiniteClosureSystem, a: Iterable[Point], b: Iterable[Point],
         order: Sequence[Point] | None = None) -> int:
    """Size of a basis of ``cl(B)`` over ``cl(A)``, by greedy extension of ``A``."""
    a, b = frozenset(a), frozenset(b)
    if not a <= b:
        raise ValueError("rank query needs A to be a subset of B")
    if not check_axioms(sys).ok:
        raise NotPregeometry("closure system fails the pregeometry axioms")
    return greedy_rank(sys, a, b, order)


def greedy_rank(sys: FiniteClosureSystem, a: frozenset, b: frozenset,
                order: Sequence[Point] | None = None) -> int:
    current = set(a)
    closed = sys.cl(current)
    count = 0
    for p in (order if order is not None else sorted(b - a, key=repr)):
        if p not in closed:
            current.add(p)
            closed = sys.cl(current)
            count += 1
    return count


# -- linear instances ------------------------------------------------------------------


def row_reduce(vectors: Sequence[Sequence[int]], p: int) -> list[list[int]]:
    """Reduced row echelon basis of the span of ``vectors`` over ``F_p``."""
    rows = [[x % p for x in v] for v in vectors]
    basis: list[list[int]] = []
    pivots: list[int] = []
    for r in rows:
        for b, c in zip(basis, pivots):
            if r[c]:
                f = r[c]
                r = [(x - f * y) % p for x, y in zip(r, b)]
        lead = next((i for i, x in enumerate(r) if x), None)
        if lead is None:
            continue
        inv = pow(r[lead], -1, p)
        r = [(x * inv) % p for x in r]
        for i, b in enumerate(basis):
            if b[lead]:
                f = b[lead]
                basis[i] = [(x - f * y) % p for x, y in zip(b, r)]
        basis.append(r)
        pivots.append(lead)
    return basis


def in_span(v: Sequence[int], basis: list[list[int]], p: int) -> bool:
    return len(row_reduce(basis + [list(v)], p)) == len(basis)


def linear_instance(vectors: Sequence[Sequence[int]], p: int) -> FiniteClosureSystem:
    """Closure by linear span over ``F_p``, intersected with the given vectors."""
    if not vectors:
        raise ValueError("need at least one vector")
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise DimensionMismatch("vectors have different lengths")
    if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
        raise ValueError(f"{p} is not prime")
    ground = tuple(dict.fromkeys(tuple(x % p for x in v) for v in vectors))

    def closure(a: frozenset) -> frozenset:
        basis = row_reduce(list(a), p)
        return frozenset(v for v in ground if in_span(v, basis, p))

    return FiniteClosureSystem(ground, closure)


def exchange_failure_example() -> FiniteClosureSystem:
    """Three points where ``a`` forces ``c`` but ``c`` does not force ``a``."""
    def closure(s: frozenset) -> frozenset:
        return s | {"c"} if "a" in s else s

    return FiniteClosureSystem(("a", "b", "c"), closure)

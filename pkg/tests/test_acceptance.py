"""Acceptance suite: one test per criterion, each recording a pass/fail line."""
from __future__ import annotations

import itertools
import json
import math
import os
import random
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import sympy

from gen import as_poly, corpus, instance_formula, one_var_set, qe_instance, rand_set, rational_sample
from pairdim.acfqe import qe
from pairdim.cli import run
from pairdim.dim2 import (
    almost_internal_witness, decide_pair_sentence, dichotomy, dim_of_formula,
    fiber_cofinite_formula, fiber_dim0_formula,
)
from pairdim.errors import InternalInconsistency, UnsupportedFragment, ZeroDegree, ZeroPolynomial
from pairdim.formula import Exists, Not, free_vars, holds, parse, rename, substitute
from pairdim.oracle import evaluate, exists_root_not_root, sample_check
from pairdim.pairnf import VerySpecial, normalize
from pairdim.poly import ONE, Polynomial
from pairdim.pregeo import check_axioms, greedy_rank, linear_instance

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = corpus(FIXTURES / "corpus.txt")
TR = ("t",)


def _dim(f, variables):
    return dim_of_formula(f, variables, trans=TR).dimension


def _distinct_roots(p: Polynomial, z: str) -> int:
    """Distinct roots in ``z`` over the algebraic closure of Q(t), counted by sympy."""
    expr = sympy.sympify(str(p).replace("^", "**"))
    zs = sympy.Symbol(z)
    g = sympy.gcd(expr, sympy.diff(expr, zs))
    return sympy.degree(expr, zs) - sympy.degree(g, zs)


# -- 1. QE against the gcd oracle ---------------------------------------------------


def test_criterion_1_qe_oracle_agreement(verdict):
    rng = random.Random(20240101)
    instances = agree = 0
    for _ in range(500):
        eqs, neqs = qe_instance(rng, max_deg=4)
        g = qe(instance_formula(eqs, neqs))
        instances += 1
        s = rational_sample(rng)
        sigma = {k: as_poly(v) for k, v in s.items()}
        q = ONE
        for n in neqs:
            q = q * n
        want = exists_root_not_root([e.substitute(sigma) for e in eqs], q.substitute(sigma))
        agree += holds(g, s) == want
    ok = instances >= 500 and agree == instances
    assert verdict(1, "qe vs gcd oracle", ok, f"{agree}/{instances} agree")


# -- 2. anchor values ----------------------------------------------------------------


def test_criterion_2_anchor_values(verdict):
    got = {}
    for n in (1, 2, 3):
        ys = [f"y{i}" for i in range(1, n + 1)]
        got[f"K^{n}"] = _dim(parse("0 = 0"), ys)
        got[f"k^{n}"] = _dim(parse(" & ".join(f"U({y})" for y in ys)), ys)
    ok = all(got[f"K^{n}"] == n and got[f"k^{n}"] == 0 for n in (1, 2, 3))
    assert verdict(2, "anchor values", ok, ", ".join(f"{k}={v}" for k, v in got.items()))


# -- 3. dichotomy totality -----------------------------------------------------------


def test_criterion_3_dichotomy_totality(verdict):
    rng = random.Random(33)
    total = opposite = inconsistent = 0
    while total < 120:
        f = parse(one_var_set(rng, depth=2), TR)
        total += 1
        try:
            a = dichotomy(normalize(f), "z", trans=TR).label
            b = dichotomy(normalize(Not(f)), "z", trans=TR).label
        except InternalInconsistency:
            inconsistent += 1
            continue
        opposite += a != b
    ok = total >= 100 and opposite == total and inconsistent == 0
    assert verdict(3, "dichotomy totality", ok,
                   f"{opposite}/{total} complements opposite, {inconsistent} inconsistencies")


# -- 4. dimension laws ---------------------------------------------------------------


def _laws(rng):
    """Yield (law, holds) pairs for one round of generated sets."""
    n = rng.choice([2, 3])
    ys = [f"y{i}" for i in range(1, n + 1)]
    a, b = parse(rand_set(rng, ys), TR), parse(rand_set(rng, ys), TR)
    da, db = _dim(a, ys), _dim(b, ys)
    yield "union", _dim(a | b, ys) == max(da, db)
    yield "inclusion", _dim(a & b, ys) <= min(da, db)
    perm = ys[:]
    rng.shuffle(perm)
    yield "permutation", _dim(a, perm) == da
    left = parse(rand_set(rng, ys[:1]), TR)
    right = rename(parse(rand_set(rng, ys[:n - 1]), TR), {y: w for y, w in zip(ys[:n - 1], ys[1:])})
    dl, dr = _dim(left, ys[:1]), _dim(right, ys[1:])
    yield "product", _dim(left & right, ys) == dl + dr
    proj = _dim(Exists(ys[-1], a), ys[:-1])
    yield "projection", proj <= da <= proj + 1


def test_criterion_4_dimension_laws(verdict):
    rng = random.Random(44)
    counts = {k: [0, 0] for k in ("union", "inclusion", "permutation", "product", "projection")}
    rounds = 0
    while min(c[0] for c in counts.values()) < 60 and rounds < 400:
        rounds += 1
        try:
            for law, ok in _laws(rng):
                counts[law][0] += 1
                counts[law][1] += ok
        except UnsupportedFragment:
            continue
    ok = all(c[0] >= 50 and c[0] == c[1] for c in counts.values())
    detail = ", ".join(f"{k} {c[1]}/{c[0]}" for k, c in counts.items())
    assert verdict(4, "dimension laws", ok, detail)


# -- 5. soundness of the smallness test on fibers ---------------------------------------


_VS_MONOS = ["1", "u", "y", "z", "u*z", "y*z", "u*y", "z^2", "u^2", "u*z^2", "v", "v*z"]


def _rand_vs(rng) -> VerySpecial:
    names = ("u", "v") if rng.random() < 0.3 else ("u",)
    monos = [m for m in _VS_MONOS if "v" not in m or "v" in names]

    def poly(k):
        text = " + ".join(f"{rng.choice([-2, -1, 1, 2])}*{rng.choice(monos)}" for _ in range(k))
        return Polynomial.coerce(parse(f"{text} = 0").poly)

    eqs = []
    for _ in range(rng.randint(1, 2)):
        p = poly(rng.randint(1, 3))
        if rng.random() < 0.4:
            p = p * Polynomial.coerce(parse(f"u - {rng.randint(-1, 1)} = 0").poly)
        eqs.append(p)
    ineq = ONE if rng.random() < 0.4 else poly(rng.randint(1, 2))
    return VerySpecial(names, tuple(eqs), ineq)


def _cofinite_witness(psi, a, rng_values):
    """Bounded search for a rational small tuple making every equation vanish in z."""
    for values in itertools.product(rng_values, repeat=len(psi.u_vars)):
        sigma = {"y": a, **{u: Polynomial.const(c) for u, c in zip(psi.u_vars, values)}}
        if all(p.substitute(sigma).is_zero for p in psi.eqs):
            q = psi.ineq.substitute(sigma)
            if not q.is_zero:
                return sigma, q
    return None


def test_criterion_5_fiber_smallness_soundness(verdict):
    rng = random.Random(55)
    params = [Polynomial.const(0), Polynomial.const(1), Polynomial.const(Fraction(-1, 2)),
              Polynomial.var("t"), Polynomial.var("t") + 1]
    checked = small = cofinite = bad = 0
    formulas = 0
    while formulas < 60:
        psi = _rand_vs(rng)
        if "z" not in psi.variables:
            continue
        formulas += 1
        star = fiber_dim0_formula(psi, "z")
        cof = fiber_cofinite_formula(psi, "z")
        for a in rng.sample(params, 3):
            checked += 1
            s_star = decide_pair_sentence(substitute(star, {"y": a}), trans=TR)
            s_cof = decide_pair_sentence(substitute(cof, {"y": a}), trans=TR)
            # Independent path: a fiber defined over Q(t) is small exactly when it
            # misses a point transcendental over k(t).
            generic = evaluate(psi.to_formula(), {"y": a, "z": Polynomial.var("s")}, trans=("t", "s"))
            if s_star == s_cof or s_star == generic:
                bad += 1
                continue
            if s_star:
                small += 1
                continue
            found = _cofinite_witness(psi, a, range(-3, 4))
            if found is None:
                continue
            cofinite += 1
            sigma, q = found
            missing = _distinct_roots(q, "z") if q.degree("z") > 0 else 0
            zs = [Fraction(c, 3) for c in range(-6, 7)]
            outside = [z for z in zs if not q.substitute({"z": z}).is_zero]
            inside = all(evaluate(psi.to_formula(), {"y": a, "z": z}, trans=TR) for z in outside)
            if missing > max(q.degree("z"), 0) or not inside:
                bad += 1
    ok = formulas >= 50 and bad == 0 and small > 0 and cofinite > 0
    assert verdict(5, "fiber smallness soundness", ok,
                   f"{formulas} formulas, {checked} parameter checks, {small} small, "
                   f"{cofinite} cofinite with witness, {bad} failures")


# -- 6. almost-internality bound ----------------------------------------------------


_P_MONOS = ["z", "z^2", "z^3", "x1*z", "x2*z^2", "x1*x2", "x1", "y*z", "y", "1", "x1^2*z", "x2"]


def test_criterion_6_witness_bound(verdict):
    rng = random.Random(66)
    params = [Polynomial.const(2), Polynomial.const(Fraction(1, 3)), Polynomial.var("t")]
    pairs = samples = bad = 0
    while pairs < 60:
        text = " + ".join(f"{rng.choice([-2, -1, 1, 3])}*{rng.choice(_P_MONOS)}"
                          for _ in range(rng.randint(2, 4)))
        p = Polynomial.coerce(parse(f"{text} = 0").poly)
        a = rng.choice(params)
        try:
            w = almost_internal_witness(p, "z", ["x1", "x2"], {"y": a})
        except (ZeroDegree, ZeroPolynomial):
            continue
        pairs += 1
        pa = p.substitute({"y": a})
        for _ in range(20):
            samples += 1
            u = {"x1": Fraction(rng.randint(-3, 3)), "x2": Fraction(rng.randint(-3, 3), 2)}
            pu = pa.substitute(u)
            if pu.is_zero:
                # the relation must be empty over this small tuple
                if any(evaluate(w.relation, {**u, "z": z}, trans=TR) for z in (0, 1, Polynomial.var("t"))):
                    bad += 1
                continue
            if pu.degree("z") > 0 and _distinct_roots(pu, "z") > w.bound:
                bad += 1
    ok = pairs >= 50 and bad == 0
    assert verdict(6, "almost-internality bound", ok,
                   f"{pairs} (P, a) pairs, {samples} samples, {bad} violations")


# -- 7. pregeometry on linear instances ----------------------------------------------


def _span_rank(vectors, p) -> int:
    """Rank from the size of the span, by enumerating all combinations."""
    if not vectors:
        return 0
    n = len(vectors[0])
    span = {tuple(sum(c * v[i] for c, v in zip(coeffs, vectors)) % p for i in range(n))
            for coeffs in itertools.product(range(p), repeat=len(vectors))}
    return round(math.log(len(span), p))


def _linear_instances():
    yield list(itertools.product(range(2), repeat=3)), 2
    yield [v for v in itertools.product(range(3), repeat=2) if any(v)], 3
    rng = random.Random(77)
    for p in (2, 3):
        for _ in range(6):
            dim_ = rng.randint(2, 4)
            vecs = {tuple(rng.randrange(p) for _ in range(dim_)) for _ in range(rng.randint(3, 8))}
            yield sorted(vecs), p


def test_criterion_7_pregeometry(verdict):
    instances = queries = agree = axiom_pass = 0
    for vecs, p in _linear_instances():
        sys_ = linear_instance(vecs, p)
        instances += 1
        if check_axioms(sys_).ok:
            axiom_pass += 1
        ground = sys_.ground
        for r in range(len(ground) + 1):
            for b in itertools.combinations(ground, r):
                queries += 1
                agree += greedy_rank(sys_, frozenset(), frozenset(b)) == _span_rank(list(b), p)
    ok = axiom_pass == instances and agree == queries
    assert verdict(7, "pregeometry axioms and rank", ok,
                   f"{axiom_pass}/{instances} instances pass, {agree}/{queries} rank queries agree")


# -- 8. normal form preserves truth ------------------------------------------------


def test_criterion_8_normal_form_semantics(verdict):
    rng = random.Random(88)
    pool = [0, 1, -1, 2, Fraction(1, 2), Fraction(-3, 2)]
    formulas = disagreements = total = 0
    for line, trans, f in CORPUS:
        values = pool + [Polynomial.var(t) + c for t in trans for c in (0, 1, -2)]
        values += [Polynomial.var(t) * 2 for t in trans]
        names = sorted(free_vars(f) - set(trans))
        assignments = [{n: rng.choice(values) for n in names} for _ in range(100)]
        report = sample_check(f, normalize(f).to_formula(), assignments, trans=trans)
        formulas += 1
        total += report.total
        disagreements += len(report.disagreements)
    ok = formulas >= 40 and disagreements == 0
    assert verdict(8, "normal form semantics", ok,
                   f"{formulas} formulas, {total} assignments, {disagreements} disagreements")


# -- 9. determinism and round trip ---------------------------------------------------


def test_criterion_9_determinism_round_trip(verdict):
    round_trips = sum(parse(str(f), trans) == f for _, trans, f in CORPUS)
    stable = 0
    for line, trans, f in CORPUS:
        argv = ["normalize", line]
        stable += run(argv)[1] == run(argv)[1]
    cmd = [sys.executable, "-m", "pairdim.cli", "dim", "--trans", "t", "U(y) & z != t*y"]
    outs = {subprocess.run(cmd, capture_output=True, check=True,
                           env={**os.environ, "PYTHONHASHSEED": seed}).stdout
            for seed in ("0", "1", "2")}
    cross = len(outs) == 1 and json.loads(outs.pop())["payload"]["dimension"] == 1
    n = len(CORPUS)
    ok = round_trips == n and stable == n and cross
    assert verdict(9, "determinism and round trip", ok,
                   f"round trip {round_trips}/{n}, repeated certificates {stable}/{n}, "
                   f"cross-process {'identical' if cross else 'differs'}")

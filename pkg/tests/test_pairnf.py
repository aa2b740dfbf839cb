from __future__ import annotations

import random
from pathlib import Path

import pytest

from gen import corpus
from pairdim.errors import UnsupportedFragment
from pairdim.formula import InU, free_vars, mentions_u, parse, parse_term as T
from pairdim.oracle import sample_check
from pairdim.pairnf import (
    TRUE_VS, PairDisjunct, PairNormalForm, SpecialFormula, VerySpecial, normalize, special_and,
    special_or, to_very_special,
)
from pairdim.poly import ONE, ZERO, Polynomial

CORPUS = corpus(Path(__file__).parent / "fixtures" / "corpus.txt")


def _vs(u_vars, eqs, ineq="1"):
    return VerySpecial(tuple(u_vars), tuple(T(e) for e in eqs), T(ineq))


def test_special_and_or_examples():
    a = SpecialFormula(("u",), parse("z = u"))
    b = SpecialFormula(("v",), parse("w = v"))
    both = special_and(a, b)
    assert both.u_vars == ("u", "v")
    assert both.to_formula() == parse("exists u, v in U. z = u & w = v")
    either = special_or(a, b)
    assert either.to_formula() == parse("exists u, v in U. z = u | w = v")
    true = SpecialFormula((), parse("0 = 0"))
    assert special_and(a, true).to_formula() == a.to_formula()


def test_special_renames_clashing_blocks():
    a = SpecialFormula(("u",), parse("z = u"))
    c = special_and(a, a)
    assert len(set(c.u_vars)) == 2


def test_to_very_special_examples():
    s = SpecialFormula(("u",), parse("exists w. w^2 = z - u"))
    assert to_very_special(s) == [TRUE_VS]
    s = SpecialFormula(("u",), parse("z = u & z != 1 & z != 2"))
    assert to_very_special(s) == [_vs(["u1"], ["z - u1"], "z^2 - 3*z + 2")]
    vs = _vs(["u1"], ["z - u1"], "z - 1")
    assert to_very_special(SpecialFormula(vs.u_vars, vs.matrix())) == [vs]


def test_normalize_membership_examples():
    nf = normalize(InU("z"))
    assert nf == PairNormalForm((PairDisjunct(_vs(["u1"], ["z - u1"])),))
    nf = normalize(parse("~U(z)"))
    assert nf == PairNormalForm((PairDisjunct(TRUE_VS, (_vs(["u1"], ["z - u1"]),)),))


def test_normalize_unsupported_reports_subformula():
    with pytest.raises(UnsupportedFragment) as info:
        normalize(parse("exists w. forall u in U. w*u = 0"))
    assert "forall u in U" in info.value.subformula
    with pytest.raises(UnsupportedFragment):
        normalize(parse("exists w. ~U(w) & w^2 = z"))
    with pytest.raises(UnsupportedFragment):
        normalize(parse("exists u in U. forall v in U. u*v = z"))


def test_true_and_false_encodings():
    assert normalize(parse("0 = 0")) == PairNormalForm((PairDisjunct(TRUE_VS),))
    assert normalize(parse("1 = 0")) == PairNormalForm(())
    assert normalize(parse("U(z) & ~U(z)")) == PairNormalForm(())


def test_very_special_invariants_on_corpus():
    for line, trans, f in CORPUS:
        nf = normalize(f)
        for d in nf.disjuncts:
            for vs in (d.positive,) + d.negatives:
                assert len(vs.eqs) >= 1
                assert all(isinstance(p, Polynomial) for p in vs.polys)
                assert not mentions_u(vs.matrix())
                assert vs.variables <= free_vars(f) | set(trans)


def test_normalize_is_a_fixed_point_on_corpus():
    for line, trans, f in CORPUS:
        nf = normalize(f)
        assert normalize(nf.to_formula()) == nf, line


def test_normalize_deterministic():
    for line, trans, f in CORPUS[:10]:
        assert str(normalize(f)) == str(normalize(parse(str(f), trans)))


def test_char_p_normalization():
    nf = normalize(parse("exists u in U. 2*z = u"), char=2)
    assert nf == PairNormalForm((PairDisjunct(_vs(["u1"], ["u1"])),))


def test_normal_form_semantics_sampled():
    rng = random.Random(3)
    values = [0, 1, -2, T("t"), T("t + 1")]
    for line, trans, f in CORPUS[:15]:
        names = sorted(free_vars(f) - set(trans))
        assignments = [{n: rng.choice(values) for n in names} for _ in range(15)]
        assert sample_check(normalize(f).to_formula(), f, assignments, trans=trans).ok, line


def test_vs_requires_equation():
    with pytest.raises(ValueError):
        VerySpecial((), (), ONE)
    assert TRUE_VS.is_true and TRUE_VS.eqs == (ZERO,)

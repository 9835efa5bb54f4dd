import pytest
from hypothesis import given, settings

from cyclectl import formula as fm
from cyclectl.formula import (FormulaCategoryError, FormulaError, FormulaSyntaxError, parse,
                              parse_path, quantified_subformulas, simple_cycle_translate, to_nnf,
                              to_text)
from cyclectl.kripke import build_parity_formula

from .helpers import path_formulas, state_formulas

p, q, r = fm.Atom("p"), fm.Atom("q"), fm.Atom("r")


def test_parse_smallest_cycle_formula():
    assert parse("EC true") == fm.EC(fm.Top)


def test_parse_scheduler_path_formula():
    res1, res2 = fm.Atom("res1"), fm.Atom("res2")
    assert parse("E (G F res1 & G F res2)") == fm.E(fm.And(fm.G(fm.F(res1)), fm.G(fm.F(res2))))


def test_until_is_right_associative():
    assert parse_path("p U q U r") == fm.U(p, fm.U(q, r))


def test_precedence():
    assert parse("E (p & q | r -> p -> q)") == fm.E(
        fm.Implies(fm.Or(fm.And(p, q), r), fm.Implies(p, q)))
    assert parse_path("!p U X q & r") == fm.And(fm.U(fm.Not(p), fm.X(q)), r)
    assert parse("A G p") == fm.A(fm.G(p))
    assert parse("EC X p & q") == fm.And(fm.EC(fm.X(p)), q)


def test_comments_and_lines():
    assert parse("# header\nE X p  # tail\n") == fm.E(fm.X(p))


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("E (p &\n  q ))")
    assert (err.value.line, err.value.column) == (2, 6)


def test_bare_path_formula_is_a_category_error():
    with pytest.raises(FormulaCategoryError):
        parse("X p")
    with pytest.raises(FormulaCategoryError):
        parse("p U q")


def test_unknown_token():
    with pytest.raises(FormulaSyntaxError):
        parse("E X $")


@settings(max_examples=300, deadline=None)
@given(path_formulas())
def test_print_parse_round_trip(f):
    text = to_text(f)
    assert parse_path(text) == f
    assert to_text(parse_path(text)) == text


@settings(max_examples=200, deadline=None)
@given(state_formulas())
def test_state_round_trip(f):
    assert parse(to_text(f)) == f


def test_nnf_examples():
    assert to_nnf(parse("!EC true")) == fm.AC(fm.Bottom)
    assert to_nnf(parse("!(p & q)")) == fm.Or(fm.Not(p), fm.Not(q))
    assert to_nnf(parse("E !X p")) == fm.E(fm.X(fm.Not(p)))
    assert to_nnf(parse("E !(p U q)")) == fm.E(
        fm.Or(fm.U(fm.Not(q), fm.And(fm.Not(p), fm.Not(q))), fm.G(fm.Not(q))))


@settings(max_examples=200, deadline=None)
@given(state_formulas())
def test_nnf_has_negation_on_atoms_only(f):
    if any(g.op == fm.SIMPLE_EXISTS_CYCLE for g in fm.subformulas(f)):
        return
    assert fm.is_nnf(to_nnf(f))


def test_quantified_subformulas_inner_first():
    f = parse("A G(dec -> EC F res1)")
    assert [to_text(g) for g in quantified_subformulas(f)] == ["EC F res1", "A G (dec -> EC F res1)"]
    assert quantified_subformulas(parse("E X p")) == [parse("E X p")]


def test_parity_formula_has_one_quantifier():
    assert len(quantified_subformulas(build_parity_formula(2))) == 1


@settings(max_examples=200, deadline=None)
@given(state_formulas())
def test_quantified_subformulas_respect_nesting(f):
    qs = quantified_subformulas(f)
    assert len(qs) == len(set(qs))
    for i, a in enumerate(qs):
        for b in qs[i + 1:]:
            assert b not in set(fm.subformulas(a))


def test_simple_cycle_translation():
    assert simple_cycle_translate(to_nnf(parse("EC G p"))) == fm.ECs(fm.G(p))
    assert simple_cycle_translate(parse("AC F p")) == fm.AC(fm.F(p))
    assert simple_cycle_translate(to_nnf(parse("EC(p U EC q)"))) == fm.ECs(fm.U(p, fm.ECs(q)))


def test_simple_cycle_translation_rejects_non_nnf():
    with pytest.raises(FormulaError):
        simple_cycle_translate(parse("EC !(p & q)"))


def test_desugar_removes_sugar():
    f = fm.desugar(parse("A (F p -> G q) | false"))
    ops = {g.op for g in fm.subformulas(f)}
    assert not ops & {fm.FINALLY, fm.GLOBALLY, fm.IMPLIES, fm.FALSE}


def test_closure_size_counts_distinct_subformulas():
    # true, p, !p, true U !p, !(true U !p)
    assert fm.closure_size(parse_path("G p")) == 5
    assert fm.closure_size(parse_path("p U p")) == 2

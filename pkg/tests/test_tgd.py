import pytest
from hypothesis import given, strategies as st

from ontofit.errors import ParseError, PreconditionError, UsageError
from ontofit.generators import omega_pair, rho
from ontofit.oracle import brute_satisfies, enumerate_tgds
from ontofit.relational import facts
from ontofit.tgd import (FRONTIER_GUARDED, FRONTIER_ONE, FULL, GUARDED, IND, TGD, Answer, TgdOntology, chase,
                         classify, entails, format_tgd, frontier_one_rewrite, in_class, isomorphic_cq, model_check,
                         parse_tgd, parse_tgds, rename_canonically, tgd_key)

from strategies import BINARY, MIXED, TWO_BINARY, instances

PAIR = facts("R(a,b) R(b,a)")
TRIANGLE = facts("R(a,b) R(b,c) R(c,a)")
SYMMETRY = parse_tgd("R(x,y) -> R(y,x)")

RULES_R = list(enumerate_tgds(BINARY, "TGD", (2, 2, 4)))
RULES_RS = list(enumerate_tgds(TWO_BINARY, "TGD", (2, 1, 4)))
RULES_MIXED = list(enumerate_tgds(MIXED, "TGD", (2, 1, 3)))


# -- classification -----------------------------------------------------------------

def test_classify_examples():
    assert classify(SYMMETRY) == {FULL, GUARDED, FRONTIER_GUARDED, IND}
    tri = parse_tgd("R(x,y), R(y,z), R(z,x) -> R(x,x)")
    assert classify(tri) == {FULL, FRONTIER_ONE, FRONTIER_GUARDED}
    ex = parse_tgd("R(x,y) -> exists z. S(x,z)")
    assert classify(ex) == {GUARDED, FRONTIER_GUARDED, FRONTIER_ONE, IND}


def test_in_class():
    assert in_class(SYMMETRY, "GTGD") and in_class(SYMMETRY, "TGD")
    assert not in_class(SYMMETRY, "F1TGD")
    with pytest.raises(UsageError):
        in_class(SYMMETRY, "XTGD")


def test_tgd_validation():
    with pytest.raises(UsageError):
        TGD([], [("R", ("x",))])
    with pytest.raises(UsageError):
        TGD([("R", ("x", "y"))], [("R", ("x",))])


def test_frontier_and_existentials():
    r = parse_tgd("R(x,y), S(y,w) -> exists z. T(x,z)")
    assert r.frontier == ("x",) and r.existentials == ("z",)


# -- text format --------------------------------------------------------------------

def test_format_examples():
    assert format_tgd(SYMMETRY) == "R(x,y) -> R(y,x)"
    r = parse_tgd("R(x,y), S(y,z) -> exists w. T(x,w)")
    assert format_tgd(r) == "R(x,y), S(y,z) -> exists w. T(x,w)"


def test_parse_errors():
    for bad in ["R(x,y)", "R(x,y) -> ", "-> R(x)", "R(x,,y) -> R(x)", "R(x,y) -> exists . R(x,y)"]:
        with pytest.raises(ParseError):
            parse_tgd(bad)


def test_parse_tgds_reports_line():
    with pytest.raises(ParseError) as exc:
        parse_tgds("# comment\nR(x,y) -> R(y,x)\nR(x) -> S(x\n")
    assert exc.value.line == 3


@given(st.sampled_from(RULES_RS))
def test_text_round_trip(rule):
    assert parse_tgd(format_tgd(rule)) == rule


def test_canonical_renaming():
    a = parse_tgd("R(u,v) -> exists w. R(v,w)")
    b = parse_tgd("R(x,y) -> exists z. R(y,z)")
    assert tgd_key(a) == tgd_key(b)
    assert tgd_key(a) != tgd_key(SYMMETRY)
    assert rename_canonically(a) == rename_canonically(b)
    assert isomorphic_cq(a.body_query(), b.body_query())


# -- model checking -------------------------------------------------------------------

def test_model_check_examples():
    assert model_check(PAIR, SYMMETRY)
    assert not model_check(TRIANGLE, SYMMETRY)
    assert model_check(PAIR, rho(3)) and model_check(PAIR, rho(5))
    assert not model_check(PAIR, rho(2))
    # body never matches
    assert model_check(PAIR, parse_tgd("S(x,y) -> T(x)"))


@given(instances(BINARY, 4), st.sampled_from(RULES_R))
def test_model_check_matches_exhaustive(inst, rule):
    assert model_check(inst, rule) == brute_satisfies(inst, rule)


@given(instances(MIXED, 5), st.sampled_from(RULES_MIXED))
def test_model_check_matches_exhaustive_mixed(inst, rule):
    assert model_check(inst, rule) == brute_satisfies(inst, rule)


# -- chase ------------------------------------------------------------------------------

def test_chase_full_rule():
    res = chase(facts("A(a)"), [parse_tgd("A(x) -> B(x)")])
    assert res.saturated and res.instance.fact_set() == facts("A(a) B(a)").fact_set()


def test_chase_infinite_rule():
    rule = parse_tgd("R(x,y) -> exists z. R(y,z)")
    sizes = []
    for k in (1, 2, 3, 4):
        res = chase(facts("R(a,b)"), [rule], max_rounds=k)
        assert not res.saturated
        sizes.append(len(res.instance))
    assert sizes == sorted(sizes) and sizes[0] < sizes[-1]
    assert chase(facts("R(a,b)"), [rule], max_rounds=2).nulls == 2


def test_chase_null_names():
    res = chase(facts("A(a)"), [parse_tgd("A(x) -> exists z. R(x,z)")])
    assert ("R", ("a", "_n1")) in res.instance


def test_chase_fact_limit():
    res = chase(facts("R(a,b)"), [parse_tgd("R(x,y) -> exists z. R(y,z)")], max_rounds=100, max_facts=10)
    assert not res.saturated and len(res.instance) > 10


def test_chase_omega_on_triangle():
    res = chase(TRIANGLE, omega_pair())
    assert res.saturated and ("R", ("a", "a")) in res.instance


@given(instances(TWO_BINARY, 3), st.lists(st.sampled_from(RULES_RS), min_size=1, max_size=3))
def test_chase_monotone_and_models(inst, rules):
    res = chase(inst, rules, max_rounds=4, max_facts=2000)
    assert inst.fact_set() <= res.instance.fact_set()
    if res.saturated:
        assert all(model_check(res.instance, r) for r in rules)


# -- entailment --------------------------------------------------------------------------

def test_entails_examples():
    omega = omega_pair()
    for rule in omega:
        assert entails(omega, rule) is Answer.YES
    assert entails(omega, rho(3)) is Answer.YES
    assert entails([parse_tgd("A(x) -> B(x)")], parse_tgd("A(x) -> C(x)")) is Answer.NO
    assert entails([parse_tgd("R(x,y) -> exists z. R(y,z)")], parse_tgd("R(x,y) -> R(y,x)")) is Answer.UNKNOWN


@given(st.lists(st.sampled_from(RULES_R), min_size=1, max_size=3), st.sampled_from(RULES_R),
       st.lists(instances(BINARY, 3), min_size=1, max_size=4))
def test_entailment_yes_is_sound(onto, rule, seeds):
    if entails(onto, rule, max_rounds=4, max_facts=500) is not Answer.YES:
        return
    for seed in seeds:
        model = chase(seed, onto, max_rounds=6, max_facts=500)
        if model.saturated:
            assert model_check(model.instance, rule)


# -- frontier-one rewriting ---------------------------------------------------------------

def test_rewrite_examples():
    r = frontier_one_rewrite(parse_tgd("A(x) -> exists z. B(z)"))
    assert r == parse_tgd("A(x) -> exists z. B(z), A(x)")
    r = frontier_one_rewrite(parse_tgd("R(x,y) -> exists z. S(z)"))
    assert r.frontier == ("x",) and len(r.head) == 2
    assert ("R", ("x", "v1")) in r.head
    with pytest.raises(PreconditionError):
        frontier_one_rewrite(SYMMETRY)


EMPTY_FRONTIER = [r for r in enumerate_tgds(MIXED, "TGD", (2, 1, 3)) if not r.frontier]


@given(st.sampled_from(EMPTY_FRONTIER), instances(MIXED, 4))
def test_rewrite_is_equivalent(rule, inst):
    rewritten = frontier_one_rewrite(rule)
    assert in_class(rewritten, "F1TGD") and len(rewritten.frontier) == 1
    assert model_check(inst, rule) == model_check(inst, rewritten)


def test_ontology_class_check():
    onto = TgdOntology((SYMMETRY, rho(3)))
    assert onto.in_class("FULL") and not onto.in_class("GTGD")
    assert len(TgdOntology((SYMMETRY, SYMMETRY))) == 1

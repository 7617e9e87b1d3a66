import itertools

import pytest
from hypothesis import given, strategies as st

from ontofit.errors import ParseError, PreconditionError, UsageError
from ontofit.homomorphism import evaluate_cq, find_homomorphism, is_homomorphism
from ontofit.oracle import brute_homomorphism, cq_answers
from ontofit.relational import (Clone, ConjunctiveQuery, Instance, PointedInstance, Schema, Tagged, canonical_cq,
                                canonical_instance, direct_product, disjoint_union, diversify, facts,
                                format_facts, is_total_tuple, maximally_guarded_sets, missing_fact, parse_facts,
                                pointed, restrict)
from ontofit.tgd import isomorphic_cq

from strategies import BINARY, MIXED, TWO_BINARY, instances

CYCLE = facts("R(a,b) R(b,c) R(c,a)")
PAIR = facts("R(a,b) R(b,a)")


# -- disjoint union -----------------------------------------------------------

def test_union_single_is_renamed_copy():
    u = disjoint_union([facts("A(a)")])
    assert u.facts == (("A", (Tagged("a", 0),)),)


def test_union_keeps_copies_apart():
    u = disjoint_union([facts("A(a)"), facts("A(a)")])
    assert len(u.adom) == 2 and len(u) == 2


def test_union_counts():
    u = disjoint_union([facts("R(a,b)"), facts("R(b,c)")])
    assert (len(u), len(u.adom)) == (2, 4)


def test_union_empty_list():
    with pytest.raises(UsageError):
        disjoint_union([])


# -- direct product -----------------------------------------------------------

def test_unary_product_is_copy():
    p = direct_product([pointed(CYCLE, "a")])
    assert len(p.instance) == 3 and p.point == (("a",),)
    assert ("R", (("a",), ("b",))) in p.instance


def test_cycle_square():
    p = direct_product([PointedInstance(CYCLE), PointedInstance(CYCLE)])
    assert len(p.instance.adom) == 9 and len(p.instance) == 9
    # three disjoint directed 3-cycles: every value has in- and out-degree one
    outdeg = {v: 0 for v in p.instance.adom}
    for _, (x, _) in p.instance.facts:
        outdeg[x] += 1
    assert set(outdeg.values()) == {1}


def test_product_of_edge_and_loop():
    p = direct_product([PointedInstance(facts("R(a,b)")), PointedInstance(facts("R(c,c)"))])
    assert p.instance.facts == (("R", (("a", "c"), ("b", "c"))),)


def test_product_point_arity_mismatch():
    with pytest.raises(UsageError):
        direct_product([pointed(CYCLE, "a"), pointed(CYCLE, "a", "b")])


@given(st.lists(instances(BINARY, 3), min_size=1, max_size=3), st.data())
def test_product_projections_are_homomorphisms(ops, data):
    prod = direct_product([PointedInstance(i) for i in ops]).instance
    for i, op in enumerate(ops):
        proj = {v: v[i] for v in prod.adom}
        assert all((rel, tuple(proj[v] for v in args)) in op for rel, args in prod.facts)


@given(st.lists(instances(TWO_BINARY, 3), min_size=1, max_size=3), st.data())
def test_product_answers_cq(ops, data):
    # the product point answers q iff every operand point does
    points = [data.draw(st.sampled_from(op.adom)) for op in ops]
    pool = [(r, args) for r in ("R", "S") for args in itertools.product(("x", "y", "z"), repeat=2)]
    atoms = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=4, unique=True))
    if "x" not in {v for _, a in atoms for v in a}:
        atoms.append(("R", ("x", "y")))
    prod = direct_product([pointed(op, p) for op, p in zip(ops, points)])
    each = all((p,) in cq_answers(atoms, ("x",), op) for op, p in zip(ops, points))
    assert (prod.point in cq_answers(atoms, ("x",), prod.instance)) == each


# -- diversification ----------------------------------------------------------

def test_diversify_loop():
    d = diversify(pointed(facts("R(a,a)"), "a"))
    star = Clone("a", 0)
    assert d.point == (star,)
    assert set(d.instance.facts) == {("R", ("a", "a")), ("R", ("a", star)), ("R", (star, "a")), ("R", (star, star))}


def test_diversify_empty_point():
    p = PointedInstance(CYCLE)
    assert diversify(p) is p


def test_diversify_edge():
    d = diversify(pointed(facts("R(a,b)"), "a", "b"))
    assert len(d.instance) == 4 and len(d.instance.adom) == 4
    assert len(set(d.point)) == 2


def test_diversify_needs_point_in_domain():
    with pytest.raises(PreconditionError):
        diversify(pointed(CYCLE, "z"))


@given(instances(BINARY, 3), st.data())
def test_diversify_maps_back(inst, data):
    pt = data.draw(st.lists(st.sampled_from(inst.adom), min_size=1, max_size=3))
    d = diversify(PointedInstance(inst, pt))
    assert len(set(d.point)) == len(d.point)
    back = {v: (v.original if isinstance(v, Clone) else v) for v in d.instance.adom}
    assert is_homomorphism(back, PointedInstance(d.instance, d.point), PointedInstance(inst, pt))


# -- restriction, guardedness, totality ---------------------------------------

def test_restrict():
    assert restrict(CYCLE, {"a", "b"}).facts == (("R", ("a", "b")),)
    assert restrict(CYCLE, CYCLE.adom) == CYCLE
    assert len(restrict(CYCLE, set())) == 0


def test_maximally_guarded_sets():
    assert maximally_guarded_sets(CYCLE) == [frozenset("ab"), frozenset("bc"), frozenset("ca")]
    assert maximally_guarded_sets(facts("R(a,a)")) == [frozenset("a")]
    assert maximally_guarded_sets(facts("R(a,b) S(a,b,c)")) == [frozenset("abc")]


@given(instances(TWO_BINARY, 4))
def test_maximally_guarded_count(inst):
    assert len(maximally_guarded_sets(inst)) <= len(inst)


def test_totality():
    assert is_total_tuple(facts("R(a,a)"), ("a",))
    assert not is_total_tuple(CYCLE, ("a",))
    assert not is_total_tuple(CYCLE, ("a", "b"))
    assert missing_fact(CYCLE, ("a", "b")) == ("R", ("a", "a"))


# -- homomorphisms and queries ------------------------------------------------

def test_identity_homomorphism():
    p = pointed(CYCLE, "a", "b")
    h = find_homomorphism(p, p)
    assert h is not None and is_homomorphism(h, p, p)


def test_pair_to_cycle():
    assert find_homomorphism(PointedInstance(PAIR), PointedInstance(CYCLE)) is None


def test_head_check_on_positive():
    body = pointed(facts("R(x,y)"), "x", "y")
    assert find_homomorphism(body, pointed(PAIR, "b", "a")) == {"x": "b", "y": "a"}


@given(instances(TWO_BINARY, 5, prefix="s"), instances(TWO_BINARY, 5, prefix="d"), st.data())
def test_homomorphism_matches_exhaustive(src, dst, data):
    a = data.draw(st.sampled_from(src.adom))
    b = data.draw(st.sampled_from(dst.adom))
    found = find_homomorphism(pointed(src, a), pointed(dst, b))
    expected = brute_homomorphism(src, dst, {a: b})
    assert (found is None) == (expected is None)
    if found is not None:
        assert is_homomorphism(found, pointed(src, a), pointed(dst, b))


def test_evaluate_cq_examples():
    q = ConjunctiveQuery(("x",), [("R", ("x", "y"))])
    assert evaluate_cq(q, facts("R(a,a)")) == {("a",)}
    assert evaluate_cq(q, CYCLE) == {("a",), ("b",), ("c",)}
    assert evaluate_cq(ConjunctiveQuery((), [("R", ("x", "x"))]), CYCLE) == set()


@given(instances(TWO_BINARY, 4), st.data())
def test_evaluate_cq_matches_exhaustive(inst, data):
    pool = [(r, args) for r in ("R", "S") for args in itertools.product(("x", "y", "z"), repeat=2)]
    atoms = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=3, unique=True))
    used = list(dict.fromkeys(v for _, a in atoms for v in a))
    answer = tuple(data.draw(st.lists(st.sampled_from(used), max_size=2, unique=True)))
    assert evaluate_cq(ConjunctiveQuery(answer, atoms), inst) == set(cq_answers(atoms, answer, inst))


# -- canonical queries ----------------------------------------------------------

def test_canonical_cq_examples():
    q = canonical_cq(pointed(facts("R(a,b)"), "a"))
    assert q.answer_vars == ("x1",) and q.atoms == (("R", ("x1", "z1")),)
    assert canonical_cq(pointed(facts("A(a)"), "a")).atoms == (("A", ("x1",)),)
    head = canonical_cq(diversify(pointed(facts("R(a,a)"), "a")))
    assert len(head.atoms) == 4


def test_canonical_cq_preconditions():
    with pytest.raises(PreconditionError):
        canonical_cq(pointed(CYCLE, "a", "a"))
    with pytest.raises(PreconditionError):
        canonical_cq(pointed(CYCLE, "z"))
    with pytest.raises(PreconditionError):
        canonical_cq(PointedInstance(Instance([])))


def test_canonical_instance():
    q = ConjunctiveQuery(("x",), [("R", ("x", "y"))])
    p = canonical_instance(q)
    assert p.point == ("x",) and p.instance.facts == (("R", ("x", "y")),)
    assert canonical_instance(ConjunctiveQuery((), [("R", ("x", "y"))])).point == ()


def test_unsafe_query_rejected():
    with pytest.raises(PreconditionError):
        ConjunctiveQuery(("w",), [("R", ("x", "y"))])


@given(instances(TWO_BINARY, 3), st.data())
def test_canonical_round_trip(inst, data):
    pt = data.draw(st.lists(st.sampled_from(inst.adom), max_size=2, unique=True))
    q = canonical_cq(PointedInstance(inst, pt))
    assert isomorphic_cq(canonical_cq(canonical_instance(q)), q)


# -- text format ----------------------------------------------------------------

def test_parse_facts_with_point_and_comments():
    p = parse_facts("# comment\n@point a, b\nR(a,b).\nA(a)\n")
    assert p.point == ("a", "b")
    assert p.instance.schema == Schema([("R", 2), ("A", 1)])


def test_parse_arity_conflict():
    with pytest.raises(ParseError) as exc:
        parse_facts("R(a,b).\nR(a).\n")
    assert exc.value.line == 2


def test_parse_garbage():
    with pytest.raises(ParseError):
        parse_facts("R(a,,b)\n")


@given(instances(MIXED, 3))
def test_format_round_trip(inst):
    assert parse_facts(format_facts(PointedInstance(inst))).instance.fact_set() == inst.fact_set()

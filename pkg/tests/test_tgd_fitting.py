import pytest
from hypothesis import given, settings, strategies as st

from ontofit.errors import UsageError
from ontofit.generators import gen_named, rho
from ontofit.oracle import brute_force_fit, search_fit
from ontofit.relational import disjoint_union, facts
from ontofit.tgd import TgdOntology, in_class, parse_tgd
from ontofit.tgd_fitting import check_fit, fit_ind, fit_ontology, fit_tgd

from strategies import BINARY, TWO_BINARY, fitting_instances, instances

PAIR = facts("R(a,b) R(b,a)")
TRIANGLE = facts("R(a,b) R(b,c) R(c,a)")
CLIQUE = facts("R(a,b) R(b,c) R(c,a) R(b,a) R(c,b) R(a,c)")
SYMMETRY = parse_tgd("R(x,y) -> R(y,x)")


def assert_fits(v, P, N, cls):
    assert v.exists and v.status == "EXISTS"
    rules = [v.witness] if not isinstance(v.witness, TgdOntology) else list(v.witness)
    assert all(in_class(r, cls) for r in rules)
    assert check_fit(v.witness, P, N)


# -- the running examples -----------------------------------------------------------

def test_pair_against_triangle():
    v = fit_tgd([PAIR], [TRIANGLE], "GTGD")
    assert_fits(v, [PAIR], [TRIANGLE], "GTGD")
    assert check_fit(SYMMETRY, [PAIR], [TRIANGLE])


def test_pair_against_clique():
    assert not fit_tgd([PAIR], [CLIQUE], "GTGD").exists
    v = fit_tgd([PAIR], [CLIQUE], "F1TGD")
    assert_fits(v, [PAIR], [CLIQUE], "F1TGD")
    assert check_fit(rho(3), [PAIR], [CLIQUE])
    # the triangle rule is also frontier-guarded
    assert_fits(fit_tgd([PAIR], [CLIQUE], "FGTGD"), [PAIR], [CLIQUE], "FGTGD")


def test_full_head_example():
    P, N = gen_named("fullhead-example")
    v = fit_tgd(P, N, "FULL")
    assert_fits(v, P, N, "FULL")
    assert len(v.witness.head) == 2
    onto = fit_ontology(P, N, "FullTGD")
    assert_fits(onto, P, N, "FULL")
    assert len(onto.witness) <= 2 and all(len(r.head) == 1 for r in onto.witness)


def test_full_head_example_single_rules():
    P, N = gen_named("fullhead-example")
    for text in ("A(x) -> B1(x)", "A(x) -> B2(x)"):
        assert not check_fit(parse_tgd(text), P, N)
    assert check_fit(TgdOntology((parse_tgd("A(x) -> B1(x)"), parse_tgd("A(x) -> B2(x)"))), P, N)


def test_check_fit_examples():
    assert not check_fit(parse_tgd("R(x,y) -> R(x,y)"), [PAIR], [TRIANGLE])
    assert check_fit(rho(3), [PAIR], [CLIQUE])


def test_class_names():
    with pytest.raises(UsageError):
        fit_tgd([PAIR], [TRIANGLE], "XTGD")
    assert fit_tgd([PAIR], [TRIANGLE], "FullTGD").exists
    # description logic dialects are routed to the concept fitter
    assert not fit_tgd([PAIR], [TRIANGLE], "ELI").exists


def test_empty_negative():
    v = fit_tgd([PAIR], [facts("")], "TGD")
    assert not v.exists and v.note


def test_no_fit_certificate():
    v = fit_tgd([PAIR], [CLIQUE], "GTGD")
    assert v.certificate and all("frontier" in c for c in v.certificate)


def test_empty_match_head():
    # no positive matches the body at all: the head lists missing facts
    P, N = [facts("S(a,b)")], [facts("R(a,b)")]
    v = fit_tgd(P, N, "GTGD")
    assert_fits(v, P, N, "GTGD")
    assert v.certificate[0]["condition"] == 1


def test_subset_cap():
    big = facts(" ".join(f"R(v{i},v{i + 1})" for i in range(20)))
    v = fit_tgd([PAIR], [big], "TGD", max_subset_values=8)
    assert v.resource_limited and v.status == "RESOURCE-LIMIT"


# -- inclusion dependencies -----------------------------------------------------------

def test_ind_examples():
    P, N = [facts("R(a,b) S(b)")], [facts("R(a,b)")]
    v = fit_ind(P, N)
    assert_fits(v, P, N, "IND")
    assert check_fit(parse_tgd("R(x,y) -> S(y)"), P, N)
    assert not fit_ind([facts("R(a,b)")], [facts("R(a,a)")]).exists
    assert not fit_ind([PAIR], [PAIR]).exists


# -- ontologies -----------------------------------------------------------------------

def test_ontology_examples():
    v = fit_ontology([PAIR], [TRIANGLE], "GTGD")
    assert_fits(v, [PAIR], [TRIANGLE], "GTGD")
    assert not fit_ontology([PAIR, TRIANGLE], [TRIANGLE], "TGD").exists


@settings(max_examples=40)
@given(fitting_instances(TWO_BINARY, 3), st.sampled_from(["GTGD", "F1TGD", "FULL", "FGTGD"]))
def test_ontology_is_per_negative(PN, cls):
    P, N = PN
    v = fit_ontology(P, N, cls)
    each = all(fit_tgd(P, [n], cls).exists for n in N)
    assert v.exists == each
    if v.exists:
        assert len(v.witness) <= len(N)
        assert_fits(v, P, N, cls)


# -- properties -------------------------------------------------------------------------

CLASSES = ["GTGD", "FGTGD", "F1TGD", "TGD", "FULL", "IND"]


@settings(max_examples=80)
@given(fitting_instances(TWO_BINARY, 3), st.sampled_from(CLASSES))
def test_witnesses_fit(PN, cls):
    P, N = PN
    v = fit_tgd(P, N, cls)
    if v.exists:
        assert_fits(v, P, N, cls)


@settings(max_examples=40)
@given(fitting_instances(BINARY, 3), st.sampled_from(["GTGD", "F1TGD", "FULL"]))
def test_agrees_with_search_oracle(PN, cls):
    P, N = PN
    v = fit_tgd(P, N, cls)
    found = search_fit(P, N, cls, (3, 3, 6))
    assert v.exists == (found is not None)


@settings(max_examples=40)
@given(fitting_instances(TWO_BINARY, 3))
def test_ind_agrees_with_brute_force(PN):
    P, N = PN
    assert fit_ind(P, N).exists == (brute_force_fit(P, N, "IND", (1, 1, 4)) is not None)


@settings(max_examples=40)
@given(fitting_instances(TWO_BINARY, 3), instances(TWO_BINARY, 3, prefix="w"), st.booleans(),
       st.sampled_from(["GTGD", "F1TGD", "FULL", "IND"]))
def test_monotone_in_examples(PN, extra, as_positive, cls):
    P, N = PN
    before = fit_tgd(P, N, cls).exists
    after = fit_tgd(P + [extra], N, cls).exists if as_positive else fit_tgd(P, N + [extra], cls).exists
    assert before or not after


@settings(max_examples=60)
@given(fitting_instances(TWO_BINARY, 3))
def test_class_subsumption(PN):
    P, N = PN
    g = fit_tgd(P, N, "GTGD").exists
    if g:
        assert fit_tgd(P, N, "FGTGD").exists and fit_tgd(P, N, "TGD").exists
    if fit_ind(P, N).exists:
        assert g


@settings(max_examples=60)
@given(fitting_instances(TWO_BINARY, 3), st.sampled_from(["GTGD", "FGTGD", "F1TGD", "TGD"]))
def test_head_size_ceiling(PN, cls):
    # the head is a diversified product of matches in the positives: at most
    # (|positive facts| ** matches) facts plus the clones' copies
    P, N = PN
    v = fit_tgd(P, N, cls, reduce=False)
    if not v.exists:
        return
    entry = v.certificate[0]
    k = max(1, entry["matches"])
    pos_facts = len(disjoint_union(P))
    n_frontier = len(entry["frontier"])
    bound = max(len(N), pos_facts ** k * 2 ** (2 * n_frontier))
    assert len(v.witness.head) <= bound


@settings(max_examples=40)
@given(fitting_instances(TWO_BINARY, 3), st.sampled_from(["GTGD", "FGTGD", "F1TGD"]))
def test_reduce_does_not_change_verdict(PN, cls):
    P, N = PN
    assert fit_tgd(P, N, cls).exists == fit_tgd(P, N, cls, reduce=False).exists

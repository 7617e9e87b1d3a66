"""Fitting single TGDs and TGD ontologies to positive and negative examples.

A candidate frontier is a set M of values of the product of the negatives.
M yields a fit when either no positive admits a match of the candidate body
at M (the head then only has to be false in each negative), or the
diversified product of all such matches maps into no negative at M.
"""
from __future__ import annotations

import itertools

from .dl_fitting import ConceptInclusion, DlOntology, el_fit_ontology, el_fit_tgd, satisfies_ci, satisfies_ontology
from .concepts import DIALECTS
from .errors import InvariantViolation, ResourceLimit, UsageError
from .homomorphism import find_homomorphism, project_homomorphisms
from .relational import (Clone, Instance, PointedInstance, canonical_cq, direct_product, diversify, is_total_tuple,
                         joint_schema, maximally_guarded_sets, missing_fact, ordered, restrict)
from .tgd import TGD, TgdOntology, model_check
from .tgd_basis import enumerate_inds, minimal_pointed
from .verdict import FitVerdict

TGD_CLASSES = ("GTGD", "FGTGD", "F1TGD", "TGD", "FULL", "IND")
MAX_SUBSET_VALUES = 16


def normalize_class(cls: str) -> str:
    if cls == "FullTGD":
        return "FULL"
    if cls not in TGD_CLASSES:
        raise UsageError(f"unknown TGD class {cls!r}")
    return cls


def _prepare(P, N):
    P, N = list(P), list(N)
    if not P or not N:
        raise UsageError("fitting needs at least one positive and one negative example")
    schema = joint_schema(P + N)
    return [p.with_schema(schema) for p in P], [n.with_schema(schema) for n in N], schema


def check_fit(w, P, N) -> bool:
    """All positives satisfy ``w`` and all negatives violate it."""
    P, N = list(P), list(N)
    if isinstance(w, ConceptInclusion):
        schema = joint_schema(P + N)
        return all(satisfies_ci(p, w, schema) for p in P) and not any(satisfies_ci(n, w, schema) for n in N)
    if isinstance(w, DlOntology):
        schema = joint_schema(P + N)
        return (all(satisfies_ontology(p, w, schema) for p in P)
                and not any(satisfies_ontology(n, w, schema) for n in N))
    rules = [w] if isinstance(w, TGD) else list(w)
    return (all(model_check(p, r) for p in P for r in rules)
            and all(not all(model_check(n, r) for r in rules) for n in N))


def _verified(verdict, P, N):
    if verdict.exists and not check_fit(verdict.witness, P, N):
        raise InvariantViolation(f"constructed witness does not fit: {verdict.witness}")
    return verdict


# -- candidate frontiers ----------------------------------------------------

def _candidates(cls, prod, N, schema, max_subset_values):
    """Yield ``(M tuple, body source instance)`` in a fixed order."""
    dom = prod.adom

    def admissible(Mbar):
        return not any(is_total_tuple(n, [v[i] for v in Mbar], schema) for i, n in enumerate(N))

    if cls in ("GTGD", "FGTGD"):
        for M in maximally_guarded_sets(prod):
            Mbar = ordered(M, prod)
            if admissible(Mbar):
                yield Mbar, (restrict(prod, M) if cls == "GTGD" else prod)
    elif cls == "F1TGD":
        for v in dom:
            if admissible((v,)):
                yield (v,), prod
    else:
        if len(dom) > max_subset_values:
            raise ResourceLimit(f"{len(dom)} product values exceed the subset cap {max_subset_values}")
        for size in range(1, len(dom) + 1):
            for Mbar in itertools.combinations(dom, size):
                if admissible(Mbar):
                    yield Mbar, prod


def _answers(src, Mbar, P):
    S = []
    for inst in P:
        rank = {v: i for i, v in enumerate(inst.adom)}
        for t in sorted(project_homomorphisms(src, Mbar, inst), key=lambda t: [rank[v] for v in t]):
            S.append(PointedInstance(inst, t))
    return S


def fit_tgd(P, N, cls: str = "GTGD", reduce: bool = True, max_subset_values: int = MAX_SUBSET_VALUES) -> FitVerdict:
    """Decide whether a single TGD of class ``cls`` fits (P, N).

    Returns a verdict whose witness, when one exists, has been model-checked
    against every example.  ``reduce`` drops matches that another match maps
    into before forming their product, and tries neighbourhoods of the
    frontier in the product before the whole of it.
    """
    if cls in DIALECTS:
        return el_fit_tgd(P, N, cls)
    cls = normalize_class(cls)
    if cls == "IND":
        return fit_ind(P, N)
    P, N, schema = _prepare(P, N)
    if cls == "FULL":
        return _fit_full(P, N, schema)
    verdict = FitVerdict(False, cls)
    if any(not n.facts for n in N):
        verdict.note = "an empty negative example satisfies every TGD"
        return verdict
    try:
        prod = direct_product([PointedInstance(n) for n in N]).instance
        for Mbar, src in _candidates(cls, prod, N, schema, max_subset_values):
            entry = {"frontier": Mbar}
            verdict.certificate.append(entry)
            S = _answers(src, Mbar, P)
            entry["matches"] = len(S)
            if not S:
                entry["condition"] = 1
                rule = _empty_head_rule(src, Mbar, N, schema)
            else:
                if reduce:
                    S = minimal_pointed(S)
                K = direct_product(S)
                full = K if cls == "F1TGD" else _diversify_inside(K)
                for target in (_neighbourhoods(full) if reduce else [full]):
                    hit = next((i for i, n in enumerate(N) if find_homomorphism(
                        target, PointedInstance(n, [v[i] for v in Mbar])) is not None), None)
                    if hit is None:
                        break
                if hit is not None:
                    entry["into"] = hit
                    continue
                entry["condition"] = 2
                names = _frontier_names(Mbar)
                body = canonical_cq(PointedInstance(src, Mbar), names, prefix="y")
                head = _head_cq(target, names)
                rule = TGD(body.atoms, head.atoms)
            verdict.exists = True
            verdict.witness = rule
            verdict.certificate = [entry]
            return _verified(verdict, P, N)
    except ResourceLimit as exc:
        verdict.resource_limited = True
        verdict.note = str(exc)
    return verdict


def _diversify_inside(K):
    """Diversify at the point positions inside the active domain; a position
    whose value occurs in no fact gets a fresh isolated value instead."""
    dom = set(K.instance.adom)
    inside = [v for v in K.point if v in dom]
    D = diversify(PointedInstance(K.instance, inside))
    clones = iter(D.point)
    return PointedInstance(D.instance, [next(clones) if v in dom else Clone(v, i) for i, v in enumerate(K.point)])


def _neighbourhoods(target):
    """Sub-instances of ``target`` within growing distance of its point, then
    ``target`` itself.  Each still maps into every match by projection, so the
    first one that maps into no negative is an equally valid, smaller head."""
    inst = target.instance
    adjacent = {}
    for _, args in inst.facts:
        for v in args:
            adjacent.setdefault(v, set()).update(args)
    dist = {v: 0 for v in target.point if v in adjacent}
    frontier = list(dist)
    layers = [set(dist)]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adjacent[v]:
                if u not in dist:
                    dist[u] = len(layers)
                    nxt.append(u)
        frontier = nxt
        if nxt:
            layers.append(layers[-1] | set(nxt))
    size = -1
    for values in layers:
        sub = restrict(inst, values)
        if size < len(sub) < len(inst):
            size = len(sub)
            yield PointedInstance(sub, target.point)
    yield target


def _head_cq(target, names):
    """Canonical CQ of the target; frontier names of isolated positions are dropped."""
    dom = set(target.instance.adom)
    keep = [i for i, v in enumerate(target.point) if v in dom]
    sub = PointedInstance(target.instance, [target.point[i] for i in keep])
    return canonical_cq(sub, [names[i] for i in keep], prefix="z")


def _frontier_names(Mbar):
    return [f"x{i + 1}" for i in range(len(Mbar))]


def _empty_head_rule(src, Mbar, N, schema):
    """Body at M, head one missing fact per negative over its component of M."""
    names = _frontier_names(Mbar)
    body = canonical_cq(PointedInstance(src, Mbar), names, prefix="y")
    head = []
    for i, n in enumerate(N):
        comp = [v[i] for v in Mbar]
        rel, args = missing_fact(n, comp, schema)
        head.append((rel, tuple(names[comp.index(a)] for a in args)))
    return TGD(body.atoms, head)


# -- full TGDs --------------------------------------------------------------

def _fit_full(P, N, schema) -> FitVerdict:
    """A full TGD fits iff every negative i has an atom R(a) over the product
    with R(a[i]) missing in N_i such that R(h(a)) holds in each positive for
    every homomorphism h from the product."""
    verdict = FitVerdict(False, "FULL")
    if any(not n.facts for n in N):
        verdict.note = "an empty negative example satisfies every TGD"
        return verdict
    try:
        prod = direct_product([PointedInstance(n) for n in N]).instance
    except ResourceLimit as exc:
        verdict.resource_limited = True
        verdict.note = str(exc)
        return verdict
    dom = prod.adom
    images = {}

    def good(rel, args):
        key = tuple(dict.fromkeys(args))
        if key not in images:
            images[key] = [(p, project_homomorphisms(prod, key, p)) for p in P]
        for p, imgs in images[key]:
            for img in imgs:
                m = dict(zip(key, img))
                if (rel, tuple(m[v] for v in args)) not in p:
                    return False
        return True

    chosen = []
    for i, n in enumerate(N):
        pick = None
        tried = 0
        for rel, k in schema.items():
            for args in itertools.product(dom, repeat=k):
                if (rel, tuple(v[i] for v in args)) in n:
                    continue
                tried += 1
                if good(rel, args):
                    pick = (rel, args)
                    break
            if pick:
                break
        verdict.certificate.append({"negative": i, "candidates": tried, "atom": pick})
        if pick is None:
            return verdict
        chosen.append(pick)
    frontier = ordered({v for _, args in chosen for v in args}, prod)
    names = _frontier_names(frontier)
    body = canonical_cq(PointedInstance(prod, frontier), names, prefix="y")
    rename = dict(zip(frontier, names))
    head = [(rel, tuple(rename[v] for v in args)) for rel, args in chosen]
    verdict.exists = True
    verdict.witness = TGD(body.atoms, head)
    return _verified(verdict, P, N)


# -- inclusion dependencies -------------------------------------------------

def fit_ind(P, N, max_arity: int = 8) -> FitVerdict:
    P, N, schema = _prepare(P, N)
    verdict = FitVerdict(False, "IND")
    try:
        for rule in enumerate_inds(schema, max_arity):
            if check_fit(rule, P, N):
                verdict.exists = True
                verdict.witness = rule
                return verdict
    except ResourceLimit as exc:
        verdict.resource_limited = True
        verdict.note = str(exc)
    return verdict


# -- ontologies -------------------------------------------------------------

def fit_ontology(P, N, cls: str = "GTGD", route: str = "negatives") -> FitVerdict:
    """One fitting TGD per negative; the set of them fits as an ontology."""
    if cls in DIALECTS:
        return el_fit_ontology(P, N, cls, route)
    cls = normalize_class(cls)
    P, N, _ = _prepare(P, N)
    verdict = FitVerdict(False, cls, "ontology")
    found = []
    for j, n in enumerate(N):
        v = fit_tgd(P, [n], cls)
        verdict.certificate.append({"negative": j, "status": v.status})
        if v.resource_limited:
            verdict.resource_limited = True
            verdict.note = v.note
            return verdict
        if not v.exists:
            return verdict
        if v.witness not in found:
            found.append(v.witness)
    verdict.exists = True
    verdict.witness = TgdOntology(tuple(found))
    return _verified(verdict, P, N)

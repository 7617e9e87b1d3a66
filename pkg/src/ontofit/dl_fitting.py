"""Concept inclusions, finite EL/ELI bases and fitting by simulation products."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .concepts import (BOTTOM, TOP, TOP_VALUE, UNDEFINABLE, Concept, Dialect, Interpretation, characteristic_concept,
                       conj, dag_size, definable_concept, dialect, exists, extension, is_l_total,
                       max_simulation, minimal_factors, name, parse_concept, pointed_product, to_text,
                       universal_instance)
from .errors import DialectError, InvariantViolation, ParseError, ResourceLimit, UsageError
from .relational import Instance, PointedInstance, Schema, direct_product, disjoint_union, joint_schema
from .verdict import FitVerdict


@dataclass(frozen=True)
class ConceptInclusion:
    lhs: Concept
    rhs: Concept

    def __str__(self):
        return f"{to_text(self.lhs)} SUBCLASSOF {to_text(self.rhs)}"

    def sort_key(self):
        return (self.lhs.sort_key(), self.rhs.sort_key())


@dataclass(frozen=True)
class DlOntology:
    inclusions: tuple
    dialect: Dialect

    def __post_init__(self):
        unique = dict.fromkeys(self.inclusions)
        object.__setattr__(self, "inclusions", tuple(sorted(unique, key=ConceptInclusion.sort_key)))

    def __len__(self):
        return len(self.inclusions)

    def __iter__(self):
        return iter(self.inclusions)

    def __str__(self):
        return "\n".join(str(ci) for ci in self.inclusions)


def parse_inclusion(text: str) -> ConceptInclusion:
    parts = text.split("SUBCLASSOF")
    if len(parts) != 2:
        raise ParseError(f"expected 'C SUBCLASSOF D', got {text.strip()!r}")
    return ConceptInclusion(parse_concept(parts[0]), parse_concept(parts[1]))


def parse_ontology(text: str, dl="ELIbot") -> DlOntology:
    cis = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            cis.append(parse_inclusion(line))
        except ParseError as exc:
            raise ParseError(str(exc), lineno) from None
    return DlOntology(tuple(cis), dialect(dl))


def _interp(inst, schema=None):
    return inst if isinstance(inst, Interpretation) else Interpretation(inst, schema)


def satisfies_ci(inst, ci: ConceptInclusion, schema=None, cache=None) -> bool:
    interp = _interp(inst, schema)
    cache = {} if cache is None else cache
    return extension(ci.lhs, interp, cache) <= extension(ci.rhs, interp, cache)


def satisfies_ontology(inst, onto, schema=None) -> bool:
    interp = _interp(inst, schema)
    cache = {}
    return all(satisfies_ci(interp, ci, cache=cache) for ci in onto)


def violated(inst, onto, schema=None):
    """First inclusion of ``onto`` that fails in ``inst``, or None."""
    interp = _interp(inst, schema)
    cache = {}
    for ci in onto:
        if not satisfies_ci(interp, ci, cache=cache):
            return ci
    return None


# -- finite bases -----------------------------------------------------------

def _exists_set(interp, role, Y):
    """(∃R.Y)^I for a set Y."""
    back = interp.succ.get((role[0], not role[1]), {})
    return frozenset(d for e in Y for d in back.get(e, ()))


def el_basis(H, dl, schema: Schema | None = None, compact: bool = False, max_values: int = 20) -> DlOntology:
    """Finite basis of the inclusions true in every instance of ``H``.

    ``compact`` keeps, among the conjunction rules, only ``E_X ⊓ E_X' ⊑
    E_{X∩X'}`` and ``E_X ⊑ E_Y`` for ``X ⊆ Y``; the omitted instances follow
    from these two by transitivity.
    """
    dl = dialect(dl)
    H = list(H)
    if not H:
        raise UsageError("basis of an empty instance list")
    schema = joint_schema(H) if schema is None else schema.union(joint_schema(H))
    if schema.max_arity > 2:
        raise DialectError("description logic bases need unary and binary symbols only")
    inst = disjoint_union([h.with_schema(schema) for h in H])
    interp = Interpretation(inst, schema)
    dom = interp.domain
    if len(dom) > max_values:
        raise ResourceLimit(f"basis over {len(dom)} values exceeds the cap of {max_values}")
    rep = {}
    for mask in range(1 << len(dom)):
        X = frozenset(v for i, v in enumerate(dom) if mask >> i & 1)
        c = definable_concept(inst, X, dl, schema)
        if c is not UNDEFINABLE:
            rep[X] = c
    full = frozenset(dom)
    rep[full] = TOP
    if dl.bottom:
        rep[frozenset()] = BOTTOM
    sets = sorted(rep, key=lambda s: (len(s), sorted(dom.index(v) for v in s)))
    names = schema.symbols_of_arity(1)
    roles = dl.roles(schema)
    out = []
    for X in sets:
        for a in names:
            if X <= interp.ext[a]:
                out.append(ConceptInclusion(rep[X], name(a)))
            if interp.ext[a] <= X:
                out.append(ConceptInclusion(name(a), rep[X]))
    for role in roles:
        ex = {Y: _exists_set(interp, role, Y) for Y in sets}
        for X in sets:
            for Y in sets:
                if X <= ex[Y]:
                    out.append(ConceptInclusion(rep[X], exists(role[0], rep[Y], role[1])))
                if ex[X] <= Y:
                    out.append(ConceptInclusion(exists(role[0], rep[X], role[1]), rep[Y]))
    for i, X in enumerate(sets):
        for X2 in sets[i:]:
            meet = X & X2
            if compact:
                if X == X2:
                    targets = [Y for Y in sets if X <= Y]
                else:
                    targets = [meet] if meet in rep else [Y for Y in sets if meet <= Y]
            else:
                targets = [Y for Y in sets if meet <= Y]
            lhs = conj(rep[X], rep[X2])
            for Y in targets:
                out.append(ConceptInclusion(lhs, rep[Y]))
    return DlOntology(tuple(out), dl)


# -- fitting ----------------------------------------------------------------

def _check_arity(schema):
    if schema.max_arity > 2:
        raise DialectError("description logic fitting needs unary and binary symbols only")


def _witness_ok(ci, P, N, schema):
    return (all(satisfies_ci(p, ci, schema) for p in P)
            and all(not satisfies_ci(n, ci, schema) for n in N))


def el_fit_tgd(P, N, dl, depth: str = "tight") -> FitVerdict:
    """Decide whether a single inclusion of the dialect fits (P, N).

    For every tuple of negative values the simulation set S into the
    positives is formed; a fit exists iff some tuple has S empty or the
    product of S simulates into none of its components.  ``depth`` picks the
    role depth of the characteristic concepts in the witness: ``"tight"``
    uses the rounds the relevant simulations need to stabilise, ``"bound"``
    the a-priori bound |domain| * |domain|.
    """
    dl = dialect(dl)
    P, N = list(P), list(N)
    if not P or not N:
        raise UsageError("fitting needs at least one positive and one negative example")
    schema = joint_schema(P + N)
    _check_arity(schema)
    P = [p.with_schema(schema) for p in P]
    N = [n.with_schema(schema) for n in N]
    verdict = FitVerdict(False, dl.name)
    if any(not n.facts for n in N):
        verdict.note = "an empty negative example satisfies every inclusion"
        return verdict
    sim_dl = dl.without_bottom()
    pos = disjoint_union(P)
    pos_dom = pos.adom
    prodN = direct_product([PointedInstance(n) for n in N]).instance
    prod_dom = set(prodN.adom)
    sim_np = max_simulation(prodN, pos, sim_dl, separators=False, schema=schema)
    domains = [n.adom for n in N]
    if dl.bottom:
        allowed = domains
    else:
        allowed = [[d for d in dom if not is_l_total(n, d, dl, schema)] for n, dom in zip(N, domains)]
    n_bound = max(1, len(prodN.adom)) * len(pos_dom)
    witness = None
    for dbar in itertools.product(*allowed):
        if dbar in prod_dom:
            S = [e for e in pos_dom if sim_np.holds(dbar, e)]
        else:
            # no facts at the tuple: it satisfies only ⊤ and simulates into everything
            S = list(pos_dom)
        if not S:
            lhs = _char(prodN, dbar, n_bound if depth == "bound" else sim_np.rounds, sim_dl, schema, prod_dom)
            if dl.bottom:
                rhs = BOTTOM
            else:
                K = universal_instance(schema)
                m = max(len(d) for d in domains) if depth == "bound" else max(
                    max_simulation(K, n, sim_dl, separators=False, schema=schema).rounds for n in N)
                rhs = characteristic_concept(K, TOP_VALUE, m, sim_dl, schema)
            witness = ConceptInclusion(lhs, rhs)
            verdict.certificate.append({"tuple": dbar, "condition": 1, "simulated": 0})
            break
        factors = minimal_factors([(pos, e) for e in S], sim_dl, schema)
        J = pointed_product(factors, sim_dl, schema)
        (f,) = J.point
        if f not in set(J.instance.adom):
            verdict.certificate.append({"tuple": dbar, "condition": None, "simulated": len(S)})
            continue
        sims = [max_simulation(J.instance, n, sim_dl, separators=False, schema=schema) for n in N]
        hit = next((i for i, s in enumerate(sims) if s.holds(f, dbar[i])), None)
        if hit is not None:
            verdict.certificate.append({"tuple": dbar, "condition": None, "simulated": len(S), "into": hit})
            continue
        lhs = _char(prodN, dbar, n_bound if depth == "bound" else sim_np.rounds, sim_dl, schema, prod_dom)
        m = (len(J.instance.adom) * max(len(d) for d in domains) if depth == "bound"
             else max(s.rounds for s in sims))
        rhs = characteristic_concept(J.instance, f, m, sim_dl, schema)
        witness = ConceptInclusion(lhs, rhs)
        verdict.certificate = [{"tuple": dbar, "condition": 2, "simulated": len(S), "factors": len(factors)}]
        break
    if witness is None:
        return verdict
    if not _witness_ok(witness, P, N, schema):
        raise InvariantViolation(f"constructed inclusion does not fit: {witness}")
    verdict.exists = True
    verdict.witness = witness
    return verdict


def _char(inst, d, depth, dl, schema, dom):
    if d not in dom:
        return TOP
    return characteristic_concept(inst, d, depth, dl, schema)


def el_fit_ontology(P, N, dl, route: str = "negatives") -> FitVerdict:
    """Fitting ontology: one inclusion per negative, or the basis of the positives."""
    dl = dialect(dl)
    P, N = list(P), list(N)
    if not P or not N:
        raise UsageError("fitting needs at least one positive and one negative example")
    schema = joint_schema(P + N)
    _check_arity(schema)
    if route == "basis":
        basis = el_basis(P, dl, schema=schema, compact=True)
        verdict = FitVerdict(False, dl.name, "ontology")
        for j, n in enumerate(N):
            ci = violated(n.with_schema(schema), basis, schema)
            verdict.certificate.append({"negative": j, "violated": ci is not None})
        if all(c["violated"] for c in verdict.certificate):
            verdict.exists = True
            verdict.witness = basis
        return verdict
    if route != "negatives":
        raise UsageError(f"unknown route {route!r}")
    verdict = FitVerdict(False, dl.name, "ontology")
    found = []
    for j, n in enumerate(N):
        v = el_fit_tgd(P, [n], dl)
        verdict.certificate.append({"negative": j, "exists": v.exists})
        if not v.exists:
            return verdict
        found.append(v.witness)
    onto = DlOntology(tuple(found), dl)
    if not (all(satisfies_ontology(p, onto, schema) for p in P)
            and all(not satisfies_ontology(n, onto, schema) for n in N)):
        raise InvariantViolation("per-negative inclusions do not fit as an ontology")
    verdict.exists = True
    verdict.witness = onto
    return verdict


def witness_size(ci: ConceptInclusion) -> int:
    return dag_size(ci.lhs) + dag_size(ci.rhs)

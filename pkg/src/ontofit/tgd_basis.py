"""Finite bases of guarded TGDs and of inclusion dependencies."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ResourceLimit, UsageError
from .homomorphism import find_homomorphism, hom_exists, project_homomorphisms
from .relational import (Instance, PointedInstance, Schema, canonical_cq, direct_product, diversify,
                         joint_schema)
from .tgd import TGD, Answer, TgdOntology, canonical_form, chase, format_tgd, model_check


def set_partitions(n):
    """Restricted growth strings of length n: block index of each position."""
    def rec(prefix, blocks):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(blocks + 1):
            yield from rec(prefix + [b], max(blocks, b + 1))
    yield from rec([], 0)


def minimal_pointed(S):
    """Drop pointed instances that another remaining one maps into.

    The product of the remaining ones is homomorphically equivalent to the
    product of all, with the same point.
    """
    kept = list(S)
    i = 0
    while i < len(kept):
        e = kept[i]
        if any(f is not e and find_homomorphism(f, e) is not None for f in kept):
            kept.pop(i)
        else:
            i += 1
    return kept


def sort_ontology(rules) -> TgdOntology:
    return TgdOntology(tuple(sorted(rules, key=lambda r: (len(r.body), len(r.head), format_tgd(r)))))


# -- guarded TGDs -----------------------------------------------------------

def guarded_queries(schema: Schema, max_atoms=None, max_candidates=200000):
    """Guarded CQs over the variable pool x1..xl (l = max arity), up to renaming.

    Yields ``(body atoms, answer variables)``; bodies have at most
    ``max_atoms`` atoms when given.
    """
    width = schema.max_arity
    pool = [f"x{i + 1}" for i in range(width)]
    seen = set()
    produced = 0
    for rel, k in schema.items():
        for rgs in set_partitions(k):
            if max(rgs) + 1 > width:
                continue
            guard = (rel, tuple(pool[b] for b in rgs))
            used = pool[:max(rgs) + 1]
            others = [(r, args) for r, a in schema.items() for args in itertools.product(used, repeat=a)
                      if (r, args) != guard]
            limit = len(others) if max_atoms is None else min(len(others), max_atoms - 1)
            if max_atoms is None and len(others) > 20:
                raise ResourceLimit(f"{2 ** len(others)} bodies per guard; use the pruned basis")
            for size in range(limit + 1):
                for extra in itertools.combinations(others, size):
                    body = (guard,) + extra
                    for r in range(len(used) + 1):
                        for answer in itertools.combinations(used, r):
                            marks = [("?", (v,)) for v in answer]
                            key = canonical_form(body, marks)
                            if key in seen:
                                continue
                            seen.add(key)
                            produced += 1
                            if produced > max_candidates:
                                raise ResourceLimit(f"more than {max_candidates} guarded queries")
                            yield body, answer


def gtgd_basis(H, pruned: bool = True, reduce: bool = False) -> TgdOntology:
    """GTGD basis of the instances in ``H``.

    One TGD per guarded CQ q(x): if q has no answer anywhere in H the head is
    every atom over x, otherwise it is the canonical query of the diversified
    product of all answers.  ``pruned`` bounds bodies by the total number of
    facts plus one; ``reduce`` drops product factors that another factor maps
    into (an equivalent but smaller head).
    """
    H = list(H)
    if not H:
        raise UsageError("basis of an empty instance list")
    schema = joint_schema(H)
    H = [h.with_schema(schema) for h in H]
    bound = sum(len(h) for h in H) + 1 if pruned else None
    rules = []
    for body, answer in guarded_queries(schema, bound):
        src = Instance(body, schema)
        S = []
        for inst in H:
            rank = {v: i for i, v in enumerate(inst.adom)}
            for t in sorted(project_homomorphisms(src, answer, inst), key=lambda t: [rank[v] for v in t]):
                S.append(PointedInstance(inst, t))
        if not S:
            if not answer:
                continue  # the head would be empty
            head = [(r, args) for r, a in schema.items() for args in itertools.product(answer, repeat=a)]
        else:
            if reduce:
                S = minimal_pointed(S)
            prod = diversify(direct_product(S))
            head = canonical_cq(prod, answer_names=answer, prefix="z").atoms
        rules.append(TGD(body, head))
    return sort_ontology(rules)


# -- inclusion dependencies -------------------------------------------------

def enumerate_inds(schema: Schema, max_arity: int = 8):
    """All INDs over ``schema`` up to renaming, body symbol then head symbol order."""
    if schema.max_arity > max_arity:
        raise ResourceLimit(f"arity {schema.max_arity} above the IND cap {max_arity}")
    for brel, k in schema.items():
        for rgs in set_partitions(k):
            bvars = [f"x{b + 1}" for b in rgs]
            distinct = list(dict.fromkeys(bvars))
            for hrel, m in schema.items():
                for fill in _head_fills(distinct, m):
                    yield TGD([(brel, tuple(bvars))], [(hrel, fill)])


def _head_fills(body_vars, m):
    def rec(prefix, n_exist):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for v in body_vars:
            yield from rec(prefix + [v], n_exist)
        for j in range(n_exist + 1):
            yield from rec(prefix + [f"z{j + 1}"], max(n_exist, j + 1))
    yield from rec([], 0)


def ind_bound(schema: Schema) -> int:
    k = schema.max_arity
    return len(schema) ** 2 * (2 * k) ** (2 * k)


def ind_basis(H, max_arity: int = 8) -> TgdOntology:
    H = list(H)
    if not H:
        raise UsageError("basis of an empty instance list")
    schema = joint_schema(H)
    H = [h.with_schema(schema) for h in H]
    rules = [r for r in enumerate_inds(schema, max_arity) if all(model_check(h, r) for h in H)]
    assert len(rules) <= ind_bound(schema)
    return TgdOntology(tuple(rules))


# -- verification -----------------------------------------------------------

@dataclass
class BasisReport:
    sound: bool
    unsatisfied: list = field(default_factory=list)   # (instance index, rule) pairs
    checked: int = 0
    yes: int = 0
    unknown: list = field(default_factory=list)
    no: list = field(default_factory=list)
    max_rounds_used: int = 0

    @property
    def ok(self) -> bool:
        return self.sound and not self.no


def verify_basis(onto, H, cls: str, budget=(2, 1, 4), max_rounds: int = 8, max_facts: int = 10**5) -> BasisReport:
    """Soundness on H, then sampled completeness: every class TGD within
    ``budget`` that holds in all of H must not be refuted by the chase."""
    from .oracle import enumerate_tgds

    H = list(H)
    rules = list(onto)
    report = BasisReport(True)
    for i, inst in enumerate(H):
        for r in rules:
            if not model_check(inst, r):
                report.sound = False
                report.unsatisfied.append((i, r))
    schema = joint_schema(H).union(TgdOntology(tuple(rules)).schema) if rules else joint_schema(H)
    chased = {}
    for cand in enumerate_tgds(schema, cls, budget):
        if not all(model_check(inst, cand) for inst in H):
            continue
        report.checked += 1
        answer, rounds = _entails_cached(rules, cand, chased, max_rounds, max_facts)
        report.max_rounds_used = max(report.max_rounds_used, rounds)
        if answer is Answer.YES:
            report.yes += 1
        elif answer is Answer.UNKNOWN:
            report.unknown.append(cand)
        else:
            report.no.append(cand)
    return report


def _entails_cached(rules, cand, cache, max_rounds, max_facts):
    """Chase each distinct body at most once per round; later rounds are only
    computed when the head is not found in the earlier ones."""
    key = cand.body
    if key not in cache:
        cache[key] = _ChaseTrace(rules, Instance(cand.body), max_facts)
    trace = cache[key]
    fixed = {v: v for v in cand.frontier}
    head = Instance(cand.head)
    r = 0
    while True:
        stage = trace.stage(r)
        if stage is None:
            break
        if hom_exists(head, stage, fixed):
            return Answer.YES, r
        r += 1
        if r > max_rounds:
            break
    return (Answer.NO if trace.saturated else Answer.UNKNOWN), len(trace.stages) - 1


class _ChaseTrace:
    """Chase stages of one start instance, computed on demand."""

    def __init__(self, rules, start, max_facts):
        self.rules = rules
        self.start = start
        self.max_facts = max_facts
        self.stages = [start]
        self.saturated = False
        self.stopped = False

    def stage(self, r):
        while len(self.stages) <= r and not (self.saturated or self.stopped):
            want = len(self.stages)
            res = chase(self.start, self.rules, max_rounds=want, max_facts=self.max_facts)
            if res.saturated:
                self.saturated = True
                if res.rounds == want:
                    self.stages.append(res.instance)
            elif len(res.instance) > self.max_facts:
                self.stopped = True
            else:
                self.stages.append(res.instance)
        return self.stages[r] if r < len(self.stages) else None

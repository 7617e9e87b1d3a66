"""Brute-force reference implementations used to cross-check the engines.

Nothing here calls the homomorphism solver, the simulation code or the
fitting engines: queries are evaluated by trying every assignment, and DL
fitting is decided by closing the set of definable extensions.
"""
from __future__ import annotations

import functools
import itertools
import threading

from .concepts import BOTTOM, TOP, conj, dialect, exists, name
from .relational import Instance, Schema, joint_schema
from .tgd import TGD, canonical_form, in_class

# -- TGD enumeration --------------------------------------------------------

_lock = threading.Lock()


def _atom_pool(schema: Schema, variables):
    return [(rel, args) for rel, k in schema.items() for args in itertools.product(variables, repeat=k)]


def _prefix_closed(atoms, pool_names):
    used = {v for _, args in atoms for v in args}
    return used == set(pool_names[:len(used)])


@functools.lru_cache(maxsize=32)
def _bodies(schema: Schema, max_atoms: int, max_vars: int):
    """Body atom sets up to renaming, each with its variables named x1..xk."""
    names = [f"x{i + 1}" for i in range(max_vars)]
    pool = _atom_pool(schema, names)
    seen = {}
    for size in range(1, max_atoms + 1):
        for atoms in itertools.combinations(pool, size):
            if not _prefix_closed(atoms, names):
                continue
            key = canonical_form(atoms)
            seen.setdefault(key, atoms)
    return tuple(seen.values())


@functools.lru_cache(maxsize=64)
def _all_tgds(schema: Schema, cls: str, budget: tuple):
    max_body, max_head, max_vars = budget
    if max_body < 1 or max_head < 1 or max_vars < 1:
        return ()
    out = {}
    for body in _bodies(schema, max_body, max_vars):
        bvars = list(dict.fromkeys(v for _, args in body for v in args))
        free = max_vars - len(bvars)
        exist = [f"z{i + 1}" for i in range(free)]
        pool = _atom_pool(schema, bvars + exist)
        for size in range(1, max_head + 1):
            for head in itertools.combinations(pool, size):
                used = {v for _, args in head for v in args if v in exist}
                if used != set(exist[:len(used)]):
                    continue
                rule = TGD(body, head)
                if not in_class(rule, cls):
                    continue
                key = canonical_form(rule.body, rule.head)
                if key not in out:
                    out[key] = rule
    rules = list(out.values())
    rules.sort(key=_order_key)
    return tuple(rules)


def _order_key(rule: TGD):
    nvars = len(set(rule.body_vars) | set(rule.head_vars))
    return (len(rule.body), len(rule.head), nvars, rule.body, rule.head)


def enumerate_tgds(schema: Schema, cls: str, budget=(2, 2, 4)):
    """All TGDs of class ``cls`` within ``budget`` = (body atoms, head atoms,
    variables), one per renaming class, ordered by size then lexicographically."""
    if cls == "FullTGD":
        cls = "FULL"
    with _lock:
        rules = _all_tgds(schema, cls, tuple(budget))
    yield from rules


# -- brute-force query evaluation -------------------------------------------

def cq_answers(atoms, answer_vars, inst: Instance) -> frozenset:
    """Every assignment of the variables to the active domain is tried."""
    variables = list(dict.fromkeys(v for _, args in atoms for v in args))
    for v in answer_vars:
        if v not in variables:
            variables.append(v)
    dom = inst.adom
    factset = inst.fact_set()
    out = set()
    for values in itertools.product(dom, repeat=len(variables)):
        m = dict(zip(variables, values))
        if all((rel, tuple(m[v] for v in args)) in factset for rel, args in atoms):
            out.add(tuple(m[v] for v in answer_vars))
    return frozenset(out)


class _Evaluator:
    def __init__(self, inst):
        self.inst = inst
        self.cache = {}

    def answers(self, atoms, answer_vars):
        key = (atoms, answer_vars)
        if key not in self.cache:
            self.cache[key] = cq_answers(atoms, answer_vars, self.inst)
        return self.cache[key]

    def holds(self, rule: TGD) -> bool:
        f = rule.frontier
        body = self.answers(rule.body, f)
        if not body:
            return True
        return body <= self.answers(rule.head, f)


def brute_satisfies(inst: Instance, rule: TGD) -> bool:
    return _Evaluator(inst).holds(rule)


def brute_force_fit(P, N, cls: str, budget=(2, 2, 4), evaluators=None):
    """First enumerated TGD that holds in every positive and fails in every negative."""
    P, N = list(P), list(N)
    schema = joint_schema(P + N)
    if evaluators is None:
        evaluators = ([_Evaluator(p) for p in P], [_Evaluator(n) for n in N])
    pos, neg = evaluators
    for rule in enumerate_tgds(schema, cls, budget):
        if all(not e.holds(rule) for e in neg) and all(e.holds(rule) for e in pos):
            return rule
    return None


def brute_force_fits(P, N, cls: str, budget=(2, 2, 4)):
    """All enumerated fitting TGDs."""
    P, N = list(P), list(N)
    schema = joint_schema(P + N)
    pos, neg = [_Evaluator(p) for p in P], [_Evaluator(n) for n in N]
    return [r for r in enumerate_tgds(schema, cls, budget)
            if all(not e.holds(r) for e in neg) and all(e.holds(r) for e in pos)]


def brute_homomorphism(src: Instance, dst: Instance, fixed=None):
    """A homomorphism found by trying every map of the active domain, or None."""
    fixed = dict(fixed or {})
    dom = [v for v in src.adom if v not in fixed]
    dst_facts = dst.fact_set()
    for values in itertools.product(dst.adom, repeat=len(dom)):
        m = dict(fixed)
        m.update(zip(dom, values))
        if all((rel, tuple(m[v] for v in args)) in dst_facts for rel, args in src.facts):
            return m
    return None


# -- description logic oracle -----------------------------------------------

class ExtensionClosure:
    """Every extension tuple definable in the dialect over a list of instances.

    Values of all instances are numbered into one bit space; a concept is
    represented by the bit mask of its extension in all instances at once.
    The set of masks is closed under ∃R, ∃R⁻ (with inverses) and intersection;
    one representative concept is kept per mask.
    """

    def __init__(self, instances, dl, schema=None):
        self.dl = dialect(dl)
        instances = list(instances)
        self.schema = joint_schema(instances) if schema is None else schema
        self.bits = {}
        self.parts = []
        for i, inst in enumerate(instances):
            mask = 0
            for v in inst.adom:
                b = len(self.bits)
                self.bits[(i, v)] = b
                mask |= 1 << b
            self.parts.append(mask)
        self.full = sum(self.parts)
        unary = {}
        pred = {}
        for i, inst in enumerate(instances):
            for rel, args in inst.facts:
                if len(args) == 1:
                    unary[rel] = unary.get(rel, 0) | 1 << self.bits[(i, args[0])]
                elif len(args) == 2:
                    a, b = self.bits[(i, args[0])], self.bits[(i, args[1])]
                    pred.setdefault((rel, False), {}).setdefault(b, 0)
                    pred[(rel, False)][b] |= 1 << a
                    pred.setdefault((rel, True), {}).setdefault(a, 0)
                    pred[(rel, True)][a] |= 1 << b
        self.pred = pred
        roles = [(r, False) for r in self.schema.symbols_of_arity(2)]
        if self.dl.inverses:
            roles += [(r, True) for r in self.schema.symbols_of_arity(2)]
        self.roles = roles
        rep = {self.full: TOP}
        if self.dl.bottom:
            rep.setdefault(0, BOTTOM)
        for a in self.schema.symbols_of_arity(1):
            rep.setdefault(unary.get(a, 0), name(a))
        frontier = list(rep)
        while frontier:
            new = []
            for m in frontier:
                for role in roles:
                    e = self._exists(role, m)
                    if e not in rep:
                        rep[e] = exists(role[0], rep[m], role[1])
                        new.append(e)
            for m in new + frontier:
                for m2 in list(rep):
                    x = m & m2
                    if x not in rep:
                        rep[x] = conj(rep[m], rep[m2])
                        new.append(x)
            frontier = new
        self.rep = rep

    def _exists(self, role, mask):
        table = self.pred.get(role, {})
        out = 0
        while mask:
            low = mask & -mask
            out |= table.get(low.bit_length() - 1, 0)
            mask ^= low
        return out

    def definable(self, index, values):
        """A concept whose extension in instance ``index`` is exactly ``values``, or None."""
        target = 0
        for v in values:
            target |= 1 << self.bits[(index, v)]
        part = self.parts[index]
        for m, c in self.rep.items():
            if m & part == target:
                return c
        return None

    def fit(self, n_pos):
        """First inclusion C ⊑ D holding in the first ``n_pos`` instances and
        failing in each of the others, or None."""
        pos, neg = self.parts[:n_pos], self.parts[n_pos:]
        masks = sorted(self.rep)
        for c in masks:
            for d in masks:
                diff = c & ~d
                if any(diff & p for p in pos):
                    continue
                if all(diff & n for n in neg):
                    return self.rep[c], self.rep[d]
        return None


def dl_oracle_fit(P, N, dl):
    """Exhaustive DL fitting over all definable extensions; returns (C, D) or None."""
    P, N = list(P), list(N)
    closure = ExtensionClosure(P + N, dl)
    return closure.fit(len(P))


# -- pruned exhaustive search -----------------------------------------------

def _body_frontiers(body, cls):
    """Largest frontier sets worth trying; heads over a subset of a frontier
    are covered by the search at the larger set."""
    bvars = tuple(dict.fromkeys(v for _, args in body for v in args))
    if cls == "GTGD" and not any(set(args) >= set(bvars) for _, args in body):
        return []
    if cls == "FGTGD":
        sets = {frozenset(args) for _, args in body}
        sets = [s for s in sets if not any(s < t for t in sets)]
        return [tuple(v for v in bvars if v in s) for s in sets]
    if cls == "F1TGD":
        return [(v,) for v in bvars]
    return [bvars]


def search_fit(P, N, cls: str, budget=(2, 4, 6)):
    """First fitting TGD found by depth-first search over head atom sets.

    The search covers every TGD of the class with at most ``budget`` = (body
    atoms, head atoms, variables).  A head that already fails in a positive
    is not extended (more atoms only make it harder to satisfy), and a head
    failing in every negative is a fit as soon as all positives hold.
    Queries are evaluated by enumerating assignments.
    """
    if cls == "FullTGD":
        cls = "FULL"
    if cls == "IND":
        return brute_force_fit(P, N, "IND", (1, 1, budget[2]))
    P, N = list(P), list(N)
    schema = joint_schema(P + N)
    max_body, max_head, max_vars = budget
    if min(budget) < 1:
        return None
    for body in _bodies(schema, max_body, max_vars):
        bvars = list(dict.fromkeys(v for _, args in body for v in args))
        n_exist = 0 if cls == "FULL" else max_vars - len(bvars)
        for frontier in _body_frontiers(body, cls):
            found = _search_heads(body, frontier, n_exist, max_head, schema, P, N)
            if found is not None:
                return found
    return None


def _search_heads(body, frontier, n_exist, max_head, schema, P, N):
    """Depth-first search over head atom sets for one body and frontier.

    For every body match ("context") the assignments of the existential
    variables that satisfy the current head are kept as a bit mask over
    adom^n_exist.  Atoms are added in pool order; an atom may only introduce
    the next unused existential variables, which loses no head up to renaming
    (the lexicographically least renaming of any head passes this test).  An
    atom that shrinks no negative mask is skipped: dropping it from a fit
    leaves a smaller fit.
    """
    exist = [f"z{i + 1}" for i in range(n_exist)]
    pos_ctx = [(inst, t) for inst in P for t in sorted(cq_answers(body, frontier, inst), key=repr)]
    neg_ctx, neg_owner = [], []
    for j, inst in enumerate(N):
        ts = cq_answers(body, frontier, inst)
        if not ts:
            return None   # the body never matches this negative
        for t in sorted(ts, key=repr):
            neg_ctx.append((inst, t))
            neg_owner.append(j)
    pool = _atom_pool(schema, list(frontier) + exist)
    fpos = {v: i for i, v in enumerate(frontier)}
    zpos = {z: j for j, z in enumerate(exist)}
    tables = {}

    def table(inst):
        # cylinder masks: assignments with existential j mapped to value c
        if id(inst) not in tables:
            dom = inst.adom
            size = len(dom) ** n_exist
            cyl = [[0] * len(dom) for _ in exist]
            for code in range(size):
                rest = code
                for j in range(n_exist):
                    cyl[j][rest % len(dom)] |= 1 << code
                    rest //= len(dom)
            tables[id(inst)] = ({v: i for i, v in enumerate(dom)}, cyl, (1 << size) - 1)
        return tables[id(inst)]

    def atom_mask(ctx, atom):
        inst, t = ctx
        rank, cyl, full = table(inst)
        rel, args = atom
        out = 0
        for fact in inst.facts_of(rel):
            m = full
            for a, val in zip(args, fact):
                if a in fpos:
                    if t[fpos[a]] != val:
                        m = 0
                        break
                else:
                    m &= cyl[zpos[a]][rank[val]]
            out |= m
        return out

    pos_masks = [[atom_mask(c, a) for a in pool] for c in pos_ctx]
    neg_masks = [[atom_mask(c, a) for a in pool] for c in neg_ctx]
    pos0 = [table(inst)[2] for inst, _ in pos_ctx]
    neg0 = [table(inst)[2] for inst, _ in neg_ctx]
    exist_of = [[a for a in dict.fromkeys(args) if a in zpos] for _, args in pool]
    n_neg = len(N)

    def violated_all(ns):
        hit = [False] * n_neg
        for owner, m in zip(neg_owner, ns):
            if not m:
                hit[owner] = True
        return all(hit)

    def rec(start, head, n_used, ps, ns):
        if head and violated_all(ns):
            return TGD(body, [pool[k] for k in head])
        if len(head) == max_head:
            return None
        for k in range(start, len(pool)):
            new = [zpos[z] for z in exist_of[k] if zpos[z] >= n_used]
            if new and sorted(new) != list(range(n_used, n_used + len(new))):
                continue
            ps2 = [m & row[k] for m, row in zip(ps, pos_masks)]
            if not all(ps2):
                continue
            ns2 = [m & row[k] for m, row in zip(ns, neg_masks)]
            if ns2 == ns:
                continue
            found = rec(k + 1, head + [k], n_used + len(new), ps2, ns2)
            if found is not None:
                return found
        return None

    return rec(0, [], 0, pos0, neg0)

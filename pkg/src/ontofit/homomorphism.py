"""Homomorphism search between instances.

The search is a small constraint solver: one variable per source value, one
constraint per source fact.  Domains are filtered to generalized arc
consistency before and during backtracking, variables are picked smallest
domain first (ties: most constrained, then value order), and independent
connected components of the source are solved separately.
"""
from __future__ import annotations

import itertools

from .errors import PointConstraintError, ResourceLimit
from .relational import LIMITS, ConjunctiveQuery, Instance, PointedInstance


class _Counter:
    __slots__ = ("nodes", "cap")

    def __init__(self, cap):
        self.nodes = 0
        self.cap = LIMITS.max_search_nodes if cap is None else cap

    def tick(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise ResourceLimit(f"homomorphism search exceeded {self.cap} nodes")


def _pattern(args):
    first = {}
    return tuple(first.setdefault(v, i) for i, v in enumerate(args))


class _Problem:
    """Constraint network for homomorphisms from ``src_facts`` into ``dst``."""

    def __init__(self, src_facts, dst: Instance):
        self.dst = dst
        self.constraints = list(dict.fromkeys((r, tuple(a)) for r, a in src_facts))
        order = {}
        for _, args in self.constraints:
            for v in args:
                order.setdefault(v, len(order))
        self.order = order
        self.vars = list(order)
        self.watch = {v: [] for v in self.vars}
        self.compat = []
        cache = {}
        for ci, (rel, args) in enumerate(self.constraints):
            pat = _pattern(args)
            key = (rel, pat)
            if key not in cache:
                cache[key] = [t for t in dst.facts_of(rel) if _fits(t, pat)]
            self.compat.append(cache[key])
            for v in dict.fromkeys(args):
                self.watch[v].append(ci)
        self.degree = {v: len(cs) for v, cs in self.watch.items()}

    def initial_domains(self, fixed):
        domains = {}
        for ci, (rel, args) in enumerate(self.constraints):
            sup = self.compat[ci]
            if not sup:
                return None
            for p, v in enumerate(args):
                vals = {t[p] for t in sup}
                cur = domains.get(v)
                domains[v] = vals if cur is None else (cur & vals)
        for v, target in fixed.items():
            if v in domains:
                domains[v] = domains[v] & {target}
        if any(not d for d in domains.values()):
            return None
        return domains

    def propagate(self, domains, queue):
        """GAC over constraints in ``queue``; mutates ``domains`` (fresh sets only)."""
        pending = set(queue)
        queue = list(queue)
        constraints, compat, watch = self.constraints, self.compat, self.watch
        while queue:
            ci = queue.pop()
            pending.discard(ci)
            rel, args = constraints[ci]
            if len(args) == 2:
                d0, d1 = domains[args[0]], domains[args[1]]
                support = [t for t in compat[ci] if t[0] in d0 and t[1] in d1]
            elif len(args) == 1:
                d0 = domains[args[0]]
                support = [t for t in compat[ci] if t[0] in d0]
            else:
                doms = [domains[v] for v in args]
                support = [t for t in compat[ci] if all(t[p] in doms[p] for p in range(len(args)))]
            if not support:
                return False
            seen = set()
            for p, v in enumerate(args):
                if v in seen:
                    continue
                seen.add(v)
                new = {t[p] for t in support}
                if len(new) < len(domains[v]):
                    domains[v] = new
                    for cj in watch[v]:
                        if cj != ci and cj not in pending:
                            pending.add(cj)
                            queue.append(cj)
        return True

    def components(self):
        parent = {v: v for v in self.vars}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for _, args in self.constraints:
            r = find(args[0])
            for v in args[1:]:
                s = find(v)
                if s != r:
                    parent[s] = r
        groups = {}
        for v in self.vars:
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())

    def pick(self, domains, candidates):
        best = None
        for v in candidates:
            key = (len(domains[v]), -self.degree[v], self.order[v])
            if best is None or key < best[0]:
                best = (key, v)
        return best[1]

    def dst_order(self):
        return {v: i for i, v in enumerate(self.dst.adom)}

    def solutions(self, domains, variables, counter, first_vars=()):
        """Yield complete assignments of ``variables`` (dicts).

        With ``first_vars``, those are branched on first; after they are all
        assigned only one completion is produced per assignment of them.
        """
        rank = self.dst_order()
        first_vars = [v for v in first_vars if v in domains]
        rest = [v for v in variables if v not in set(first_vars)]

        def branch(domains, open_first, open_rest):
            if open_first:
                v = self.pick(domains, open_first)
                remaining = [u for u in open_first if u != v]
                for val in sorted(domains[v], key=rank.__getitem__):
                    counter.tick()
                    new = dict(domains)
                    new[v] = {val}
                    if self.propagate(new, self.watch[v]):
                        yield from branch(new, remaining, open_rest)
                return
            if first_vars:
                sol = next(complete(domains, open_rest), None)
                if sol is not None:
                    yield sol
                return
            yield from complete(domains, open_rest)

        def node(domains, open_vars):
            open_vars = [v for v in open_vars if len(domains[v]) > 1]
            if not open_vars:
                return {v: next(iter(d)) for v, d in domains.items()}, None
            v = self.pick(domains, open_vars)
            return None, (domains, open_vars, v, iter(sorted(domains[v], key=rank.__getitem__)))

        def complete(domains, open_vars):
            # explicit stack: large sources (thousands of values) exceed Python's recursion limit
            sol, frame = node(domains, open_vars)
            if sol is not None:
                yield sol
                return
            stack = [frame]
            while stack:
                doms, open_vars, v, values = stack[-1]
                val = next(values, _DONE)
                if val is _DONE:
                    stack.pop()
                    continue
                counter.tick()
                new = dict(doms)
                new[v] = {val}
                if self.propagate(new, self.watch[v]):
                    sol, frame = node(new, open_vars)
                    if sol is not None:
                        yield sol
                    else:
                        stack.append(frame)

        yield from branch(domains, first_vars, rest)


_DONE = object()


def _fits(t, pat):
    return all(t[i] == t[j] for i, j in enumerate(pat))


def _point_map(src_point, dst_point, src_adom):
    fixed = {}
    free = {}
    for a, b in zip(src_point, dst_point):
        table = fixed if a in src_adom else free
        if table.setdefault(a, b) != b:
            if table is free:
                raise PointConstraintError(f"unsatisfiable point constraint on {a!r}")
            return None, None
    return fixed, free


def _restrict_domains(domains, variables):
    return {v: domains[v] for v in variables}


def find_homomorphism(src: PointedInstance, dst: PointedInstance, node_cap=None):
    """A homomorphism from ``src`` to ``dst`` as a dict, or None."""
    if src.arity != dst.arity:
        raise ValueError("point arities differ")
    s, d = src.instance, dst.instance
    fixed, free = _point_map(src.point, dst.point, set(s.adom))
    if fixed is None:
        return None
    return _find(s.facts, d, fixed, free, node_cap)


def _find(src_facts, dst, fixed, free=None, node_cap=None):
    problem = _Problem(src_facts, dst)
    domains = problem.initial_domains(fixed)
    if domains is None:
        return None
    if not problem.propagate(domains, range(len(problem.constraints))):
        return None
    counter = _Counter(node_cap)
    result = dict(free or {})
    for comp in problem.components():
        sub = _restrict_domains(domains, comp)
        sol = next(problem.solutions(sub, comp, counter), None)
        if sol is None:
            return None
        result.update(sol)
    return result


def hom_exists(src: Instance, dst: Instance, fixed=None, node_cap=None) -> bool:
    return _find(src.facts, dst, dict(fixed or {}), None, node_cap) is not None


class HomChecker:
    """Repeated ``hom_exists(src, dst, fixed)`` queries for one source and target.

    The constraint network is built and arc-reduced once; each query only
    propagates its fixed values.  Components without fixed values are solved
    at most once.
    """

    def __init__(self, src: Instance, dst: Instance, node_cap=None):
        self.problem = _Problem(src.facts, dst)
        self.node_cap = node_cap
        base = self.problem.initial_domains({})
        if base is not None and not self.problem.propagate(base, range(len(self.problem.constraints))):
            base = None
        self.base = base
        self.comps = self.problem.components() if base is not None else []
        self.comp_of = {v: i for i, comp in enumerate(self.comps) for v in comp}
        self.free_ok = {}

    def exists(self, fixed=None) -> bool:
        if self.base is None:
            return False
        problem, domains = self.problem, dict(self.base)
        touched, pinned = [], set()
        for v, target in (fixed or {}).items():
            if v not in domains:
                continue
            if target not in domains[v]:
                return False
            domains[v] = {target}
            touched.extend(problem.watch[v])
            pinned.add(self.comp_of[v])
        if not problem.propagate(domains, touched):
            return False
        counter = _Counter(self.node_cap)
        for i, comp in enumerate(self.comps):
            if i not in pinned:
                if i not in self.free_ok:
                    sol = next(problem.solutions(_restrict_domains(self.base, comp), comp, counter), None)
                    self.free_ok[i] = sol is not None
                if not self.free_ok[i]:
                    return False
            elif next(problem.solutions(_restrict_domains(domains, comp), comp, counter), None) is None:
                return False
        return True


def iter_homomorphisms(src: Instance, dst: Instance, fixed=None, node_cap=None):
    """All homomorphisms from ``src`` into ``dst`` extending ``fixed``."""
    problem = _Problem(src.facts, dst)
    domains = problem.initial_domains(dict(fixed or {}))
    if domains is None or not problem.propagate(domains, range(len(problem.constraints))):
        return
    counter = _Counter(node_cap)
    per_comp = []
    for comp in problem.components():
        sols = list(problem.solutions(_restrict_domains(domains, comp), comp, counter))
        if not sols:
            return
        per_comp.append(sols)
    for combo in itertools.product(*per_comp):
        out = {}
        for part in combo:
            out.update(part)
        yield out


def project_homomorphisms(src: Instance, point, dst: Instance, fixed=None, node_cap=None) -> set:
    """``{h(point) | h: src -> dst homomorphism extending fixed}``."""
    point = tuple(point)
    src_adom = set(src.adom)
    fixed = dict(fixed or {})
    problem = _Problem(src.facts, dst)
    domains = problem.initial_domains(fixed)
    if domains is None or not problem.propagate(domains, range(len(problem.constraints))):
        return set()
    counter = _Counter(node_cap)
    wanted = list(dict.fromkeys(point))
    per_comp = []
    for comp in problem.components():
        comp_set = set(comp)
        mine = [v for v in wanted if v in comp_set]
        sub = _restrict_domains(domains, comp)
        projections = {tuple(sol[v] for v in mine) for sol in problem.solutions(sub, comp, counter, first_vars=mine)}
        if not projections:
            return set()
        per_comp.append((mine, projections))
    outside = [v for v in wanted if v not in src_adom]
    choices = [[fixed[v]] if v in fixed else list(dst.adom) for v in outside]
    per_comp.append((outside, list(itertools.product(*choices))))
    results = set()
    for combo in itertools.product(*(p for _, p in per_comp)):
        assign = {}
        for (names, _), vals in zip(per_comp, combo):
            assign.update(zip(names, vals))
        results.add(tuple(assign[v] for v in point))
    return results


def evaluate_cq(q: ConjunctiveQuery, inst: Instance) -> set:
    """Answers of ``q`` on ``inst``; a Boolean query returns ``{()}`` or ``set()``."""
    return project_homomorphisms(Instance(q.atoms), q.answer_vars, inst)


def is_homomorphism(mapping, src: PointedInstance, dst: PointedInstance) -> bool:
    try:
        for rel, args in src.instance.facts:
            if (rel, tuple(mapping[v] for v in args)) not in dst.instance:
                return False
        return all(mapping[a] == b for a, b in zip(src.point, dst.point))
    except KeyError:
        return False

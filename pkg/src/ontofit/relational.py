"""Schemas, instances, pointed instances and the constructions built on them."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Any, Iterable

from .errors import ParseError, PreconditionError, ResourceLimit, UsageError


@dataclass
class Limits:
    max_product_values: int = 10**6
    max_product_facts: int = 4 * 10**6
    max_search_nodes: int = 10**7
    max_subset_values: int = 16


LIMITS = Limits()


# -- values -----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Clone:
    """Fresh copy of a distinguished value, made by diversification."""
    original: Any
    index: int

    def __str__(self):
        return f"{value_str(self.original)}*{self.index}"


@dataclass(frozen=True, slots=True)
class Tagged:
    """A value renamed apart by a disjoint union."""
    value: Any
    source: int

    def __str__(self):
        return f"{value_str(self.value)}@{self.source}"


def value_str(v) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(value_str(c) for c in v) + ")"
    return str(v)


# -- schema -----------------------------------------------------------------

class Schema:
    __slots__ = ("_arity", "_hash")

    def __init__(self, arities=()):
        arity = {}
        items = arities.items() if hasattr(arities, "items") else arities
        for name, k in items:
            if not isinstance(k, int) or k < 1:
                raise UsageError(f"symbol {name} needs a positive arity, got {k}")
            if arity.setdefault(name, k) != k:
                raise UsageError(f"symbol {name} used with arities {arity[name]} and {k}")
        self._arity = dict(sorted(arity.items()))
        self._hash = hash(frozenset(self._arity.items()))

    def arity(self, name):
        return self._arity[name]

    def __contains__(self, name):
        return name in self._arity

    def __iter__(self):
        return iter(self._arity)

    def __len__(self):
        return len(self._arity)

    def items(self):
        return self._arity.items()

    def __eq__(self, other):
        return isinstance(other, Schema) and self._arity == other._arity

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Schema(" + ", ".join(f"{n}/{k}" for n, k in self._arity.items()) + ")"

    def union(self, *others):
        pairs = list(self._arity.items())
        for o in others:
            pairs.extend(o.items())
        return Schema(pairs)

    @property
    def max_arity(self):
        return max(self._arity.values(), default=0)

    def symbols_of_arity(self, k):
        return [n for n, a in self._arity.items() if a == k]


# -- instances --------------------------------------------------------------

class Instance:
    """An immutable finite set of facts ``(symbol, args)``.

    Facts keep their insertion order; the active domain is ordered by first
    occurrence, which is the fixed value order used throughout the package.
    """

    __slots__ = ("schema", "facts", "_set", "_adom", "_by_rel", "_hash")

    def __init__(self, facts: Iterable = (), schema: Schema | None = None):
        seen = {}
        for rel, args in facts:
            seen[(rel, tuple(args))] = None
        self.facts = tuple(seen)
        self._set = frozenset(self.facts)
        inferred = Schema((rel, len(args)) for rel, args in self.facts)
        if schema is None:
            schema = inferred
        else:
            for rel, k in inferred.items():
                if rel not in schema or schema.arity(rel) != k:
                    raise UsageError(f"fact symbol {rel}/{k} not in {schema!r}")
        self.schema = schema
        self._adom = None
        self._by_rel = None
        self._hash = None

    @property
    def adom(self) -> tuple:
        if self._adom is None:
            seen = {}
            for _, args in self.facts:
                for v in args:
                    seen[v] = None
            self._adom = tuple(seen)
        return self._adom

    def facts_of(self, rel) -> list:
        if self._by_rel is None:
            by_rel = {}
            for r, args in self.facts:
                by_rel.setdefault(r, []).append(args)
            self._by_rel = by_rel
        return self._by_rel.get(rel, [])

    def __contains__(self, fact):
        return fact in self._set

    def __len__(self):
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)

    def __eq__(self, other):
        return isinstance(other, Instance) and self._set == other._set and self.schema == other.schema

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._set, self.schema))
        return self._hash

    def __repr__(self):
        return "Instance({" + ", ".join(fact_str(f) for f in self.facts) + "})"

    def fact_set(self) -> frozenset:
        return self._set

    def with_schema(self, schema: Schema) -> "Instance":
        if schema == self.schema:
            return self
        return Instance(self.facts, schema.union(self.schema))

    def union(self, other: "Instance") -> "Instance":
        return Instance(self.facts + other.facts, self.schema.union(other.schema))


def fact_str(fact) -> str:
    rel, args = fact
    return f"{rel}(" + ",".join(value_str(v) for v in args) + ")"


@dataclass(frozen=True)
class PointedInstance:
    instance: Instance
    point: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(self.point))

    @property
    def arity(self):
        return len(self.point)


def pointed(instance, *point) -> PointedInstance:
    return PointedInstance(instance, point)


def joint_schema(instances) -> Schema:
    schema = Schema()
    for inst in instances:
        schema = schema.union(inst.schema)
    return schema


# -- conjunctive queries ----------------------------------------------------

@dataclass(frozen=True)
class ConjunctiveQuery:
    answer_vars: tuple
    atoms: tuple

    def __post_init__(self):
        atoms = tuple(dict.fromkeys((rel, tuple(args)) for rel, args in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "answer_vars", tuple(self.answer_vars))
        used = {v for _, args in atoms for v in args}
        missing = [v for v in self.answer_vars if v not in used]
        if missing:
            raise PreconditionError(f"unsafe query: answer variables {missing} occur in no atom")

    @property
    def variables(self) -> tuple:
        seen = dict.fromkeys(self.answer_vars)
        for _, args in self.atoms:
            for v in args:
                seen[v] = None
        return tuple(seen)

    @property
    def existential_vars(self) -> tuple:
        answers = set(self.answer_vars)
        return tuple(v for v in self.variables if v not in answers)

    def is_guarded(self) -> bool:
        allv = set(self.variables)
        return any(set(args) >= allv for _, args in self.atoms)

    def __str__(self):
        body = ", ".join(f"{r}({','.join(a)})" for r, a in self.atoms)
        return f"q({','.join(self.answer_vars)}) :- {body}"


def canonical_instance(q: ConjunctiveQuery, schema: Schema | None = None) -> PointedInstance:
    inst = Instance(q.atoms, schema)
    return PointedInstance(inst, q.answer_vars)


def canonical_cq(p: PointedInstance, answer_names=None, prefix="z") -> ConjunctiveQuery:
    """One variable per value, one atom per fact.

    ``answer_names`` renames the answer variables; other values become
    ``<prefix>1, <prefix>2, ...`` in active-domain order.
    """
    inst, point = p.instance, p.point
    if not inst.facts:
        raise PreconditionError("canonical CQ of an empty instance")
    if len(set(point)) != len(point):
        raise PreconditionError("canonical CQ needs a repeat-free point; diversify first")
    dom = set(inst.adom)
    if any(v not in dom for v in point):
        raise PreconditionError("canonical CQ needs the point inside the active domain")
    if answer_names is None:
        answer_names = [f"x{i + 1}" for i in range(len(point))]
    if len(answer_names) != len(point):
        raise UsageError("wrong number of answer variable names")
    names = dict(zip(point, answer_names))
    taken = set(answer_names)
    k = 0
    for v in inst.adom:
        if v not in names:
            k += 1
            while f"{prefix}{k}" in taken:
                k += 1
            names[v] = f"{prefix}{k}"
    atoms = [(rel, tuple(names[v] for v in args)) for rel, args in inst.facts]
    return ConjunctiveQuery(tuple(answer_names), atoms)


# -- constructions ----------------------------------------------------------

def disjoint_union(instances) -> Instance:
    instances = list(instances)
    if not instances:
        raise UsageError("disjoint union of an empty list")
    schema = joint_schema(instances)
    facts = []
    for i, inst in enumerate(instances):
        for rel, args in inst.facts:
            facts.append((rel, tuple(Tagged(v, i) for v in args)))
    return Instance(facts, schema)


def direct_product(operands, max_values=None, max_facts=None) -> PointedInstance:
    """n-ary direct product; values are width-n tuples."""
    operands = list(operands)
    if not operands:
        raise UsageError("direct product of an empty list")
    arity = operands[0].arity
    if any(op.arity != arity for op in operands):
        raise UsageError("direct product operands have different point arities")
    max_values = LIMITS.max_product_values if max_values is None else max_values
    max_facts = LIMITS.max_product_facts if max_facts is None else max_facts
    schema = joint_schema(op.instance for op in operands)
    total = 0
    per_rel = []
    for rel in schema:
        lists = [op.instance.facts_of(rel) for op in operands]
        n = 1
        for lst in lists:
            n *= len(lst)
        total += n
        per_rel.append((rel, lists, n))
    if total > max_facts:
        raise ResourceLimit(f"product would have {total} facts (cap {max_facts})")
    facts = []
    for rel, lists, n in per_rel:
        if n == 0:
            continue
        for combo in itertools.product(*lists):
            facts.append((rel, tuple(zip(*combo))))
    inst = Instance(facts, schema)
    if len(inst.adom) > max_values:
        raise ResourceLimit(f"product has {len(inst.adom)} values (cap {max_values})")
    point = tuple(zip(*(op.point for op in operands))) if arity else ()
    return PointedInstance(inst, point)


def diversify(p: PointedInstance) -> PointedInstance:
    inst, point = p.instance, p.point
    if not point:
        return p
    dom = set(inst.adom)
    if any(v not in dom for v in point):
        raise PreconditionError("diversification needs the point inside the active domain")
    clones = {}
    for i, v in enumerate(point):
        clones.setdefault(v, []).append(Clone(v, i))
    facts = []
    for rel, args in inst.facts:
        options = [[v] + clones.get(v, []) for v in args]
        for combo in itertools.product(*options):
            facts.append((rel, combo))
    return PointedInstance(Instance(facts, inst.schema), tuple(Clone(v, i) for i, v in enumerate(point)))


def restrict(inst: Instance, values) -> Instance:
    values = set(values)
    return Instance([f for f in inst.facts if all(v in values for v in f[1])], inst.schema)


def maximally_guarded_sets(inst: Instance) -> list:
    sets = list(dict.fromkeys(frozenset(args) for _, args in inst.facts))
    return [s for s in sets if not any(s < t for t in sets)]


def ordered(values, inst: Instance) -> tuple:
    """``values`` listed in the active-domain order of ``inst``."""
    values = set(values)
    return tuple(v for v in inst.adom if v in values)


def is_total_tuple(inst: Instance, values, schema: Schema | None = None) -> bool:
    schema = inst.schema if schema is None else schema
    vals = list(dict.fromkeys(values))
    for rel, k in schema.items():
        for args in itertools.product(vals, repeat=k):
            if (rel, args) not in inst:
                return False
    return True


def missing_fact(inst: Instance, values, schema: Schema | None = None):
    """First fact over ``values`` absent from ``inst`` (symbols in name order)."""
    schema = inst.schema if schema is None else schema
    vals = list(dict.fromkeys(values))
    for rel, k in schema.items():
        for args in itertools.product(vals, repeat=k):
            if (rel, args) not in inst:
                return rel, args
    return None


def component(p: PointedInstance, i: int) -> tuple:
    """Projection of a tuple of width-n product values onto coordinate ``i``."""
    return tuple(v[i] for v in p.point)


# -- fact file format -------------------------------------------------------

_IDENT = r"[A-Za-z0-9_]+"
_FACT_RE = re.compile(rf"^\s*({_IDENT})\s*\(\s*({_IDENT}(?:\s*,\s*{_IDENT})*)\s*\)\s*\.?\s*$")
_POINT_RE = re.compile(rf"^\s*@point\b(.*)$")


def parse_facts(text: str, schema: Schema | None = None) -> PointedInstance:
    facts = []
    arity = {}
    point = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _POINT_RE.match(line)
        if m:
            if point is not None:
                raise ParseError("duplicate @point header", lineno)
            rest = m.group(1).strip()
            point = tuple(t.strip() for t in rest.split(",")) if rest else ()
            if any(not re.fullmatch(_IDENT, t) for t in point):
                raise ParseError(f"bad @point values: {rest!r}", lineno)
            continue
        # several facts may share a line: R(a,b). S(b).
        for chunk in re.findall(r"[^.]+\.?", line):
            chunk = chunk.strip()
            if not chunk or chunk == ".":
                continue
            m = _FACT_RE.match(chunk)
            if not m:
                raise ParseError(f"cannot parse fact {chunk!r}", lineno)
            rel = m.group(1)
            args = tuple(a.strip() for a in m.group(2).split(","))
            if arity.setdefault(rel, len(args)) != len(args):
                raise ParseError(f"symbol {rel} used with arities {arity[rel]} and {len(args)}", lineno)
            facts.append((rel, args))
    inferred = Schema(arity)
    if schema is not None:
        try:
            schema = schema.union(inferred)
        except UsageError as exc:
            raise ParseError(str(exc)) from None
    return PointedInstance(Instance(facts, schema or inferred), point or ())


def parse_instance(text: str) -> Instance:
    return parse_facts(text).instance


def format_facts(p, header=True) -> str:
    if isinstance(p, Instance):
        p = PointedInstance(p, ())
    lines = []
    if header and p.point:
        lines.append("@point " + ", ".join(value_str(v) for v in p.point))
    lines.extend(fact_str(f) + "." for f in p.instance.facts)
    return "\n".join(lines) + "\n"


def facts(text: str) -> Instance:
    """Shorthand used in tests and generators: ``facts("R(a,b) R(b,a)")``."""
    found = re.findall(rf"({_IDENT})\(([^)]*)\)", text)
    return Instance((r, tuple(a.strip() for a in args.split(","))) for r, args in found)

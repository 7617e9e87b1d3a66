"""EL / ELI concepts (optionally with bottom) as a hash-consed DAG.

Besides syntax this module holds the semantic machinery on instances:
extensions, maximal simulations with separating concepts, characteristic
concepts, totality and definability of value sets.
"""
from __future__ import annotations

import hashlib
import itertools
import re
import threading
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import DialectError, InvariantViolation, ParseError, PreconditionError, ResourceLimit
from .relational import LIMITS, Instance, PointedInstance, Schema


# -- dialects ---------------------------------------------------------------

@dataclass(frozen=True)
class Dialect:
    name: str
    inverses: bool
    bottom: bool

    def __str__(self):
        return self.name

    def roles(self, schema: Schema):
        out = [(r, False) for r in schema.symbols_of_arity(2)]
        if self.inverses:
            out += [(r, True) for r in schema.symbols_of_arity(2)]
        return out

    def without_bottom(self):
        return ELI if self.inverses else EL


EL = Dialect("EL", False, False)
ELI = Dialect("ELI", True, False)
EL_BOT = Dialect("ELbot", False, True)
ELI_BOT = Dialect("ELIbot", True, True)
DIALECTS = {d.name: d for d in (EL, ELI, EL_BOT, ELI_BOT)}
DIALECTS.update({"EL⊥": EL_BOT, "ELI⊥": ELI_BOT})


def dialect(name) -> Dialect:
    if isinstance(name, Dialect):
        return name
    try:
        return DIALECTS[name]
    except KeyError:
        raise DialectError(f"unknown dialect {name!r}") from None


# -- the concept store ------------------------------------------------------

_KIND_RANK = {"top": 0, "bot": 1, "name": 2, "ex": 3, "and": 4}


class Concept:
    """Interned concept node; build with the constructor functions below."""

    __slots__ = ("kind", "name", "inverse", "children", "uid", "digest", "__weakref__")

    def __repr__(self):
        try:
            return f"Concept({to_text(self, max_size=200)})"
        except ResourceLimit:
            return f"Concept(<{self.kind} node #{self.uid}>)"

    def __str__(self):
        return to_text(self)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.name or "", self.inverse, self.digest)

    @property
    def child(self):
        return self.children[0]


_store: dict = {}
_lock = threading.Lock()


def _intern(kind, name, inverse, children):
    key = (kind, name, inverse, tuple(c.uid for c in children))
    node = _store.get(key)
    if node is not None:
        return node
    with _lock:
        node = _store.get(key)
        if node is None:
            node = Concept()
            node.kind, node.name, node.inverse, node.children = kind, name, inverse, tuple(children)
            node.uid = len(_store)
            h = hashlib.blake2b(digest_size=12)
            h.update(f"{kind}|{name}|{inverse}|".encode())
            for c in children:
                h.update(c.digest)
            node.digest = h.digest()
            _store[key] = node
    return node


TOP = _intern("top", None, False, ())
BOTTOM = _intern("bot", None, False, ())


def name(a: str) -> Concept:
    return _intern("name", a, False, ())


def exists(role: str, child: Concept, inverse: bool = False) -> Concept:
    return _intern("ex", role, bool(inverse), (child,))


def conj(*parts) -> Concept:
    """Conjunction, flattened, deduplicated and sorted; ⊤ is dropped, ⊥ absorbs."""
    flat = {}
    stack = list(parts)
    while stack:
        c = stack.pop()
        if isinstance(c, (list, tuple, set, frozenset)):
            stack.extend(c)
        elif c.kind == "and":
            stack.extend(c.children)
        elif c.kind == "bot":
            return BOTTOM
        elif c.kind != "top":
            flat[c.uid] = c
    if not flat:
        return TOP
    if len(flat) == 1:
        return next(iter(flat.values()))
    return _intern("and", None, False, tuple(sorted(flat.values(), key=Concept.sort_key)))


def postorder(c: Concept):
    """Distinct nodes below ``c``, children before parents."""
    seen = set()
    out = []
    stack = [(c, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if node.uid in seen:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for ch in node.children:
            if ch.uid not in seen:
                stack.append((ch, False))
    return out


def role_depth(c: Concept) -> int:
    depth = {}
    for n in postorder(c):
        if n.kind == "ex":
            depth[n.uid] = 1 + depth[n.child.uid]
        elif n.kind == "and":
            depth[n.uid] = max(depth[ch.uid] for ch in n.children)
        else:
            depth[n.uid] = 0
    return depth[c.uid]


def outdegree(c: Concept) -> int:
    best = 0
    for n in postorder(c):
        if n.kind == "and":
            best = max(best, sum(1 for ch in n.children if ch.kind == "ex"))
        elif n.kind == "ex":
            best = max(best, 1)
    return best


def tree_size(c: Concept) -> int:
    size = {}
    for n in postorder(c):
        if n.kind == "ex":
            size[n.uid] = 1 + size[n.child.uid]
        elif n.kind == "and":
            size[n.uid] = len(n.children) - 1 + sum(size[ch.uid] for ch in n.children)
        else:
            size[n.uid] = 1
    return size[c.uid]


def dag_size(c: Concept) -> int:
    """Succinct size: symbols counted once per distinct node."""
    total = 0
    for n in postorder(c):
        total += len(n.children) if n.kind == "and" else 1
    return total


def signature(c: Concept):
    """Concept and role names used by ``c``."""
    names, roles = set(), set()
    for n in postorder(c):
        if n.kind == "name":
            names.add(n.name)
        elif n.kind == "ex":
            roles.add((n.name, n.inverse))
    return names, roles


def in_dialect(c: Concept, d: Dialect) -> bool:
    for n in postorder(c):
        if n.kind == "bot" and not d.bottom:
            return False
        if n.kind == "ex" and n.inverse and not d.inverses:
            return False
    return True


# -- text syntax ------------------------------------------------------------

def to_text(c: Concept, max_size: int = 10**6) -> str:
    if tree_size(c) > max_size:
        raise ResourceLimit(f"concept tree has more than {max_size} symbols; use the succinct form")
    text = {}
    for n in postorder(c):
        if n.kind == "top":
            text[n.uid] = "TOP"
        elif n.kind == "bot":
            text[n.uid] = "BOT"
        elif n.kind == "name":
            text[n.uid] = n.name
        elif n.kind == "ex":
            text[n.uid] = f"EX {n.name}{'-' if n.inverse else ''}. {text[n.child.uid]}"
        else:
            text[n.uid] = "(" + " AND ".join(text[ch.uid] for ch in n.children) + ")"
    return text[c.uid]


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\.)|(-)|([A-Za-z0-9_]+))")
_KEYWORDS = {"TOP", "BOT", "AND", "EX"}


def _tokens(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r} in concept")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


def parse_concept(text: str) -> Concept:
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseError(f"expected {expected or 'a token'} in concept, got {tok!r}")
        pos += 1
        return tok

    def parse():
        tok = take()
        if tok == "TOP":
            return TOP
        if tok == "BOT":
            return BOTTOM
        if tok == "EX":
            role = take()
            if role in _KEYWORDS or not re.fullmatch(r"[A-Za-z0-9_]+", role):
                raise ParseError(f"bad role name {role!r}")
            inverse = False
            if peek() == "-":
                take()
                inverse = True
            take(".")
            return exists(role, parse(), inverse)
        if tok == "(":
            parts = [parse()]
            while peek() == "AND":
                take()
                parts.append(parse())
            take(")")
            return conj(*parts)
        if tok in _KEYWORDS or not re.fullmatch(r"[A-Za-z0-9_]+", tok):
            raise ParseError(f"unexpected token {tok!r} in concept")
        return name(tok)

    result = parse()
    if pos != len(toks):
        raise ParseError(f"trailing tokens in concept: {' '.join(toks[pos:])}")
    return result


# -- instances as interpretations -------------------------------------------

class Interpretation:
    """Unary/binary view of an instance with successor maps per role."""

    def __init__(self, inst: Instance, schema: Schema | None = None):
        schema = inst.schema if schema is None else schema.union(inst.schema)
        if schema.max_arity > 2:
            raise DialectError("description logic operations need unary and binary symbols only")
        self.inst = inst
        self.schema = schema
        self.domain = inst.adom
        self.labels = {d: set() for d in self.domain}
        self.ext = {a: set() for a in schema.symbols_of_arity(1)}
        self.succ = {}
        for r in schema.symbols_of_arity(2):
            self.succ[(r, False)] = {}
            self.succ[(r, True)] = {}
        for rel, args in inst.facts:
            if len(args) == 1:
                self.ext[rel].add(args[0])
                self.labels[args[0]].add(rel)
            else:
                a, b = args
                self.succ[(rel, False)].setdefault(a, []).append(b)
                self.succ[(rel, True)].setdefault(b, []).append(a)

    def successors(self, role, d):
        return self.succ.get(role, {}).get(d, ())


@lru_cache(maxsize=512)
def interpretation(inst: Instance) -> Interpretation:
    return Interpretation(inst)


def extension(c: Concept, inst, cache=None) -> frozenset:
    """Extension of ``c`` in an instance; every node of the DAG is evaluated once.

    ``cache`` (a dict) may be shared across calls on the same instance.
    """
    interp = inst if isinstance(inst, Interpretation) else interpretation(inst)
    if not interp.domain:
        return frozenset()
    memo = {} if cache is None else cache
    if c.uid in memo:
        return memo[c.uid]
    dom = frozenset(interp.domain)
    for n in postorder(c):
        if n.uid in memo:
            continue
        if n.kind == "top":
            val = dom
        elif n.kind == "bot":
            val = frozenset()
        elif n.kind == "name":
            val = frozenset(interp.ext.get(n.name, ()))
        elif n.kind == "and":
            kids = sorted((memo[ch.uid] for ch in n.children), key=len)
            val = kids[0].intersection(*kids[1:])
        else:
            target = memo[n.child.uid]
            # d ∈ ∃R.C iff some R-successor of d lies in C
            back = interp.succ.get((n.name, not n.inverse), {})
            val = frozenset(d for e in target for d in back.get(e, ()))
        memo[n.uid] = val
    return memo[c.uid]


# -- simulations ------------------------------------------------------------

@dataclass
class SimulationResult:
    relation: dict               # d -> set of e with (d, e) in the maximal simulation
    separators: dict = field(default_factory=dict)   # (d, e) -> Concept, for excluded pairs
    rounds: int = 0              # deletion rounds until the fixpoint

    def holds(self, d, e) -> bool:
        return e in self.relation.get(d, ())

    def pairs(self):
        return {(d, e) for d, es in self.relation.items() for e in es}


def max_simulation(src: Instance, dst: Instance, dl: Dialect, separators: bool = True,
                   schema: Schema | None = None) -> SimulationResult:
    """Maximal simulation from ``src`` to ``dst`` by round-wise elimination."""
    dl = dialect(dl)
    schema = (schema or Schema()).union(src.schema, dst.schema)
    I = Interpretation(src, schema)
    J = Interpretation(dst, schema)
    roles = dl.roles(schema)
    J_dom = J.domain
    Z = {}
    sep = {}
    for d in I.domain:
        need = I.labels[d]
        Z[d] = {e for e in J_dom if need <= J.labels[e]}
        if separators:
            for e in J_dom:
                if e not in Z[d]:
                    sep[(d, e)] = name(min(need - J.labels[e]))
    # predecessors in the source, for re-checking only affected pairs
    preds = {d: set() for d in I.domain}
    for role in roles:
        for d, ss in I.succ[role].items():
            for d2 in ss:
                preds[d2].add(d)
    rounds = 0
    dirty = set(I.domain)
    while dirty:
        deleted = []
        for d in I.domain:
            if d not in dirty:
                continue
            for e in Z[d]:
                for role in roles:
                    cause = None
                    e_next = J.successors(role, e)
                    for d2 in I.successors(role, d):
                        z2 = Z[d2]
                        if not any(e2 in z2 for e2 in e_next):
                            cause = d2
                            break
                    if cause is not None:
                        deleted.append((d, e, role, cause))
                        break
        if not deleted:
            break
        rounds += 1
        if separators:
            for d, e, role, d2 in deleted:
                inner = conj(*[sep[(d2, e2)] for e2 in J.successors(role, e)])
                sep[(d, e)] = exists(role[0], inner, role[1])
        dirty = set()
        for d, e, _, _ in deleted:
            Z[d].discard(e)
            dirty |= preds[d]
    return SimulationResult(Z, sep, rounds)


def simulates(p: PointedInstance, q: PointedInstance, dl: Dialect) -> bool:
    """(I,d) ⪯ (J,e); vacuously true when d is outside the active domain of I."""
    (d,), (e,) = p.point, q.point
    if d not in set(p.instance.adom):
        return True
    if e not in set(q.instance.adom):
        return False
    return max_simulation(p.instance, q.instance, dl, separators=False).holds(d, e)


# -- characteristic concepts ------------------------------------------------

def reachable(interp: Interpretation, start, roles):
    seen = {start: None}
    queue = deque([start])
    while queue:
        d = queue.popleft()
        for role in roles:
            for d2 in interp.successors(role, d):
                if d2 not in seen:
                    seen[d2] = None
                    queue.append(d2)
    return list(seen)


def characteristic_concept(inst: Instance, d, depth: int, dl: Dialect, schema: Schema | None = None) -> Concept:
    dl = dialect(dl)
    interp = Interpretation(inst, schema)
    if d not in interp.labels:
        raise PreconditionError(f"{d!r} is not in the active domain")
    roles = dl.roles(interp.schema)
    values = reachable(interp, d, roles)
    base = {v: conj(*[name(a) for a in sorted(interp.labels[v])]) for v in values}
    level = dict(base)
    for _ in range(depth):
        nxt = {}
        for v in values:
            parts = [base[v]]
            for role in roles:
                for v2 in interp.successors(role, v):
                    parts.append(exists(role[0], level[v2], role[1]))
            nxt[v] = conj(*parts)
        if nxt == level:
            # a fixpoint of the unfolding (only happens without role successors)
            break
        level = nxt
    return level[d]


# -- totality ---------------------------------------------------------------

TOP_VALUE = "t"


def universal_instance(schema: Schema) -> Instance:
    """One value carrying every concept name and a loop for every role name."""
    if schema.max_arity > 2:
        raise DialectError("description logic operations need unary and binary symbols only")
    facts = [(a, (TOP_VALUE,)) for a in schema.symbols_of_arity(1)]
    facts += [(r, (TOP_VALUE, TOP_VALUE)) for r in schema.symbols_of_arity(2)]
    return Instance(facts, schema)


def is_l_total(inst: Instance, d, dl: Dialect, schema: Schema | None = None) -> bool:
    schema = inst.schema if schema is None else schema.union(inst.schema)
    if d not in set(inst.adom):
        raise PreconditionError(f"{d!r} is not in the active domain")
    top = universal_instance(schema)
    if not top.facts:
        return True
    return max_simulation(top, inst, dl, separators=False, schema=schema).holds(TOP_VALUE, d)


# -- products for concepts --------------------------------------------------

def minimal_factors(factors, dl: Dialect, schema: Schema | None = None):
    """Drop factors (I,d) some other kept factor simulates into.

    A product with a simulated-into factor removed is simulation-equivalent to
    the full product, so concept membership of the point is unchanged.
    """
    dl = dialect(dl)
    sims = {}

    def sim(a, b):
        (ia, da), (ib, db) = a, b
        key = (id(ia), id(ib))
        if key not in sims:
            sims[key] = max_simulation(ia, ib, dl, separators=False, schema=schema)
        return sims[key].holds(da, db)

    kept = list(dict.fromkeys(factors))
    i = 0
    while i < len(kept):
        f = kept[i]
        if any(g is not f and sim(g, f) for g in kept):
            kept.pop(i)
        else:
            i += 1
    return kept


def pointed_product(factors, dl: Dialect, schema: Schema | None = None, max_values=None) -> PointedInstance:
    """Direct product of pointed instances, restricted to what the point reaches
    along the dialect's roles.  Concept membership of reached values is the same
    as in the full product."""
    dl = dialect(dl)
    max_values = LIMITS.max_product_values if max_values is None else max_values
    schema = (schema or Schema()).union(*[inst.schema for inst, _ in factors])
    interps = [Interpretation(inst, schema) for inst, _ in factors]
    roles = dl.roles(schema)
    point = tuple(d for _, d in factors)
    facts = []
    seen = {point: None}
    queue = deque([point])
    while queue:
        t = queue.popleft()
        common = set.intersection(*[interps[i].labels.get(v, set()) for i, v in enumerate(t)])
        facts.extend((a, (t,)) for a in sorted(common))
        for role in roles:
            lists = [interps[i].successors(role, v) for i, v in enumerate(t)]
            if not all(lists):
                continue
            for t2 in itertools.product(*lists):
                facts.append((role[0], (t2, t) if role[1] else (t, t2)))
                if t2 not in seen:
                    seen[t2] = None
                    if len(seen) > max_values:
                        raise ResourceLimit(f"product exceeds {max_values} values")
                    queue.append(t2)
    return PointedInstance(Instance(facts, schema), (point,))


# -- definability -----------------------------------------------------------

class _Undefinable:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNDEFINABLE"

    def __bool__(self):
        return False


UNDEFINABLE = _Undefinable()


def definable_concept(inst: Instance, X, dl: Dialect, schema: Schema | None = None):
    """A concept whose extension in ``inst`` is exactly ``X``, or UNDEFINABLE."""
    dl = dialect(dl)
    schema = inst.schema if schema is None else schema.union(inst.schema)
    X = frozenset(X)
    dom = inst.adom
    if not X <= set(dom):
        raise PreconditionError("value set is not inside the active domain")
    if not X and dl.bottom:
        return BOTTOM
    if X == frozenset(dom):
        return TOP
    if not X:
        src = PointedInstance(universal_instance(schema), (TOP_VALUE,))
    else:
        factors = minimal_factors([(inst, d) for d in dom if d in X], dl, schema)
        src = pointed_product(factors, dl, schema)
    (pt,) = src.point
    if pt not in set(src.instance.adom):
        # a point with no facts satisfies only ⊤, which is not X
        return UNDEFINABLE
    sim = max_simulation(src.instance, inst, dl, schema=schema)
    outside = [e for e in dom if e not in X]
    if any(sim.holds(pt, e) for e in outside):
        return UNDEFINABLE
    result = conj(*[sim.separators[(pt, e)] for e in outside])
    got = extension(result, Interpretation(inst, schema))
    if got != X:
        raise InvariantViolation(f"definable_concept produced extension {set(got)} for {set(X)}")
    return result

"""Tuple-generating dependencies: syntax, classes, model checking and the chase."""
from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass

from .errors import ParseError, PreconditionError, ResourceLimit, UsageError
from .homomorphism import HomChecker, hom_exists, project_homomorphisms
from .relational import ConjunctiveQuery, Instance, Schema

FULL = "full"
GUARDED = "guarded"
FRONTIER_GUARDED = "frontier-guarded"
FRONTIER_ONE = "frontier-one"
IND = "IND"


def _atoms(atoms):
    return tuple(dict.fromkeys((rel, tuple(args)) for rel, args in atoms))


def _vars(atoms):
    return tuple(dict.fromkeys(v for _, args in atoms for v in args))


@dataclass(frozen=True)
class TGD:
    body: tuple
    head: tuple

    def __post_init__(self):
        object.__setattr__(self, "body", _atoms(self.body))
        object.__setattr__(self, "head", _atoms(self.head))
        if not self.body or not self.head:
            raise UsageError("a TGD needs a non-empty body and head")
        arity = {}
        for rel, args in self.body + self.head:
            if arity.setdefault(rel, len(args)) != len(args):
                raise UsageError(f"symbol {rel} used with two arities")

    @property
    def body_vars(self):
        return _vars(self.body)

    @property
    def head_vars(self):
        return _vars(self.head)

    @property
    def frontier(self) -> tuple:
        hv = set(self.head_vars)
        return tuple(v for v in self.body_vars if v in hv)

    @property
    def existentials(self) -> tuple:
        bv = set(self.body_vars)
        return tuple(v for v in self.head_vars if v not in bv)

    @property
    def schema(self) -> Schema:
        return Schema((rel, len(args)) for rel, args in self.body + self.head)

    def body_query(self) -> ConjunctiveQuery:
        return ConjunctiveQuery(self.frontier, self.body)

    def head_query(self) -> ConjunctiveQuery:
        return ConjunctiveQuery(self.frontier, self.head)

    def __str__(self):
        return format_tgd(self)


def classify(rule: TGD) -> frozenset:
    flags = set()
    if not rule.existentials:
        flags.add(FULL)
    body_vars = set(rule.body_vars)
    frontier = set(rule.frontier)
    if any(set(args) >= body_vars for _, args in rule.body):
        flags.add(GUARDED)
    if any(set(args) >= frontier for _, args in rule.body):
        flags.add(FRONTIER_GUARDED)
    if len(frontier) <= 1:
        flags.add(FRONTIER_ONE)
    if len(rule.body) == 1 and len(rule.head) == 1:
        flags.add(IND)
    return frozenset(flags)


CLASS_FLAG = {"GTGD": GUARDED, "FGTGD": FRONTIER_GUARDED, "F1TGD": FRONTIER_ONE, "FULL": FULL,
              "FullTGD": FULL, "IND": IND, "TGD": None}


def in_class(rule: TGD, cls: str) -> bool:
    try:
        flag = CLASS_FLAG[cls]
    except KeyError:
        raise UsageError(f"unknown TGD class {cls!r}") from None
    return flag is None or flag in classify(rule)


# -- text format ------------------------------------------------------------

_IDENT = r"[A-Za-z0-9_]+"
_ATOM = re.compile(rf"\s*({_IDENT})\s*\(\s*({_IDENT}(?:\s*,\s*{_IDENT})*)?\s*\)\s*")


def _parse_atoms(text, where):
    atoms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _ATOM.match(text, pos)
        if not m or not m.group(2):
            raise ParseError(f"cannot parse {where} near {text[pos:][:30]!r}")
        atoms.append((m.group(1), tuple(a.strip() for a in m.group(2).split(","))))
        pos = m.end()
        if pos < len(text):
            if text[pos] not in ",&":
                raise ParseError(f"expected ',' between atoms in {where}")
            pos += 1
    if not atoms:
        raise ParseError(f"empty {where}")
    return atoms


def parse_tgd(text: str) -> TGD:
    if text.count("->") != 1:
        raise ParseError(f"expected exactly one '->' in {text.strip()!r}")
    left, right = text.split("->")
    body = _parse_atoms(left, "body")
    right = right.strip()
    declared = None
    m = re.match(rf"exists\s+((?:{_IDENT}\s*)+)\.", right)
    if m:
        declared = m.group(1).split()
        right = right[m.end():]
    head = _parse_atoms(right, "head")
    try:
        rule = TGD(body, head)
    except UsageError as exc:
        raise ParseError(str(exc)) from None
    if declared is not None:
        clash = set(declared) & set(rule.body_vars)
        if clash:
            raise ParseError(f"existential variables {sorted(clash)} also occur in the body")
        undeclared = set(rule.existentials) - set(declared)
        if undeclared:
            raise ParseError(f"head variables {sorted(undeclared)} are neither in the body nor declared")
    return rule


def _atom_str(atom):
    rel, args = atom
    return f"{rel}({','.join(args)})"


def format_tgd(rule: TGD) -> str:
    head = ", ".join(_atom_str(a) for a in rule.head)
    if rule.existentials:
        head = f"exists {' '.join(rule.existentials)}. {head}"
    return f"{', '.join(_atom_str(a) for a in rule.body)} -> {head}"


@dataclass(frozen=True)
class TgdOntology:
    tgds: tuple

    def __post_init__(self):
        object.__setattr__(self, "tgds", tuple(dict.fromkeys(self.tgds)))

    def __iter__(self):
        return iter(self.tgds)

    def __len__(self):
        return len(self.tgds)

    def __str__(self):
        return "\n".join(format_tgd(r) for r in self.tgds)

    @property
    def schema(self) -> Schema:
        s = Schema()
        for r in self.tgds:
            s = s.union(r.schema)
        return s

    def in_class(self, cls) -> bool:
        return all(in_class(r, cls) for r in self.tgds)


def parse_tgds(text: str) -> TgdOntology:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rules.append(parse_tgd(line))
        except ParseError as exc:
            raise ParseError(str(exc), lineno) from None
    return TgdOntology(tuple(rules))


# -- canonical forms --------------------------------------------------------

def canonical_form(body, head=(), fixed=()):
    """Name-independent key of a pair of atom sets.

    Variables in ``fixed`` keep their position-based identity; the others are
    coloured by iterated occurrence profiles and the least renaming among
    colour-respecting permutations is taken.
    """
    body, head = _atoms(body), _atoms(head)
    fixed = tuple(fixed)
    variables = [v for v in dict.fromkeys(_vars(body) + _vars(head)) if v not in fixed]
    sided = [(0, a) for a in body] + [(1, a) for a in head]
    colour = {v: ("a", i) for i, v in enumerate(fixed)}
    colour.update({v: ("v",) for v in variables})
    n_classes = -1
    while True:
        occ = {v: [] for v in variables}
        for side, (rel, args) in sided:
            pattern = tuple(colour[u] for u in args)
            for p, v in enumerate(args):
                if v in occ:
                    occ[v].append((side, rel, p, pattern))
        new = {v: ("v", tuple(sorted(occ[v]))) for v in variables}
        ranks = {c: i for i, c in enumerate(sorted(set(new.values())))}
        for v in variables:
            colour[v] = ("v", ranks[new[v]])
        if len(ranks) == n_classes:
            break
        n_classes = len(ranks)
    groups = {}
    for v in variables:
        groups.setdefault(colour[v], []).append(v)
    ordered_groups = [groups[k] for k in sorted(groups)]
    count = 1
    for g in ordered_groups:
        count *= math.factorial(len(g))
    if count > 200000:
        raise ResourceLimit(f"canonical form would try {count} renamings")
    fixed_names = {v: ("a", i) for i, v in enumerate(fixed)}
    best = None
    for choice in itertools.product(*[itertools.permutations(g) for g in ordered_groups]):
        names = dict(fixed_names)
        k = 0
        for group in choice:
            for v in group:
                names[v] = ("v", k)
                k += 1
        key = (tuple(sorted((r, tuple(names[v] for v in a)) for r, a in body)),
               tuple(sorted((r, tuple(names[v] for v in a)) for r, a in head)))
        if best is None or key < best:
            best = key
    return best


def tgd_key(rule: TGD):
    return canonical_form(rule.body, rule.head)


def cq_key(q: ConjunctiveQuery):
    return canonical_form(q.atoms, (), q.answer_vars)


def isomorphic_cq(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    return len(q1.answer_vars) == len(q2.answer_vars) and cq_key(q1) == cq_key(q2)


def rename_canonically(rule: TGD, body_prefix="x", exist_prefix="z") -> TGD:
    names = {v: f"{body_prefix}{i + 1}" for i, v in enumerate(rule.body_vars)}
    names.update({v: f"{exist_prefix}{i + 1}" for i, v in enumerate(rule.existentials)})
    return TGD([(r, tuple(names[v] for v in a)) for r, a in rule.body],
               [(r, tuple(names[v] for v in a)) for r, a in rule.head])


# -- semantics --------------------------------------------------------------

def model_check(inst: Instance, rule: TGD) -> bool:
    frontier = rule.frontier
    body = Instance(rule.body)
    head = Instance(rule.head)
    checker = None
    for answer in project_homomorphisms(body, frontier, inst):
        if checker is None:
            checker = HomChecker(head, inst)
        if not checker.exists(dict(zip(frontier, answer))):
            return False
    return True


def satisfies(inst: Instance, onto) -> bool:
    rules = [onto] if isinstance(onto, TGD) else list(onto)
    return all(model_check(inst, r) for r in rules)


def first_violation(inst: Instance, onto):
    for r in onto:
        if not model_check(inst, r):
            return r
    return None


@dataclass
class ChaseResult:
    instance: Instance
    saturated: bool
    rounds: int
    nulls: int


def _fresh_null(counter, taken):
    while True:
        counter[0] += 1
        cand = f"_n{counter[0]}"
        if cand not in taken:
            return cand


def _triggers(inst, onto, fired):
    rank = {v: i for i, v in enumerate(inst.adom)}
    out = []
    for idx, rule in enumerate(onto):
        answers = project_homomorphisms(Instance(rule.body), rule.frontier, inst)
        for ans in sorted(answers, key=lambda t: [rank[v] for v in t]):
            if (idx, ans) not in fired:
                out.append((idx, ans))
    return out


def chase(inst: Instance, onto, max_rounds: int = 8, max_facts: int = 10**5, stop=None) -> ChaseResult:
    """Oblivious chase in rounds.

    Each round collects every trigger (rule, frontier tuple) of the current
    instance that has not fired yet and fires all of them.  ``stop`` is an
    optional predicate on the instance checked after each round.
    """
    rules = list(onto)
    schema = inst.schema
    for r in rules:
        schema = schema.union(r.schema)
    facts = dict.fromkeys(inst.facts)
    taken = set(inst.adom)
    fired = set()
    counter = [0]
    current = Instance(facts, schema)
    rounds = 0
    while True:
        if stop is not None and stop(current):
            return ChaseResult(current, False, rounds, counter[0])
        pending = _triggers(current, rules, fired)
        if not pending:
            return ChaseResult(current, True, rounds, counter[0])
        if rounds >= max_rounds:
            return ChaseResult(current, False, rounds, counter[0])
        rounds += 1
        for idx, ans in pending:
            fired.add((idx, ans))
            rule = rules[idx]
            assign = dict(zip(rule.frontier, ans))
            for z in rule.existentials:
                assign[z] = _fresh_null(counter, taken)
                taken.add(assign[z])
            for rel, args in rule.head:
                facts[(rel, tuple(assign[v] for v in args))] = None
            if len(facts) > max_facts:
                return ChaseResult(Instance(facts, schema), False, rounds, counter[0])
        current = Instance(facts, schema)


class Answer(enum.Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


def entails_with_rounds(onto, rule: TGD, max_rounds: int = 8, max_facts: int = 10**5):
    """(answer, rounds used) for ``onto ⊨ rule`` by chasing the body."""
    frontier = rule.frontier
    head = Instance(rule.head)
    fixed = {v: v for v in frontier}

    def matched(inst):
        return hom_exists(head, inst, fixed)

    result = chase(Instance(rule.body), onto, max_rounds, max_facts, stop=matched)
    if matched(result.instance):
        return Answer.YES, result.rounds
    if result.saturated:
        return Answer.NO, result.rounds
    return Answer.UNKNOWN, result.rounds


def entails(onto, rule: TGD, max_rounds: int = 8, max_facts: int = 10**5) -> Answer:
    return entails_with_rounds(onto, rule, max_rounds, max_facts)[0]


def frontier_one_rewrite(rule: TGD) -> TGD:
    """Satisfaction-equivalent variant of a TGD without frontier variables
    that has exactly one frontier variable."""
    if rule.frontier:
        raise PreconditionError("frontier_one_rewrite needs a TGD with an empty frontier")
    rel, args = rule.body[0]
    x = args[0]
    taken = set(rule.body_vars) | set(rule.head_vars)
    fresh = {}
    k = 0
    for v in args:
        if v != x and v not in fresh:
            k += 1
            while f"v{k}" in taken:
                k += 1
            fresh[v] = f"v{k}"
            taken.add(fresh[v])
    copy = (rel, tuple(x if v == x else fresh[v] for v in args))
    return TGD(rule.body, rule.head + (copy,))


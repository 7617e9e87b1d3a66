"""Named instances, instance families and random fitting corpora."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from importlib import resources

from .errors import UsageError
from .relational import Instance, Schema, facts, parse_facts
from .tgd import TGD, TgdOntology, parse_tgds


def primes(n):
    out = []
    k = 2
    while len(out) < n:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 1
    return out


def lasso(m: int, tag=None):
    """Path a0 .. a(2m-1) closing into a cycle at a(m), which carries P."""
    tag = m if tag is None else tag
    val = [f"a{i}_{tag}" for i in range(2 * m)]
    out = [("R", (val[i], val[i + 1])) for i in range(2 * m - 1)]
    out += [("R", (val[2 * m - 1], val[m])), ("P", (val[m],))]
    return out, val[0]


def gen_lasso(n: int) -> Instance:
    if n < 1:
        raise UsageError("lasso family needs n >= 1")
    out = []
    for p in primes(n):
        part, start = lasso(p)
        out += part + [("A", (start,))]
    return Instance(out)


def gen_ind_family(n: int) -> Instance:
    """For each i <= n: S over 2n fresh values, and two R copies with a
    fresh value at position 2i-1 and at position 2i respectively."""
    if n < 1:
        raise UsageError("IND family needs n >= 1")
    out = []
    for i in range(1, n + 1):
        a = [f"a{i}_{j}" for j in range(1, 2 * n + 1)]
        b = list(a)
        b[2 * i - 2] = f"b{i}"
        c = list(a)
        c[2 * i - 1] = f"c{i}"
        out += [("S", tuple(a)), ("R", tuple(b)), ("R", tuple(c))]
    return Instance(out)


def ind_family_shapes(n: int):
    """The 2^n INDs S(x1,y1,..,xn,yn) -> R(u1,v1,..) with (ui,vi) = (xi,zi) or (zi,yi)."""
    body = tuple(v for i in range(1, n + 1) for v in (f"x{i}", f"y{i}"))
    out = []
    for choice in itertools.product((0, 1), repeat=n):
        head = []
        for i, c in enumerate(choice, 1):
            head += [f"x{i}", f"z{i}"] if c == 0 else [f"z{i}", f"y{i}"]
        out.append(TGD([("S", body)], [("R", tuple(head))]))
    return out


def rho(n: int) -> TGD:
    """A length-n R-cycle through x1 forces a loop at x1."""
    if n < 1:
        raise UsageError("rho needs n >= 1")
    xs = [f"x{i}" for i in range(1, n + 1)]
    body = [("R", (xs[i], xs[(i + 1) % n])) for i in range(n)]
    return TGD(body, [("R", ("x1", "x1"))])


def omega_pair() -> TgdOntology:
    """Full TGDs axiomatising the bidirected pair: symmetry, 3-step
    transitivity, and totality once a loop exists."""
    rules = [TGD([("R", ("x", "y"))], [("R", ("y", "x"))]),
             TGD([("R", ("x", "y")), ("R", ("y", "z")), ("R", ("z", "u"))], [("R", ("x", "u"))])]
    for ty, tz in itertools.product((0, 1), repeat=2):
        body = [("R", ("x", "x")),
                ("R", ("u1", "y")) if ty == 0 else ("R", ("y", "u1")),
                ("R", ("u2", "z")) if tz == 0 else ("R", ("z", "u2"))]
        rules.append(TGD(body, [("R", ("y", "z"))]))
    return TgdOntology(tuple(rules))


@dataclass
class FittingInstance:
    positives: list
    negatives: list

    def __iter__(self):
        return iter((self.positives, self.negatives))


BIDIRECTED_PAIR = "R(a,b) R(b,a)"
DIRECTED_TRIANGLE = "R(a,b) R(b,c) R(c,a)"
BIDIRECTED_TRIANGLE = "R(a,b) R(b,c) R(c,a) R(b,a) R(c,b) R(a,c)"


def gen_named(name: str, n=None):
    """Catalog entries: fitting instances, instances and rule sets."""
    if name == "example1":
        return FittingInstance([facts(BIDIRECTED_PAIR)], [facts(DIRECTED_TRIANGLE)])
    if name == "example1-prime":
        return FittingInstance([facts(BIDIRECTED_PAIR)], [facts(BIDIRECTED_TRIANGLE)])
    if name == "bottom-example":
        return FittingInstance([facts("R(a,b)")], [facts("R(a,a)")])
    if name == "fullhead-example":
        return FittingInstance([facts("A(a) B1(a) B2(a)")], [facts("A(a) B1(a)"), facts("A(a) B2(a)")])
    if name == "bidirected-pair":
        return facts(BIDIRECTED_PAIR)
    if name == "clique3":
        return facts(BIDIRECTED_TRIANGLE)
    if name == "omega_I":
        return omega_pair()
    if name == "rho":
        return rho(3 if n is None else n)
    if name == "lasso":
        return gen_lasso(1 if n is None else n)
    if name == "ind-family":
        return gen_ind_family(2 if n is None else n)
    raise UsageError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG)}")


CATALOG = ("example1", "example1-prime", "bottom-example", "fullhead-example", "bidirected-pair", "clique3",
           "omega_I", "rho", "lasso", "ind-family")


def fixture_text(filename: str) -> str:
    return resources.files("ontofit").joinpath("fixtures", filename).read_text(encoding="utf-8")


def load_fixture(filename: str):
    text = fixture_text(filename)
    if filename.endswith(".tgd"):
        return parse_tgds(text)
    return parse_facts(text).instance


# -- random corpora ---------------------------------------------------------

def random_instance(rng: random.Random, schema: Schema, max_values: int = 3, density: float = 0.35,
                    prefix: str = "v") -> Instance:
    """Random non-empty instance over at most ``max_values`` values."""
    k = rng.randint(1, max_values)
    vals = [f"{prefix}{i}" for i in range(k)]
    pool = [(rel, args) for rel, a in schema.items() for args in itertools.product(vals, repeat=a)]
    chosen = [f for f in pool if rng.random() < density]
    if not chosen:
        chosen = [rng.choice(pool)]
    return Instance(chosen, schema)


def random_fitting(rng: random.Random, max_values: int = 3, max_symbols: int = 2, max_pos: int = 2,
                   max_neg: int = 2) -> FittingInstance:
    symbols = ["R", "S"][:rng.randint(1, max_symbols)]
    schema = Schema((s, 2) for s in symbols)
    P = [random_instance(rng, schema, max_values) for _ in range(rng.randint(1, max_pos))]
    N = [random_instance(rng, schema, max_values) for _ in range(rng.randint(1, max_neg))]
    return FittingInstance(P, N)


def random_corpus(size: int, seed: int = 0, **kw):
    rng = random.Random(seed)
    return [random_fitting(rng, **kw) for _ in range(size)]

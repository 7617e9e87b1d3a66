"""Command-line front end.

Reports are ``key: value`` lines on standard output.  Exit status: 0 when a
fit exists or a constraint holds, 1 when not, 2 on a resource limit, 64 on
usage errors and 65 on parse errors.
"""
from __future__ import annotations

import argparse
import sys

from . import dl_fitting, tgd_basis, tgd_fitting
from .concepts import DIALECTS, dag_size, tree_size
from .dl_fitting import ConceptInclusion, DlOntology, parse_ontology
from .errors import DialectError, ParseError, PreconditionError, ResourceLimit, UsageError
from .generators import CATALOG, FittingInstance, gen_named, random_corpus
from .relational import LIMITS, Instance, PointedInstance, format_facts, parse_facts, value_str
from .tgd import TGD, Answer, entails_with_rounds, first_violation, format_tgd, parse_tgds

EXIT_OK, EXIT_NO, EXIT_LIMIT, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 64, 65
CLASSES = ("EL", "ELI", "ELbot", "ELIbot", "GTGD", "FGTGD", "F1TGD", "FULL", "IND", "TGD")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _instance(path) -> Instance:
    try:
        return parse_facts(_read(path)).instance
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _constraints(path):
    text = _read(path)
    try:
        if "SUBCLASSOF" in text:
            return parse_ontology(text)
        return parse_tgds(text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


class Report:
    def __init__(self, out):
        self.out = out

    def line(self, key, value):
        print(f"{key}: {value}", file=self.out)


def _witness_lines(w):
    if isinstance(w, (TGD, ConceptInclusion)):
        return [w]
    return list(w)


def _size(item, succinct):
    if isinstance(item, TGD):
        return len(item.body) + len(item.head)
    metric = dag_size if succinct else tree_size
    return metric(item.lhs) + metric(item.rhs)


def _text(item):
    return format_tgd(item) if isinstance(item, TGD) else str(item)


def _cmd_fit(args, rep: Report, show_witness: bool) -> int:
    if not args.pos or not args.neg:
        raise UsageError("--pos and --neg each need at least one file")
    P = [_instance(p) for p in args.pos]
    N = [_instance(n) for n in args.neg]
    cls = args.cls
    if args.mode == "ontology":
        if cls in DIALECTS:
            verdict = dl_fitting.el_fit_ontology(P, N, cls, args.route)
        else:
            verdict = tgd_fitting.fit_ontology(P, N, cls)
    elif cls in DIALECTS:
        verdict = dl_fitting.el_fit_tgd(P, N, cls)
    else:
        verdict = tgd_fitting.fit_tgd(P, N, cls, max_subset_values=args.max_subsets)
    rep.line("status", verdict.status)
    rep.line("class", cls)
    rep.line("mode", args.mode)
    if verdict.note:
        rep.line("note", verdict.note)
    if verdict.exists:
        items = _witness_lines(verdict.witness)
        rep.line("witness-count", len(items))
        rep.line("witness-size", sum(_size(i, args.succinct) for i in items))
        if show_witness:
            for item in items:
                rep.line("witness", _text(item))
    else:
        rep.line("candidates", len(verdict.certificate))
        if show_witness:
            for entry in verdict.certificate:
                rep.line("candidate", _format_entry(entry))
    if verdict.resource_limited:
        return EXIT_LIMIT
    return EXIT_OK if verdict.exists else EXIT_NO


def _format_entry(entry):
    parts = []
    for k, v in entry.items():
        parts.append(f"{k}={_value_text(v)}")
    return " ".join(parts)


def _value_text(v):
    if isinstance(v, tuple):
        return "(" + ",".join(_value_text(x) for x in v) + ")"
    return value_str(v) if v is not None else "-"


def _cmd_basis(args, rep: Report) -> int:
    H = [_instance(p) for p in args.files]
    if args.cls in DIALECTS:
        onto = dl_fitting.el_basis(H, args.cls, compact=args.compact)
    elif args.cls == "GTGD":
        onto = tgd_basis.gtgd_basis(H, pruned=not args.unpruned, reduce=args.reduce)
    elif args.cls == "IND":
        onto = tgd_basis.ind_basis(H)
    else:
        raise UsageError(f"no finite basis construction for class {args.cls}")
    items = list(onto)
    rep.line("class", args.cls)
    rep.line("size", len(items))
    for item in items:
        rep.line("rule", _text(item))
    return EXIT_OK


def _cmd_check(args, rep: Report) -> int:
    onto = _constraints(args.constraint)
    inst = _instance(args.instance)
    if isinstance(onto, DlOntology):
        bad = dl_fitting.violated(inst, onto)
    else:
        bad = first_violation(inst, onto)
    rep.line("holds", "yes" if bad is None else "no")
    if bad is not None:
        rep.line("violated", _text(bad))
    return EXIT_OK if bad is None else EXIT_NO


def _cmd_entail(args, rep: Report) -> int:
    onto = parse_tgds(_read(args.ontology))
    goal = parse_tgds(_read(args.tgd))
    answers = set()
    for rule in goal:
        answer, rounds = entails_with_rounds(onto, rule, max_rounds=args.rounds)
        answers.add(answer)
        rep.line("entails", f"{answer.value} rounds={rounds} {format_tgd(rule)}")
    if Answer.NO in answers:
        return EXIT_NO
    return EXIT_LIMIT if Answer.UNKNOWN in answers else EXIT_OK


def _cmd_gen(args, out) -> int:
    if args.name == "random":
        corpus = random_corpus(args.n or 1, seed=args.seed)
        for k, fi in enumerate(corpus):
            _print_fitting(fi, out, f"instance {k + 1} ")
        return EXIT_OK
    obj = gen_named(args.name, args.n)
    if isinstance(obj, FittingInstance):
        _print_fitting(obj, out, "")
    elif isinstance(obj, Instance):
        out.write(format_facts(PointedInstance(obj), header=False))
    elif isinstance(obj, TGD):
        print(format_tgd(obj), file=out)
    else:
        for r in obj:
            print(format_tgd(r), file=out)
    return EXIT_OK


def _print_fitting(fi, out, prefix):
    for label, group in (("positive", fi.positives), ("negative", fi.negatives)):
        for i, inst in enumerate(group, 1):
            print(f"# {prefix}{label} {i}", file=out)
            out.write(format_facts(PointedInstance(inst), header=False))


def build_parser():
    p = _Parser(prog="ontofit", description="Fit ontologies and dependencies to data examples.")
    p.add_argument("--max-product-size", type=int, default=None,
                   help="cap on the number of values of any direct product")
    p.add_argument("--max-subsets", type=int, default=tgd_fitting.MAX_SUBSET_VALUES,
                   help="largest product domain whose subsets are enumerated (class TGD)")
    p.add_argument("--seed", type=int, default=0, help="seed for random corpora (gen random)")
    size = p.add_mutually_exclusive_group()
    size.add_argument("--succinct", dest="succinct", action="store_true", default=True,
                      help="report concept sizes as DAG sizes (default)")
    size.add_argument("--tree", dest="succinct", action="store_false", help="report concept sizes as tree sizes")
    sub = p.add_subparsers(dest="command")

    for cmd in ("fit-exists", "fit"):
        s = sub.add_parser(cmd)
        s.add_argument("--class", dest="cls", required=True, choices=CLASSES)
        s.add_argument("--mode", choices=("tgd", "ontology"), default="tgd")
        s.add_argument("--route", choices=("negatives", "basis"), default="negatives",
                       help="description logic ontologies: per-negative inclusions or the basis of the positives")
        s.add_argument("--pos", nargs="+", default=[])
        s.add_argument("--neg", nargs="+", default=[])

    s = sub.add_parser("basis")
    s.add_argument("--class", dest="cls", required=True, choices=("EL", "ELI", "ELbot", "ELIbot", "GTGD", "IND"))
    s.add_argument("--unpruned", action="store_true", help="GTGD: do not bound body size")
    s.add_argument("--reduce", action="store_true", help="GTGD: smaller equivalent heads")
    s.add_argument("--compact", action="store_true", help="description logics: fewer conjunction rules")
    s.add_argument("files", nargs="+")

    s = sub.add_parser("check")
    s.add_argument("--constraint", required=True)
    s.add_argument("--instance", required=True)

    s = sub.add_parser("entail")
    s.add_argument("--ontology", required=True)
    s.add_argument("--tgd", required=True)
    s.add_argument("--rounds", type=int, default=8)

    s = sub.add_parser("gen")
    s.add_argument("name", choices=CATALOG + ("random",))
    s.add_argument("n", nargs="?", type=int, default=None)
    return p


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr
    saved = LIMITS.max_product_values
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        if args.max_product_size is not None:
            LIMITS.max_product_values = args.max_product_size
        rep = Report(out)
        if args.command in ("fit-exists", "fit"):
            return _cmd_fit(args, rep, args.command == "fit")
        if args.command == "basis":
            return _cmd_basis(args, rep)
        if args.command == "check":
            return _cmd_check(args, rep)
        if args.command == "entail":
            return _cmd_entail(args, rep)
        return _cmd_gen(args, out)
    except ParseError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PARSE
    except (UsageError, DialectError, PreconditionError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print("status: RESOURCE-LIMIT", file=out)
        print(f"note: {exc}", file=out)
        return EXIT_LIMIT
    finally:
        LIMITS.max_product_values = saved


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front end.

Exit codes: 0 success, 1 usage or semantic error, 2 invalid graph/SEM file,
3 unknown vertex. Output is JSON on stdout unless ``--text`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Any, Sequence

from .adjustment import (
    S_SUFFICIENT,
    SelectionReport,
    blocks_all_backdoor,
    criterion_conjunctive,
    criterion_disjunctive,
    criterion_pretreatment,
    enumerate_minimal_sufficient_sets,
    prepare_candidates,
)
from .blanket import CountingOracle, UnsoundCombinationWarning, combine, reduce_alternating, verify_stability
from .cgio import GraphFormatError, read_cg
from .dsep import DSepOracle, PostTreatmentError, d_separated
from .graph import GraphError, UnknownVertexError, canonical, causal_closure, mutilate_backdoor
from .sem import InsufficientSampleError, LinearSem, SemError, ate_standardization, read_csv, sample
from .testkit import pretreatment_covariates, property_suites

EXIT_OK, EXIT_USAGE, EXIT_FILE, EXIT_VERTEX = 0, 1, 2, 3

STRUCTURAL = ("pretreatment", "conjunctive", "disjunctive")
BLANKET = ("cap", "cup", "ay", "ya", "ay-star", "ya-star")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_USAGE)


def parse_set(text: str | None) -> list[str]:
    if text is None:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def _load_graph(path: str):
    try:
        return read_cg(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_FILE) from None
    except GraphFormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_FILE) from None


def _load_data(path: str):
    try:
        return read_csv(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_USAGE) from None


def _blanket_select(g, criterion: str, s: frozenset[str]) -> tuple[frozenset[str], CountingOracle, list[str]]:
    oracle = CountingOracle(DSepOracle(g))
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnsoundCombinationWarning)
        c = _run_blanket(oracle, criterion, s)
    notes.extend(str(w.message) for w in caught)
    return c, oracle, notes


def _run_blanket(oracle, criterion: str, s: frozenset[str]) -> frozenset[str]:
    rules = {"cap": "conjunctive", "cup": "disjunctive", "ay": "ay", "ya": "ya"}
    if criterion in rules:
        return combine(oracle, rules[criterion], s)
    start = "treatment_first" if criterion == "ay-star" else "outcome_first"
    return reduce_alternating(oracle, start, s)


def cmd_dsep(args) -> dict:
    g = _load_graph(args.graph).dag
    if args.backdoor:
        g = mutilate_backdoor(g)
    xs, ys, z = parse_set(args.x), parse_set(args.y), parse_set(args.given)
    g.check(xs, ys, z)
    return {
        "query": {"x": canonical(xs), "y": canonical(ys), "given": canonical(z), "backdoor": args.backdoor},
        "separated": d_separated(g, xs, ys, z),
    }


def cmd_check(args) -> dict:
    g = _load_graph(args.graph).dag
    c = g.check(parse_set(args.set))
    return {"set": canonical(c), "sufficient": blocks_all_backdoor(g, c)}


def _default_s(g, text):
    return frozenset(parse_set(text)) if text is not None else pretreatment_covariates(g)


def cmd_select(args) -> dict:
    g = _load_graph(args.graph).dag
    s = g.check(_default_s(g, args.s))
    if args.criterion in STRUCTURAL:
        fn = {
            "pretreatment": criterion_pretreatment,
            "conjunctive": criterion_conjunctive,
            "disjunctive": criterion_disjunctive,
        }[args.criterion]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return fn(g, s).to_dict()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s, notes = prepare_candidates(g, s)
    c, oracle, more = _blanket_select(g, args.criterion, s)
    report = SelectionReport(
        criterion=args.criterion,
        input_s=s,
        output_c=c,
        sufficient=blocks_all_backdoor(g, c),
        assumption_context=S_SUFFICIENT + "; positivity",
        queries_used=oracle.calls,
        warnings=notes + more,
    )
    if args.criterion.endswith("-star"):
        report.extra["stable"] = verify_stability(DSepOracle(g), c)
    return report.to_dict()


def cmd_select_data(args) -> dict:
    from .sem import FisherZOracle

    if args.criterion in STRUCTURAL:
        raise CliError(f"criterion {args.criterion!r} needs a graph; use 'select' instead")
    if args.criterion not in BLANKET:
        raise CliError(f"unknown criterion {args.criterion!r}")
    d = _load_data(args.data)
    for col in (args.treatment, args.outcome):
        if col not in d.columns:
            raise CliError(f"data has no column {col!r}", EXIT_VERTEX)
    if args.candidates is not None:
        s = frozenset(parse_set(args.candidates))
        missing = s - set(d.columns)
        if missing:
            raise CliError("data has no column(s): " + ", ".join(sorted(missing)), EXIT_VERTEX)
    else:
        s = frozenset(d.columns) - {args.treatment, args.outcome}
    if s & {args.treatment, args.outcome}:
        raise CliError("candidates may not include the treatment or outcome")
    base = FisherZOracle(d, args.treatment, args.outcome, args.alpha)
    oracle = CountingOracle(base)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnsoundCombinationWarning)
        c = _run_blanket(oracle, args.criterion, s)
    stable = verify_stability(base, c)
    notes = [str(w.message) for w in caught]
    if not stable:
        notes.append("selected set is not stable under the boundary operators; tests may be underpowered")
    report = SelectionReport(
        criterion=args.criterion,
        input_s=s,
        output_c=c,
        sufficient="assumed: " + S_SUFFICIENT,
        assumption_context=S_SUFFICIENT + "; positivity",
        queries_used=oracle.calls,
        warnings=notes,
        extra={"stable": stable, "alpha": args.alpha, "n": d.n},
    )
    return report.to_dict()


def cmd_minimal(args) -> dict:
    g = _load_graph(args.graph).dag
    s = g.check(_default_s(g, args.s))
    sets = enumerate_minimal_sufficient_sets(g, s, cap=args.cap, jobs=args.jobs)
    return {"s": canonical(s), "minimal_sets": [canonical(c) for c in sets]}


def cmd_closure(args) -> dict:
    g = _load_graph(args.graph).dag
    h = parse_set(args.set)
    return {"set": canonical(g.check(h)), "closure": canonical(causal_closure(g, h))}


def cmd_simulate(args) -> dict:
    doc = _load_graph(args.graph)
    try:
        m = LinearSem.from_document(doc)
    except SemError as exc:
        raise CliError(f"{args.graph}: incomplete SEM parameters: {exc}", EXIT_FILE) from None
    if args.n < 1:
        raise CliError("--n must be at least 1")
    d = sample(m, args.n, args.seed, include_latent=args.include_latent)
    d.to_csv(args.out)
    return {"out": args.out, "n": d.n, "seed": args.seed, "columns": list(d.columns), "sem_id": d.sem_id}


def cmd_estimate(args) -> dict:
    d = _load_data(args.data)
    adjust = parse_set(args.adjust)
    missing = {args.treatment, args.outcome, *adjust} - set(d.columns)
    if missing:
        raise CliError("data has no column(s): " + ", ".join(sorted(missing)), EXIT_VERTEX)
    est = ate_standardization(d, adjust, args.treatment, args.outcome)
    return {
        "estimate": est,
        "n": d.n,
        "adjust": canonical(adjust),
        "treatment": args.treatment,
        "outcome": args.outcome,
    }


def cmd_suites(args) -> dict:
    return property_suites(n_random=args.n_random, seed=args.seed, out_dir=args.out_dir)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="confsel", description=__doc__.splitlines()[0])
    p.add_argument("--text", action="store_true", help="human-readable output instead of JSON")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for subset enumeration")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("dsep", help="test d-separation")
    q.add_argument("graph")
    q.add_argument("--x", required=True)
    q.add_argument("--y", required=True)
    q.add_argument("--given", default="")
    q.add_argument("--backdoor", action="store_true", help="delete edges out of the treatment first")
    q.set_defaults(func=cmd_dsep)

    q = sub.add_parser("check", help="back-door sufficiency of a set")
    q.add_argument("graph")
    q.add_argument("--set", required=True)
    q.set_defaults(func=cmd_check)

    q = sub.add_parser("select", help="select confounders using the graph")
    q.add_argument("graph")
    q.add_argument("--criterion", required=True, choices=STRUCTURAL + BLANKET)
    q.add_argument("--s", default=None, help="candidate covariates (default: observed pre-treatment)")
    q.set_defaults(func=cmd_select)

    q = sub.add_parser("select-data", help="select confounders with Fisher z tests on a CSV")
    q.add_argument("data")
    q.add_argument("--criterion", required=True)
    q.add_argument("--treatment", default="A")
    q.add_argument("--outcome", default="Y")
    q.add_argument("--alpha", type=float, default=0.05)
    q.add_argument("--candidates", default=None)
    q.set_defaults(func=cmd_select_data)

    q = sub.add_parser("minimal", help="all minimal sufficient adjustment sets")
    q.add_argument("graph")
    q.add_argument("--s", default=None)
    q.add_argument("--cap", type=int, default=20)
    q.set_defaults(func=cmd_minimal)

    q = sub.add_parser("closure", help="causal closure of a vertex set")
    q.add_argument("graph")
    q.add_argument("--set", required=True)
    q.set_defaults(func=cmd_closure)

    q = sub.add_parser("simulate", help="sample a dataset from the graph's SEM")
    q.add_argument("graph")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.add_argument("--include-latent", action="store_true")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("estimate", help="regression-adjusted treatment effect")
    q.add_argument("data")
    q.add_argument("--treatment", default="A")
    q.add_argument("--outcome", default="Y")
    q.add_argument("--adjust", default="")
    q.set_defaults(func=cmd_estimate)

    q = sub.add_parser("suites", help="run the brute-force property suites")
    q.add_argument("--n-random", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out-dir", default=None)
    q.set_defaults(func=cmd_suites)
    return p


def _text(obj: Any, indent: str = "") -> str:
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.append(_text(v, indent + "  "))
        elif isinstance(v, list) and v and isinstance(v[0], (list, dict)):
            lines.append(f"{indent}{k}:")
            for item in v:
                lines.append(indent + "  - " + (json.dumps(item, sort_keys=True) if isinstance(item, dict) else "{" + ", ".join(item) + "}"))
        elif isinstance(v, list):
            lines.append(f"{indent}{k}: {{{', '.join(map(str, v))}}}")
        else:
            lines.append(f"{indent}{k}: {v}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        result = args.func(args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except UnknownVertexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERTEX
    except (PostTreatmentError, InsufficientSampleError, GraphError, SemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for w in result.get("warnings", []) if isinstance(result, dict) else []:
        print(f"warning: {w}", file=sys.stderr)
    if args.text:
        print(_text(result))
    else:
        print(json.dumps(result, sort_keys=True))
    if args.command == "suites" and not result["passed"]:
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

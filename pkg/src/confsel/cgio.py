"""Reading and writing the line-oriented ``.cg`` graph format.

::

    # M-bias
    node A role=treatment
    node Y role=outcome
    node U1 role=covariate latent
    edge U1 A
    coef U1 A 0.8
    noise A 1.0

``coef`` and ``noise`` lines are optional and only used for simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Mapping

from .graph import IDENT, Dag, GraphError, canonical

__all__ = ["GraphFormatError", "CgDocument", "parse_cg", "read_cg", "dump_cg", "write_cg"]

ROLES = ("treatment", "outcome", "covariate")


class GraphFormatError(GraphError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class CgDocument:
    dag: Dag
    coef: Mapping[tuple[str, str], float] = field(default_factory=dict)
    noise: Mapping[str, float] = field(default_factory=dict)


def _ident(tok: str, lineno: int) -> str:
    if not IDENT.match(tok):
        raise GraphFormatError(f"invalid identifier {tok!r}", lineno)
    return tok


def _float(tok: str, lineno: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise GraphFormatError(f"expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(x):
        raise GraphFormatError(f"non-finite number {tok!r}", lineno)
    return x


def parse_cg(text: str) -> CgDocument:
    nodes: dict[str, int] = {}
    roles: dict[str, str] = {}
    latent: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    coef: dict[tuple[str, str], tuple[float, int]] = {}
    noise: dict[str, tuple[float, int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw, *args = line.split()
        if kw == "node":
            if not 2 <= len(args) <= 3:
                raise GraphFormatError("expected: node <id> role=<role> [latent]", lineno)
            name = _ident(args[0], lineno)
            if name in nodes:
                raise GraphFormatError(f"duplicate node {name}", lineno)
            if not args[1].startswith("role="):
                raise GraphFormatError(f"expected role=..., got {args[1]!r}", lineno)
            role = args[1][len("role="):]
            if role not in ROLES:
                raise GraphFormatError(f"unknown role {role!r}", lineno)
            if len(args) == 3:
                if args[2] != "latent":
                    raise GraphFormatError(f"unexpected token {args[2]!r}", lineno)
                if role != "covariate":
                    raise GraphFormatError("only covariates may be latent", lineno)
                latent.add(name)
            nodes[name] = lineno
            roles[name] = role
        elif kw == "edge":
            if len(args) != 2:
                raise GraphFormatError("expected: edge <src> <dst>", lineno)
            src, dst = (_ident(a, lineno) for a in args)
            if src == dst:
                raise GraphFormatError(f"self-loop on {src}", lineno)
            if (src, dst) in edges:
                raise GraphFormatError(f"duplicate edge {src} {dst}", lineno)
            edges[(src, dst)] = lineno
        elif kw == "coef":
            if len(args) != 3:
                raise GraphFormatError("expected: coef <src> <dst> <float>", lineno)
            key = (_ident(args[0], lineno), _ident(args[1], lineno))
            if key in coef:
                raise GraphFormatError(f"duplicate coef {key[0]} {key[1]}", lineno)
            coef[key] = (_float(args[2], lineno), lineno)
        elif kw == "noise":
            if len(args) != 2:
                raise GraphFormatError("expected: noise <id> <float>", lineno)
            name = _ident(args[0], lineno)
            if name in noise:
                raise GraphFormatError(f"duplicate noise {name}", lineno)
            value = _float(args[1], lineno)
            if value <= 0:
                raise GraphFormatError("noise variance must be positive", lineno)
            noise[name] = (value, lineno)
        else:
            raise GraphFormatError(f"unknown directive {kw!r}", lineno)

    for (src, dst), lineno in edges.items():
        for v in (src, dst):
            if v not in nodes:
                raise GraphFormatError(f"edge refers to undeclared node {v}", lineno)
    for (src, dst), (_, lineno) in coef.items():
        if (src, dst) not in edges:
            raise GraphFormatError(f"coef for missing edge {src} {dst}", lineno)
    for name, (_, lineno) in noise.items():
        if name not in nodes:
            raise GraphFormatError(f"noise for undeclared node {name}", lineno)

    treatment = [n for n, r in roles.items() if r == "treatment"]
    outcome = [n for n, r in roles.items() if r == "outcome"]
    if len(treatment) != 1:
        raise GraphFormatError(f"expected exactly one treatment node, found {len(treatment)}")
    if len(outcome) != 1:
        raise GraphFormatError(f"expected exactly one outcome node, found {len(outcome)}")
    try:
        dag = Dag(nodes, edges, treatment[0], outcome[0], latent)
    except GraphError as exc:
        raise GraphFormatError(str(exc)) from exc
    return CgDocument(
        dag,
        {k: v for k, (v, _) in coef.items()},
        {k: v for k, (v, _) in noise.items()},
    )


def read_cg(path: str | PathLike) -> CgDocument:
    return parse_cg(Path(path).read_text(encoding="utf-8"))


def dump_cg(
    g: Dag,
    coef: Mapping[tuple[str, str], float] | None = None,
    noise: Mapping[str, float] | None = None,
) -> str:
    lines = []
    for v in canonical(g.vertices):
        role = "treatment" if v == g.treatment else "outcome" if v == g.outcome else "covariate"
        lines.append(f"node {v} role={role}" + (" latent" if v in g.latent else ""))
    for src, dst in sorted(g.edges):
        lines.append(f"edge {src} {dst}")
    for (src, dst), c in sorted((coef or {}).items()):
        lines.append(f"coef {src} {dst} {c!r}")
    for v, s in sorted((noise or {}).items()):
        lines.append(f"noise {v} {s!r}")
    return "\n".join(lines) + "\n"


def write_cg(path: str | PathLike, g: Dag, coef=None, noise=None) -> None:
    Path(path).write_text(dump_cg(g, coef, noise), encoding="utf-8")

"""Back-door sufficiency checks and structural confounder-selection criteria."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable

from .dsep import _check_pretreatment, ignorability_oracle, inducing_path_exists
from .graph import Dag, GraphError, canonical, mutilate_backdoor

__all__ = [
    "ALL_RELEVANT_MEASURED",
    "S_SUFFICIENT",
    "SOME_SUBSET_SUFFICIENT",
    "SelectionReport",
    "SubsetCapExceeded",
    "blocks_all_backdoor",
    "criterion_pretreatment",
    "criterion_conjunctive",
    "criterion_disjunctive",
    "exists_sufficient_subset",
    "enumerate_minimal_sufficient_sets",
    "prepare_candidates",
]

# Assumptions under which a criterion is guaranteed to return a sufficient
# set, strongest first.
ALL_RELEVANT_MEASURED = "all relevant pre-treatment covariates measured"
S_SUFFICIENT = "S is a sufficient adjustment set"
SOME_SUBSET_SUFFICIENT = "some subset of S is sufficient (plus faithfulness)"

DEFAULT_SUBSET_CAP = 20


class SubsetCapExceeded(GraphError):
    pass


@dataclass
class SelectionReport:
    criterion: str
    input_s: frozenset[str]
    output_c: frozenset[str]
    sufficient: bool | str | None
    assumption_context: str
    queries_used: int = 0
    warnings: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "criterion": self.criterion,
            "input_s": canonical(self.input_s),
            "output_c": canonical(self.output_c),
            "sufficient": self.sufficient,
            "assumption_context": self.assumption_context,
            "queries_used": self.queries_used,
            "warnings": list(self.warnings),
        }
        d.update(self.extra)
        return d


def prepare_candidates(g: Dag, s: Iterable[str]) -> tuple[frozenset[str], list[str]]:
    """Validate a candidate set S; latent members are dropped with a warning."""
    s = g.check(s)
    if s & {g.treatment, g.outcome}:
        raise GraphError("S may not contain the treatment or outcome")
    notes = []
    hidden = s & g.latent
    if hidden:
        msg = "dropping latent vertices from S: " + ", ".join(canonical(hidden))
        warnings.warn(msg, stacklevel=3)
        notes.append(msg)
        s = s - hidden
    _check_pretreatment(g, s)
    return s, notes


def blocks_all_backdoor(g: Dag, c: Iterable[str]) -> bool:
    return ignorability_oracle(g, c)


def _report(g: Dag, name: str, s: frozenset[str], c: frozenset[str], ctx: str, notes) -> SelectionReport:
    # the verdict is always recomputed so assumption violations show up
    return SelectionReport(
        criterion=name,
        input_s=s,
        output_c=c,
        sufficient=blocks_all_backdoor(g, c),
        assumption_context=ctx,
        queries_used=1,
        warnings=list(notes),
    )


def criterion_pretreatment(g: Dag, s: Iterable[str]) -> SelectionReport:
    s, notes = prepare_candidates(g, s)
    return _report(g, "pretreatment", s, s, S_SUFFICIENT, notes)


def criterion_conjunctive(g: Dag, s: Iterable[str]) -> SelectionReport:
    """Keep covariates that are causes of both treatment and outcome."""
    s, notes = prepare_candidates(g, s)
    c = s & g.ancestors_of([g.treatment]) & g.ancestors_of([g.outcome])
    return _report(g, "conjunctive", s, c, ALL_RELEVANT_MEASURED, notes)


def criterion_disjunctive(g: Dag, s: Iterable[str]) -> SelectionReport:
    """Keep covariates that cause the treatment, the outcome, or both."""
    s, notes = prepare_candidates(g, s)
    c = s & (g.ancestors_of([g.treatment]) | g.ancestors_of([g.outcome]))
    return _report(g, "disjunctive", s, c, SOME_SUBSET_SUFFICIENT, notes)


def exists_sufficient_subset(g: Dag, s: Iterable[str]) -> bool:
    s, _ = prepare_candidates(g, s)
    rest = g.vertices - s - {g.treatment, g.outcome}
    return not inducing_path_exists(mutilate_backdoor(g), g.treatment, g.outcome, rest)


def _chunk_worker(args):
    g, items, k, found, chunk, nchunks = args
    out = []
    for i, combo in enumerate(combinations(items, k)):
        if i % nchunks != chunk:
            continue
        c = frozenset(combo)
        if any(m <= c for m in found):
            continue
        if blocks_all_backdoor(g, c):
            out.append(c)
    return out


def enumerate_minimal_sufficient_sets(
    g: Dag, s: Iterable[str], cap: int = DEFAULT_SUBSET_CAP, jobs: int = 1
) -> list[frozenset[str]]:
    """All inclusion-minimal subsets of ``s`` that block every back-door path.

    Subsets are scanned by increasing size; supersets of a set already found
    are skipped. The result is sorted lexicographically by the canonical
    (sorted) member list, independent of ``jobs``.
    """
    s, _ = prepare_candidates(g, s)
    if len(s) > cap:
        raise SubsetCapExceeded(f"|S| = {len(s)} exceeds the enumeration cap {cap}")
    items = canonical(s)
    found: list[frozenset[str]] = []
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for k in range(len(items) + 1):
            if pool is None:
                found.extend(_chunk_worker((g, items, k, found, 0, 1)))
            else:
                args = [(g, items, k, list(found), i, jobs) for i in range(jobs)]
                for part in pool.map(_chunk_worker, args):
                    found.extend(part)
    finally:
        if pool is not None:
            pool.shutdown()
    return sorted(found, key=canonical)


"""Markov blankets and boundaries of the treatment and the outcome.

Everything here talks to a conditional-independence oracle rather than a
graph, so the same code runs on d-separation, exact Gaussian partial
correlations, or hypothesis tests on data.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Literal, Protocol, Sequence, runtime_checkable

from .graph import canonical

__all__ = [
    "CIOracle",
    "CountingOracle",
    "UnsoundCombinationWarning",
    "BoundaryTrace",
    "TREATMENT",
    "OUTCOME",
    "is_treatment_blanket",
    "is_outcome_blanket",
    "boundary_pointwise",
    "boundary_stepwise",
    "boundary",
    "combine",
    "reduce_alternating",
    "verify_stability",
]

Kind = Literal["treatment", "outcome"]
TREATMENT: Kind = "treatment"
OUTCOME: Kind = "outcome"


class UnsoundCombinationWarning(UserWarning):
    """The conjunctive combination can drop confounders that must be kept."""


@runtime_checkable
class CIOracle(Protocol):
    """Answers conditional-independence queries; ``True`` means independent.

    ``treatment`` and ``outcome`` name the two role variables. An oracle that
    cannot serve concurrent queries sets ``concurrent_safe = False``.
    """

    treatment: str
    outcome: str

    def query(self, x: Iterable[str], y: Iterable[str], given: Iterable[str] = ()) -> bool: ...


class CountingOracle:
    """Wraps an oracle and counts the queries sent through it."""

    def __init__(self, inner: CIOracle):
        self.inner = inner
        self.treatment = inner.treatment
        self.outcome = inner.outcome
        self.calls = 0
        self._lock = threading.Lock()

    def query(self, x, y, given=()) -> bool:
        with self._lock:
            self.calls += 1
        return self.inner.query(x, y, given)


@dataclass
class BoundaryTrace:
    kind: Kind
    order: list[str]
    tests: list[tuple[str, bool]] = field(default_factory=list)  # (vertex, retained)
    boundary: frozenset[str] = frozenset()
    calls: int = 0


def _target(o: CIOracle, kind: Kind) -> tuple[str, frozenset[str]]:
    if kind == TREATMENT:
        return o.treatment, frozenset()
    if kind == OUTCOME:
        return o.outcome, frozenset([o.treatment])
    raise ValueError(f"unknown boundary kind {kind!r}")


def _is_blanket(o: CIOracle, kind: Kind, v: Iterable[str], sub: Iterable[str]) -> bool:
    v, sub = frozenset(v), frozenset(sub)
    if not sub <= v:
        raise ValueError("candidate blanket must be a subset of V")
    rest = v - sub
    if not rest:
        return True
    target, extra = _target(o, kind)
    return o.query({target}, rest, sub | extra)


def is_treatment_blanket(o: CIOracle, v: Iterable[str], sub: Iterable[str]) -> bool:
    """Whether ``A`` is independent of ``v - sub`` given ``sub``."""
    return _is_blanket(o, TREATMENT, v, sub)


def is_outcome_blanket(o: CIOracle, v: Iterable[str], sub: Iterable[str]) -> bool:
    """Whether ``Y`` is independent of ``v - sub`` given ``A`` and ``sub``."""
    return _is_blanket(o, OUTCOME, v, sub)


def boundary_pointwise(o: CIOracle, kind: Kind, v: Iterable[str], jobs: int = 1) -> BoundaryTrace:
    """Markov boundary by testing each member against all the others.

    Keeps ``w`` when the target depends on ``w`` given the rest of ``v``
    (plus the treatment for the outcome boundary). Valid when the oracle
    obeys the intersection property. With ``jobs > 1`` the independent
    queries are issued from a thread pool if the oracle allows it.
    """
    order = canonical(v)
    target, extra = _target(o, kind)
    vs = frozenset(order)
    counter = CountingOracle(o)

    def dependent(w: str) -> bool:
        return not counter.query({target}, {w}, (vs - {w}) | extra)

    if jobs > 1 and getattr(o, "concurrent_safe", False) and len(order) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(jobs) as pool:
            kept = list(pool.map(dependent, order))
    else:
        kept = [dependent(w) for w in order]
    tests = list(zip(order, kept))
    return BoundaryTrace(
        kind=kind,
        order=order,
        tests=tests,
        boundary=frozenset(w for w, k in tests if k),
        calls=counter.calls,
    )


def boundary_stepwise(o: CIOracle, kind: Kind, v: Sequence[str]) -> BoundaryTrace:
    """Backward stepwise Markov boundary.

    Pops the first remaining vertex, tests it against the target given
    everything still unprocessed plus everything already retained, and
    retains it on dependence. Later tests condition on the reduced set.
    """
    order = list(v)
    if len(set(order)) != len(order):
        raise ValueError("duplicate entries in the input list")
    target, extra = _target(o, kind)
    counter = CountingOracle(o)
    remaining = list(order)
    retained: list[str] = []
    tests = []
    while remaining:
        w = remaining.pop(0)
        keep = not counter.query({target}, {w}, frozenset(remaining) | frozenset(retained) | extra)
        if keep:
            retained.append(w)
        tests.append((w, keep))
    return BoundaryTrace(kind=kind, order=order, tests=tests, boundary=frozenset(retained), calls=counter.calls)


def boundary(o: CIOracle, kind: Kind, v: Iterable[str], method: str = "pointwise") -> frozenset[str]:
    if method == "pointwise":
        return boundary_pointwise(o, kind, v).boundary
    if method == "stepwise":
        return boundary_stepwise(o, kind, canonical(v)).boundary
    raise ValueError(f"unknown boundary method {method!r}")


RULES = ("conjunctive", "disjunctive", "ay", "ya")


def combine(o: CIOracle, rule: str, s: Iterable[str], method: str = "pointwise") -> frozenset[str]:
    """Combine treatment and outcome boundaries of ``s``.

    ``conjunctive`` intersects the two boundaries and is known to miss
    confounders; ``disjunctive`` takes their union; ``ay`` reduces the
    treatment boundary further with the outcome boundary, ``ya`` the other
    way round.
    """
    s = frozenset(s)
    if rule == "conjunctive":
        warnings.warn(
            "conjunctive combination of boundaries may fail to control for confounding",
            UnsoundCombinationWarning,
            stacklevel=2,
        )
        return boundary(o, TREATMENT, s, method) & boundary(o, OUTCOME, s, method)
    if rule == "disjunctive":
        return boundary(o, TREATMENT, s, method) | boundary(o, OUTCOME, s, method)
    if rule == "ay":
        return boundary(o, OUTCOME, boundary(o, TREATMENT, s, method), method)
    if rule == "ya":
        return boundary(o, TREATMENT, boundary(o, OUTCOME, s, method), method)
    raise ValueError(f"unknown combination rule {rule!r}; expected one of {RULES}")


def reduce_alternating(
    o: CIOracle,
    start: Literal["treatment_first", "outcome_first"],
    s: Iterable[str],
    method: str = "pointwise",
) -> frozenset[str]:
    """Alternate treatment and outcome boundaries until neither shrinks the set."""
    if start == "treatment_first":
        first, second = TREATMENT, OUTCOME
    elif start == "outcome_first":
        first, second = OUTCOME, TREATMENT
    else:
        raise ValueError(f"unknown start {start!r}")
    current = frozenset(s)
    while True:
        nxt = boundary(o, second, boundary(o, first, current, method), method)
        if nxt == current:
            return current
        current = nxt


def verify_stability(o: CIOracle, c: Iterable[str]) -> bool:
    c = frozenset(c)
    return boundary(o, TREATMENT, c) == c and boundary(o, OUTCOME, c) == c

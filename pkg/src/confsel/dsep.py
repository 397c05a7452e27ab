"""d-separation and related path predicates."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

from .graph import Dag, GraphError, mutilate_backdoor

__all__ = [
    "Path",
    "check_path",
    "is_collider",
    "path_d_connects",
    "d_connected_set",
    "d_separated",
    "PostTreatmentError",
    "ignorability_oracle",
    "inducing_path_exists",
    "DSepOracle",
]

Path = Sequence[str]


class PostTreatmentError(GraphError):
    """A conditioning set contained a descendant of the treatment."""


def check_path(g: Dag, path: Path) -> tuple[str, ...]:
    p = tuple(path)
    g.check(p)
    if len(p) < 2:
        raise GraphError("a path needs at least two vertices")
    if len(set(p)) != len(p):
        raise GraphError("path repeats a vertex")
    for u, v in zip(p, p[1:]):
        if (u, v) not in g.edges and (v, u) not in g.edges:
            raise GraphError(f"{u} and {v} are not adjacent")
    return p


def is_collider(g: Dag, path: Path, index: int) -> bool:
    """Whether both path neighbours of ``path[index]`` point into it."""
    if not 0 < index < len(path) - 1:
        raise GraphError("colliders are only defined at non-endpoint positions")
    v = path[index]
    return (path[index - 1], v) in g.edges and (path[index + 1], v) in g.edges


def path_d_connects(g: Dag, path: Path, given: Iterable[str]) -> bool:
    p = check_path(g, path)
    z = g.check(given)
    if p[0] in z or p[-1] in z:
        raise GraphError("path endpoints may not be in the conditioning set")
    an_z = g.ancestors_of(z)
    for i in range(1, len(p) - 1):
        if is_collider(g, p, i):
            if p[i] not in an_z:
                return False
        elif p[i] in z:
            return False
    return True


def d_connected_set(g: Dag, xs: Iterable[str], given: Iterable[str]) -> frozenset[str]:
    """Vertices d-connected to some member of ``xs`` given ``given``.

    Reachability over (vertex, direction) states: ``up`` means the walk
    arrived from a child, ``down`` from a parent. Members of ``xs`` are
    included in the result.
    """
    xs = g.check(xs)
    z = g.check(given)
    an_z = g.ancestors_of(z)
    parents, children = g._parents, g._children

    reached: set[str] = set()
    visited: set[tuple[str, bool]] = set()
    queue = deque((x, True) for x in xs)
    while queue:
        state = queue.popleft()
        if state in visited:
            continue
        visited.add(state)
        v, up = state
        if v not in z:
            reached.add(v)
        if up:
            if v in z:
                continue
            queue.extend((p, True) for p in parents[v])
            queue.extend((c, False) for c in children[v])
        else:
            if v not in z:
                queue.extend((c, False) for c in children[v])
            if v in an_z:
                queue.extend((p, True) for p in parents[v])
    return frozenset(reached)


def d_separated(g: Dag, xs: Iterable[str], ys: Iterable[str], given: Iterable[str] = ()) -> bool:
    """True iff no d-connecting path joins a member of ``xs`` to a member of ``ys``.

    The three sets must be pairwise disjoint. Empty ``xs`` or ``ys`` is
    trivially separated.
    """
    xs, ys, z = g.check(xs), g.check(ys), g.check(given)
    if xs & ys or xs & z or ys & z:
        raise GraphError("d-separation arguments must be pairwise disjoint")
    if not xs or not ys:
        return True
    return not (d_connected_set(g, xs, z) & ys)


def _check_pretreatment(g: Dag, c: frozenset[str]) -> None:
    if c & {g.treatment, g.outcome}:
        raise GraphError("adjustment set may not contain the treatment or outcome")
    post = c & (g.descendants_of([g.treatment]) - {g.treatment})
    if post:
        raise PostTreatmentError(
            "adjustment set contains descendants of the treatment: " + ", ".join(sorted(post))
        )


def ignorability_oracle(g: Dag, c: Iterable[str]) -> bool:
    """Whether ``c`` blocks every back-door path from treatment to outcome.

    Equivalent to d-separation of ``A`` and ``Y(a)`` given ``c`` in the
    single-world intervention graph, which for pre-treatment ``c`` is the
    same as separation after deleting the treatment's outgoing edges.
    """
    c = g.check(c)
    _check_pretreatment(g, c)
    return d_separated(mutilate_backdoor(g), {g.treatment}, {g.outcome}, c)


def inducing_path_exists(g: Dag, u: str, v: str, l: Iterable[str]) -> bool:
    """Whether an inducing path between ``u`` and ``v`` relative to ``l`` exists.

    Uses the characterisation that ``u`` and ``v`` can be separated by some
    subset of the remaining vertices iff they are separated by the
    remaining vertices that are ancestors of ``u`` or ``v``.
    """
    l = g.check(l)
    g.check(u, v)
    if u == v:
        raise GraphError("inducing paths need distinct endpoints")
    if u in l or v in l:
        raise GraphError("endpoints may not be in L")
    if (u, v) in g.edges or (v, u) in g.edges:
        return True
    candidates = (g.ancestors_of([u, v]) - l) - {u, v}
    return not d_separated(g, {u}, {v}, candidates)


class DSepOracle:
    """Conditional-independence oracle that answers by d-separation in ``g``."""

    concurrent_safe = True

    def __init__(self, g: Dag):
        self.g = g
        self.treatment = g.treatment
        self.outcome = g.outcome

    def query(self, x: Iterable[str], y: Iterable[str], given: Iterable[str] = ()) -> bool:
        return d_separated(self.g, x, y, given)

    def __repr__(self) -> str:
        return f"DSepOracle({self.g!r})"

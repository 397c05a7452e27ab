"""Causal DAGs with treatment/outcome roles.

A :class:`Dag` is immutable once built. Every query in this package takes one
as its first argument. Vertex sets are plain ``frozenset`` objects; use
:func:`canonical` when a reproducible order is needed.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

__all__ = [
    "VertexSet",
    "GraphError",
    "UnknownVertexError",
    "CycleError",
    "Dag",
    "Swig",
    "canonical",
    "vset",
    "ancestors",
    "descendants",
    "nondescendants",
    "mutilate_backdoor",
    "make_swig",
    "nontrivial_common_ancestors",
    "is_causally_closed",
    "causal_closure",
    "relevant_pretreatment",
]

VertexSet = frozenset

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class GraphError(ValueError):
    """Invalid graph structure or query."""


class UnknownVertexError(GraphError, KeyError):
    def __init__(self, names: Iterable[str]):
        self.names = tuple(sorted(names))
        super().__init__("unknown vertex: " + ", ".join(self.names))

    def __str__(self) -> str:
        return self.args[0]


class CycleError(GraphError):
    pass


def canonical(vs: Iterable[str]) -> list[str]:
    """Canonical (name-sorted) list of a vertex set."""
    return sorted(vs)


def vset(*names: str | Iterable[str]) -> frozenset[str]:
    """Build a vertex set from names or iterables of names.

    >>> sorted(vset("A", ["X1", "X2"]))
    ['A', 'X1', 'X2']
    """
    out: set[str] = set()
    for n in names:
        if isinstance(n, str):
            out.add(n)
        else:
            out.update(n)
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class Dag:
    """Directed acyclic graph with one treatment and one outcome vertex.

    Parameters
    ----------
    vertices:
        Vertex names.
    edges:
        Directed edges ``(src, dst)``.
    treatment, outcome:
        Role vertices; must be distinct and the outcome may not be an
        ancestor of the treatment.
    latent:
        Unobserved covariates. May not contain the treatment or outcome.
    """

    vertices: frozenset[str]
    edges: frozenset[tuple[str, str]]
    treatment: str
    outcome: str
    latent: frozenset[str] = frozenset()
    _parents: Mapping[str, frozenset[str]] = field(init=False, repr=False)
    _children: Mapping[str, frozenset[str]] = field(init=False, repr=False)
    _order: tuple[str, ...] = field(init=False, repr=False)

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[tuple[str, str]],
        treatment: str,
        outcome: str,
        latent: Iterable[str] = (),
    ):
        verts = frozenset(vertices)
        edge_list = [tuple(e) for e in edges]
        edge_set = frozenset(edge_list)
        lat = frozenset(latent)
        if len(edge_set) != len(edge_list):
            raise GraphError("duplicate edge")
        for v in verts:
            if not isinstance(v, str) or not IDENT.match(v):
                raise GraphError(f"invalid vertex identifier {v!r}")
        missing = {v for e in edge_set for v in e if v not in verts}
        missing |= {v for v in (treatment, outcome) if v not in verts}
        missing |= lat - verts
        if missing:
            raise UnknownVertexError(missing)
        for src, dst in edge_set:
            if src == dst:
                raise GraphError(f"self-loop on {src}")
        if treatment == outcome:
            raise GraphError("treatment and outcome must differ")
        if treatment in lat or outcome in lat:
            raise GraphError("treatment and outcome cannot be latent")

        parents: dict[str, set[str]] = {v: set() for v in verts}
        children: dict[str, set[str]] = {v: set() for v in verts}
        for src, dst in edge_set:
            parents[dst].add(src)
            children[src].add(dst)

        # Kahn's algorithm; ties broken by name so the order is reproducible
        indeg = {v: len(parents[v]) for v in verts}
        ready = sorted(v for v in verts if indeg[v] == 0)
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in sorted(children[v]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        if len(order) != len(verts):
            raise CycleError("edge relation contains a cycle")

        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edge_set)
        object.__setattr__(self, "treatment", treatment)
        object.__setattr__(self, "outcome", outcome)
        object.__setattr__(self, "latent", lat)
        object.__setattr__(self, "_parents", {v: frozenset(p) for v, p in parents.items()})
        object.__setattr__(self, "_children", {v: frozenset(c) for v, c in children.items()})
        object.__setattr__(self, "_order", tuple(order))

        if outcome in self.ancestors_of([treatment]):
            raise GraphError("outcome is an ancestor of treatment")

    # --- structure -------------------------------------------------------
    def parents(self, v: str) -> frozenset[str]:
        self.check(v)
        return self._parents[v]

    def children(self, v: str) -> frozenset[str]:
        self.check(v)
        return self._children[v]

    def topological_order(self) -> tuple[str, ...]:
        return self._order

    @property
    def observed(self) -> frozenset[str]:
        return self.vertices - self.latent

    @property
    def covariates(self) -> frozenset[str]:
        return self.vertices - {self.treatment, self.outcome}

    @property
    def observed_covariates(self) -> frozenset[str]:
        return self.covariates - self.latent

    def check(self, *names: str | Iterable[str]) -> frozenset[str]:
        """Return the given names as a vertex set, raising on unknown ones."""
        vs = vset(*names)
        unknown = vs - self.vertices
        if unknown:
            raise UnknownVertexError(unknown)
        return vs

    def ancestors_of(self, seed: Iterable[str]) -> frozenset[str]:
        return self._closure(seed, self._parents)

    def descendants_of(self, seed: Iterable[str]) -> frozenset[str]:
        return self._closure(seed, self._children)

    def _closure(self, seed: Iterable[str], step: Mapping[str, frozenset[str]]) -> frozenset[str]:
        start = self.check(seed)
        seen = set(start)
        queue = deque(start)
        while queue:
            for w in step[queue.popleft()]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return frozenset(seen)

    # --- derived graphs --------------------------------------------------
    def replace(self, **changes) -> "Dag":
        kw = dict(
            vertices=self.vertices,
            edges=self.edges,
            treatment=self.treatment,
            outcome=self.outcome,
            latent=self.latent,
        )
        kw.update(changes)
        return Dag(**kw)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.treatment == other.treatment
            and self.outcome == other.outcome
            and self.latent == other.latent
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges, self.treatment, self.outcome, self.latent))

    def __repr__(self) -> str:
        edges = ", ".join(f"{s}->{d}" for s, d in sorted(self.edges))
        lat = f", latent={canonical(self.latent)}" if self.latent else ""
        return f"Dag(A={self.treatment}, Y={self.outcome}, [{edges}]{lat})"


def ancestors(g: Dag, seed: Iterable[str]) -> frozenset[str]:
    """Reflexive ancestors of ``seed``."""
    return g.ancestors_of(seed)


def descendants(g: Dag, seed: Iterable[str]) -> frozenset[str]:
    """Reflexive descendants of ``seed``."""
    return g.descendants_of(seed)


def nondescendants(g: Dag, seed: Iterable[str]) -> frozenset[str]:
    return g.vertices - g.descendants_of(seed)


def mutilate_backdoor(g: Dag) -> Dag:
    """Delete every edge out of the treatment."""
    return g.replace(edges=frozenset(e for e in g.edges if e[0] != g.treatment))


@dataclass(frozen=True)
class Swig:
    """Single-world intervention graph obtained by splitting the treatment.

    ``random_part`` keeps the treatment's name and its incoming edges;
    ``fixed_part`` takes over the outgoing edges. Strict descendants of the
    treatment are renamed through ``relabeled`` (``Y`` becomes ``Y(a)``).
    """

    base: Dag
    random_part: str
    fixed_part: str
    relabeled: Mapping[str, str]

    def label(self, v: str) -> str:
        return self.relabeled.get(v, v)

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        out = set()
        for src, dst in self.base.edges:
            s = self.fixed_part if src == self.base.treatment else self.label(src)
            out.add((s, self.label(dst)))
        return frozenset(out)

    @property
    def vertices(self) -> frozenset[str]:
        return frozenset(self.label(v) for v in self.base.vertices) | {self.fixed_part}

    def as_dag(self) -> Dag:
        """The SWIG as a plain :class:`Dag` with identifier-safe names.

        Counterfactual labels ``V(a)`` become ``V__a`` so the result can be
        queried with the ordinary d-separation routines. The random part keeps
        the treatment role and the relabeled outcome takes the outcome role.
        """

        def safe(v: str) -> str:
            return v.replace("(", "__").replace(")", "")

        return Dag(
            vertices=[safe(v) for v in self.vertices],
            edges=[(safe(s), safe(d)) for s, d in self.edges],
            treatment=self.random_part,
            outcome=safe(self.label(self.base.outcome)),
            latent=[safe(self.label(v)) for v in self.base.latent],
        )


def make_swig(g: Dag) -> Swig:
    a = g.treatment
    fixed = a.lower()
    while fixed in g.vertices:
        fixed += "_"
    strict = g.descendants_of([a]) - {a}
    relabeled = {v: f"{v}({fixed})" for v in sorted(strict)}
    return Swig(base=g, random_part=a, fixed_part=fixed, relabeled=relabeled)


def nontrivial_common_ancestors(g: Dag, v1: str, v2: str) -> frozenset[str]:
    """Common ancestors of ``v1`` and ``v2`` that reach one of them directly.

    A common ancestor ``u`` qualifies when some directed path from ``u`` to
    ``v1`` or ``v2`` avoids every other common ancestor, the path's last
    vertex included. ``v1`` and ``v2`` are never returned.
    """
    g.check(v1, v2)
    if v1 == v2:
        raise GraphError("nontrivial_common_ancestors needs two distinct vertices")
    common = g.ancestors_of([v1]) & g.ancestors_of([v2])
    targets = {v1, v2} - common
    out = set()
    for u in common - {v1, v2}:
        seen = set()
        stack = [c for c in g._children[u] if c not in common]
        while stack:
            w = stack.pop()
            if w in targets:
                out.add(u)
                break
            if w in seen:
                continue
            seen.add(w)
            stack.extend(c for c in g._children[w] if c not in common)
    return frozenset(out)


def is_causally_closed(g: Dag, h: Iterable[str]) -> bool:
    hs = g.check(h)
    return all(
        nontrivial_common_ancestors(g, v1, v2) <= hs for v1, v2 in combinations(sorted(hs), 2)
    )


def causal_closure(g: Dag, h: Iterable[str]) -> frozenset[str]:
    """Smallest causally closed superset of ``h``.

    Computed as a fixpoint: nontrivial common ancestors of every pair are
    added until nothing changes.
    """
    current = set(g.check(h))
    done: set[tuple[str, str]] = set()
    changed = True
    while changed:
        changed = False
        for pair in combinations(sorted(current), 2):
            if pair in done:
                continue
            done.add(pair)
            new = nontrivial_common_ancestors(g, *pair) - current
            if new:
                current |= new
                changed = True
    return frozenset(current)


def relevant_pretreatment(g: Dag, s: Iterable[str]) -> frozenset[str]:
    """Pre-treatment covariates relevant to the effect: closure of S, A, Y minus A, Y."""
    s = g.check(s)
    if s & {g.treatment, g.outcome}:
        raise GraphError("S must not contain the treatment or the outcome")
    z = causal_closure(g, s | {g.treatment, g.outcome}) - {g.treatment, g.outcome}
    post = g.descendants_of([g.treatment]) - {g.treatment}
    assert not (z - s) & post, "closure added a post-treatment vertex"
    return z

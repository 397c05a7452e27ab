"""Brute-force oracles and property sweeps.

Everything here is deliberately slow and definition-driven: simple paths are
enumerated, subsets are enumerated, families are materialized. The fast
routines elsewhere in the package are checked against these on small graphs.
Size caps are hard errors rather than silent truncation.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations, product
from os import PathLike
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from . import dsep as _dsep
from .adjustment import (
    blocks_all_backdoor,
    criterion_disjunctive,
    enumerate_minimal_sufficient_sets,
    exists_sufficient_subset,
)
from .blanket import (
    OUTCOME,
    TREATMENT,
    CIOracle,
    boundary_pointwise,
    boundary_stepwise,
    combine,
    is_outcome_blanket,
    is_treatment_blanket,
    reduce_alternating,
    verify_stability,
)
from .cgio import dump_cg
from .dsep import DSepOracle, d_connected_set, d_separated, ignorability_oracle
from .graph import Dag, GraphError, canonical, causal_closure, mutilate_backdoor, nontrivial_common_ancestors

__all__ = [
    "CapExceeded",
    "RandomDagSpec",
    "BlanketFamily",
    "random_dag",
    "all_dags",
    "simple_paths",
    "dsep_bruteforce",
    "connection_table_fast",
    "connection_table_bruteforce",
    "graphoid_violations",
    "weak_transitivity_violations",
    "nontrivial_common_ancestors_bruteforce",
    "closure_bruteforce",
    "inducing_path_bruteforce",
    "separable_bruteforce",
    "minimal_sufficient_bruteforce",
    "enumerate_blanket_family",
    "pretreatment_covariates",
    "property_suites",
]

DEFAULT_CAP = 12


class CapExceeded(GraphError):
    pass


def _cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapExceeded(f"{what}: size {n} exceeds cap {cap}")


# --- graph generation ----------------------------------------------------


@dataclass(frozen=True)
class RandomDagSpec:
    n_vertices: int
    edge_prob: float
    latent_fraction: float = 0.0
    seed: int = 0
    a_precedes_y: bool = True
    pretreatment_only: bool = False


def random_dag(spec: RandomDagSpec) -> Dag:
    """Random DAG with treatment ``A``, outcome ``Y`` and covariates ``V1..Vk``.

    With ``pretreatment_only`` every covariate precedes ``A`` in the
    generating order, so none can be a descendant of the treatment.
    """
    n = spec.n_vertices
    if n < 2:
        raise GraphError("a random DAG needs at least the treatment and the outcome")
    if not 0 <= spec.edge_prob <= 1 or not 0 <= spec.latent_fraction <= 1:
        raise GraphError("probabilities must lie in [0, 1]")
    if not spec.a_precedes_y and spec.pretreatment_only:
        raise GraphError("pretreatment_only requires A to precede Y")
    rng = random.Random(spec.seed)
    covs = [f"V{i}" for i in range(1, n - 1)]
    rng.shuffle(covs)
    if spec.pretreatment_only:
        order = covs + ["A", "Y"]
    else:
        i, j = sorted(rng.sample(range(n), 2))
        if not spec.a_precedes_y and rng.random() < 0.5:
            i, j = j, i
        order = [None] * n
        order[i], order[j] = "A", "Y"
        it = iter(covs)
        order = [v if v is not None else next(it) for v in order]
    edges = [(u, v) for a, u in enumerate(order) for v in order[a + 1:] if rng.random() < spec.edge_prob]
    if order.index("Y") < order.index("A"):
        # the outcome may not cause the treatment: make it a sink
        edges = [e for e in edges if e[0] != "Y"]
    k = round(spec.latent_fraction * len(covs))
    latent = rng.sample(sorted(covs), k) if k else []
    return Dag(order, edges, "A", "Y", latent)


def _is_acyclic(n: int, parents: list[int]) -> bool:
    remaining = (1 << n) - 1
    while remaining:
        free = [i for i in range(n) if remaining >> i & 1 and not parents[i] & remaining]
        if not free:
            return False
        for i in free:
            remaining &= ~(1 << i)
    return True


def all_dags(n: int, names: list[str] | None = None) -> Iterator[Dag]:
    """Every labeled DAG on ``n >= 2`` vertices.

    Roles are assigned so any DAG qualifies: the first source vertex (by
    label) is the treatment and the first other vertex is the outcome.
    """
    if n < 2:
        raise GraphError("need at least two vertices")
    names = names or [f"V{i}" for i in range(n)]
    pairs = list(combinations(range(n), 2))
    for states in product((0, 1, 2), repeat=len(pairs)):
        parents = [0] * n
        edges = []
        for (i, j), s in zip(pairs, states):
            if s == 1:
                parents[j] |= 1 << i
                edges.append((names[i], names[j]))
            elif s == 2:
                parents[i] |= 1 << j
                edges.append((names[j], names[i]))
        if not _is_acyclic(n, parents):
            continue
        src = next(i for i in range(n) if not parents[i])
        out = 0 if src != 0 else 1
        yield Dag(names, edges, names[src], names[out])


def pretreatment_covariates(g: Dag) -> frozenset[str]:
    """Observed covariates that are not descendants of the treatment."""
    return g.observed_covariates - g.descendants_of([g.treatment])


# --- d-separation ----------------------------------------------------------


def simple_paths(g: Dag, u: str, v: str) -> Iterator[tuple[str, ...]]:
    """All simple paths between ``u`` and ``v`` ignoring edge direction."""
    adj = {w: g._parents[w] | g._children[w] for w in g.vertices}
    stack = [(u, (u,))]
    while stack:
        w, path = stack.pop()
        for nb in sorted(adj[w]):
            if nb in path:
                continue
            if nb == v:
                yield path + (v,)
            else:
                stack.append((nb, path + (nb,)))


def dsep_bruteforce(g: Dag, xs, ys, given=(), cap: int = DEFAULT_CAP) -> bool:
    """d-separation by testing every simple path between the two sets."""
    _cap(len(g.vertices), cap, "dsep_bruteforce")
    xs, ys, z = g.check(xs), g.check(ys), g.check(given)
    if xs & ys or xs & z or ys & z:
        raise GraphError("d-separation arguments must be pairwise disjoint")
    for x in xs:
        for y in ys:
            for path in simple_paths(g, x, y):
                if _dsep.path_d_connects(g, path, z):
                    return False
    return True


def _index(g: Dag) -> tuple[list[str], dict[str, int]]:
    names = canonical(g.vertices)
    return names, {v: i for i, v in enumerate(names)}


def connection_table_fast(g: Dag, connect: Callable = d_connected_set) -> np.ndarray:
    """``T[z, x]``: bitmask of vertices d-connected to ``x`` given the set coded by ``z``.

    Vertices are indexed in canonical order. Entries with ``x`` in ``z``
    are zero. Uses the reachability routine under test.
    """
    names, idx = _index(g)
    n = len(names)
    table = np.zeros((1 << n, n), dtype=np.int64)
    for zm in range(1 << n):
        z = [names[i] for i in range(n) if zm >> i & 1]
        for x in range(n):
            if zm >> x & 1:
                continue
            mask = 0
            for v in connect(g, [names[x]], z):
                mask |= 1 << idx[v]
            table[zm, x] = mask & ~(1 << x) & ~zm
    return table


def connection_table_bruteforce(g: Dag, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Same table as :func:`connection_table_fast`, from explicit path enumeration.

    For every simple path the non-collider mask and the colliders are
    recorded once; the path is open given ``z`` iff ``z`` avoids every
    non-collider and hits the descendants of every collider.
    """
    _cap(len(g.vertices), cap, "connection_table_bruteforce")
    names, idx = _index(g)
    n = len(names)
    desc = [sum(1 << idx[d] for d in g.descendants_of([v])) for v in names]
    zs = np.arange(1 << n, dtype=np.int64)
    table = np.zeros((1 << n, n), dtype=np.int64)
    adj = [[idx[w] for w in g._parents[v] | g._children[v]] for v in names]
    edge = {(idx[s], idx[d]) for s, d in g.edges}
    for x in range(n):
        stack = [(x, [x])]
        while stack:
            w, path = stack.pop()
            for nb in adj[w]:
                if nb in path:
                    continue
                p = path + [nb]
                stack.append((nb, p))
                nc, colliders = 0, []
                for i in range(1, len(p) - 1):
                    if (p[i - 1], p[i]) in edge and (p[i + 1], p[i]) in edge:
                        colliders.append(p[i])
                    else:
                        nc |= 1 << p[i]
                ends = (1 << x) | (1 << nb)
                ok = (zs & (nc | ends)) == 0
                for c in colliders:
                    ok &= (zs & desc[c]) != 0
                table[ok, x] |= 1 << nb
    return table


def _set_table(conn: np.ndarray) -> np.ndarray:
    """``N[z, X]``: union of ``conn[z, x]`` over ``x`` in ``X``."""
    nz, n = conn.shape
    out = np.zeros((nz, nz), dtype=np.int64)
    for xm in range(1, nz):
        low = (xm & -xm).bit_length() - 1
        out[:, xm] = out[:, xm & (xm - 1)] | conn[:, low]
    return out


_ASSIGN_CACHE: dict[int, tuple[np.ndarray, ...]] = {}


def _assignments(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Masks (X, Y, W, Z) for every map of ``n`` vertices to {X, Y, W, Z, none}."""
    if n not in _ASSIGN_CACHE:
        codes = np.array(list(product(range(5), repeat=n)), dtype=np.int64).reshape(-1, n)
        bits = 1 << np.arange(n, dtype=np.int64)
        masks = tuple(((codes == k) * bits).sum(axis=1) for k in range(4))
        _ASSIGN_CACHE[n] = masks
    return _ASSIGN_CACHE[n]


def graphoid_violations(conn: np.ndarray) -> dict[str, int]:
    """Count violations of the semi-graphoid, intersection and composition axioms.

    ``conn`` is a connection table as returned by the builders above.
    Every assignment of vertices to disjoint sets X, Y, W, Z is checked.
    """
    n = conn.shape[1]
    X, Y, W, Z = _assignments(n)
    N = _set_table(conn)

    def ind(a, b, c):
        return (N[c, a] & b) == 0

    live = (X != 0) & (Y != 0)
    lw = live & (W != 0)
    out = {
        "symmetry": np.sum(live & (ind(X, Y, Z) != ind(Y, X, Z))),
        "decomposition": np.sum(lw & ind(X, Y | W, Z) & ~ind(X, Y, Z)),
        "weak_union": np.sum(lw & ind(X, Y | W, Z) & ~ind(X, Y, Z | W)),
        "contraction": np.sum(lw & ind(X, Y, Z) & ind(X, W, Z | Y) & ~ind(X, Y | W, Z)),
        "intersection": np.sum(lw & ind(X, Y, Z | W) & ind(X, W, Z | Y) & ~ind(X, Y | W, Z)),
        "composition": np.sum(lw & ind(X, Y, Z) & ind(X, W, Z) & ~ind(X, Y | W, Z)),
    }
    return {k: int(v) for k, v in out.items()}


def weak_transitivity_violations(conn: np.ndarray) -> int:
    """Counterexamples to the strengthened weak transitivity of d-separation.

    For single vertices x, y and disjoint W, Z (Z non-empty): if x and y are
    separated given W and given W + Z, some z in Z must be separated from x
    or from y given W.
    """
    n = conn.shape[1]
    X, Y, W, Z = _assignments(n)
    single = (X & (X - 1) == 0) & (Y & (Y - 1) == 0) & (X != 0) & (Y != 0) & (Z != 0)
    X, Y, W, Z = X[single], Y[single], W[single], Z[single]
    x = np.log2(X).astype(np.int64)
    y = np.log2(Y).astype(np.int64)
    sep_w = (conn[W, x] & Y) == 0
    sep_wz = (conn[W | Z, x] & Y) == 0
    full = (1 << n) - 1
    good = (~conn[W, x] | ~conn[W, y]) & full
    return int(np.sum(sep_w & sep_wz & ((good & Z) == 0)))


# --- closure ---------------------------------------------------------------


def _directed_paths(g: Dag, u: str, targets: set[str]) -> Iterator[tuple[str, ...]]:
    stack = [(u,)]
    while stack:
        path = stack.pop()
        for c in g._children[path[-1]]:
            p = path + (c,)
            if c in targets:
                yield p
            stack.append(p)


def nontrivial_common_ancestors_bruteforce(g: Dag, v1: str, v2: str) -> frozenset[str]:
    """Enumerates every causal path from each common ancestor."""
    common = g.ancestors_of([v1]) & g.ancestors_of([v2])
    out = set()
    for u in common - {v1, v2}:
        blockers = common - {u}
        for path in _directed_paths(g, u, {v1, v2}):
            if not set(path[1:]) & blockers:
                out.add(u)
                break
    return frozenset(out)


def closure_bruteforce(g: Dag, h: Iterable[str], cap: int = DEFAULT_CAP) -> frozenset[str]:
    """Intersection of all causally closed supersets of ``h``."""
    _cap(len(g.vertices), cap, "closure_bruteforce")
    h = g.check(h)
    names = canonical(g.vertices)
    star = {
        (a, b): nontrivial_common_ancestors_bruteforce(g, a, b) for a, b in combinations(names, 2)
    }
    rest = [v for v in names if v not in h]
    result = set(g.vertices)
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            cand = h | set(extra)
            if all(star[p] <= cand for p in combinations(sorted(cand), 2)):
                result &= cand
    return frozenset(result)


# --- adjustment ------------------------------------------------------------


def inducing_path_bruteforce(g: Dag, u: str, v: str, l: Iterable[str]) -> bool:
    """Searches simple paths whose non-colliders all lie in ``l`` and whose
    colliders (in ``l`` or not) are all ancestors of ``u`` or ``v``."""
    l = g.check(l)
    an = g.ancestors_of([u, v])
    for path in simple_paths(g, u, v):
        ok = True
        for i in range(1, len(path) - 1):
            w = path[i]
            collider = (path[i - 1], w) in g.edges and (path[i + 1], w) in g.edges
            if (collider and w not in an) or (not collider and w not in l):
                ok = False
                break
        if ok:
            return True
    return False


def separable_bruteforce(g: Dag, u: str, v: str, l: Iterable[str], cap: int = DEFAULT_CAP) -> bool:
    """Whether some subset of the vertices outside ``l`` d-separates ``u`` and ``v``."""
    l = g.check(l)
    pool = canonical(g.vertices - l - {u, v})
    _cap(len(pool), cap, "separable_bruteforce")
    return any(
        dsep_bruteforce(g, {u}, {v}, sub, cap=max(cap, len(g.vertices)))
        for k in range(len(pool) + 1)
        for sub in combinations(pool, k)
    )


def minimal_sufficient_bruteforce(g: Dag, s: Iterable[str], cap: int = DEFAULT_CAP) -> list[frozenset[str]]:
    """Minimal back-door sets by testing every subset with path enumeration."""
    s = g.check(s)
    _cap(len(s), cap, "minimal_sufficient_bruteforce")
    gm = mutilate_backdoor(g)
    ok = [
        frozenset(c)
        for k in range(len(s) + 1)
        for c in combinations(canonical(s), k)
        if dsep_bruteforce(gm, {g.treatment}, {g.outcome}, c, cap=max(cap, len(g.vertices)))
    ]
    return sorted((c for c in ok if not any(o < c for o in ok)), key=canonical)


# --- blankets --------------------------------------------------------------


@dataclass(frozen=True)
class BlanketFamily:
    kind: str
    v: frozenset[str]
    members: frozenset[frozenset[str]]

    def minimum(self) -> frozenset[str]:
        out = self.v
        for m in self.members:
            out &= m
        return out

    def intersection_closed(self) -> bool:
        return all(a & b in self.members for a, b in combinations(self.members, 2))


def enumerate_blanket_family(o: CIOracle, kind: str, v: Iterable[str], cap: int = DEFAULT_CAP) -> BlanketFamily:
    v = frozenset(v)
    _cap(len(v), cap, "enumerate_blanket_family")
    test = {TREATMENT: is_treatment_blanket, OUTCOME: is_outcome_blanket}[kind]
    items = canonical(v)
    members = frozenset(
        frozenset(sub)
        for k in range(len(items) + 1)
        for sub in combinations(items, k)
        if test(o, v, sub)
    )
    return BlanketFamily(kind, v, members)


# --- suites ----------------------------------------------------------------


@dataclass
class _Suite:
    name: str
    cases: int = 0
    failures: list[dict] = field(default_factory=list)

    def fail(self, g: Dag, detail: str, out_dir: Path | None) -> None:
        text = dump_cg(g)
        entry = {"detail": detail, "graph": text}
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / f"{self.name}_{len(self.failures)}.cg"
            path.write_text(text, encoding="utf-8")
            entry["file"] = str(path)
        self.failures.append(entry)

    def as_dict(self) -> dict:
        return {"name": self.name, "cases": self.cases, "failures": self.failures, "passed": not self.failures}


def _suite_dsep(graphs, out_dir, dsep) -> _Suite:
    s = _Suite("dsep_agreement")
    for g in graphs:
        names = canonical(g.vertices)
        for x, y in combinations(names, 2):
            rest = [v for v in names if v not in (x, y)]
            for k in range(len(rest) + 1):
                for z in combinations(rest, k):
                    s.cases += 1
                    fast = dsep(g, {x}, {y}, z)
                    slow = dsep_bruteforce(g, {x}, {y}, z)
                    if fast != slow:
                        s.fail(g, f"{x} _||_ {y} | {list(z)}: fast={fast} brute={slow}", out_dir)
    return s


def _suite_graphoid(graphs, out_dir, dsep) -> _Suite:
    s = _Suite("graphoid")
    connect = _connect_from(dsep)
    for g in graphs:
        s.cases += 1
        bad = {k: v for k, v in graphoid_violations(connection_table_fast(g, connect)).items() if v}
        if bad:
            s.fail(g, f"violations: {bad}", out_dir)
    return s


def _suite_transitivity(graphs, out_dir, dsep) -> _Suite:
    s = _Suite("weak_transitivity")
    connect = _connect_from(dsep)
    for g in graphs:
        s.cases += 1
        bad = weak_transitivity_violations(connection_table_fast(g, connect))
        if bad:
            s.fail(g, f"{bad} counterexamples", out_dir)
    return s


def _connect_from(dsep):
    if dsep is d_separated:
        return d_connected_set

    def connect(g, xs, z):
        return frozenset(xs) | {v for v in g.vertices - set(z) - set(xs) if not dsep(g, xs, {v}, z)}

    return connect


def _suite_closure(graphs, out_dir, dsep) -> _Suite:
    s = _Suite("closure")
    for g in graphs:
        names = canonical(g.vertices)
        for a, b in combinations(names, 2):
            s.cases += 1
            if nontrivial_common_ancestors(g, a, b) != nontrivial_common_ancestors_bruteforce(g, a, b):
                s.fail(g, f"nontrivial common ancestors of {a}, {b} disagree", out_dir)
        for h in ([g.treatment, g.outcome], names[: len(names) // 2], names):
            s.cases += 1
            fast, slow = causal_closure(g, h), closure_bruteforce(g, h)
            if fast != slow:
                s.fail(g, f"closure of {h}: fixpoint={canonical(fast)} brute={canonical(slow)}", out_dir)
    return s


def _suite_blankets(graphs, out_dir, dsep) -> _Suite:
    s = _Suite("blankets")
    for g in graphs:
        o = DSepOracle(g)
        v = pretreatment_covariates(g)
        if len(v) > 8:
            continue
        for kind in (TREATMENT, OUTCOME):
            s.cases += 1
            fam = enumerate_blanket_family(o, kind, v)
            b = boundary_pointwise(o, kind, v).boundary
            if b != fam.minimum() or b not in fam.members:
                s.fail(g, f"{kind} boundary {canonical(b)} is not the family minimum", out_dir)
            if not fam.intersection_closed():
                s.fail(g, f"{kind} blanket family not closed under intersection", out_dir)
            if boundary_stepwise(o, kind, canonical(v)).boundary != b:
                s.fail(g, f"{kind} stepwise boundary differs from pointwise", out_dir)
            for m in fam.members:
                if boundary_pointwise(o, kind, m).boundary != b:
                    s.fail(g, f"{kind} boundary of member {canonical(m)} differs", out_dir)
                if ignorability_oracle(g, v) and not ignorability_oracle(g, m):
                    s.fail(g, f"{kind} blanket {canonical(m)} of sufficient S is insufficient", out_dir)
    return s


def _suite_selection(graphs, out_dir, dsep) -> _Suite:
    s = _Suite("selection")
    for g in graphs:
        o = DSepOracle(g)
        v = pretreatment_covariates(g)
        if len(v) > 8 or not ignorability_oracle(g, v):
            continue
        s.cases += 1
        for rule in ("disjunctive", "ay", "ya"):
            c = combine(o, rule, v)
            if not blocks_all_backdoor(g, c):
                s.fail(g, f"{rule} combination {canonical(c)} insufficient", out_dir)
        minimal = enumerate_minimal_sufficient_sets(g, v)
        for start in ("treatment_first", "outcome_first"):
            c = reduce_alternating(o, start, v)
            if c not in minimal:
                s.fail(g, f"{start} reduction {canonical(c)} not minimal", out_dir)
            if not verify_stability(o, c):
                s.fail(g, f"{start} reduction {canonical(c)} not stable", out_dir)
        if exists_sufficient_subset(g, v) and not criterion_disjunctive(g, v).sufficient:
            s.fail(g, "disjunctive criterion insufficient although a sufficient subset exists", out_dir)
    return s


SUITES = {
    "dsep_agreement": _suite_dsep,
    "graphoid": _suite_graphoid,
    "weak_transitivity": _suite_transitivity,
    "closure": _suite_closure,
    "blankets": _suite_blankets,
    "selection": _suite_selection,
}


def _fixture_graphs() -> list[Dag]:
    ga = Dag(
        ["A", "Y", "U1", "U2", "L"],
        [("U1", "A"), ("U1", "L"), ("U2", "L"), ("U2", "Y"), ("A", "Y")],
        "A", "Y", ["U1", "U2"],
    )
    gb = Dag(["A", "Y", "X1", "X2"], [("X1", "A"), ("X1", "X2"), ("X2", "Y"), ("A", "Y")], "A", "Y")
    gc = Dag(
        ["A", "Y", "S1", "S2", "Z1", "Z2", "Z3", "Z4"],
        [("A", "Y"), ("S1", "A"), ("S1", "Y"), ("S2", "A"), ("S2", "Y"), ("Z1", "S1"),
         ("Z1", "S2"), ("Z2", "A"), ("Z3", "Z1"), ("Z3", "Z4"), ("Z4", "S1")],
        "A", "Y",
    )
    return [ga, gb, gc]


def property_suites(
    graphs: Iterable[Dag] | None = None,
    suites: Iterable[str] | None = None,
    n_random: int = 20,
    seed: int = 0,
    max_vertices: int = 7,
    out_dir: str | PathLike | None = None,
    dsep: Callable = d_separated,
) -> dict:
    """Run the named property suites and return a JSON-ready report.

    Without ``graphs`` the suites run on the three worked-example graphs
    plus ``n_random`` random DAGs. ``dsep`` is the d-separation routine
    under test; swapping in a broken one must make the report fail.
    Failing graphs are embedded in ``.cg`` form and, with ``out_dir``,
    written to disk.
    """
    if graphs is None:
        graphs = _fixture_graphs()
        rng = random.Random(seed)
        for i in range(n_random):
            spec = RandomDagSpec(
                rng.randint(3, max_vertices), rng.choice([0.2, 0.35, 0.5]), rng.choice([0.0, 0.25]),
                seed=seed * 100003 + i,
            )
            graphs.append(random_dag(spec))
    graphs = list(graphs)
    names = list(suites) if suites is not None else list(SUITES)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {sorted(unknown)}")
    out = Path(out_dir) if out_dir is not None else None
    results = [SUITES[n](graphs, out, dsep).as_dict() for n in names]
    return {"graphs": len(graphs), "suites": results, "passed": all(r["passed"] for r in results)}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)

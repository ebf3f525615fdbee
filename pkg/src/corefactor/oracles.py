"""Slow, obviously-correct reference implementations and cross-checks.

These never share code paths with the fast routines they check: cores by
repeated scanning, components by union-find, factors by enumerating every
edge subset.  :func:`run_small_oracles` bundles the cross-validation suites
behind ``corefactor verify``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .factor import (delta_k, find_k_factor, is_k_factor_critical, lemma2_check,
                     perfect_matching, tutte_check)
from .graph import MultiGraph, components, k_core
from .seeding import make_rng

BRUTE_MAX_EDGES = 22


def naive_core_vertices(g: MultiGraph, k: int) -> set[int]:
    alive = set(range(g.n))
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            d = 0
            for a, b in g.edge_list():
                if a in alive and b in alive:
                    d += (a == v) + (b == v)
            if d < k:
                alive.discard(v)
                changed = True
    return alive


def union_find_count(g: MultiGraph, removed=()) -> int:
    gone = set(removed)
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edge_list():
        if a in gone or b in gone:
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in range(g.n) if v not in gone})


def brute_k_factors(g: MultiGraph, k: int, limit: Optional[int] = None) -> list[list[int]]:
    """All edge subsets (as sorted id lists) giving every vertex degree k."""
    m = g.m
    if m > BRUTE_MAX_EDGES:
        raise ValueError(f"brute force over 2^{m} subsets refused")
    masks = np.arange(1 << m, dtype=np.uint64)
    ok = np.ones(masks.size, dtype=bool)
    for v in range(g.n):
        inc = 0
        loops = 0
        for e, (a, b) in enumerate(g.edge_list()):
            if a == v and b == v:
                loops |= 1 << e
            elif a == v or b == v:
                inc |= 1 << e
        deg = np.bitwise_count(masks & np.uint64(inc)).astype(np.int64)
        deg += 2 * np.bitwise_count(masks & np.uint64(loops)).astype(np.int64)
        ok &= deg == k
    hits = masks[ok]
    if limit is not None:
        hits = hits[:limit]
    return [[e for e in range(m) if (int(h) >> e) & 1] for h in hits]


def brute_has_k_factor(g: MultiGraph, k: int) -> bool:
    if (k * g.n) % 2:
        return False
    return bool(brute_k_factors(g, k, limit=1))


def delete_vertex(g: MultiGraph, v: int) -> MultiGraph:
    sub, _, _ = g.induced(u for u in range(g.n) if u != v)
    return sub


def brute_is_critical(g: MultiGraph, k: int) -> bool:
    return all(brute_has_k_factor(delete_vertex(g, v), k) for v in range(g.n))


def is_k_factor(g: MultiGraph, edge_ids, k: int) -> bool:
    ids = np.asarray(list(edge_ids), dtype=np.int64)
    if ids.size != np.unique(ids).size:
        return False
    deg = np.bincount(g.edges[ids].ravel(), minlength=g.n) if ids.size else np.zeros(g.n, int)
    return bool(np.all(deg == k))


def random_multigraph(rng: np.random.Generator, n: int, m: int,
                      parallel: bool = True, min_degree: int = 0) -> MultiGraph:
    """Random loopless multigraph; resamples until min_degree holds."""
    if min_degree * n > 2 * m:
        raise ValueError(f"{m} edges cannot give {n} vertices degree >= {min_degree}")
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for _ in range(10_000):
        if parallel:
            idx = rng.integers(0, len(pairs), size=m)
        else:
            idx = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
        g = MultiGraph(n, [pairs[i] for i in idx])
        if g.n == 0 or g.degrees().min() >= min_degree:
            return g
    raise RuntimeError("could not sample a multigraph with the requested minimum degree")


def random_connected_graph(rng: np.random.Generator, n: int, extra: int,
                           parallel: bool = False) -> MultiGraph:
    """Random spanning tree plus ``extra`` random edges."""
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    have = set(edges)
    for _ in range(extra):
        a, b = pairs[int(rng.integers(0, len(pairs)))]
        if parallel or (a, b) not in have:
            edges.append((a, b))
            have.add((a, b))
    perm = rng.permutation(n)
    return MultiGraph(n, [(int(perm[a]), int(perm[b])) for a, b in edges])


# ---------------------------------------------------------------------------
# Bundled cross-validation
# ---------------------------------------------------------------------------

@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements and self.cases > 0


def check_cores(rng, cases: int = 200) -> SuiteResult:
    res = SuiteResult("core-vs-naive")
    for _ in range(cases):
        n = int(rng.integers(1, 31))
        g = random_multigraph(rng, n, int(rng.integers(0, 3 * n + 1)), parallel=False) \
            if n > 1 else MultiGraph(1)
        k = int(rng.integers(0, 6))
        got = set(k_core(g, k).kept.tolist())
        if got != naive_core_vertices(g, k):
            res.disagreements.append((g.edge_list(), g.n, k))
        res.cases += 1
    return res


def check_components(rng, cases: int = 200) -> SuiteResult:
    res = SuiteResult("components-vs-union-find")
    for _ in range(cases):
        n = int(rng.integers(1, 31))
        g = random_multigraph(rng, n, int(rng.integers(0, 2 * n)), parallel=True) \
            if n > 1 else MultiGraph(1)
        removed = [v for v in range(n) if rng.random() < 0.2]
        if len(components(g, removed)) != union_find_count(g, removed):
            res.disagreements.append((g.edge_list(), g.n, removed))
        res.cases += 1
    return res


def check_factor_reduction(rng, cases: int = 500) -> SuiteResult:
    """find_k_factor against edge-subset enumeration, n <= 8, m <= 14."""
    res = SuiteResult("k-factor-vs-brute-force")
    while res.cases < cases:
        n = int(rng.integers(2, 9))
        m = int(rng.integers((n + 1) // 2, 15))
        g = random_multigraph(rng, n, m, parallel=bool(rng.random() < 0.4), min_degree=1)
        k = int(rng.integers(1, 4))
        out = find_k_factor(g, k, critical="exact")
        if delta_k(g, k) == 0:
            expect = brute_has_k_factor(g, k)
            got = out.kind == "factor"
            if got and not is_k_factor(g, out.edges, k):
                res.disagreements.append(("invalid factor", g.edge_list(), n, k))
        else:
            expect = brute_is_critical(g, k)
            got = out.kind == "critical"
            if got:
                for v, es in out.per_deleted_vertex.items():
                    ok = all(v not in g.edge_list()[e] for e in es)
                    deg = np.bincount(g.edges[es].ravel(), minlength=n) if es else np.zeros(n, int)
                    if not ok or not all(deg[u] == k for u in range(n) if u != v):
                        res.disagreements.append(("invalid witness", g.edge_list(), n, k, v))
        if got != expect:
            res.disagreements.append((g.edge_list(), n, k, got, expect))
        res.cases += 1
    return res


def check_tutte(rng, cases: int = 200) -> SuiteResult:
    """perfect_matching against exhaustive Tutte-set search, n <= 12."""
    res = SuiteResult("matching-vs-tutte")
    while res.cases < cases:
        n = int(rng.integers(1, 13))
        m = int(rng.integers(0, 2 * n + 1))
        g = random_multigraph(rng, n, m, parallel=bool(rng.random() < 0.3)) \
            if n > 1 else MultiGraph(1)
        has = perfect_matching(g) is not None
        violator = tutte_check(g)
        if has == (violator is not None):
            res.disagreements.append((g.edge_list(), n, has, violator))
        res.cases += 1
    return res


def check_lemma2(rng, cases: int = 300, max_n: int = 10) -> SuiteResult:
    """Where the sufficient condition holds, the promised outcome must follow.

    Graphs are simple: with parallel edges the criticality half of the
    implication is false (see ``LEMMA2_MULTIGRAPH_COUNTEREXAMPLE``).  Half of
    the draws force ``k * n`` odd so the criticality half gets exercised.
    """
    res = SuiteResult("lemma2-implication")
    while res.cases < cases:
        odd = res.cases % 2 == 1
        n = int(rng.integers(2, max_n + 1))
        k = int(rng.integers(1, 4))
        if odd:
            n -= 1 - n % 2
            k -= 1 - k % 2
            if n < 3:
                n = 3
        # dense graphs, otherwise the condition almost never holds
        extra = int(rng.integers(n, n * (n - 1) // 2 + n + 1))
        g = random_connected_graph(rng, n, extra)
        if lemma2_check(g, k) is not None:
            continue
        if delta_k(g, k) == 0:
            ok = find_k_factor(g, k).kind == "factor"
        else:
            ok = is_k_factor_critical(g, k, mode="exact").kind == "critical"
        if not ok:
            res.disagreements.append((g.edge_list(), n, k))
        res.cases += 1
    return res


# The sufficient condition holds on this 5-vertex multigraph with k = 3
# (k*n odd), yet deleting vertex 2 leaves vertex 3 with degree 2.
LEMMA2_MULTIGRAPH_COUNTEREXAMPLE = (5, 3, [
    (2, 4), (4, 0), (0, 1), (0, 3), (4, 0), (4, 1), (2, 3), (2, 3), (2, 1), (4, 1),
    (2, 3), (0, 1), (2, 1), (2, 3), (0, 1), (2, 3), (2, 1), (2, 1), (1, 3),
])


def run_small_oracles(seed: int = 0, scale: float = 1.0) -> list[SuiteResult]:
    rng = make_rng(seed)
    sz = lambda c: max(1, int(c * scale))  # noqa: E731
    return [
        check_cores(rng, sz(200)),
        check_components(rng, sz(200)),
        check_factor_reduction(rng, sz(500)),
        check_tutte(rng, sz(200)),
        check_lemma2(rng, sz(300)),
    ]

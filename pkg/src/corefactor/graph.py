"""Undirected multigraphs, G(n, p) sampling and k-core peeling."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import IO, Iterable, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .seeding import make_rng

PathOrFile = Union[str, os.PathLike, IO[str]]


class MultiGraph:
    """Immutable undirected multigraph on vertices ``0..n-1``.

    Edge ``i`` is the unordered pair ``edges[i]``.  Parallel edges are
    distinct rows; a self-loop ``(v, v)`` contributes 2 to ``degree(v)``.
    """

    __slots__ = ("n", "edges", "_cache")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        if not isinstance(edges, np.ndarray):
            edges = list(edges)
        arr = np.array(edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be a sequence of vertex pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        arr.setflags(write=False)
        self.n = n
        self.edges = arr
        self._cache: dict = {}

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.edges.tobytes()))

    def degrees(self) -> np.ndarray:
        d = self._cache.get("deg")
        if d is None:
            d = np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)
            d.setflags(write=False)
            self._cache["deg"] = d
        return d

    def degree(self, v: int) -> int:
        return int(self.degrees()[v])

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, neighbor, edge_id)``.

        Each vertex's entries are in ascending edge id; a self-loop appears
        twice in its vertex's list.
        """
        got = self._cache.get("csr")
        if got is None:
            m = self.m
            src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            eid = np.concatenate([np.arange(m), np.arange(m)])
            order = np.lexsort((eid, src))
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
            got = (indptr, dst[order].astype(np.int64), eid[order].astype(np.int64))
            for a in got:
                a.setflags(write=False)
            self._cache["csr"] = got
        return got

    def neighbors(self, v: int) -> list[tuple[int, int]]:
        """``(neighbor, edge_id)`` pairs incident to ``v``."""
        indptr, nbr, eid = self.csr()
        lo, hi = indptr[v], indptr[v + 1]
        return list(zip(nbr[lo:hi].tolist(), eid[lo:hi].tolist()))

    def has_self_loops(self) -> bool:
        return bool(np.any(self.edges[:, 0] == self.edges[:, 1]))

    def edge_list(self) -> list[tuple[int, int]]:
        return [tuple(e) for e in self.edges.tolist()]

    def subgraph_edges(self, edge_ids: Iterable[int]) -> "MultiGraph":
        """Spanning subgraph keeping only the listed edges (ids renumbered)."""
        ids = np.fromiter(edge_ids, dtype=np.int64)
        return MultiGraph(self.n, self.edges[ids])

    def induced(self, vertices: Iterable[int]) -> tuple["MultiGraph", np.ndarray, np.ndarray]:
        """Induced subgraph on ``vertices`` with ids compacted in ascending order.

        Returns ``(graph, kept, edge_ids)`` where ``kept[new] = old`` and
        ``edge_ids[new_edge] = old_edge``.
        """
        keep = np.zeros(self.n, dtype=bool)
        keep[np.fromiter(vertices, dtype=np.int64)] = True
        return self._induced_mask(keep)

    def _induced_mask(self, keep: np.ndarray) -> tuple["MultiGraph", np.ndarray, np.ndarray]:
        kept = np.flatnonzero(keep).astype(np.int64)
        relabel = np.full(self.n, -1, dtype=np.int64)
        relabel[kept] = np.arange(kept.size)
        emask = keep[self.edges[:, 0]] & keep[self.edges[:, 1]]
        edge_ids = np.flatnonzero(emask).astype(np.int64)
        sub = MultiGraph(kept.size, relabel[self.edges[edge_ids]])
        return sub, kept, edge_ids


def _as_mask(n: int, vs: Iterable[int] | None) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    if vs is not None:
        ids = np.fromiter(vs, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= n):
            raise ValueError("vertex id out of range")
        mask[ids] = True
    return mask


# ---------------------------------------------------------------------------
# Random graphs
# ---------------------------------------------------------------------------

def _pair_from_index(pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert ``pos = v*(v-1)/2 + u`` for ``0 <= u < v``."""
    v = np.floor((1.0 + np.sqrt(1.0 + 8.0 * pos.astype(np.float64))) / 2.0).astype(np.int64)
    base = v * (v - 1) // 2
    over = base > pos
    while np.any(over):
        v[over] -= 1
        base = v * (v - 1) // 2
        over = base > pos
    under = (v + 1) * v // 2 <= pos
    while np.any(under):
        v[under] += 1
        base = v * (v - 1) // 2
        under = (v + 1) * v // 2 <= pos
    return pos - base, v


def gnp_random(n: int, c: float, seed: int) -> MultiGraph:
    """Sample G(n, p) with p = c/(n-1), so ``c`` is the expected degree.

    Pairs ``(u, v)``, ``u < v``, are visited in the order
    ``v*(v-1)/2 + u`` and selected by geometric skips, which costs
    O(n + m) instead of O(n^2).  The generator is PCG64 seeded with ``seed``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if c < 0 or c > n - 1:
        raise ValueError(f"mean degree c={c} outside [0, n-1]")
    total = n * (n - 1) // 2
    p = c / (n - 1) if n > 1 else 0.0
    if p <= 0.0 or total == 0:
        return MultiGraph(n)
    if p >= 1.0:
        pos = np.arange(total, dtype=np.int64)
    else:
        rng = make_rng(seed)
        mean = total * p
        chunk = int(mean + 6.0 * math.sqrt(mean) + 64)
        parts = []
        last = -1
        while True:
            steps = rng.geometric(p, size=chunk).astype(np.int64)
            run = last + np.cumsum(steps)
            if run[-1] >= total:
                parts.append(run[run < total])
                break
            parts.append(run)
            last = int(run[-1])
            chunk = max(1024, chunk // 4)
        pos = np.concatenate(parts)
    u, v = _pair_from_index(pos)
    return MultiGraph(n, np.stack([u, v], axis=1))


# ---------------------------------------------------------------------------
# k-core
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoreResult:
    """The k-core with ids compacted to ``0..|K|-1``.

    ``kept[core_id]`` is the original vertex id and ``edge_ids[core_edge]``
    the original edge id.
    """

    core: MultiGraph
    kept: np.ndarray
    edge_ids: np.ndarray
    k: int

    @property
    def size(self) -> int:
        return self.core.n

    def to_core(self) -> dict[int, int]:
        return {int(old): new for new, old in enumerate(self.kept)}

    def degree_histogram(self) -> dict[int, int]:
        counts = np.bincount(self.core.degrees()) if self.core.n else np.zeros(0, int)
        return {int(j): int(c) for j, c in enumerate(counts) if c}


def k_core(g: MultiGraph, k: int) -> CoreResult:
    """Peel vertices of degree < k until none remain; linear in n + m."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    indptr, nbr, _ = g.csr()
    alive = _kernels.peel(indptr, nbr, np.int64(k))
    core, kept, edge_ids = g._induced_mask(alive)
    return CoreResult(core, kept, edge_ids, k)


# ---------------------------------------------------------------------------
# Counting primitives
# ---------------------------------------------------------------------------

def lambda_st(g: MultiGraph, s: Iterable[int], t: Iterable[int]) -> int:
    """Edges with one endpoint in ``s`` and the other in ``t``, each counted once.

    With ``s == t`` this is the number of edges inside ``s``.
    """
    sm = _as_mask(g.n, s)
    tm = _as_mask(g.n, t)
    a, b = g.edges[:, 0], g.edges[:, 1]
    return int(np.count_nonzero((sm[a] & tm[b]) | (tm[a] & sm[b])))


def components(g: MultiGraph, removed: Iterable[int] | None = None) -> list[frozenset[int]]:
    """Connected components of ``g - removed``, ordered by smallest vertex."""
    gone = _as_mask(g.n, removed)
    keep = ~gone
    if not keep.any():
        return []
    sub, kept, _ = g._induced_mask(keep)
    a, b = sub.edges[:, 0], sub.edges[:, 1]
    adj = coo_matrix((np.ones(sub.m, dtype=np.int8), (a, b)), shape=(sub.n, sub.n))
    _, labels = connected_components(adj, directed=False)
    # renumber labels by first appearance, i.e. by smallest vertex
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    groups: list[list[int]] = [[] for _ in range(order.size)]
    for old, lab in zip(kept.tolist(), rank[labels].tolist()):
        groups[lab].append(old)
    return [frozenset(grp) for grp in groups]


def omega(g: MultiGraph, removed: Iterable[int] | None = None) -> int:
    return len(components(g, removed))


def odd_components(g: MultiGraph, removed: Iterable[int] | None = None) -> int:
    return sum(1 for comp in components(g, removed) if len(comp) % 2)


def attach_apex(g: MultiGraph, v: int, k: int) -> MultiGraph:
    """Add vertex ``g.n`` joined to ``v`` by ``k`` parallel edges."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    if k < 1:
        raise ValueError("multiplicity must be at least 1")
    extra = np.tile(np.array([[v, g.n]], dtype=np.int64), (k, 1))
    return MultiGraph(g.n + 1, np.concatenate([g.edges, extra]))


# ---------------------------------------------------------------------------
# Edge-list text format: "n m" then m lines "u v"
# ---------------------------------------------------------------------------

def write_edgelist(g: MultiGraph, dest: PathOrFile) -> None:
    buf = io.StringIO()
    buf.write(f"{g.n} {g.m}\n")
    if g.m:
        np.savetxt(buf, g.edges, fmt="%d")
    text = buf.getvalue()
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w") as fh:
            fh.write(text)


def read_edgelist(src: PathOrFile) -> MultiGraph:
    if hasattr(src, "read"):
        text = src.read()
    else:
        with open(src) as fh:
            text = fh.read()
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("edge list header 'n m' missing")
    n, m = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != 2 * m:
        raise ValueError(f"expected {m} edges, found {len(body) / 2:g}")
    edges = np.array(body, dtype=np.int64).reshape(m, 2)
    return MultiGraph(n, edges)

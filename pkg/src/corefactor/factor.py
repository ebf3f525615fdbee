"""k-factors through the Tutte gadget and perfect matching.

For a multigraph G and integer k the gadget has, for every vertex ``v_i``,
a block ``U_i`` of k vertices and a block ``V_i`` of ``d(v_i)`` slots, all
of ``U_i x V_i`` as edges, and one extra edge per original edge joining the
two slots that represent it (the *matching layer*).  A perfect matching of
the gadget covers ``k`` slots of every ``V_i`` from ``U_i`` and the rest by
layer edges; the original edges whose layer edge is *not* matched form a
k-factor, and every k-factor arises this way.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from . import _kernels
from .graph import MultiGraph, attach_apex, components, odd_components
from .seeding import make_rng

TUTTE_MAX_N = 22
LEMMA2_MAX_N = 14


class GadgetError(ValueError):
    """The input graph cannot be turned into a gadget."""


def delta_k(g: MultiGraph, k: int) -> int:
    """Parity of ``k * |V(g)|``."""
    return (k * g.n) & 1


@dataclass(frozen=True)
class GadgetGraph:
    """The gadget ``phi(G)`` with back-references into ``G``.

    Host ids: ``U`` blocks first (``U_i = i*k .. i*k + k-1``), then ``V``
    blocks in vertex order.  Host edges: the ``k * 2m`` block edges, then one
    layer edge per original edge, so host edge ``block_edge_count + e``
    represents original edge ``e``.
    """

    source: MultiGraph
    k: int
    host: MultiGraph
    v_offset: np.ndarray      # V_i = k*n + v_offset[i] .. + degree(i) - 1
    slots: np.ndarray         # slots[e] = (slot at endpoint 0, slot at endpoint 1)
    owner: np.ndarray         # owner[host vertex] = original vertex

    @property
    def block_edge_count(self) -> int:
        return 2 * self.k * self.source.m

    def u_block(self, i: int) -> list[int]:
        return list(range(i * self.k, (i + 1) * self.k))

    def v_block(self, i: int) -> list[int]:
        base = self.k * self.source.n + int(self.v_offset[i])
        return list(range(base, base + self.source.degree(i)))

    @property
    def matching_layer(self) -> dict[int, int]:
        """Host edge id of each layer edge mapped to its original edge id."""
        b = self.block_edge_count
        return {b + e: e for e in range(self.source.m)}

    def contract(self) -> MultiGraph:
        """Drop ``U`` and merge every ``V_i`` into ``v_i``."""
        layer = self.host.edges[self.block_edge_count:]
        return MultiGraph(self.source.n, self.owner[layer])

    def pull_back(self, mate: np.ndarray) -> np.ndarray:
        """Original edge ids whose layer edge is unmatched, ascending."""
        a, b = self.slots[:, 0], self.slots[:, 1]
        return np.flatnonzero(mate[a] != b).astype(np.int64)


def build_phi(g: MultiGraph, k: int) -> GadgetGraph:
    """Build the gadget; slot order inside each ``V_i`` follows edge ids."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if g.has_self_loops():
        raise GadgetError("self-loops are not supported by the gadget")
    deg = g.degrees()
    if g.n and deg.min() == 0:
        iso = int(np.flatnonzero(deg == 0)[0])
        raise GadgetError(f"vertex {iso} is isolated; no k-factor slots exist")

    n, m = g.n, g.m
    v_offset = np.zeros(n, dtype=np.int64)
    np.cumsum(deg[:-1], out=v_offset[1:])

    # rank of edge e among the edges at each endpoint, by edge id
    ends = np.concatenate([g.edges[:, 0], g.edges[:, 1]])
    eids = np.concatenate([np.arange(m), np.arange(m)])
    order = np.lexsort((eids, ends))
    rank = np.empty(2 * m, dtype=np.int64)
    rank[order] = np.arange(2 * m) - v_offset[ends[order]]
    slot_of = k * n + v_offset[ends] + rank
    slots = np.stack([slot_of[:m], slot_of[m:]], axis=1)

    # V vertex s (owned by i) joins every vertex of U_i
    n_slots = 2 * m
    slot_ids = k * n + np.arange(n_slots, dtype=np.int64)
    owner_v = np.repeat(np.arange(n, dtype=np.int64), deg)
    block_u = (owner_v[:, None] * k + np.arange(k)[None, :]).ravel()
    block_v = np.repeat(slot_ids, k)
    block = np.stack([block_u, block_v], axis=1)

    host = MultiGraph(k * n + n_slots, np.concatenate([block, slots]))
    owner = np.concatenate([np.repeat(np.arange(n, dtype=np.int64), k), owner_v])
    slots.setflags(write=False)
    owner.setflags(write=False)
    v_offset.setflags(write=False)
    return GadgetGraph(g, k, host, v_offset, slots, owner)


# ---------------------------------------------------------------------------
# Perfect matching
# ---------------------------------------------------------------------------

@dataclass
class MatchingResult:
    """``mate[v]`` is v's partner or -1.  On failure ``tutte_set`` holds a set
    X with more odd components in ``g - X`` than ``|X|``."""

    mate: np.ndarray
    perfect: bool
    tutte_set: Optional[np.ndarray] = None

    def edge_ids(self, g: MultiGraph) -> list[int]:
        """Lowest edge id joining each matched pair."""
        a, b = g.edges[:, 0], g.edges[:, 1]
        hit = (self.mate[a] == b) & (a != b)
        ids = np.flatnonzero(hit)
        lo = np.minimum(a[ids], b[ids])
        _, first = np.unique(lo, return_index=True)
        return sorted(ids[first].tolist())


def _check_matching(g: MultiGraph, mate: np.ndarray) -> None:
    matched = np.flatnonzero(mate >= 0)
    if not np.array_equal(mate[mate[matched]], matched):
        raise AssertionError("matching is not symmetric")
    indptr, nbr, _ = g.csr()
    for v in matched[: min(matched.size, 1 << 12)].tolist():
        if mate[v] not in nbr[indptr[v]:indptr[v + 1]]:
            raise AssertionError(f"matched pair ({v}, {mate[v]}) is not an edge")


def match(g: MultiGraph, *, certificate: bool = True, check: bool = False,
          initial: np.ndarray | None = None) -> MatchingResult:
    """Blossom search for a perfect matching; stops at the first failed root.

    ``initial`` may supply a partial matching (``-1`` for free vertices) to
    start from.
    """
    n = g.n
    indptr, nbr, _ = g.csr()
    mate = np.full(n + 1, n, dtype=np.int64)
    if initial is not None:
        init = np.asarray(initial, dtype=np.int64)
        mate[:n] = np.where(init >= 0, init, n)
    if n % 2 == 1:
        # parity alone decides; still produce a maximal attempt for the tree
        _kernels.greedy_init(indptr, nbr, mate)
        failed = _kernels.match_perfect(indptr, nbr, mate, True)
    elif n and np.any(np.diff(indptr) == 0):
        failed = int(np.flatnonzero(np.diff(indptr) == 0)[0])
    else:
        _kernels.greedy_init(indptr, nbr, mate)
        failed = _kernels.match_perfect(indptr, nbr, mate, True)
    out = np.where(mate[:n] == n, -1, mate[:n])
    if check:
        _check_matching(g, out)
    if failed < 0:
        return MatchingResult(out, True)
    tutte = None
    if certificate:
        labels = _kernels.hungarian_tree(failed, indptr, nbr, mate)
        tutte = np.flatnonzero(labels == 2).astype(np.int64)
    return MatchingResult(out, False, tutte)


def perfect_matching(g: MultiGraph) -> Optional[list[int]]:
    """Edge ids of a perfect matching of ``g``, or None if none exists."""
    res = match(g, certificate=False)
    return res.edge_ids(g) if res.perfect else None


# ---------------------------------------------------------------------------
# k-factors
# ---------------------------------------------------------------------------

Kind = Literal["factor", "critical", "none"]


@dataclass
class FactorOutcome:
    kind: Kind
    k: int
    edges: Optional[list[int]] = None
    per_deleted_vertex: Optional[dict[int, list[int]]] = None
    certificate: Optional[list[int]] = None
    certificate_vertex: Optional[int] = None
    sampled: bool = False
    timings: dict[str, float] = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "k": self.k}
        if self.edges is not None:
            out["edges"] = self.edges
        if self.per_deleted_vertex is not None:
            out["per_deleted_vertex"] = {str(v): es for v, es in self.per_deleted_vertex.items()}
            out["sampled"] = self.sampled
        if self.certificate is not None:
            out["certificate"] = self.certificate
            if self.certificate_vertex is not None:
                out["certificate_vertex"] = self.certificate_vertex
        return out


def _factor_via_gadget(g: MultiGraph, k: int, timings: dict[str, float]):
    t0 = time.perf_counter()
    phi = build_phi(g, k)
    t1 = time.perf_counter()
    res = match(phi.host)
    t2 = time.perf_counter()
    timings["gadget"] = timings.get("gadget", 0.0) + 1e3 * (t1 - t0)
    timings["match"] = timings.get("match", 0.0) + 1e3 * (t2 - t1)
    if not res.perfect:
        return None, res.tutte_set.tolist()
    edges = phi.pull_back(res.mate)
    deg = np.bincount(g.edges[edges].ravel(), minlength=g.n)
    if not np.all(deg == k):
        raise AssertionError("gadget matching did not pull back to a k-factor")
    return edges.tolist(), None


def find_k_factor(g: MultiGraph, k: int, *, critical: str = "exact",
                  samples: int = 30, seed: int = 0) -> FactorOutcome:
    """A k-factor of ``g`` when ``k*n`` is even, else a criticality test.

    ``critical`` selects ``"exact"`` or ``"sampled"`` for the odd case; see
    :func:`is_k_factor_critical`.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if delta_k(g, k) == 1:
        return is_k_factor_critical(g, k, mode=critical, samples=samples, seed=seed)
    timings: dict[str, float] = {}
    edges, cert = _factor_via_gadget(g, k, timings)
    if edges is None:
        return FactorOutcome("none", k, certificate=cert, timings=timings)
    return FactorOutcome("factor", k, edges=edges, timings=timings)


def is_k_factor_critical(g: MultiGraph, k: int, mode: str = "exact",
                         samples: int = 30, seed: int = 0) -> FactorOutcome:
    """Check that ``g - v`` has a k-factor for every (or a sample of) ``v``.

    Each ``g - v`` is handled by hanging a new vertex off ``v`` with k
    parallel edges and asking for a k-factor of that graph; dropping ``v``
    and the new vertex leaves a k-factor of ``g - v``.  ``mode="sampled"``
    tests ``samples`` distinct vertices drawn with ``seed``; the result is
    then marked ``sampled``.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown criticality mode {mode!r}")
    if g.n == 0:
        raise ValueError("criticality of the empty graph is undefined")
    if mode == "sampled":
        if samples > g.n:
            raise ValueError(f"cannot sample {samples} of {g.n} vertices")
        picked = sorted(make_rng(seed).choice(g.n, size=samples, replace=False).tolist())
    else:
        picked = list(range(g.n))

    timings: dict[str, float] = {}
    witnesses: dict[int, list[int]] = {}
    m = g.m
    for v in picked:
        h = attach_apex(g, v, k)
        edges, cert = _factor_via_gadget(h, k, timings)
        if edges is None:
            return FactorOutcome("none", k, certificate=cert, certificate_vertex=v,
                                 sampled=mode == "sampled", timings=timings)
        ends = g.edges
        witnesses[v] = [e for e in edges if e < m and ends[e, 0] != v and ends[e, 1] != v]
    return FactorOutcome("critical", k, per_deleted_vertex=witnesses,
                         sampled=mode == "sampled", timings=timings)


# ---------------------------------------------------------------------------
# Exhaustive conditions for small graphs
# ---------------------------------------------------------------------------

def _bit_adjacency(g: MultiGraph) -> tuple[np.ndarray, np.ndarray]:
    adj = np.zeros(g.n, dtype=np.int64)
    mult = np.zeros((g.n, g.n), dtype=np.int64)
    for u, v in g.edges.tolist():
        if u != v:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        mult[u, v] += 1
        if u != v:
            mult[v, u] += 1
    return adj, mult


def _bits(mask: int, n: int) -> frozenset[int]:
    return frozenset(i for i in range(n) if (mask >> i) & 1)


def tutte_check(g: MultiGraph) -> Optional[frozenset[int]]:
    """Smallest-bitmask X with ``o(g - X) > |X|``, or None if none exists."""
    if g.n > TUTTE_MAX_N:
        raise ValueError(f"tutte_check enumerates 2^n sets; n={g.n} > {TUTTE_MAX_N}")
    adj, _ = _bit_adjacency(g)
    x = int(_kernels.tutte_violator(np.int64(g.n), adj))
    return None if x < 0 else _bits(x, g.n)


def lemma2_check(g: MultiGraph, k: int) -> Optional[tuple[frozenset[int], frozenset[int]]]:
    """First disjoint ``(S, T)`` with ``S | T`` nonempty and

        sum_{v in T} d(v) + k|S|  <  omega(g - S - T) + k|T| + lambda(S, T) + delta_k(g)

    or None when the inequality (the sufficient condition for a k-factor,
    or for k-factor-criticality when ``k*n`` is odd) holds throughout.
    """
    if g.n > LEMMA2_MAX_N:
        raise ValueError(f"lemma2_check enumerates 3^n pairs; n={g.n} > {LEMMA2_MAX_N}")
    if g.n == 0 or len(components(g)) != 1:
        raise ValueError("lemma2_check needs a connected graph")
    adj, mult = _bit_adjacency(g)
    s, t = _kernels.lemma2_violation(np.int64(g.n), adj, mult, g.degrees().astype(np.int64),
                                     np.int64(k), np.int64(delta_k(g, k)))
    if s < 0:
        return None
    return _bits(int(s), g.n), _bits(int(t), g.n)


def verify_tutte_set(g: MultiGraph, x) -> bool:
    """True when ``x`` witnesses that ``g`` has no perfect matching."""
    xs = list(x)
    return odd_components(g, xs) > len(xs)

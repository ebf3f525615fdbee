from __future__ import annotations

import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, star
from corefactor.factor import (GadgetError, build_phi, delta_k, find_k_factor,
                               is_k_factor_critical, lemma2_check, match, perfect_matching,
                               tutte_check, verify_tutte_set)
from corefactor.graph import MultiGraph, gnp_random, k_core, lambda_st, omega
from corefactor.oracles import (LEMMA2_MULTIGRAPH_COUNTEREXAMPLE, brute_has_k_factor,
                                brute_k_factors, brute_is_critical, delete_vertex,
                                is_k_factor, random_connected_graph, random_multigraph)
from corefactor.seeding import make_rng


def petersen() -> MultiGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return MultiGraph(10, outer + spokes + inner)


def is_perfect_matching(g: MultiGraph, ids) -> bool:
    return is_k_factor(g, ids, 1)


# --- delta_k ---------------------------------------------------------------------

def test_delta_examples():
    assert delta_k(cycle(7), 2) == 0
    assert delta_k(complete(5), 3) == 1
    assert delta_k(complete(6), 3) == 0


# --- build_phi -------------------------------------------------------------------

def test_phi_c4(c4):
    phi = build_phi(c4, 2)
    assert (phi.host.n, phi.host.m) == (16, 20)
    assert phi.block_edge_count == 16
    assert all(len(phi.u_block(i)) == 2 and len(phi.v_block(i)) == 2 for i in range(4))


def test_phi_k2_edge():
    phi = build_phi(MultiGraph(2, [(0, 1)]), 1)
    assert (phi.host.n, phi.host.m) == (4, 3)
    assert phi.matching_layer == {2: 0}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_phi_structure(seed, k):
    rng = make_rng(seed)
    n = int(rng.integers(2, 9))
    g = random_multigraph(rng, n, int(rng.integers(n, 3 * n)), parallel=True, min_degree=1)
    phi = build_phi(g, k)
    host = phi.host
    assert host.n == k * g.n + 2 * g.m
    assert host.m == 2 * k * g.m + g.m
    assert host.n % 2 == (k * g.n) % 2
    assert phi.contract() == g
    # host is simple
    key = np.sort(host.edges, axis=1)
    assert np.unique(key[:, 0] * host.n + key[:, 1]).size == host.m
    # each V vertex: k block edges plus one layer edge; U vertex: d(v_i) block edges
    hdeg = host.degrees()
    for i in range(g.n):
        assert np.all(hdeg[phi.u_block(i)] == g.degree(i))
        assert np.all(hdeg[phi.v_block(i)] == k + 1)
    layer = host.edges[phi.block_edge_count:]
    assert np.unique(layer).size == 2 * g.m


def test_phi_rejects_self_loop_and_isolated():
    with pytest.raises(GadgetError):
        build_phi(MultiGraph(2, [(0, 0), (0, 1)]), 1)
    with pytest.raises(GadgetError):
        build_phi(MultiGraph(3, [(0, 1)]), 1)
    with pytest.raises(ValueError):
        build_phi(cycle(3), 0)


# --- perfect matching --------------------------------------------------------------

def test_matching_c6():
    pm = perfect_matching(cycle(6))
    assert pm is not None and len(pm) == 3 and is_perfect_matching(cycle(6), pm)


def test_matching_odd_order_absent():
    assert perfect_matching(complete(5)) is None
    assert perfect_matching(MultiGraph(1)) is None


def test_matching_empty_graph():
    assert perfect_matching(MultiGraph(0)) == []


def test_matching_petersen():
    g = petersen()
    assert brute_k_factors(g, 1, limit=1)
    pm = perfect_matching(g)
    assert pm is not None and len(pm) == 5 and is_perfect_matching(g, pm)


def test_matching_parallel_bundle():
    g = MultiGraph(2, [(0, 1), (0, 1), (0, 1)])
    pm = perfect_matching(g)
    assert len(pm) == 1


def test_matching_needs_blossom():
    # triangle with pendant paths forces a blossom contraction
    g = MultiGraph(6, [(0, 1), (1, 2), (2, 0), (0, 3), (1, 4), (2, 5)])
    pm = perfect_matching(g)
    assert pm is not None and is_perfect_matching(g, pm)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matching_agrees_with_networkx(seed):
    rng = make_rng(seed)
    n = int(rng.integers(1, 40))
    m = int(rng.integers(0, 3 * n + 1))
    g = random_multigraph(rng, n, m, parallel=True) if n > 1 else MultiGraph(1)
    nxg = nx.Graph()
    nxg.add_nodes_from(range(n))
    nxg.add_edges_from(g.edge_list())
    size = len(nx.max_weight_matching(nxg, maxcardinality=True))
    res = match(g, check=True)
    assert res.perfect == (2 * size == n)
    if res.perfect:
        assert is_perfect_matching(g, res.edge_ids(g))
    else:
        assert verify_tutte_set(g, res.tutte_set.tolist())


def test_certificate_on_large_failing_gadget():
    # 3-core of a sparse graph plus a pendant triangle cannot carry a 3-factor
    g = k_core(gnp_random(3000, 5.5, seed=2), 3).core
    n = g.n
    extra = [(n, n + 1), (n + 1, n + 2), (n + 2, n), (n, 0)]
    bad = MultiGraph(n + 3, g.edge_list() + extra)
    if delta_k(bad, 3):
        bad = MultiGraph(n + 4, bad.edge_list() + [(n + 3, 0), (n + 3, 1), (n + 3, 2)])
    out = find_k_factor(bad, 3)
    assert out.kind == "none"
    phi = build_phi(bad, 3)
    assert verify_tutte_set(phi.host, out.certificate)
    assert phi.host.n > 10**4


def test_match_accepts_initial_matching():
    g = cycle(8)
    init = np.array([1, 0, -1, -1, -1, -1, -1, -1])
    res = match(g, initial=init, check=True)
    assert res.perfect


# --- find_k_factor -------------------------------------------------------------------

def test_factor_c4(c4):
    out = find_k_factor(c4, 2)
    assert out.kind == "factor" and out.edges == [0, 1, 2, 3]


def test_factor_k4_three():
    out = find_k_factor(complete(4), 3)
    assert out.kind == "factor" and out.edges == list(range(6))


def test_factor_k5_two(k5):
    out = find_k_factor(k5, 2)
    assert out.kind == "factor"
    assert sorted(out.edges) in brute_k_factors(k5, 2)
    assert len(brute_k_factors(k5, 2)) == 12


def test_factor_c5_two():
    out = find_k_factor(cycle(5), 2)
    assert out.kind == "factor" and out.edges == list(range(5))


def test_factor_k4_minus_edge_one():
    g = MultiGraph(4, [e for e in itertools.combinations(range(4), 2) if e != (0, 1)])
    out = find_k_factor(g, 1)
    assert out.kind == "factor" and is_k_factor(g, out.edges, 1)


def test_factor_multigraph_uses_parallel_edges():
    g = MultiGraph(2, [(0, 1), (0, 1), (0, 1)])
    out = find_k_factor(g, 2)
    assert out.kind == "factor" and len(out.edges) == 2
    assert find_k_factor(g, 3).edges == [0, 1, 2]


def test_factor_none_has_certificate():
    g = star(3)
    out = find_k_factor(g, 1)
    assert out.kind == "none"
    assert verify_tutte_set(build_phi(g, 1).host, out.certificate)
    assert out.to_json()["kind"] == "none"


def test_factor_rejects_bad_k(c4):
    with pytest.raises(ValueError):
        find_k_factor(c4, 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_factor_against_brute_force(seed, k):
    rng = make_rng(seed)
    n = int(rng.integers(2, 9))
    g = random_multigraph(rng, n, int(rng.integers((n + 1) // 2, 15)),
                          parallel=bool(rng.random() < 0.4), min_degree=1)
    out = find_k_factor(g, k)
    if delta_k(g, k) == 0:
        assert (out.kind == "factor") == brute_has_k_factor(g, k)
        if out.kind == "factor":
            assert is_k_factor(g, out.edges, k)
    else:
        assert (out.kind == "critical") == brute_is_critical(g, k)


# --- criticality ---------------------------------------------------------------------

def test_k5_one_critical(k5):
    out = is_k_factor_critical(k5, 1)
    assert out.kind == "critical" and not out.sampled
    assert sorted(out.per_deleted_vertex) == [0, 1, 2, 3, 4]
    for v, es in out.per_deleted_vertex.items():
        assert len(es) == 2
        assert all(v not in k5.edge_list()[e] for e in es)
        sub = delete_vertex(k5, v)
        assert brute_has_k_factor(sub, 1)
    # find_k_factor takes the same path when k*n is odd
    assert find_k_factor(k5, 1).kind == "critical"


def test_criticality_witnesses_are_factors():
    g = complete(7)
    out = is_k_factor_critical(g, 3)
    assert out.kind == "critical"
    for v, es in out.per_deleted_vertex.items():
        deg = np.bincount(g.edges[es].ravel(), minlength=7)
        assert deg[v] == 0 and all(deg[u] == 3 for u in range(7) if u != v)


def test_not_critical_reports_vertex():
    g = MultiGraph(3, [(0, 1), (1, 2)])
    out = is_k_factor_critical(g, 1)
    assert out.kind == "none" and out.certificate_vertex == 1


def test_sampled_mode():
    g = complete(9)
    out = find_k_factor(g, 3, critical="sampled", samples=4, seed=5)
    assert out.kind == "critical" and out.sampled and len(out.per_deleted_vertex) == 4
    again = find_k_factor(g, 3, critical="sampled", samples=4, seed=5)
    assert again.per_deleted_vertex == out.per_deleted_vertex
    with pytest.raises(ValueError):
        is_k_factor_critical(g, 3, mode="sampled", samples=10)
    with pytest.raises(ValueError):
        is_k_factor_critical(g, 3, mode="fast")


# --- tutte_check -----------------------------------------------------------------------

def test_tutte_examples():
    assert tutte_check(cycle(6)) is None
    assert tutte_check(star(3)) == frozenset({0})
    x = tutte_check(complete(5))
    assert x is not None and verify_tutte_set(complete(5), x)


def test_tutte_size_guard():
    with pytest.raises(ValueError):
        tutte_check(MultiGraph(23))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tutte_iff_matching(seed):
    rng = make_rng(seed)
    n = int(rng.integers(1, 13))
    g = random_multigraph(rng, n, int(rng.integers(0, 2 * n + 1))) if n > 1 else MultiGraph(1)
    x = tutte_check(g)
    assert (perfect_matching(g) is None) == (x is not None)
    if x is not None:
        assert omega(g, x) >= 0 and verify_tutte_set(g, x)


# --- lemma2_check ----------------------------------------------------------------------

def test_lemma2_star_violated():
    g = star(3)
    s, t = lemma2_check(g, 1)
    lhs = sum(g.degree(v) for v in t) + len(s)
    rhs = omega(g, s | t) + len(t) + lambda_st(g, s, t) + delta_k(g, 1)
    assert lhs < rhs
    # the pair (S = {}, T = {centre}) is itself a violation
    assert 3 < omega(g, {0}) + 1 + 0 + 0


def test_lemma2_k5_holds(k5):
    assert lemma2_check(k5, 2) is None
    assert brute_has_k_factor(k5, 2)


def test_lemma2_first_pair_is_nonempty(c4):
    res = lemma2_check(c4, 3)
    assert res is not None and (res[0] | res[1])


def test_lemma2_guards():
    with pytest.raises(ValueError):
        lemma2_check(MultiGraph(15, [(i, i + 1) for i in range(14)]), 2)
    with pytest.raises(ValueError):
        lemma2_check(MultiGraph(4, [(0, 1), (2, 3)]), 1)


def _lemma2_brute(g, k):
    n = g.n
    dk = delta_k(g, k)
    for labels in itertools.product((0, 1, 2), repeat=n):
        s = {v for v in range(n) if labels[v] == 1}
        t = {v for v in range(n) if labels[v] == 2}
        if not s and not t:
            continue
        lhs = sum(g.degree(v) for v in t) + k * len(s)
        rhs = omega(g, s | t) + k * len(t) + lambda_st(g, s, t) + dk
        if lhs < rhs:
            return True
    return False


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_lemma2_matches_python_enumeration(seed, k):
    rng = make_rng(seed)
    g = random_connected_graph(rng, int(rng.integers(2, 7)), int(rng.integers(0, 12)),
                               parallel=True)
    assert (lemma2_check(g, k) is not None) == _lemma2_brute(g, k)


def test_lemma2_multigraph_counterexample():
    # the sufficient condition holds, but vertex 2's deletion leaves vertex 3
    # with degree 2, so the graph is not 3-factor-critical
    n, k, edges = LEMMA2_MULTIGRAPH_COUNTEREXAMPLE
    g = MultiGraph(n, edges)
    assert delta_k(g, k) == 1
    assert lemma2_check(g, k) is None
    assert not _lemma2_brute(g, k)
    out = is_k_factor_critical(g, k)
    assert out.kind == "none" and out.certificate_vertex == 2
    assert not brute_is_critical(g, k)

"""Compiled inner loops.

Everything here works on CSR adjacency arrays (``indptr``, ``nbr``) of int64
and is called from the pure-Python wrappers in :mod:`corefactor.graph` and
:mod:`corefactor.factor`.  Nothing in this module validates its input.
"""

from __future__ import annotations

import numpy as np
from numba import njit


# ---------------------------------------------------------------------------
# k-core peeling
# ---------------------------------------------------------------------------

@njit(cache=True)
def peel(indptr, nbr, k):
    """Return a boolean mask of the vertices that survive k-core peeling."""
    n = indptr.shape[0] - 1
    deg = np.empty(n, np.int64)
    alive = np.ones(n, np.bool_)
    queue = np.empty(n, np.int64)
    tail = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] < k:
            alive[v] = False
            queue[tail] = v
            tail += 1
    head = 0
    while head < tail:
        v = queue[head]
        head += 1
        for p in range(indptr[v], indptr[v + 1]):
            w = nbr[p]
            if alive[w]:
                deg[w] -= 1
                if deg[w] < k:
                    alive[w] = False
                    queue[tail] = w
                    tail += 1
    return alive


# ---------------------------------------------------------------------------
# Blossom matching (Edmonds, union-find bases, per-search local reset)
#
# Arrays are sized n + 1; index n is a sentinel meaning "unmatched" / "none".
# label: 0 unreached, 1 outer, 2 inner.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _find(fa, x):
    r = x
    while fa[r] != r:
        r = fa[r]
    while fa[x] != r:
        nx = fa[x]
        fa[x] = r
        x = nx
    return r


@njit(cache=True)
def _lca(x, y, fa, pre, mate, dfn, stamp, sentinel):
    x = _find(fa, x)
    y = _find(fa, y)
    while dfn[x] != stamp:
        dfn[x] = stamp
        x = _find(fa, pre[mate[x]])
        if y != sentinel:
            t = x
            x = y
            y = t
    return x


@njit(cache=True)
def _shrink(x, y, b, fa, pre, mate, label, queue, tail):
    while _find(fa, x) != b:
        pre[x] = y
        y = mate[x]
        if label[y] == 2:
            label[y] = 1
            queue[tail] = y
            tail += 1
        if fa[x] == x:
            fa[x] = b
        if fa[y] == y:
            fa[y] = b
        x = pre[y]
    return tail


@njit(cache=True)
def _search(root, indptr, nbr, mate, pre, fa, label, dfn, stamp, queue, touched):
    """Grow an alternating tree from ``root``; augment on success.

    Returns ``(found, ntouched, stamp)``.  Labels of the touched vertices are
    left in place; the caller resets them with :func:`_reset`.
    """
    sentinel = mate.shape[0] - 1
    ntouch = 0
    label[root] = 1
    touched[ntouch] = root
    ntouch += 1
    head = 0
    tail = 0
    queue[tail] = root
    tail += 1
    while head < tail:
        x = queue[head]
        head += 1
        for p in range(indptr[x], indptr[x + 1]):
            y = nbr[p]
            if y == x or label[y] == 2:
                continue
            if label[y] == 0:
                if mate[y] == sentinel:
                    pre[y] = x
                    touched[ntouch] = y
                    ntouch += 1
                    u = y
                    while u != sentinel:
                        pv = pre[u]
                        last = mate[pv]
                        mate[u] = pv
                        mate[pv] = u
                        u = last
                    return True, ntouch, stamp
                label[y] = 2
                pre[y] = x
                z = mate[y]
                label[z] = 1
                touched[ntouch] = y
                touched[ntouch + 1] = z
                ntouch += 2
                queue[tail] = z
                tail += 1
            else:
                bx = _find(fa, x)
                by = _find(fa, y)
                if bx == by:
                    continue
                stamp += 1
                b = _lca(x, y, fa, pre, mate, dfn, stamp, sentinel)
                tail = _shrink(x, y, b, fa, pre, mate, label, queue, tail)
                tail = _shrink(y, x, b, fa, pre, mate, label, queue, tail)
    return False, ntouch, stamp


@njit(cache=True)
def _reset(touched, ntouch, label, pre, fa, sentinel):
    for i in range(ntouch):
        v = touched[i]
        label[v] = 0
        pre[v] = sentinel
        fa[v] = v


@njit(cache=True)
def greedy_init(indptr, nbr, mate):
    """Karp-Sipser style start: lowest current degree first, degree-1 rule."""
    n = indptr.shape[0] - 1
    sentinel = n
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
    # vertices of residual degree one are matched first
    stack = np.empty(n, np.int64)
    top = 0
    for v in range(n):
        if mate[v] == sentinel and deg[v] == 1:
            stack[top] = v
            top += 1
    order = np.argsort(deg, kind="mergesort")
    pos = 0
    while True:
        v = -1
        while top > 0:
            top -= 1
            w = stack[top]
            if mate[w] == sentinel:
                v = w
                break
        if v == -1:
            while pos < n and mate[order[pos]] != sentinel:
                pos += 1
            if pos == n:
                break
            v = order[pos]
            pos += 1
        best = -1
        bestdeg = 1 << 62
        for p in range(indptr[v], indptr[v + 1]):
            w = nbr[p]
            if w != v and mate[w] == sentinel and deg[w] < bestdeg:
                best = w
                bestdeg = deg[w]
        if best == -1:
            continue
        mate[v] = best
        mate[best] = v
        for u in (v, best):
            for p in range(indptr[u], indptr[u + 1]):
                w = nbr[p]
                if mate[w] == sentinel:
                    deg[w] -= 1
                    if deg[w] == 1:
                        stack[top] = w
                        top += 1
    return mate


@njit(cache=True)
def match_perfect(indptr, nbr, mate, stop_on_failure):
    """Augment ``mate`` in place until perfect or a search fails.

    Returns the first root whose search failed, or -1.  With
    ``stop_on_failure`` false the remaining free vertices are still tried, so
    the result is a maximum matching.
    """
    n = indptr.shape[0] - 1
    sentinel = n
    pre = np.full(n + 1, sentinel, np.int64)
    fa = np.arange(n + 1)
    label = np.zeros(n + 1, np.int8)
    dfn = np.zeros(n + 1, np.int64)
    queue = np.empty(n + 1, np.int64)
    touched = np.empty(n + 2, np.int64)
    stamp = 0
    failed = -1
    for r in range(n):
        if mate[r] != sentinel:
            continue
        found, ntouch, stamp = _search(r, indptr, nbr, mate, pre, fa, label,
                                       dfn, stamp, queue, touched)
        _reset(touched, ntouch, label, pre, fa, sentinel)
        if not found:
            if failed == -1:
                failed = r
            if stop_on_failure:
                return failed
    return failed


@njit(cache=True)
def hungarian_tree(root, indptr, nbr, mate):
    """Labels of a failed search from ``root`` on a matching with no
    augmenting path from it.  Inner vertices (label 2) form a Tutte set."""
    n = indptr.shape[0] - 1
    sentinel = n
    work = mate.copy()
    pre = np.full(n + 1, sentinel, np.int64)
    fa = np.arange(n + 1)
    label = np.zeros(n + 1, np.int8)
    dfn = np.zeros(n + 1, np.int64)
    queue = np.empty(n + 1, np.int64)
    touched = np.empty(n + 2, np.int64)
    found, ntouch, stamp = _search(root, indptr, nbr, work, pre, fa, label,
                                   dfn, 0, queue, touched)
    if found:
        label[:] = -1
    return label[:n]


# ---------------------------------------------------------------------------
# Exhaustive small-graph enumerations (bitmask adjacency, n <= 22)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _components_of(mask, adjbits):
    """Return (component count, odd component count) of the induced graph."""
    ncomp = 0
    nodd = 0
    rest = mask
    while rest != 0:
        low = rest & (-rest)
        comp = low
        while True:
            grown = comp
            bits = comp
            while bits != 0:
                b = bits & (-bits)
                v = 0
                while (b >> v) != 1:
                    v += 1
                grown |= adjbits[v]
                bits ^= b
            grown &= mask
            if grown == comp:
                break
            comp = grown
        rest &= ~comp
        ncomp += 1
        size = 0
        bits = comp
        while bits != 0:
            bits &= bits - 1
            size += 1
        if size & 1:
            nodd += 1
    return ncomp, nodd


@njit(cache=True)
def _popcount(x):
    c = 0
    while x != 0:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def tutte_violator(n, adjbits):
    """First X (ascending bitmask order) with o(G - X) > |X|, or -1."""
    full = (np.int64(1) << n) - 1
    for x in range(np.int64(1) << n):
        rest = full & ~x
        _, nodd = _components_of(rest, adjbits)
        if nodd > _popcount(x):
            return x
    return -1


@njit(cache=True)
def lemma2_violation(n, adjbits, mult, deg, k, delta):
    """First disjoint (S, T), S | T nonempty, violating the sufficient
    condition for a k-factor.  Enumeration: S ascending, then T ascending over
    subsets of the complement of S.  Returns (S, T) or (-1, -1)."""
    full = (np.int64(1) << n) - 1
    for s in range(np.int64(1) << n):
        comp = full & ~s
        t = np.int64(0)
        while True:
            if s != 0 or t != 0:
                lhs = k * _popcount(s)
                bits = t
                while bits != 0:
                    b = bits & (-bits)
                    v = 0
                    while (b >> v) != 1:
                        v += 1
                    lhs += deg[v]
                    bits ^= b
                cross = 0
                sb = s
                while sb != 0:
                    b = sb & (-sb)
                    u = 0
                    while (b >> u) != 1:
                        u += 1
                    tb = t
                    while tb != 0:
                        c = tb & (-tb)
                        w = 0
                        while (c >> w) != 1:
                            w += 1
                        cross += mult[u, w]
                        tb ^= c
                    sb ^= b
                omega, _ = _components_of(full & ~(s | t), adjbits)
                rhs = omega + k * _popcount(t) + cross + delta
                if lhs < rhs:
                    return s, t
            # next subset of comp in increasing order
            if t == comp:
                break
            t = (t - comp) & comp
    return np.int64(-1), np.int64(-1)

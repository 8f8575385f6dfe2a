"""Exact minimum-weight perfect matching on small dense graphs.

A compact primal-dual blossom algorithm (Edmonds, O(n^3)) on an adjacency
matrix, compiled with numba.  Vertices are 1-indexed internally; blossoms take
indices ``n+1 .. 2n``.  All arithmetic is on 64-bit integers, which keeps the
tight-edge tests exact.  Recursive steps of the textbook formulation are
unrolled with explicit stacks.

Minimum-weight perfect matching is reduced to maximum-weight matching by
``w' = 2 (M - w)`` with ``M`` large enough that every perfect matching beats
every non-perfect one.  The factor 2 keeps all dual updates integral.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FORBIDDEN = -1


@njit(cache=True)
def _e_delta(a, b, gu, gv, gw, lab):
    eu = gu[a, b]
    ev = gv[a, b]
    return lab[eu] + lab[ev] - 2 * gw[eu, ev]


@njit(cache=True)
def _update_slack(u, x, slack, gu, gv, gw, lab):
    if slack[x] == 0 or _e_delta(u, x, gu, gv, gw, lab) < _e_delta(slack[x], x, gu, gv, gw, lab):
        slack[x] = u


@njit(cache=True)
def _set_slack(x, n, slack, st, S, gu, gv, gw, lab):
    slack[x] = 0
    for u in range(1, n + 1):
        if gw[u, x] > 0 and st[u] != x and S[st[u]] == 0:
            _update_slack(u, x, slack, gu, gv, gw, lab)


@njit(cache=True)
def _q_push(x, n, flower, flen, queue, qt):
    """Push ``x`` (or all original vertices inside blossom ``x``)."""
    stack = np.empty(2 * n + 2, dtype=np.int64)
    sp = 0
    stack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = stack[sp]
        if y <= n:
            if qt[0] >= queue.shape[0]:
                return False
            queue[qt[0]] = y
            qt[0] += 1
        else:
            for i in range(flen[y]):
                stack[sp] = flower[y, i]
                sp += 1
    return True


@njit(cache=True)
def _set_st(x, b, n, st, flower, flen):
    stack = np.empty(2 * n + 2, dtype=np.int64)
    sp = 0
    stack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = stack[sp]
        st[y] = b
        if y > n:
            for i in range(flen[y]):
                stack[sp] = flower[y, i]
                sp += 1


@njit(cache=True)
def _get_pr(b, xr, flower, flen):
    pr = 0
    for i in range(flen[b]):
        if flower[b, i] == xr:
            pr = i
            break
    if pr % 2 == 1:
        # reverse flower[b][1:]
        lo = 1
        hi = flen[b] - 1
        while lo < hi:
            t = flower[b, lo]
            flower[b, lo] = flower[b, hi]
            flower[b, hi] = t
            lo += 1
            hi -= 1
        return flen[b] - pr
    return pr


@njit(cache=True)
def _set_match(u0, v0, n, match, gu, gv, flower, flen, flower_from):
    su = np.empty(4 * n + 4, dtype=np.int64)
    sv = np.empty(4 * n + 4, dtype=np.int64)
    tmp = np.empty(n + 1, dtype=np.int64)
    sp = 0
    su[sp] = u0
    sv[sp] = v0
    sp += 1
    while sp > 0:
        sp -= 1
        u = su[sp]
        v = sv[sp]
        match[u] = gv[u, v]
        if u > n:
            xr = flower_from[u, gu[u, v]]
            pr = _get_pr(u, xr, flower, flen)
            for i in range(pr):
                su[sp] = flower[u, i]
                sv[sp] = flower[u, i ^ 1]
                sp += 1
            su[sp] = xr
            sv[sp] = v
            sp += 1
            # rotate flower[u] left by pr
            m = flen[u]
            for i in range(m):
                tmp[i] = flower[u, (i + pr) % m]
            for i in range(m):
                flower[u, i] = tmp[i]


@njit(cache=True)
def _augment(u, v, n, st, match, pa, gu, gv, flower, flen, flower_from):
    while True:
        xnv = st[match[u]]
        _set_match(u, v, n, match, gu, gv, flower, flen, flower_from)
        if xnv == 0:
            return
        _set_match(xnv, st[pa[xnv]], n, match, gu, gv, flower, flen, flower_from)
        u = st[pa[xnv]]
        v = xnv


@njit(cache=True)
def _get_lca(u, v, st, match, pa, vis, stamp):
    stamp[0] += 1
    t = stamp[0]
    while u != 0 or v != 0:
        if u != 0:
            if vis[u] == t:
                return u
            vis[u] = t
            u = st[match[u]]
            if u != 0:
                u = st[pa[u]]
        u, v = v, u
    return 0


@njit(cache=True)
def _add_blossom(u, lca, v, n, nx, st, match, pa, S, lab, slack, gu, gv, gw,
                 flower, flen, flower_from, queue, qt):
    b = n + 1
    while b <= nx[0] and st[b] != 0:
        b += 1
    if b > nx[0]:
        nx[0] += 1
    lab[b] = 0
    S[b] = 0
    match[b] = match[lca]
    k = 0
    flower[b, k] = lca
    k += 1
    x = u
    while x != lca:
        flower[b, k] = x
        k += 1
        y = st[match[x]]
        flower[b, k] = y
        k += 1
        if not _q_push(y, n, flower, flen, queue, qt):
            return False
        x = st[pa[y]]
    # reverse flower[b][1:k]
    lo = 1
    hi = k - 1
    while lo < hi:
        t = flower[b, lo]
        flower[b, lo] = flower[b, hi]
        flower[b, hi] = t
        lo += 1
        hi -= 1
    x = v
    while x != lca:
        flower[b, k] = x
        k += 1
        y = st[match[x]]
        flower[b, k] = y
        k += 1
        if not _q_push(y, n, flower, flen, queue, qt):
            return False
        x = st[pa[y]]
    flen[b] = k
    _set_st(b, b, n, st, flower, flen)
    for x in range(1, nx[0] + 1):
        gw[b, x] = 0
        gw[x, b] = 0
    for x in range(1, n + 1):
        flower_from[b, x] = 0
    for i in range(k):
        xs = flower[b, i]
        for x in range(1, nx[0] + 1):
            if gw[xs, x] > 0 and (
                gw[b, x] == 0
                or _e_delta(xs, x, gu, gv, gw, lab) < _e_delta(b, x, gu, gv, gw, lab)
            ):
                gu[b, x] = gu[xs, x]
                gv[b, x] = gv[xs, x]
                gw[b, x] = gw[xs, x]
                gu[x, b] = gu[x, xs]
                gv[x, b] = gv[x, xs]
                gw[x, b] = gw[x, xs]
        for x in range(1, n + 1):
            if flower_from[xs, x] != 0:
                flower_from[b, x] = xs
    _set_slack(b, n, slack, st, S, gu, gv, gw, lab)
    return True


@njit(cache=True)
def _expand_blossom(b, n, st, pa, S, slack, gu, gv, gw, lab, flower, flen,
                    flower_from, queue, qt):
    for i in range(flen[b]):
        _set_st(flower[b, i], flower[b, i], n, st, flower, flen)
    xr = flower_from[b, gu[b, pa[b]]]
    pr = _get_pr(b, xr, flower, flen)
    i = 0
    while i < pr:
        xs = flower[b, i]
        xns = flower[b, i + 1]
        pa[xs] = gu[xns, xs]
        S[xs] = 1
        S[xns] = 0
        slack[xs] = 0
        _set_slack(xns, n, slack, st, S, gu, gv, gw, lab)
        if not _q_push(xns, n, flower, flen, queue, qt):
            return False
        i += 2
    S[xr] = 1
    pa[xr] = pa[b]
    for i in range(pr + 1, flen[b]):
        xs = flower[b, i]
        S[xs] = -1
        _set_slack(xs, n, slack, st, S, gu, gv, gw, lab)
    st[b] = 0
    return True


@njit(cache=True)
def _on_found_edge(a, c, n, nx, st, match, pa, S, lab, slack, gu, gv, gw,
                   flower, flen, flower_from, queue, qt, vis, stamp):
    """Returns 1 on augmentation, 0 to continue, -1 on queue overflow."""
    eu = gu[a, c]
    ev = gv[a, c]
    u = st[eu]
    v = st[ev]
    if S[v] == -1:
        pa[v] = eu
        S[v] = 1
        nu = st[match[v]]
        slack[v] = 0
        slack[nu] = 0
        S[nu] = 0
        if not _q_push(nu, n, flower, flen, queue, qt):
            return -1
    elif S[v] == 0:
        lca = _get_lca(u, v, st, match, pa, vis, stamp)
        if lca == 0:
            _augment(u, v, n, st, match, pa, gu, gv, flower, flen, flower_from)
            _augment(v, u, n, st, match, pa, gu, gv, flower, flen, flower_from)
            return 1
        if not _add_blossom(u, lca, v, n, nx, st, match, pa, S, lab, slack, gu, gv, gw,
                            flower, flen, flower_from, queue, qt):
            return -1
    return 0


@njit(cache=True)
def _phase(n, nx, st, match, pa, S, lab, slack, gu, gv, gw, flower, flen,
           flower_from, queue, qt, vis, stamp):
    """One augmentation phase: 1 augmented, 0 finished, -1 overflow."""
    for x in range(1, nx[0] + 1):
        S[x] = -1
        slack[x] = 0
    qh = 0
    qt[0] = 0
    for x in range(1, nx[0] + 1):
        if st[x] == x and match[x] == 0:
            pa[x] = 0
            S[x] = 0
            if not _q_push(x, n, flower, flen, queue, qt):
                return -1
    if qt[0] == 0:
        return 0
    big = np.int64(1) << 62
    while True:
        while qh < qt[0]:
            u = queue[qh]
            qh += 1
            if S[st[u]] == 1:
                continue
            for v in range(1, n + 1):
                if gw[u, v] > 0 and st[u] != st[v]:
                    if _e_delta(u, v, gu, gv, gw, lab) == 0:
                        r = _on_found_edge(u, v, n, nx, st, match, pa, S, lab, slack, gu, gv,
                                           gw, flower, flen, flower_from, queue, qt, vis, stamp)
                        if r != 0:
                            return r
                    else:
                        _update_slack(u, st[v], slack, gu, gv, gw, lab)
        d = big
        for b in range(n + 1, nx[0] + 1):
            if st[b] == b and S[b] == 1:
                if lab[b] // 2 < d:
                    d = lab[b] // 2
        for x in range(1, nx[0] + 1):
            if st[x] == x and slack[x] != 0:
                if S[x] == -1:
                    e = _e_delta(slack[x], x, gu, gv, gw, lab)
                    if e < d:
                        d = e
                elif S[x] == 0:
                    e = _e_delta(slack[x], x, gu, gv, gw, lab) // 2
                    if e < d:
                        d = e
        for u in range(1, n + 1):
            if S[st[u]] == 0:
                if lab[u] <= d:
                    return 0
                lab[u] -= d
            elif S[st[u]] == 1:
                lab[u] += d
        for b in range(n + 1, nx[0] + 1):
            if st[b] == b:
                if S[st[b]] == 0:
                    lab[b] += 2 * d
                elif S[st[b]] == 1:
                    lab[b] -= 2 * d
        qh = 0
        qt[0] = 0
        for x in range(1, nx[0] + 1):
            if st[x] == x and slack[x] != 0 and st[slack[x]] != x:
                if _e_delta(slack[x], x, gu, gv, gw, lab) == 0:
                    r = _on_found_edge(slack[x], x, n, nx, st, match, pa, S, lab, slack, gu, gv,
                                       gw, flower, flen, flower_from, queue, qt, vis, stamp)
                    if r != 0:
                        return r
        for b in range(n + 1, nx[0] + 1):
            if st[b] == b and S[b] == 1 and lab[b] == 0:
                if not _expand_blossom(b, n, st, pa, S, slack, gu, gv, gw, lab, flower, flen,
                                       flower_from, queue, qt):
                    return -1


@njit(cache=True)
def _max_weight_matching(w, queue_cap):
    """Maximum-weight matching for a symmetric int64 matrix ``w`` (0 = no edge).

    Returns the 0-indexed mate array (-1 unmatched), or an empty array if the
    internal queue capacity was insufficient.
    """
    n = w.shape[0]
    m = 2 * n + 1
    gu = np.zeros((m, m), dtype=np.int64)
    gv = np.zeros((m, m), dtype=np.int64)
    gw = np.zeros((m, m), dtype=np.int64)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            gu[u, v] = u
            gv[u, v] = v
            gw[u, v] = w[u - 1, v - 1]
    lab = np.zeros(m, dtype=np.int64)
    match = np.zeros(m, dtype=np.int64)
    slack = np.zeros(m, dtype=np.int64)
    st = np.zeros(m, dtype=np.int64)
    pa = np.zeros(m, dtype=np.int64)
    S = np.zeros(m, dtype=np.int64)
    vis = np.zeros(m, dtype=np.int64)
    flower = np.zeros((m, n + 1), dtype=np.int64)
    flen = np.zeros(m, dtype=np.int64)
    flower_from = np.zeros((m, n + 1), dtype=np.int64)
    queue = np.zeros(queue_cap, dtype=np.int64)
    qt = np.zeros(1, dtype=np.int64)
    stamp = np.zeros(1, dtype=np.int64)
    nx = np.zeros(1, dtype=np.int64)
    nx[0] = n
    for u in range(n + 1):
        st[u] = u
        flen[u] = 0
    wmax = 0
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            flower_from[u, v] = u if u == v else 0
            if gw[u, v] > wmax:
                wmax = gw[u, v]
    for u in range(1, n + 1):
        lab[u] = wmax
    while True:
        r = _phase(n, nx, st, match, pa, S, lab, slack, gu, gv, gw, flower, flen,
                   flower_from, queue, qt, vis, stamp)
        if r == -1:
            return np.empty(0, dtype=np.int64)
        if r == 0:
            break
    mate = np.full(n, -1, dtype=np.int64)
    for u in range(1, n + 1):
        if match[u] != 0:
            mate[u - 1] = match[u] - 1
    return mate


@njit(cache=True)
def _to_max_weights(cost):
    """Map a min-cost matrix (FORBIDDEN = -1) to positive max-weights."""
    n = cost.shape[0]
    cmax = 0
    for i in range(n):
        for j in range(n):
            if i != j and cost[i, j] > cmax:
                cmax = cost[i, j]
    big = (n // 2) * cmax + 1
    w = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i != j and cost[i, j] >= 0:
                w[i, j] = 2 * (big - cost[i, j])
    return w


def min_weight_perfect_matching(cost) -> tuple[np.ndarray, int]:
    """Exact minimum-weight perfect matching on a complete-ish graph.

    Args:
        cost: Symmetric ``(n, n)`` matrix of nonnegative integer edge costs;
            entries equal to :data:`FORBIDDEN` mark absent edges.  The
            diagonal is ignored.

    Returns:
        ``(mate, total)`` with ``mate[i]`` the partner of vertex ``i``.

    Raises:
        ValueError: If no perfect matching exists.
    """
    cost = np.ascontiguousarray(cost, dtype=np.int64)
    n = cost.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), 0
    if n % 2:
        raise ValueError("perfect matching needs an even vertex count")
    if n == 2:
        if cost[0, 1] < 0:
            raise ValueError("no perfect matching")
        return np.array([1, 0], dtype=np.int64), int(cost[0, 1])
    w = _to_max_weights(cost)
    cap = 8 * (n + 1)
    while True:
        mate = _max_weight_matching(w, cap)
        if mate.size:
            break
        cap *= 4
    if np.any(mate < 0):
        raise ValueError("no perfect matching")
    idx = np.arange(n)
    total = int(cost[idx, mate].sum() // 2)
    return mate, total

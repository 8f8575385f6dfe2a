"""Exact minimum-weight decoding with class-resolved coset weights.

For a syndrome ``D`` and a logical class ``h``, ``w_h`` is the weight of the
lightest correction with boundary ``D`` whose cut-crossing parity is ``h``.
Any such correction splits into paths pairing defects (or a defect with a
boundary), so ``w_h`` is a perfect matching problem with path costs.

Planar code
    The cut consists of every qubit touching the left boundary node, so a
    correction's crossing parity equals the degree parity of that node.
    ``w_h`` is therefore the unconstrained matching of ``D`` plus the left
    node (when ``h = 1``), with only the right boundary free to absorb paths.

Torus
    Each pair chooses a path of even or odd crossing parity (distances from
    the double cover).  The parity sum is constrained, which is solved exactly
    by best-first branch-and-bound around the unconstrained blossom matching.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from qecregimes.errors import BudgetExceeded, SyndromeError
from qecregimes.sim.blossom import FORBIDDEN, min_weight_perfect_matching
from qecregimes.sim.geometry import (
    CodeGeometry,
    cover_distances,
    error_class,
    graph_distances,
    syndrome,
)

SUCCESS, TIE, FAILURE = "success", "tie", "failure"
DEFAULT_NODE_BUDGET = 10_000


@dataclass(frozen=True)
class DecoderTables:
    """Immutable distance tables for one geometry.

    Attributes:
        geometry: The code layout.
        dist: All-pairs node distances.
        cover: Per cut, the ``(d_even, d_odd)`` double-cover distances.
    """

    geometry: CodeGeometry
    dist: np.ndarray
    cover: tuple


@dataclass(frozen=True)
class GapSample:
    """Class-resolved weights for one shot.

    ``delta_e = 2 (w_opp - w_same)``; negative means a decoding failure and
    zero a tie.
    """

    delta_e: int
    h_error: tuple
    w_same: int
    w_opp: int


def build_tables(geometry: CodeGeometry) -> DecoderTables:
    """Precompute distance tables for ``geometry``."""
    dist = graph_distances(geometry)
    cover = tuple(cover_distances(geometry, j) for j in range(geometry.n_logicals))
    for a in (dist, *(x for pair in cover for x in pair)):
        a.setflags(write=False)
    return DecoderTables(geometry=geometry, dist=dist, cover=cover)


def _boundary_cost(nodes, dist, boundary_cost):
    """Cost matrix for matching ``nodes`` with an optional free boundary.

    ``boundary_cost[i]`` is the distance from node ``i`` to the free boundary
    (or ``None`` without a boundary).  An odd node count is completed with a
    single virtual boundary vertex; pairs may also route through the boundary,
    which is the same as both members matching to it.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    c = dist[np.ix_(nodes, nodes)].copy()
    if boundary_cost is None:
        return c
    bc = boundary_cost
    via = bc[:, None] + bc[None, :]
    c = np.where((c < 0) | (via < c), via, c)
    if len(nodes) % 2:
        m = len(nodes)
        full = np.empty((m + 1, m + 1), dtype=np.int64)
        full[:m, :m] = c
        full[m, :m] = bc
        full[:m, m] = bc
        full[m, m] = 0
        c = full
    return c


def mwpm(geometry: CodeGeometry, defects, tables: DecoderTables) -> tuple[int, np.ndarray]:
    """Unconstrained minimum-weight perfect matching of a syndrome.

    Planar defects may terminate on either boundary.

    Returns:
        ``(weight, mate)`` where ``mate`` pairs positions in ``defects``;
        the index ``len(defects)`` stands for the boundary.

    Raises:
        SyndromeError: Odd defect count on the torus.
    """
    defects = np.asarray(defects, dtype=np.int64)
    if geometry.kind == "torus":
        if len(defects) % 2:
            raise SyndromeError("odd number of defects on a closed surface")
        c = _boundary_cost(defects, tables.dist, None)
    else:
        d = tables.dist
        bc = np.minimum(d[defects, geometry.left], d[defects, geometry.right])
        c = _boundary_cost(defects, d, bc)
    if c.shape[0] == 0:
        return 0, np.empty(0, dtype=np.int64)
    mate, total = min_weight_perfect_matching(c)
    return total, mate


def _planar_class_weight(geometry: CodeGeometry, defects, h: int, dist) -> int:
    nodes = np.asarray(defects, dtype=np.int64)
    if h:
        nodes = np.append(nodes, geometry.left)
    if len(nodes) == 0:
        return 0
    bc = dist[nodes, geometry.right]
    c = _boundary_cost(nodes, dist, bc)
    return min_weight_perfect_matching(c)[1]


def _pair_costs(defects, d_even, d_odd):
    de = d_even[np.ix_(defects, defects)]
    do = d_odd[np.ix_(defects, defects)]
    big = np.iinfo(np.int64).max // 4
    de = np.where(de < 0, big, de)
    do = np.where(do < 0, big, do)
    return de, do


def parity_constrained_weight(
    defects, d_even, d_odd, target: int, L: int, node_budget: int = DEFAULT_NODE_BUDGET
) -> int:
    """Lightest pairing of ``defects`` whose crossing parities sum to ``target``.

    Args:
        defects: Node indices, even count.
        d_even: Even-parity path lengths between nodes.
        d_odd: Odd-parity path lengths between nodes.
        target: Required parity of the total crossing number.
        L: Length of the shortest non-contractible cycle, the answer for an
            empty syndrome with odd target.
        node_budget: Maximum number of branch-and-bound nodes.

    Raises:
        BudgetExceeded: If the search exceeds ``node_budget`` nodes.
    """
    defects = np.asarray(defects, dtype=np.int64)
    m = len(defects)
    if m == 0:
        return 0 if target == 0 else L
    if m % 2:
        raise SyndromeError("odd number of defects on a closed surface")
    de, do = _pair_costs(defects, d_even, d_odd)
    # allowed[i, j, pi]: pair (i, j) may use parity pi.
    allowed0 = np.ones((m, m, 2), dtype=bool)
    np.fill_diagonal(allowed0[:, :, 0], False)
    np.fill_diagonal(allowed0[:, :, 1], False)
    forced0 = ()

    def relax(allowed, forced):
        ce = np.where(allowed[:, :, 0], de, np.iinfo(np.int64).max)
        co = np.where(allowed[:, :, 1], do, np.iinfo(np.int64).max)
        c = np.minimum(ce, co)
        blocked = ~(allowed[:, :, 0] | allowed[:, :, 1])
        for i, j, _ in forced:
            blocked[i, :] = True
            blocked[:, i] = True
            blocked[j, :] = True
            blocked[:, j] = True
            blocked[i, j] = blocked[j, i] = False
        c = np.where(blocked, FORBIDDEN, c)
        try:
            mate, total = min_weight_perfect_matching(c)
        except ValueError:
            return None
        pairs = []
        flex = False
        parity = 0
        slack = None
        for i in range(m):
            j = int(mate[i])
            if j < i:
                continue
            a0, a1 = allowed[i, j, 0], allowed[i, j, 1]
            if a0 and a1 and de[i, j] == do[i, j]:
                flex = True
                pi = 0
            elif a0 and (not a1 or de[i, j] < do[i, j]):
                pi = 0
            else:
                pi = 1
            if a0 and a1:
                delta = abs(int(do[i, j]) - int(de[i, j]))
                slack = delta if slack is None else min(slack, delta)
            parity ^= pi
            pairs.append((i, j, pi))
        return total, pairs, flex or parity == target, slack

    best = None
    heap = []
    counter = 0
    root = relax(allowed0, forced0)
    if root is None:
        raise SyndromeError("no perfect matching of defects")
    heapq.heappush(heap, (root[0], counter, allowed0, forced0, root))
    nodes = 0
    while heap:
        lb, _, allowed, forced, res = heapq.heappop(heap)
        if best is not None and lb >= best:
            break
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded(f"branch-and-bound exceeded {node_budget} nodes")
        total, pairs, feasible, slack = res
        if feasible:
            best = total if best is None else min(best, total)
            continue
        if slack is not None:
            # Flipping the cheapest free pair is always feasible.
            ub = total + slack
            best = ub if best is None else min(best, ub)
        forced_set = {(i, j) for i, j, _ in forced}
        branch = None
        for i, j, pi in pairs:
            if (i, j) in forced_set:
                continue
            if allowed[i, j, 0] and allowed[i, j, 1]:
                branch = (i, j, pi)
                break
        if branch is None:
            for i, j, pi in pairs:
                if (i, j) not in forced_set:
                    branch = (i, j, pi)
                    break
        if branch is None:
            continue
        i, j, pi = branch
        # Child A: pair (i, j) matched with parity pi.
        a = allowed.copy()
        a[i, j, 1 - pi] = a[j, i, 1 - pi] = False
        fa = forced + ((i, j, pi),)
        # Child B: parity pi disallowed on (i, j).
        b = allowed.copy()
        b[i, j, pi] = b[j, i, pi] = False
        for child_allowed, child_forced in ((a, fa), (b, forced)):
            res_c = relax(child_allowed, child_forced)
            if res_c is None:
                continue
            if best is not None and res_c[0] >= best:
                continue
            counter += 1
            heapq.heappush(heap, (res_c[0], counter, child_allowed, child_forced, res_c))
    if best is None:
        raise SyndromeError("no pairing with the requested parity")
    return int(best)


def class_resolved_weights(
    geometry: CodeGeometry,
    flips,
    tables: DecoderTables,
    node_budget: int = DEFAULT_NODE_BUDGET,
):
    """Minimum correction weights in the error's own class and the other one.

    Returns:
        Planar: ``(w_same, w_opp)``.  Torus: a tuple with one
        ``(w_same, w_opp)`` pair per logical direction, where the other
        direction's class is unconstrained.
    """
    flips = np.asarray(flips, dtype=bool)
    defects = syndrome(geometry, flips)
    h = error_class(geometry, flips)
    if geometry.kind == "planar":
        w = [_planar_class_weight(geometry, defects, k, tables.dist) for k in (0, 1)]
        return w[h[0]], w[1 - h[0]]
    out = []
    for j, (d_even, d_odd) in enumerate(tables.cover):
        w_h = parity_constrained_weight(defects, d_even, d_odd, h[j], geometry.L, node_budget)
        w_o = parity_constrained_weight(defects, d_even, d_odd, 1 - h[j], geometry.L, node_budget)
        out.append((w_h, w_o))
    return tuple(out)


def _outcome(w_same: int, w_opp: int) -> str:
    if w_same < w_opp:
        return SUCCESS
    if w_same == w_opp:
        return TIE
    return FAILURE


def failure_weight(weights, kind: str) -> float:
    """Failure weight of a shot: 1, 1/2 for a tie, 0 for success.

    On the torus each direction succeeds with weight 1, 1/2 or 0 and the shot
    fails with weight ``1 - prod(success)``.
    """
    pairs = [weights] if kind == "planar" else list(weights)
    s = 1.0
    for w_same, w_opp in pairs:
        o = _outcome(w_same, w_opp)
        s *= 1.0 if o == SUCCESS else (0.5 if o == TIE else 0.0)
    return 1.0 - s


def decode_shot(geometry: CodeGeometry, flips, tables: DecoderTables,
                node_budget: int = DEFAULT_NODE_BUDGET) -> str:
    """Decode one error pattern.

    Returns:
        ``success``, ``tie`` or ``failure``.  A torus shot fails if either
        direction fails; otherwise it ties if either direction ties.
    """
    w = class_resolved_weights(geometry, flips, tables, node_budget)
    pairs = [w] if geometry.kind == "planar" else list(w)
    outs = [_outcome(a, b) for a, b in pairs]
    if FAILURE in outs:
        return FAILURE
    if TIE in outs:
        return TIE
    return SUCCESS


def gap_sample(geometry: CodeGeometry, flips, tables: DecoderTables) -> GapSample:
    """Domain-wall energy cost of one planar shot."""
    if geometry.kind != "planar":
        raise ValueError("gap samples are defined for the planar code")
    flips = np.asarray(flips, dtype=bool)
    w_same, w_opp = class_resolved_weights(geometry, flips, tables)
    return GapSample(
        delta_e=2 * (w_opp - w_same),
        h_error=error_class(geometry, flips),
        w_same=int(w_same),
        w_opp=int(w_opp),
    )

"""Toric and planar code layouts for bit-flip noise.

Qubits are graph edges and vertex checks are graph nodes.  A bit-flip error
is a set of edges; its syndrome is the set of nodes of odd degree.  Planar
codes carry two virtual boundary nodes (left and right rough boundaries) so
that every qubit is an edge with two endpoints.

Logical classes are read off from fixed homology cuts: sets of qubits that
every face (X-type stabilizer) crosses an even number of times and the
canonical logical representative crosses exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from qecregimes.errors import DomainError


@dataclass(frozen=True)
class CodeGeometry:
    """Lattice layout of a toric or planar code.

    Attributes:
        kind: ``torus`` or ``planar``.
        L: Code distance.
        coords: ``(n_qubits, 3)`` array of ``(orientation, r, c)`` with
            orientation 0 for horizontal and 1 for vertical edges.
        edges: ``(n_qubits, 2)`` node endpoints of each qubit.
        n_checks: Number of vertex checks.  Nodes ``n_checks`` and
            ``n_checks + 1`` are the left and right boundaries (planar only).
        cuts: Boolean masks over qubits, one per logical qubit.
        logicals: Canonical logical representatives matching ``cuts``.
        faces: Boolean ``(n_faces, n_qubits)`` X-stabilizer supports.
    """

    kind: str
    L: int
    coords: np.ndarray
    edges: np.ndarray
    n_checks: int
    cuts: tuple
    logicals: tuple
    faces: np.ndarray
    check_qubits: tuple = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_nodes(self) -> int:
        return self.n_checks + (2 if self.kind == "planar" else 0)

    @property
    def left(self) -> int:
        """Index of the left boundary node (planar)."""
        return self.n_checks

    @property
    def right(self) -> int:
        """Index of the right boundary node (planar)."""
        return self.n_checks + 1

    @property
    def n_logicals(self) -> int:
        return len(self.cuts)


def _finish(kind, L, coords, edges, n_checks, cuts, logicals, faces) -> CodeGeometry:
    edges = np.asarray(edges, dtype=np.int64)
    check_qubits = tuple(
        np.flatnonzero((edges[:, 0] == v) | (edges[:, 1] == v)) for v in range(n_checks)
    )
    for a in (coords, edges, faces, *cuts, *logicals):
        a.setflags(write=False)
    return CodeGeometry(
        kind=kind,
        L=L,
        coords=coords,
        edges=edges,
        n_checks=n_checks,
        cuts=tuple(cuts),
        logicals=tuple(logicals),
        faces=faces,
        check_qubits=check_qubits,
    )


def _torus(L: int) -> CodeGeometry:
    n = 2 * L * L

    def node(r, c):
        return (r % L) * L + (c % L)

    def hq(r, c):
        return (r % L) * L + (c % L)

    def vq(r, c):
        return L * L + (r % L) * L + (c % L)

    coords = np.zeros((n, 3), dtype=np.int64)
    edges = np.zeros((n, 2), dtype=np.int64)
    for r in range(L):
        for c in range(L):
            coords[hq(r, c)] = (0, r, c)
            edges[hq(r, c)] = (node(r, c), node(r, c + 1))
            coords[vq(r, c)] = (1, r, c)
            edges[vq(r, c)] = (node(r, c), node(r + 1, c))
    faces = np.zeros((L * L, n), dtype=bool)
    for r in range(L):
        for c in range(L):
            f = r * L + c
            for q in (hq(r, c), hq(r + 1, c), vq(r, c), vq(r, c + 1)):
                faces[f, q] = True
    cut_h = np.zeros(n, dtype=bool)
    cut_v = np.zeros(n, dtype=bool)
    log_h = np.zeros(n, dtype=bool)
    log_v = np.zeros(n, dtype=bool)
    for i in range(L):
        cut_h[hq(i, 0)] = True
        cut_v[vq(0, i)] = True
        log_h[hq(0, i)] = True
        log_v[vq(i, 0)] = True
    return _finish("torus", L, coords, edges, L * L, (cut_h, cut_v), (log_h, log_v), faces)


def _planar(L: int) -> CodeGeometry:
    nh = L * L
    nv = (L - 1) * (L - 1)
    n = nh + nv
    n_checks = L * (L - 1)
    left, right = n_checks, n_checks + 1

    def node(r, c):
        if c < 0:
            return left
        if c > L - 2:
            return right
        return r * (L - 1) + c

    def hq(r, c):
        return r * L + c

    def vq(r, c):
        return nh + r * (L - 1) + c

    coords = np.zeros((n, 3), dtype=np.int64)
    edges = np.zeros((n, 2), dtype=np.int64)
    for r in range(L):
        for c in range(L):
            # Horizontal qubit (r, c) sits between checks (r, c-1) and (r, c).
            coords[hq(r, c)] = (0, r, c)
            edges[hq(r, c)] = (node(r, c - 1), node(r, c))
    for r in range(L - 1):
        for c in range(L - 1):
            coords[vq(r, c)] = (1, r, c)
            edges[vq(r, c)] = (node(r, c), node(r + 1, c))
    faces = np.zeros(((L - 1) * L, n), dtype=bool)
    for r in range(L - 1):
        for c in range(L):
            f = r * L + c
            faces[f, hq(r, c)] = True
            faces[f, hq(r + 1, c)] = True
            if c - 1 >= 0:
                faces[f, vq(r, c - 1)] = True
            if c <= L - 2:
                faces[f, vq(r, c)] = True
    cut = np.zeros(n, dtype=bool)
    logical = np.zeros(n, dtype=bool)
    for i in range(L):
        cut[hq(i, 0)] = True
        logical[hq(0, i)] = True
    return _finish("planar", L, coords, edges, n_checks, (cut,), (logical,), faces)


def build_geometry(kind: str, L: int) -> CodeGeometry:
    """Build a toric (``L x L`` periodic) or planar (distance ``L``) layout.

    Raises:
        DomainError: For an unknown kind or ``L < 2``.
    """
    if int(L) != L or L < 2:
        raise DomainError(f"L must be an integer >= 2, got {L!r}")
    L = int(L)
    if kind == "torus":
        return _torus(L)
    if kind == "planar":
        return _planar(L)
    raise DomainError(f"unknown geometry {kind!r}")


def syndrome(geometry: CodeGeometry, flips) -> np.ndarray:
    """Indices of violated checks for a bit-flip pattern.

    Args:
        geometry: Code layout.
        flips: Boolean mask over qubits.

    Returns:
        Sorted array of defect check indices (boundary nodes excluded).
    """
    flips = np.asarray(flips, dtype=bool)
    ends = geometry.edges[flips].ravel()
    counts = np.bincount(ends, minlength=geometry.n_nodes)[: geometry.n_checks]
    return np.flatnonzero(counts & 1)


def error_class(geometry: CodeGeometry, flips) -> tuple:
    """Cut-crossing parities of a pattern, one bit per logical qubit."""
    flips = np.asarray(flips, dtype=bool)
    return tuple(int(np.count_nonzero(flips & cut) & 1) for cut in geometry.cuts)


def graph_distances(geometry: CodeGeometry) -> np.ndarray:
    """All-pairs hop distances between nodes (checks and boundary nodes)."""
    N = geometry.n_nodes
    a, b = geometry.edges[:, 0], geometry.edges[:, 1]
    data = np.ones(2 * len(a))
    adj = coo_matrix((data, (np.r_[a, b], np.r_[b, a])), shape=(N, N)).tocsr()
    d = shortest_path(adj, method="D", unweighted=True)
    d[np.isinf(d)] = -1
    return d.astype(np.int64)


def cover_distances(geometry: CodeGeometry, cut_index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Shortest paths with even or odd crossings of a cut.

    Computed on the double cover of the node graph in which cut qubits switch
    sheets.  Entries are ``-1`` where no path of that parity exists.

    Returns:
        ``(d_even, d_odd)`` over all nodes, including boundary nodes.
    """
    N = geometry.n_nodes
    a, b = geometry.edges[:, 0], geometry.edges[:, 1]
    cut = geometry.cuts[cut_index]
    rows, cols = [], []
    for sheet in (0, 1):
        other = np.where(cut, 1 - sheet, sheet)
        rows.append(a + sheet * N)
        cols.append(b + other * N)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    data = np.ones(2 * len(r))
    adj = coo_matrix((data, (np.r_[r, c], np.r_[c, r])), shape=(2 * N, 2 * N)).tocsr()
    d = shortest_path(adj, method="D", unweighted=True, indices=np.arange(N))
    d[np.isinf(d)] = -1
    d = d.astype(np.int64)
    return d[:, :N].copy(), d[:, N:].copy()

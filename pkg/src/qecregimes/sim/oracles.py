"""Brute-force reference computations for small codes.

These enumerate cycles, cosets or low-weight error patterns directly and are
used to validate the closed-form solver and the matching decoder.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from qecregimes.errors import DomainError
from qecregimes.sim.decoder import DecoderTables, build_tables, class_resolved_weights, failure_weight
from qecregimes.sim.geometry import CodeGeometry, build_geometry, error_class


def _to_bits(mask) -> int:
    """Pack a boolean qubit mask into a Python int."""
    out = 0
    for i in np.flatnonzero(mask):
        out |= 1 << int(i)
    return out


def _span(generators: list[int]) -> np.ndarray:
    """All XOR combinations of up to 64-bit generators, as uint64."""
    span = np.zeros(1, dtype=np.uint64)
    for g in generators:
        span = np.concatenate([span, span ^ np.uint64(g)])
    return span


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def _independent_faces(geometry: CodeGeometry) -> list[int]:
    faces = [_to_bits(f) for f in geometry.faces]
    # The product of all torus faces is the identity; drop one.
    return faces[:-1] if geometry.kind == "torus" else faces


def enumerate_cycle_pfail_post(L: int, p: float) -> float:
    """Post-selected toric failure rate by enumerating every cycle.

    The cycle space (syndrome-free patterns) is spanned by ``L^2 - 1``
    independent faces and the two logicals.  A cycle fails if it crosses
    either cut an odd number of times.

    Raises:
        DomainError: For ``L > 4``.
    """
    if L > 4:
        raise DomainError("cycle enumeration is limited to L <= 4")
    g = build_geometry("torus", L)
    n = g.n_qubits
    span = _span(_independent_faces(g) + [_to_bits(x) for x in g.logicals])
    w = _popcount(span)
    cls = np.zeros(len(span), dtype=np.int64)
    for j, cut in enumerate(g.cuts):
        cls |= (_popcount(span & np.uint64(_to_bits(cut))) & 1) << j
    counts = np.zeros((4, n + 1), dtype=np.float64)
    np.add.at(counts, (cls, w), 1.0)
    ws = np.arange(n + 1)
    if p in (0.0, 1.0):
        weights = (ws == (0 if p == 0.0 else n)).astype(float)
    else:
        logw = ws * math.log(p) + (n - ws) * math.log1p(-p)
        weights = np.exp(logw - logw.max())
    per_class = counts @ weights
    return float(per_class[1:].sum() / per_class.sum())


def cycle_class_sizes(L: int) -> np.ndarray:
    """Number of cycles in each homology class, indexed by cut parities."""
    g = build_geometry("torus", L)
    span = _span(_independent_faces(g) + [_to_bits(x) for x in g.logicals])
    cls = np.zeros(len(span), dtype=np.int64)
    for j, cut in enumerate(g.cuts):
        cls |= (_popcount(span & np.uint64(_to_bits(cut))) & 1) << j
    return np.bincount(cls, minlength=4)


class CosetOracle:
    """Exhaustive coset minima for codes with at most 64 qubits.

    The stabilizer span is materialized once; each query is a vectorized
    XOR-and-popcount over it.  Practical for up to about ``2^24`` stabilizers.
    """

    def __init__(self, geometry: CodeGeometry):
        if geometry.n_qubits > 64:
            raise DomainError("coset oracle needs at most 64 qubits")
        faces = _independent_faces(geometry)
        if len(faces) > 24:
            raise DomainError("stabilizer group too large to enumerate")
        self.geometry = geometry
        self.span = _span(faces)
        self.logicals = [_to_bits(x) for x in geometry.logicals]

    def class_minima(self, flips) -> dict:
        """Minimum weight in each logical coset of ``flips``.

        Returns:
            Map from absolute class tuple (cut parities) to minimum weight.
        """
        e = _to_bits(flips)
        h = error_class(self.geometry, flips)
        k = len(self.logicals)
        out = {}
        for shift in itertools.product((0, 1), repeat=k):
            x = e
            for j, s in enumerate(shift):
                if s:
                    x ^= self.logicals[j]
            cls = tuple(h[j] ^ shift[j] for j in range(k))
            out[cls] = int(_popcount(self.span ^ np.uint64(x)).min())
        return out

    def weights(self, flips):
        """Oracle counterpart of :func:`class_resolved_weights`."""
        mins = self.class_minima(flips)
        h = error_class(self.geometry, flips)
        if self.geometry.kind == "planar":
            return mins[h], mins[(1 - h[0],)]
        out = []
        for j in range(len(h)):
            same = min(v for c, v in mins.items() if c[j] == h[j])
            opp = min(v for c, v in mins.items() if c[j] != h[j])
            out.append((same, opp))
        return tuple(out)

    def min_weight(self, flips) -> int:
        """Lightest correction in any class (the unconstrained optimum)."""
        return min(self.class_minima(flips).values())


def exact_failure_polynomial(
    geometry: CodeGeometry,
    w_max: int | None = None,
    tables: DecoderTables | None = None,
) -> list[Fraction]:
    """Low-order coefficients of ``P_fail(p)`` by exhaustive enumeration.

    Every error of weight ``w <= w_max`` is decoded with the class-resolved
    decoder; ties count ``1/2`` per direction.  With ``c_w`` the summed failure
    weight at weight ``w``, ``P_fail = sum_w c_w p^w (1-p)^(n-w)``, whose
    expansion is exact through order ``w_max``.

    Args:
        geometry: Code layout with ``L <= 5``.
        w_max: Highest weight enumerated; defaults to ``ceil(L/2)``.
        tables: Optional precomputed decoder tables.

    Returns:
        Exact coefficients ``[a_0, ..., a_{w_max}]`` of ``p^k``.
    """
    L = geometry.L
    if L > 5:
        raise DomainError("exhaustive enumeration is limited to L <= 5")
    if w_max is None:
        w_max = (L + 1) // 2
    if w_max > (L + 1) // 2 + 1:
        raise DomainError("w_max must not exceed ceil(L/2) + 1")
    tables = tables or build_tables(geometry)
    n = geometry.n_qubits
    c = []
    for w in range(w_max + 1):
        total = Fraction(0)
        for support in itertools.combinations(range(n), w):
            flips = np.zeros(n, dtype=bool)
            flips[list(support)] = True
            weights = class_resolved_weights(geometry, flips, tables)
            total += Fraction(failure_weight(weights, geometry.kind)).limit_denominator(8)
        c.append(total)
    return [
        sum(
            (c[w] * math.comb(n - w, k - w) * (-1) ** (k - w) for w in range(k + 1)),
            Fraction(0),
        )
        for k in range(w_max + 1)
    ]


def leading_coefficient(coeffs: list[Fraction]) -> tuple[int, Fraction]:
    """First nonzero coefficient and its order."""
    for k, a in enumerate(coeffs):
        if a != 0:
            return k, a
    return len(coeffs), Fraction(0)

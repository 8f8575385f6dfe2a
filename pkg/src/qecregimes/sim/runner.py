"""Monte-Carlo shot farming with deterministic, worker-independent output."""

from __future__ import annotations

import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from qecregimes.errors import BudgetExceeded
from qecregimes.sim.decoder import (
    DEFAULT_NODE_BUDGET,
    DecoderTables,
    build_tables,
    class_resolved_weights,
    failure_weight,
)
from qecregimes.sim.geometry import CodeGeometry, build_geometry, error_class
from qecregimes.sim.rng import sample_error

THREADS_ENV = "QECREGIMES_THREADS"
_CHUNK = 2000


@dataclass(frozen=True)
class ShotSummary:
    """Aggregated failure statistics of a run.

    ``shots`` counts decoded shots; shots that hit the branch-and-bound
    budget are excluded and reported in ``timeouts``.
    """

    L: int
    p: float
    shots: int
    failures: float
    pfail_hat: float
    ci_low: float
    ci_high: float
    ties: int
    timeouts: int
    seed: int


@dataclass(frozen=True)
class GapRecords:
    """Per-shot class-resolved weights, ordered by shot index.

    Shots that timed out carry ``valid = False``.
    """

    L: int
    p: float
    seed: int
    delta_e: np.ndarray
    w_same: np.ndarray
    w_opp: np.ndarray
    h_error: np.ndarray
    valid: np.ndarray


def default_threads() -> int:
    """Worker count from the environment, else the available CPU count."""
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def wilson_interval(failures: float, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval; ``failures`` may be fractional (tie weights)."""
    if n <= 0:
        return 0.0, 1.0
    ph = failures / n
    den = 1.0 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(max(ph * (1 - ph), 0.0) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


# Worker state, set once per process.
_STATE: dict = {}


def _init_worker(kind: str, L: int) -> None:
    geometry = build_geometry(kind, L)
    _STATE["geometry"] = geometry
    _STATE["tables"] = build_tables(geometry)


def _run_chunk(args):
    kind, L, p, seed, start, stop, node_budget = args
    if _STATE.get("geometry") is None or _STATE["geometry"].kind != kind or _STATE["geometry"].L != L:
        _init_worker(kind, L)
    geometry: CodeGeometry = _STATE["geometry"]
    tables: DecoderTables = _STATE["tables"]
    n = stop - start
    k = geometry.n_logicals
    w = np.zeros((n, k, 2), dtype=np.int64)
    h = np.zeros((n, k), dtype=np.int8)
    valid = np.ones(n, dtype=bool)
    for i in range(n):
        flips = sample_error(geometry, p, start + i, seed)
        h[i] = error_class(geometry, flips)
        try:
            res = class_resolved_weights(geometry, flips, tables, node_budget)
        except BudgetExceeded:
            valid[i] = False
            continue
        w[i] = [res] if geometry.kind == "planar" else res
    return start, w, h, valid


def _collect(kind, L, p, shots, seed, threads, node_budget):
    if shots < 1:
        raise ValueError("shots must be >= 1")
    threads = default_threads() if threads is None else max(1, int(threads))
    tasks = [
        (kind, L, p, seed, s, min(s + _CHUNK, shots), node_budget)
        for s in range(0, shots, _CHUNK)
    ]
    if threads == 1 or len(tasks) == 1:
        parts = [_run_chunk(t) for t in tasks]
    else:
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    parts.sort(key=lambda x: x[0])
    w = np.concatenate([x[1] for x in parts])
    h = np.concatenate([x[2] for x in parts])
    valid = np.concatenate([x[3] for x in parts])
    return w, h, valid


def summarize(kind: str, L: int, p: float, seed: int, w: np.ndarray, valid: np.ndarray) -> ShotSummary:
    """Failure statistics from per-shot class weights ``w[shot, direction, (same, opp)]``."""
    fw = np.zeros(len(w))
    ties = 0
    for i in np.flatnonzero(valid):
        pairs = [tuple(x) for x in w[i]]
        fw[i] = failure_weight(pairs[0] if kind == "planar" else pairs, kind)
        ties += int(any(a == b for a, b in pairs))
    n = int(valid.sum())
    failures = float(fw.sum())
    lo, hi = wilson_interval(failures, n)
    return ShotSummary(
        L=L,
        p=p,
        shots=n,
        failures=failures,
        pfail_hat=failures / n if n else float("nan"),
        ci_low=lo,
        ci_high=hi,
        ties=ties,
        timeouts=int((~valid).sum()),
        seed=seed,
    )


def run_shots(
    geometry: CodeGeometry,
    p: float,
    shots: int,
    seed: int,
    mode: str = "failure_rate",
    threads: int | None = 1,
    node_budget: int = DEFAULT_NODE_BUDGET,
):
    """Simulate ``shots`` i.i.d. bit-flip shots and decode each exactly.

    Args:
        geometry: Code layout.
        p: Bit-flip probability.
        shots: Number of shots.
        seed: 64-bit master seed.
        mode: ``failure_rate`` for a :class:`ShotSummary` or ``gap`` for
            :class:`GapRecords` (planar only).
        threads: Worker processes; ``None`` uses :func:`default_threads`.
            Results do not depend on this value.
        node_budget: Branch-and-bound node limit per torus shot.
    """
    if mode not in ("failure_rate", "gap"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "gap" and geometry.kind != "planar":
        raise ValueError("gap mode is defined for the planar code")
    w, h, valid = _collect(geometry.kind, geometry.L, p, shots, seed, threads, node_budget)
    if mode == "failure_rate":
        return summarize(geometry.kind, geometry.L, p, seed, w, valid)
    return GapRecords(
        L=geometry.L,
        p=p,
        seed=seed,
        delta_e=2 * (w[:, 0, 1] - w[:, 0, 0]),
        w_same=w[:, 0, 0].copy(),
        w_opp=w[:, 0, 1].copy(),
        h_error=h[:, 0].copy(),
        valid=valid,
    )


def gap_failure_rate(records: GapRecords) -> float:
    """``P(dE < 0) + P(dE = 0) / 2`` over valid shots."""
    d = records.delta_e[records.valid]
    return float((np.count_nonzero(d < 0) + 0.5 * np.count_nonzero(d == 0)) / len(d))

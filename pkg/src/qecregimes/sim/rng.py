"""Counter-based error sampling.

Each shot draws from a Philox stream keyed by ``(seed, shot_index)``; qubit
``i`` uses the ``i``-th uniform of that stream.  A shot's error is therefore a
pure function of ``(seed, shot_index, qubit)`` and independent of how shots
are distributed over workers.
"""

from __future__ import annotations

import numpy as np

from qecregimes.sim.geometry import CodeGeometry

_MASK64 = (1 << 64) - 1


def shot_generator(seed: int, shot_index: int) -> np.random.Generator:
    """Philox generator for one shot."""
    if shot_index < 0:
        raise ValueError("shot_index must be nonnegative")
    key = (int(seed) & _MASK64) | ((int(shot_index) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_error(geometry: CodeGeometry, p: float, shot_index: int, seed: int) -> np.ndarray:
    """I.i.d. bit flips with probability ``p`` as a boolean qubit mask."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    u = shot_generator(seed, shot_index).random(geometry.n_qubits)
    return u < p

"""Bundled reference datasets and the code that regenerates them."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from qecregimes.exact import P_C, pfail_exact
from qecregimes.io import write_table

EXACT_SIZES = (16, 32, 64)
EXACT_X = np.linspace(-0.3, 0.3, 41)
EXACT_FILE = "exact_postselected.csv"


def exact_postselected_rows(sizes=EXACT_SIZES, xs=EXACT_X):
    """Exact post-selected curves sampled at ``p = p_c + x/L``.

    Sampling on a common window of the scaling variable keeps every size
    equally close to threshold, which is what a finite-size-scaling fit needs.
    The curves rise from near zero to their 3/4 plateau within ``|x| < 1``,
    so the default window stays on the steep part.
    """
    return [(L, P_C + x / L, pfail_exact(P_C + x / L, L)) for L in sizes for x in xs]


def write_exact_postselected(path) -> None:
    meta = {"sizes": list(EXACT_SIZES), "x_window": [float(EXACT_X[0]), float(EXACT_X[-1])],
            "x_points": len(EXACT_X)}
    write_table(path, ("L", "p", "pfail"), exact_postselected_rows(), meta)


def exact_postselected_path() -> Path:
    """Path of the bundled exact curve file (usable as ``fit --input``)."""
    return Path(str(resources.files("qecregimes.data").joinpath(EXACT_FILE)))


if __name__ == "__main__":
    write_exact_postselected(exact_postselected_path())

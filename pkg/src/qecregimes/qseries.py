"""Jacobi theta constants and the Dedekind eta function at a real nome.

Only the purely imaginary modulus is needed here, so every series is real and
converges geometrically in the nome ``q = exp(-pi * t)`` for ``tau = i t``.
"""

from __future__ import annotations

import math

TOL = 1e-16


def nome(t: float = 1.0) -> float:
    """Nome ``q = exp(-pi t)`` for ``tau = i t``."""
    if t <= 0:
        raise ValueError("t must be positive")
    return math.exp(-math.pi * t)


def theta2(q: float, max_terms: int = 200) -> float:
    """``theta_2 = 2 sum_{n>=0} q^{(n+1/2)^2}``."""
    total = 0.0
    for n in range(max_terms):
        term = q ** ((n + 0.5) ** 2)
        total += term
        if term < TOL:
            break
    return 2.0 * total


def theta3(q: float, max_terms: int = 200) -> float:
    """``theta_3 = 1 + 2 sum_{n>=1} q^{n^2}``."""
    total = 0.0
    for n in range(1, max_terms):
        term = q ** (n * n)
        total += term
        if term < TOL:
            break
    return 1.0 + 2.0 * total


def theta4(q: float, max_terms: int = 200) -> float:
    """``theta_4 = 1 + 2 sum_{n>=1} (-1)^n q^{n^2}``."""
    total = 0.0
    for n in range(1, max_terms):
        term = q ** (n * n)
        total += term if n % 2 == 0 else -term
        if term < TOL:
            break
    return 1.0 + 2.0 * total


def dedekind_eta(q: float, max_terms: int = 200) -> float:
    """``eta = q^{1/12} prod_{n>=1} (1 - q^{2n})`` with ``q = e^{i pi tau}``."""
    prod = 1.0
    for n in range(1, max_terms):
        term = q ** (2 * n)
        prod *= 1.0 - term
        if term < TOL:
            break
    return q ** (1.0 / 12.0) * prod


def eta_i_closed_form() -> float:
    """``|eta(i)| = Gamma(1/4) / (2 pi^{3/4})``, an independent check."""
    return math.gamma(0.25) / (2.0 * math.pi**0.75)

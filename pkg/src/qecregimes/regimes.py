"""Closed-form regime models for toric and planar code failure rates.

Four regimes are covered: path counting at very small ``p``, the ordered
(capillary-wave / surface-tension) regime, the critical window described by a
scaling variable, and the disordered regime above threshold.  Post-selected
models are checked against :mod:`qecregimes.exact`; non-post-selected models
against the exhaustive oracles in :mod:`qecregimes.sim.oracles`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from qecregimes.errors import DomainError
from qecregimes.exact import BETA_C, P_C, nishimori_point

ANSATZ_FAMILIES = {
    # family: (coefficient names, total free parameter count)
    "erf_quadratic": (("A2", "A1", "A0"), 5),
    "erf_linear": (("A1", "A0"), 4),
    "poly_simple": (("A", "B", "C"), 5),
    "poly_L": (("A", "B", "C", "D", "mu_corr"), 7),
}


@dataclass(frozen=True)
class RegimeParams:
    """Scaling coordinates of a point ``(p, L)`` near a threshold."""

    p: float
    L: float
    p_c: float
    nu: float
    x: float = field(init=False)

    def __post_init__(self) -> None:
        if self.nu <= 0:
            raise DomainError("nu must be positive")
        object.__setattr__(self, "x", scaling_variable(self.p, self.L, self.p_c, self.nu))


@dataclass(frozen=True)
class AnsatzSpec:
    """A finite-size-scaling ansatz with its parameters.

    Attributes:
        family: One of :data:`ANSATZ_FAMILIES`.
        params: Ordered coefficients: ``(A2, A1, A0)``, ``(A1, A0)``,
            ``(A, B, C)`` or ``(A, B, C, D, mu_corr)``.
        p_c: Threshold.
        nu: Correlation-length exponent.
    """

    family: str
    params: tuple
    p_c: float
    nu: float

    def __post_init__(self) -> None:
        if self.family not in ANSATZ_FAMILIES:
            raise DomainError(f"unknown ansatz family {self.family!r}")
        names, k = ANSATZ_FAMILIES[self.family]
        if len(self.params) != len(names):
            raise DomainError(
                f"{self.family} takes {len(names)} coefficients, got {len(self.params)}"
            )
        # p_c and nu are free in every family.
        assert len(names) + 2 == k
        if self.nu <= 0:
            raise DomainError("nu must be positive")


def scaling_variable(p, L, p_c: float, nu: float):
    """``x = (p - p_c) L^{1/nu}``."""
    return (np.asarray(p, dtype=float) - p_c) * np.asarray(L, dtype=float) ** (1.0 / nu)


def _check_unit(p: float, hi: float = 1.0) -> None:
    if not (0.0 < p < hi):
        raise DomainError(f"p must lie in (0, {hi}), got {p!r}")


# -- post-selected toric code -------------------------------------------------


def pathcount_postselected(p: float, L: int) -> tuple[float, bool]:
    """Straight-line path count ``2L (p/(1-p))^L``.

    Returns:
        ``(estimate, valid)`` where ``valid`` means ``p < 1/L``.
    """
    _check_unit(p)
    if L < 2:
        raise DomainError("L must be >= 2")
    est = 2.0 * L * math.exp(L * math.log(p / (1.0 - p)))
    return est, p < 1.0 / L


def beta_sigma_clean(p: float) -> float:
    """Reduced surface tension ``beta sigma = ln((1-p)(1-2p)/p)``."""
    _check_unit(p, 0.5)
    return math.log((1.0 - p) * (1.0 - 2.0 * p) / p)


def surface_tension_clean(beta: float) -> float:
    """Onsager's interface tension ``2 - ln(coth beta) / beta`` at unit coupling.

    Raises:
        DomainError: For ``beta <= beta_c`` where the tension vanishes.
    """
    if math.isinf(beta) and beta > 0:
        return 2.0
    # Exact zero at threshold is allowed so that sigma(beta_c) = 0 is testable.
    if beta < BETA_C - 1e-15:
        raise DomainError(f"beta must be >= beta_c = {BETA_C}, got {beta!r}")
    if abs(beta - BETA_C) <= 1e-15:
        return 0.0
    return 2.0 - math.log(1.0 / math.tanh(beta)) / beta


def clean_stiffness(p: float) -> float:
    """Reduced interface stiffness ``beta kappa = sinh(beta sigma)`` on the Nishimori line."""
    return math.sinh(beta_sigma_clean(p))


def capillary_pfail(p: float, L: int, stiffness: bool = False) -> tuple[float, bool]:
    """Ordered-regime estimate ``2 sqrt(L) (p / ((1-p)(1-2p)))^L``.

    Args:
        p: Error rate below threshold.
        L: Code distance.
        stiffness: Keep the constant capillary factor ``sqrt(beta kappa / 2 pi)``
            that the truncated form drops.  With it the estimate approaches
            the exact post-selected rate with an ``O(1/L)`` relative error.

    Returns:
        ``(estimate, valid)`` with ``valid`` false above ``p_c - 1/L``.
    """
    _check_unit(p)
    if p >= P_C:
        raise DomainError(f"capillary form needs p < p_c = {P_C}")
    if L < 1:
        raise DomainError("L must be positive")
    log_est = math.log(2.0) + 0.5 * math.log(L) - L * beta_sigma_clean(p)
    if stiffness:
        log_est += 0.5 * math.log(clean_stiffness(p) / (2.0 * math.pi))
    return math.exp(log_est), p <= P_C - 1.0 / L


def capillary_deltaF(beta: float, L: float, kappa: float | None = None) -> float:
    """Domain-wall free energy ``sigma L - ln(L)/2``.

    The logarithmic capillary term is already dimensionless, so the ordered
    regime failure rate reads ``2 exp(-(beta sigma L - ln(L)/2))``, which is
    :func:`capillary_pfail`.

    Args:
        beta: Inverse temperature above ``beta_c``.
        L: Interface length.
        kappa: Interface stiffness.  When given, the constant
            ``-ln sqrt(kappa / 2 pi)`` is included; the default drops it.
    """
    out = surface_tension_clean(beta) * L - 0.5 * math.log(L)
    if kappa is not None:
        out -= math.log(math.sqrt(kappa / (2.0 * math.pi)))
    return out


def alpha_asymptotics(p: float, which: str, C: float | None = None, nu: float | None = None) -> float:
    """Limiting forms of the decay rate ``alpha(p)`` of the failure rate.

    Args:
        p: Error rate.
        which: ``clean_near_pc``, ``clean_small_p``, ``nps_small_p`` or
            ``nps_near_pc``.
        C: Amplitude for ``nps_near_pc``.
        nu: Exponent for ``nps_near_pc``.
    """
    if which == "clean_near_pc":
        _check_unit(p, 0.5)
        return -4.0 * (1.0 + math.sqrt(2.0)) * (p - P_C)
    if which == "clean_small_p":
        _check_unit(p, 0.5)
        return math.log(1.0 / p)
    if which == "nps_small_p":
        # Effective tension tends to the unit coupling.
        return 1.0
    if which == "nps_near_pc":
        if C is None or nu is None:
            raise DomainError("nps_near_pc requires C and nu")
        if not 0.0 < p < 1.0:
            raise DomainError("p must lie in (0, 1)")
        return C * abs(p - P_C) ** nu
    raise DomainError(f"unknown asymptotic branch {which!r}")


# -- non-post-selected codes --------------------------------------------------


def nmin_coefficient(geometry: str, L: int, p: float = 0.0) -> float:
    """Number of minimum-weight failing errors, with ``(1-p)`` factors.

    At ``p = 0`` this is the leading coefficient of ``P_fail`` in ``p``.
    Even-distance ties are counted with weight ``1/2``.
    """
    if geometry not in ("torus", "planar"):
        raise DomainError(f"unsupported geometry {geometry!r}")
    if L < 3 or int(L) != L:
        raise DomainError("L must be an integer >= 3")
    fl, cl = L // 2, (L + 1) // 2
    q = (1.0 - p) ** fl
    if geometry == "torus":
        base = L * q * math.comb(L, fl)
        return 2.0 * base if L % 2 else base
    if L % 2 == 0:
        return 0.5 * L * q * math.comb(L, fl)
    return L * L * q * math.comb(L + 1, cl) + 0.5 * L * q * math.comb(L, fl)


def pathcount_nonpostselected(
    geometry: str, parity: str, L: int, p: float, bare: bool = False
) -> tuple[float, float, bool]:
    """Leading-order failure rate from minimum-weight failing errors.

    Args:
        geometry: ``torus`` or ``planar``.
        parity: ``odd`` or ``even``; must agree with ``L``.
        L: Code distance, at least 3.
        p: Error rate.
        bare: Drop the ``(1-p)`` factors so the result is ``N p^{ceil(L/2)}``
            with the integer (or half-integer) count ``N``.

    Returns:
        ``(coefficient, leading_pfail, valid)`` with ``valid`` meaning
        ``p < 1/(4 L^2)``.
    """
    if parity not in ("odd", "even") or (L % 2 == 1) != (parity == "odd"):
        raise DomainError(f"parity {parity!r} inconsistent with L = {L}")
    _check_unit(p)
    coef = nmin_coefficient(geometry, L, 0.0 if bare else p)
    lead = coef * p ** ((L + 1) // 2)
    return coef, lead, p < 1.0 / (4.0 * L * L)


def pathcount_gamma_prefactor(L: float) -> float:
    """``2L Gamma(L+1) / Gamma(L/2+1)^2``, a smooth torus prefactor.

    Matches ``2L C(L, L/2)`` at even ``L`` and interpolates between integers.
    For drawing validity boundaries only.
    """
    return 2.0 * L * math.exp(math.lgamma(L + 1.0) - 2.0 * math.lgamma(L / 2.0 + 1.0))


def validity_boundary(regime: str, L):
    """Error rate at the edge of a regime's validity window.

    ``pathcount_post``: ``1/L``; ``capillary``: ``p_c - 1/L``;
    ``pathcount_nps``: ``1/L^2``; ``pathcount_nps_strict``: ``1/(4L^2)``.
    """
    L = np.asarray(L, dtype=float)
    if regime == "pathcount_post":
        return 1.0 / L
    if regime == "capillary":
        return P_C - 1.0 / L
    if regime == "pathcount_nps":
        return 1.0 / L**2
    if regime == "pathcount_nps_strict":
        return 1.0 / (4.0 * L**2)
    raise DomainError(f"unknown regime {regime!r}")


# -- near-threshold and ordered-regime ansatze ---------------------------------


def eval_ansatz(spec: AnsatzSpec, p, L):
    """Evaluate a finite-size-scaling ansatz at ``(p, L)``.

    Erf families return ``(1 - erf(G(x)/sqrt 2)) / 2`` clipped to ``[0, 1]``.
    Polynomial families return the raw polynomial in ``x``; ``poly_L`` adds
    ``D L^{-1/mu_corr}``.
    """
    x = scaling_variable(p, L, spec.p_c, spec.nu)
    c = spec.params
    if spec.family == "erf_quadratic":
        g = c[0] * x * x + c[1] * x + c[2]
        out = np.clip(0.5 * (1.0 - erf(g / math.sqrt(2.0))), 0.0, 1.0)
    elif spec.family == "erf_linear":
        g = c[0] * x + c[1]
        out = np.clip(0.5 * (1.0 - erf(g / math.sqrt(2.0))), 0.0, 1.0)
    elif spec.family == "poly_simple":
        out = c[0] * x * x + c[1] * x + c[2]
    else:
        Lf = np.asarray(L, dtype=float)
        out = c[0] * x * x + c[1] * x + c[2] + c[3] * Lf ** (-1.0 / c[4])
    return out if np.ndim(out) else float(out)


def surface_tension_model(p, L, sigma_eff: float, delta: float, beta: float | None = None):
    """Ordered-regime model ``2 exp(-beta (sigma_eff L + delta))``.

    Args:
        p: Error rate; used for ``beta`` on the Nishimori line when ``beta``
            is not given.
        L: Code distance.
        sigma_eff: Effective surface tension, nonnegative.
        delta: Non-extensive free-energy offset.
        beta: Inverse temperature override.
    """
    if sigma_eff < 0:
        raise DomainError("sigma_eff must be nonnegative")
    if beta is None:
        beta = nishimori_point(float(p)).beta
    L = np.asarray(L, dtype=float)
    out = 2.0 * np.exp(-beta * (sigma_eff * L + delta))
    return out if out.ndim else float(out)

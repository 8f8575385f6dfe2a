"""Exact logical failure rate of the post-selected toric code.

On the Nishimori line the syndrome-free toric code maps onto the clean 2D
Ising model on an ``L x L`` torus.  Its four spin boundary-condition sectors
(periodic/antiperiodic in each direction) are linear combinations of four
free-fermion sectors ``(alpha, gamma)``, each a product over lattice momenta.
The failure probability is the weight of the three twisted spin sectors.

Every partition function is carried as a log-magnitude with an explicit zero
flag.  The common prefactor of all sectors cancels in every ratio and is never
formed.  Deep below threshold the failure rate is an exponentially small
difference of nearly equal sectors, which is resolved with ``mpmath`` at a
working precision chosen from an a-priori estimate of the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from qecregimes import qseries
from qecregimes.errors import DomainError

P_C = 1.0 / (2.0 + math.sqrt(2.0))
BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))
CRIT_TOL = 1e-14

# Fermion sector keys (alpha, gamma) and spin sector keys.
SECTORS = ((0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5))
SPIN_SECTORS = ("pp", "pa", "ap", "aa")

# Float results below this are recomputed at extended precision.
_FLOAT_FLOOR = 1e-4
# Below this log-estimate the float result underflows regardless.
_UNDERFLOW_LOG = -800.0


@dataclass(frozen=True)
class ModelPoint:
    """A physical error rate mapped onto the Ising model.

    Attributes:
        p: Bit-flip probability.
        beta: Inverse temperature at unit coupling.
        mu: Signed fermion mass, positive below threshold.
        temp_side: Sign of ``p - p_c``, zero within ``1e-14`` of threshold.
    """

    p: float
    beta: float
    mu: float
    temp_side: int


@dataclass(frozen=True)
class SectorLogs:
    """Log-magnitudes of the fermion and spin partition functions.

    Each map value is ``(log_magnitude, is_zero)``.  When ``is_zero`` is set
    the magnitude is ``-inf``.  Spin sectors omit the common prefactor.
    """

    L: int
    log_f: dict
    log_spin: dict


@dataclass(frozen=True)
class CriticalConstants:
    """Special-function values at ``tau = i`` and the threshold slope."""

    eta_i: float
    theta_sum: float
    slope: float


def _check_p(p: float) -> None:
    if not (0.0 < p < 1.0) or not math.isfinite(p):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")


def _check_L(L: int) -> None:
    if int(L) != L or L < 2:
        raise DomainError(f"L must be an integer >= 2, got {L!r}")


def _side(p: float) -> int:
    if abs(p - P_C) < CRIT_TOL:
        return 0
    return 1 if p > P_C else -1


def nishimori_point(p: float) -> ModelPoint:
    """Map an error rate onto the Nishimori line.

    Args:
        p: Bit-flip probability in ``(0, 1)``.

    Returns:
        The model point.  For ``p > 1/2`` the inverse temperature is negative;
        the mass is taken from ``|sinh 2 beta|`` and is ``-inf`` at ``p = 1/2``.

    Raises:
        DomainError: If ``p`` lies outside ``(0, 1)``.
    """
    _check_p(p)
    beta = 0.5 * math.log((1.0 - p) / p)
    s2 = abs(math.sinh(2.0 * beta))
    mu = 0.5 * math.log(s2) if s2 > 0 else -math.inf
    side = _side(p)
    if side == 0:
        mu = 0.0
    return ModelPoint(p=p, beta=beta, mu=mu, temp_side=side)


def dispersion(k, mu):
    """Lattice fermion dispersion ``arcsinh(sqrt(sin^2 k + 2 sinh^2 mu))``.

    Works elementwise on arrays.
    """
    k = np.asarray(k, dtype=float)
    sm = np.sinh(mu) if np.isfinite(mu) else 0.0
    out = np.arcsinh(np.sqrt(np.sin(k) ** 2 + 2.0 * sm * sm))
    return out if out.ndim else float(out)


def _fermion_logs_float(mu: float, L: int) -> dict:
    n = np.arange(L)
    out = {}
    for alpha in (0.0, 0.5):
        a = L * dispersion(np.pi * (n + alpha) / L, mu)
        a = np.atleast_1d(a)
        # gamma = 1/2 gives log(2 cosh a); gamma = 0 gives log(2 sinh a).
        out[(alpha, 0.5)] = (float(np.sum(a + np.log1p(np.exp(-2.0 * a)))), False)
        if np.any(a == 0.0):
            out[(alpha, 0.0)] = (-math.inf, True)
        else:
            out[(alpha, 0.0)] = (float(np.sum(a + np.log1p(-np.exp(-2.0 * a)))), False)
    return out


def _fermion_logs_mp(p, L: int) -> dict:
    """Fermion logs as mpmath numbers at the current working precision."""
    p = mpmath.mpf(p)
    beta = mpmath.log((1 - p) / p) / 2
    s2b = abs(mpmath.sinh(2 * beta))
    # 2 sinh^2(mu) with mu = log sqrt(s2b).
    m2 = (s2b + 1 / s2b) / 2 - 1
    out = {}
    for alpha in (0, mpmath.mpf(1) / 2):
        logs_c = mpmath.mpf(0)
        logs_s = mpmath.mpf(0)
        zero = False
        for n in range(L):
            k = mpmath.pi * (n + alpha) / L
            a = L * mpmath.asinh(mpmath.sqrt(mpmath.sin(k) ** 2 + m2))
            logs_c += a + mpmath.log1p(mpmath.exp(-2 * a))
            if a == 0:
                zero = True
            else:
                logs_s += a + mpmath.log(-mpmath.expm1(-2 * a))
        key = float(alpha)
        out[(key, 0.5)] = (logs_c, False)
        out[(key, 0.0)] = (mpmath.ninf, True) if zero else (logs_s, False)
    return out


def fermion_sector_logs(point: ModelPoint, L: int) -> SectorLogs:
    """Evaluate the four fermion sectors and the derived spin sectors.

    Args:
        point: Model point from :func:`nishimori_point`.
        L: Linear lattice size, at least 2.

    Returns:
        Sector logs.  Spin sectors are reported for the post-selected code at
        ``point.p``; above ``p = 1/2`` they follow from the sublattice mirror
        used by :func:`pfail_exact`.
    """
    _check_L(L)
    if point.temp_side == 0:
        lf = _fermion_logs_float(0.0, L)
        lf[(0.0, 0.0)] = (-math.inf, True)
    else:
        lf = _fermion_logs_float(point.mu, L)
    spin = _spin_logs(point.p, L)
    return SectorLogs(L=L, log_f=lf, log_spin=spin)


def _spin_combos(f: dict, side: int, exp) -> tuple[dict, object]:
    """Spin sectors and derived failure weights from fermion logs ``f``.

    Values are relative to ``exp(m)`` where ``m`` is the largest finite log.
    Besides the four sectors the dict holds ``total`` and the complements
    ``not_pp`` and ``not_aa``, formed directly from fermion sectors so that
    no extra cancellation is introduced.
    """
    m = max(v for v, zf in f.values() if not zf)
    z = {k: (0 if zf else exp(v - m)) for k, (v, zf) in f.items()}
    z00, z0h, zh0, zhh = z[(0.0, 0.0)], z[(0.0, 0.5)], z[(0.5, 0.0)], z[(0.5, 0.5)]
    s00 = side * z00
    vals = {
        "pp": zhh + z0h + zh0 - s00,
        "pa": zhh + z0h - zh0 + s00,
        "ap": zhh - z0h + zh0 + s00,
        "aa": -zhh + z0h + zh0 + s00,
    }
    vals["total"] = 2 * (zhh + z0h + zh0 + s00)
    vals["not_pp"] = zhh + z0h + zh0 + 3 * s00
    vals["not_aa"] = 3 * zhh + z0h + zh0 + s00
    return vals, m


def _log_pfail_estimate(p: float, L: int) -> float:
    """Natural log of the leading capillary estimate, for precision choice."""
    r = p / ((1.0 - p) * (1.0 - 2.0 * p))
    return L * math.log(r) + 0.5 * math.log(L) + math.log(2.0)


def _spin_values(p: float, L: int):
    """Spin sector values ``(vals, m)`` for ``p < 1/2``, precise when tiny.

    Values are floats, or mpmath numbers when the float evaluation loses
    too many digits to cancellation.
    """
    side = _side(p)
    if side == 0:
        f = _fermion_logs_float(0.0, L)
        f[(0.0, 0.0)] = (-math.inf, True)
        return _spin_combos(f, 0, math.exp)
    f = _fermion_logs_float(nishimori_point(p).mu, L)
    vals, m = _spin_combos(f, side, math.exp)
    smallest = min(vals[k] for k in SPIN_SECTORS) / vals["total"]
    if side > 0 or smallest > _FLOAT_FLOOR:
        return vals, m
    est = _log_pfail_estimate(p, L) / math.log(10.0) if p < P_C else -10.0
    digits = int(max(40.0, -est + 40.0))
    return _spin_values_mp(p, L, digits)


def _spin_values_mp(p: float, L: int, digits: int):
    """Extended-precision spin sectors, confirmed at a higher precision."""
    prev = None
    while True:
        with mpmath.workdps(digits):
            f = _fermion_logs_mp(p, L)
            vals, m = _spin_combos(f, _side(p), mpmath.exp)
            vals = {k: +v for k, v in vals.items()}
            ratio = vals["not_pp"] / vals["total"]
            if prev is not None and ratio > 0:
                if abs(ratio - prev) <= abs(ratio) * mpmath.mpf(10) ** -20:
                    return vals, m
        prev = ratio
        digits = int(digits * 1.5) + 20


def _spin_logs(p: float, L: int) -> dict:
    if p == 0.5:
        return {k: (0.0, False) for k in SPIN_SECTORS}
    q = p if p < 0.5 else 1.0 - p
    vals, m = _spin_values(q, L)
    if p > 0.5 and L % 2 == 1:
        # Sublattice flip at odd L toggles both boundary twists.
        vals = {"pp": vals["aa"], "pa": vals["ap"], "ap": vals["pa"], "aa": vals["pp"]}
    out = {}
    for key in SPIN_SECTORS:
        v = vals[key]
        if v <= 0:
            out[key] = (-math.inf, True)
        else:
            out[key] = (float(mpmath.log(v)) + float(m), False)
    return out


def _pfail_parts(p: float, L: int):
    """Return ``(fail, total)`` relative magnitudes for ``p`` in ``(0, 1)``."""
    if p == 0.5:
        return 3.0, 4.0
    q = p if p < 0.5 else 1.0 - p
    vals, _ = _spin_values(q, L)
    if p > 0.5 and L % 2 == 1:
        # pp <-> aa under the sublattice flip at odd L.
        return vals["not_aa"], vals["total"]
    return vals["not_pp"], vals["total"]


def log_pfail_exact(p: float, L: int) -> float:
    """Natural log of :func:`pfail_exact`, finite even where the float underflows.

    Args:
        p: Bit-flip probability in ``(0, 1)``.
        L: Linear lattice size, at least 2.

    Returns:
        ``ln P_fail``.
    """
    _check_p(p)
    _check_L(L)
    if _side(p) == 0:
        return math.log(0.5)
    fail, total = _pfail_parts(p, L)
    if isinstance(fail, mpmath.mpf):
        return float(mpmath.log(fail) - mpmath.log(total))
    return math.log(fail / total)


def pfail_exact(p: float, L: int) -> float:
    """Exact failure probability of the post-selected ``L x L`` toric code.

    Failure means the syndrome-free error lies in a nontrivial homology class,
    i.e. the Ising torus carries a twist in at least one direction.

    Args:
        p: Bit-flip probability in ``(0, 1)``.
        L: Linear lattice size, at least 2.

    Returns:
        Failure probability in ``[0, 1)``; exactly ``0.5`` at threshold.

    Raises:
        DomainError: On invalid ``p`` or ``L``.
    """
    _check_p(p)
    _check_L(L)
    if _side(p) == 0:
        return 0.5
    if p < P_C and _log_pfail_estimate(p, L) < _UNDERFLOW_LOG:
        return 0.0
    return math.exp(log_pfail_exact(p, L))


def kw_dual(p: float) -> float:
    """Kramers-Wannier dual error rate ``(1 - 2p) / (2 (1 - p))``.

    Raises:
        DomainError: If ``p`` lies outside ``(0, 1/2)``.
    """
    if not (0.0 < p < 0.5):
        raise DomainError(f"p must lie in (0, 1/2), got {p!r}")
    return (1.0 - 2.0 * p) / (2.0 * (1.0 - p))


def duality_residual(p: float, L: int) -> float:
    """``(1 - P(p)) (1 - P(p*)) - 1/4``, zero by duality."""
    ps = kw_dual(p)
    return (1.0 - pfail_exact(p, L)) * (1.0 - pfail_exact(ps, L)) - 0.25


def critical_slope() -> CriticalConstants:
    """Slope of ``P_fail`` in ``x = (p - p_c) L`` at threshold, as ``L -> inf``.

    Near threshold each fermion sector becomes a ratio of a theta constant to
    the eta function at ``tau = i``.  Expanding the failure ratio to first
    order in the mass and converting the mass to ``p`` (``dmu/dp = -(2 +
    sqrt 2)`` at ``p_c``) gives
    ``slope = sqrt(8) (2 + sqrt 2) |eta|^3 / (theta_2 + theta_3 + theta_4)``.
    """
    q = qseries.nome(1.0)
    eta = qseries.dedekind_eta(q)
    tsum = qseries.theta2(q) + qseries.theta3(q) + qseries.theta4(q)
    slope = math.sqrt(8.0) * (2.0 + math.sqrt(2.0)) * eta**3 / tsum
    return CriticalConstants(eta_i=eta, theta_sum=tsum, slope=slope)


def near_threshold_pfail(x: float, L: int | None = None) -> float:
    """First-order scaling prediction ``1/2 + slope * x``.

    Args:
        x: Scaling variable ``(p - p_c) L``; intended for ``|x| <~ 1``.
        L: Lattice size, accepted for interface symmetry.  The first-order
            form is size independent.
    """
    if L is not None:
        _check_L(L)
    return 0.5 + critical_slope().slope * x

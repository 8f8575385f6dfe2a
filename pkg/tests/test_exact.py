from __future__ import annotations

import math

import numpy as np
import pytest

from qecregimes.errors import DomainError
from qecregimes.exact import (
    BETA_C,
    P_C,
    critical_slope,
    dispersion,
    duality_residual,
    fermion_sector_logs,
    kw_dual,
    log_pfail_exact,
    near_threshold_pfail,
    nishimori_point,
    pfail_exact,
)
from qecregimes.sim.oracles import enumerate_cycle_pfail_post


def test_nishimori_point_values():
    pt = nishimori_point(0.1)
    assert pt.beta == pytest.approx(0.5 * math.log(9.0))
    assert pt.mu == pytest.approx(0.5 * math.log(abs(math.sinh(2 * pt.beta))))
    assert pt.temp_side == -1
    assert nishimori_point(0.4).temp_side == 1


def test_threshold_constants():
    assert P_C == pytest.approx(1 / (2 + math.sqrt(2)))
    pt = nishimori_point(P_C)
    assert pt.beta == pytest.approx(BETA_C, abs=1e-14)
    assert abs(pt.mu) < 1e-14


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, float("nan")])
def test_invalid_p(p):
    with pytest.raises(DomainError):
        pfail_exact(p, 4)


def test_invalid_L():
    with pytest.raises(DomainError):
        pfail_exact(0.1, 1)


def test_dispersion_gap_at_zero_momentum():
    mu = 0.3
    gap = math.asinh(math.sqrt(2.0) * math.sinh(mu))
    assert dispersion(0.0, mu) == pytest.approx(gap, rel=1e-12)
    ks = np.linspace(-math.pi, math.pi, 101)
    assert np.all(dispersion(ks, mu) >= gap - 1e-12)
    assert dispersion(0.0, 0.0) == 0.0


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("p", [0.03, 0.12, 0.27, 0.33, 0.45])
def test_matches_cycle_enumeration(L, p):
    assert pfail_exact(p, L) == pytest.approx(enumerate_cycle_pfail_post(L, p), abs=1e-12)


@pytest.mark.parametrize("L", [4, 8, 16, 64, 256, 1024])
def test_half_at_threshold(L):
    assert pfail_exact(P_C, L) == 0.5


def test_monotone_in_p():
    ps = np.linspace(0.05, 0.45, 41)
    vals = [pfail_exact(p, 16) for p in ps]
    assert np.all(np.diff(vals) > 0)


def test_high_temperature_limit():
    assert pfail_exact(0.49, 64) == pytest.approx(0.75, abs=1e-4)
    assert pfail_exact(0.5, 8) == pytest.approx(0.75, abs=1e-12)


def test_mirror_above_half_even():
    assert pfail_exact(0.7, 8) == pytest.approx(pfail_exact(0.3, 8), rel=1e-12)


@pytest.mark.parametrize("p", [0.2, 0.35])
def test_mirror_above_half_odd_matches_oracle(p):
    assert pfail_exact(1 - p, 3) == pytest.approx(enumerate_cycle_pfail_post(3, 1 - p), abs=1e-12)


def test_deep_ordered_regime_uses_log():
    lp = log_pfail_exact(0.05, 256)
    assert math.isfinite(lp)
    assert lp < -500
    # Small-p path count: 2L (p/(1-p))^L with corrections of order pL.
    approx = math.log(2 * 256) + 256 * math.log(0.05 / 0.95)
    assert lp > approx


def test_precision_paths_agree():
    # Near the float floor both the float and the high-precision route run.
    for L in (24, 32, 40):
        p = 0.12
        v = pfail_exact(p, L)
        assert v == pytest.approx(math.exp(log_pfail_exact(p, L)), rel=1e-12, abs=0)


def test_underflow_short_circuit():
    assert pfail_exact(0.01, 1024) == 0.0


def test_sector_logs_shape():
    s = fermion_sector_logs(nishimori_point(0.2), 8)
    assert set(s.log_spin) == {"pp", "pa", "ap", "aa"}
    for log_mag, is_zero in s.log_f.values():
        assert is_zero or math.isfinite(log_mag)


def test_kw_dual_involution():
    for p in (0.05, 0.1, 0.2, 0.28):
        assert kw_dual(kw_dual(p)) == pytest.approx(p, rel=1e-14)
    assert kw_dual(P_C) == pytest.approx(P_C, rel=1e-14)
    with pytest.raises(DomainError):
        kw_dual(0.5)


@pytest.mark.parametrize("L", [8, 16])
def test_duality_residual_small(L):
    for p in np.arange(0.05, 0.2801, 0.01):
        assert abs(duality_residual(float(p), L)) < 1e-9


def test_critical_slope_constant():
    c = critical_slope()
    assert c.eta_i == pytest.approx(0.76822542, rel=1e-8)
    assert c.slope == pytest.approx(1.5027018, rel=1e-6)
    assert near_threshold_pfail(0.0) == 0.5


def test_slope_matches_finite_difference():
    L, dx = 256, 0.02
    fd = (pfail_exact(P_C + dx / L, L) - pfail_exact(P_C - dx / L, L)) / (2 * dx)
    assert fd == pytest.approx(critical_slope().slope, rel=1e-2)

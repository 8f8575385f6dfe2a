from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import wasserstein_distance

from qecregimes import analysis
from qecregimes.errors import DomainError, NonConvergenceError
from qecregimes.exact import P_C, nishimori_point, pfail_exact
from qecregimes.regimes import AnsatzSpec, eval_ansatz


def test_histogram_invariants():
    h = analysis.GapHistogram.from_samples(5, 0.1, [0, 2, 2, -4])
    assert h.n == 4 and h.counts == {-4: 1, 0: 1, 2: 2}
    assert sorted(h.samples().tolist()) == [-4, 0, 2, 2]
    with pytest.raises(DomainError):
        analysis.GapHistogram(5, 0.1, {1: 3}, 3)
    with pytest.raises(DomainError):
        analysis.GapHistogram(5, 0.1, {2: 3}, 4)


def test_information_criteria():
    aic, bic = analysis.information_criteria(2.0, 10, 3)
    assert aic == pytest.approx(10 * math.log(0.2) + 6)
    assert bic == pytest.approx(10 * math.log(0.2) + 3 * math.log(10))
    with pytest.raises(DomainError):
        analysis.information_criteria(0.0, 10, 3)


def test_gaussian_fit_recovers_parameters():
    rng = np.random.default_rng(0)
    x = rng.normal(2.0, 2.0, 100_000)
    mu, sigma, err = analysis.gaussian_fit(x)
    assert abs(mu - 2.0) < 3 * err["mu"]
    assert abs(sigma - 2.0) < 3 * err["sigma"]


def test_gaussian_fit_rescale_and_guards():
    rng = np.random.default_rng(1)
    x = rng.normal(4.0, 2.0, 20_000)
    mu, sigma, _ = analysis.gaussian_fit(x, rescale=2.0)
    assert mu == pytest.approx(2.0, abs=0.05)
    assert sigma == pytest.approx(1.0, abs=0.05)
    with pytest.raises(DomainError):
        analysis.gaussian_fit(np.ones(500))
    with pytest.raises(DomainError):
        analysis.gaussian_fit(np.arange(10.0))


def test_gaussian_pfail():
    assert analysis.gaussian_pfail(0.0, 1.0) == 0.5
    assert analysis.gaussian_pfail(1.0, 1.0) == pytest.approx(0.158655, abs=1e-6)


def test_wasserstein_trivial_cases():
    h = ([0.0, 2.0, 4.0], [1.0, 2.0, 1.0])
    assert analysis.wasserstein1(h, h) == 0.0
    assert analysis.wasserstein1(([1.5], [1.0]), ([-2.0], [3.0])) == pytest.approx(3.5)
    with pytest.raises(DomainError):
        analysis.wasserstein1(([], []), h)


def test_wasserstein_against_scipy():
    rng = np.random.default_rng(3)
    for _ in range(20):
        va = rng.normal(0, 1, 7)
        vb = rng.normal(0.5, 2, 5)
        wa = rng.random(7)
        wb = rng.random(5)
        ref = wasserstein_distance(va, vb, wa, wb)
        assert analysis.wasserstein1((va, wa), (vb, wb)) == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_wasserstein_metric_properties():
    rng = np.random.default_rng(4)
    d = [(rng.normal(i, 1, 6), rng.random(6)) for i in range(3)]
    ab = analysis.wasserstein1(d[0], d[1])
    assert ab == pytest.approx(analysis.wasserstein1(d[1], d[0]))
    assert analysis.wasserstein1(d[0], d[2]) <= ab + analysis.wasserstein1(d[1], d[2]) + 1e-12


def test_wasserstein_bootstrap_deterministic():
    rng = np.random.default_rng(5)
    a = analysis.GapHistogram.from_samples(5, 0.1, 2 * rng.integers(-2, 5, 2000))
    b = analysis.GapHistogram.from_samples(7, 0.1, 2 * rng.integers(-2, 6, 2000))
    r1 = analysis.wasserstein_bootstrap(a, b, 1.0, 1.2, n_boot=50, seed=1)
    r2 = analysis.wasserstein_bootstrap(a, b, 1.0, 1.2, n_boot=50, seed=1)
    assert r1 == r2
    assert r1[1] > 0


def test_stiffness_fit_exact_power_law():
    means = [(L, 1.7 * L**0.25) for L in (5, 7, 9, 11, 13)]
    theta, A, err = analysis.stiffness_fit(means)
    assert theta == pytest.approx(0.25, abs=1e-6)
    assert A == pytest.approx(1.7, rel=1e-6)
    with pytest.raises(DomainError):
        analysis.stiffness_fit(means[:3])
    with pytest.raises(DomainError):
        analysis.stiffness_fit([(5, 1.0), (7, -1.0), (9, 1.0), (11, 1.0)])


def test_moment_ratio():
    rng = np.random.default_rng(6)
    x = rng.normal(3.0, 2.0, 5000)
    r, e = analysis.moment_ratio(x, n_boot=100)
    assert abs(r - 1.5) < 4 * e


def _erf_points(rng, params, pc, nu, sizes, ps, shots):
    spec = AnsatzSpec("erf_quadratic", params, pc, nu)
    pts = []
    for L in sizes:
        for p in ps:
            P = float(eval_ansatz(spec, p, L))
            k = rng.binomial(shots, P)
            ph = k / shots
            pts.append((L, p, ph, float(analysis.binomial_stderr(ph, shots))))
    return pts


def test_erf_quadratic_round_trip():
    rng = np.random.default_rng(7)
    true = {"A2": 9.0, "A1": -5.4, "A0": 1.09, "p_c": 0.1028, "nu": 1.52}
    pts = _erf_points(rng, (9.0, -5.4, 1.09), 0.1028, 1.52, (9, 11, 13, 15), np.arange(0.08, 0.1201, 0.005), 200_000)
    fit = analysis.fit_failure_ansatz(pts, "erf_quadratic")
    assert fit.converged and fit.k == 5 and fit.n == len(pts)
    for name, v in true.items():
        assert abs(fit.params[name] - v) < 3 * fit.stderrs[name] + 1e-9, name


def test_g_collapse_round_trip():
    rng = np.random.default_rng(8)
    B2, B1, B0, pc, nu = 9.569, -5.3989, 1.091, 0.1014, 1.60
    pts = []
    for L in (9, 11, 13, 15):
        for p in np.arange(0.09, 0.1151, 0.005):
            x = (p - pc) * L ** (1 / nu)
            err = 0.01
            pts.append((L, p, B2 * x * x + B1 * x + B0 + rng.normal(0, err), err))
    fit = analysis.fit_g_collapse(pts)
    truth = dict(B2=B2, B1=B1, B0=B0, p_c=pc, nu=nu)
    for name, v in truth.items():
        assert abs(fit.params[name] - v) < 3 * fit.stderrs[name], name
    assert analysis.erf_intercept_pfail(1.091) == pytest.approx(0.1376, abs=5e-4)


def test_rank_models_and_all_families_run():
    rng = np.random.default_rng(9)
    pts = _erf_points(rng, (9.0, -5.4, 1.09), 0.1028, 1.52, (5, 7, 9, 11), np.arange(0.08, 0.1201, 0.005), 20_000)
    fits = [analysis.fit_failure_ansatz(pts, f) for f in ("erf_quadratic", "erf_linear", "poly_simple", "poly_L")]
    assert [f.k for f in fits] == [5, 4, 5, 7]
    ranking = analysis.rank_models(fits)
    assert ranking["aic"][0] == "erf_quadratic"


def test_ranking_invariant_under_error_rescaling():
    rng = np.random.default_rng(10)
    pts = _erf_points(rng, (9.0, -5.4, 1.09), 0.1028, 1.52, (5, 7, 9, 11), np.arange(0.08, 0.1201, 0.005), 20_000)
    scaled = [(L, p, y, 3.0 * e) for L, p, y, e in pts]
    fam = ("erf_quadratic", "poly_simple", "poly_L")
    r1 = analysis.rank_models([analysis.fit_failure_ansatz(pts, f) for f in fam])
    r2 = analysis.rank_models([analysis.fit_failure_ansatz(scaled, f) for f in fam])
    assert r1 == r2


def test_fit_guards():
    with pytest.raises(DomainError):
        analysis.fit_failure_ansatz([(5, 0.1, 0.2, 0.01)], "cubic")
    with pytest.raises(DomainError):
        analysis.fit_failure_ansatz([(5, 0.1, 0.2, 0.0)] * 6, "erf_linear")


def test_binomial_stderr_floor():
    e = analysis.binomial_stderr(np.array([0.0, 0.5]), np.array([100, 100]))
    assert e[0] > 0
    assert e[1] == pytest.approx(0.05)


def test_surface_tension_round_trip():
    pts = []
    for p in (0.02, 0.04, 0.06):
        b = nishimori_point(p).beta
        for L in (5, 7, 9, 11):
            P = 2 * math.exp(-b * (0.3 * L + 0.8))
            pts.append((L, p, P, 0.01 * P))
    fits = analysis.fit_surface_tension(pts)
    for v in fits.values():
        assert v["sigma_eff"] == pytest.approx(0.3, abs=1e-8)
        assert v["delta"] == pytest.approx(0.8, abs=1e-8)
        assert v["flag"] == "ok"


def test_surface_tension_flags_sparse_points():
    fits = analysis.fit_surface_tension([(5, 0.01, 0.0, 0.1), (7, 0.01, 1e-5, 1e-6)])
    assert fits[0.01]["flag"] == "insufficient"


def test_surface_tension_on_clean_interface():
    # Exact post-selected curves with the capillary term recover the Onsager tension.
    pts = [(L, 0.1, pfail_exact(0.1, L), 1e-3 * pfail_exact(0.1, L)) for L in (32, 48, 64, 96)]
    fit = analysis.fit_surface_tension(pts, capillary=True)[0.1]
    beta_sigma = math.log(0.9 * 0.8 / 0.1)
    assert fit["beta_sigma"] == pytest.approx(beta_sigma, rel=1e-3)


def test_sigma_zero_crossing():
    fits = {p: {"sigma_eff": 1.0 - 10 * p} for p in (0.02, 0.04, 0.06, 0.08)}
    assert analysis.sigma_zero_crossing(fits) == pytest.approx(0.1)
    with pytest.raises(NonConvergenceError):
        analysis.sigma_zero_crossing({p: {"sigma_eff": p} for p in (0.02, 0.04)})


def test_collapse_identical_curves():
    x = np.linspace(-1, 1, 21)
    y = 0.5 + 0.3 * x
    assert analysis.collapse_spread([(x, y), (x, y)]) == (-1.0, 1.0)


def test_collapse_linear_divergence_width():
    x = np.linspace(-1, 1, 2001)
    s, eps = 0.5, 0.0025
    lo, hi = analysis.collapse_spread([(x, 0.5 + x), (x, 0.5 + (1 + s) * x)], eps)
    assert hi - lo == pytest.approx(2 * eps / s, rel=1e-6)


def test_collapse_exact_curves_contain_zero():
    xs = np.linspace(-0.5, 0.5, 201)
    curves = [(xs, np.array([pfail_exact(P_C + x / L, L) for x in xs])) for L in (8, 16, 32)]
    lo, hi = analysis.collapse_spread(curves, 0.0025, anchor=0.0)
    assert lo < 0 < hi


def test_collapse_guards():
    x = np.linspace(0, 1, 5)
    with pytest.raises(DomainError):
        analysis.collapse_spread([(x, x)])
    with pytest.raises(DomainError):
        analysis.collapse_spread([(x, x), (x + 2, x)])

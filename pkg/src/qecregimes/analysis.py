"""Statistics and fits for gap distributions and failure-rate curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats
from scipy.special import erf, erfinv

from qecregimes.errors import DomainError, NonConvergenceError
from qecregimes.exact import nishimori_point
from qecregimes.regimes import ANSATZ_FAMILIES, AnsatzSpec, eval_ansatz, scaling_variable

N_BOOT = 200


# -- data containers ------------------------------------------------------------


@dataclass(frozen=True)
class GapHistogram:
    """Counts of the domain-wall energy cost ``delta_e`` (even integers)."""

    L: int
    p: float
    counts: dict
    n: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.n:
            raise DomainError("histogram counts do not sum to n")
        if any(int(k) % 2 for k in self.counts):
            raise DomainError("delta_e values must be even integers")

    @classmethod
    def from_samples(cls, L: int, p: float, delta_e) -> "GapHistogram":
        vals, cnt = np.unique(np.asarray(delta_e, dtype=np.int64), return_counts=True)
        return cls(L=L, p=p, counts={int(v): int(c) for v, c in zip(vals, cnt)}, n=int(cnt.sum()))

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted values and their counts."""
        keys = np.array(sorted(self.counts), dtype=np.int64)
        return keys, np.array([self.counts[int(k)] for k in keys], dtype=np.int64)

    def samples(self) -> np.ndarray:
        v, c = self.support()
        return np.repeat(v, c)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a least-squares fit.

    ``rss`` is the unweighted residual sum of squares at the weighted optimum;
    ``aic = n ln(rss/n) + 2k`` and ``bic = n ln(rss/n) + k ln n``.
    """

    family: str
    params: dict
    stderrs: dict
    rss: float
    aic: float
    bic: float
    n: int
    k: int
    converged: bool
    chi2: float = float("nan")
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": dict(self.params),
            "stderrs": dict(self.stderrs),
            "rss": self.rss,
            "aic": self.aic,
            "bic": self.bic,
            "n": self.n,
            "k": self.k,
            "converged": self.converged,
            "chi2": self.chi2,
            **({"extra": dict(self.extra)} if self.extra else {}),
        }


@dataclass(frozen=True)
class CollapsePoint:
    """One observable on a scaling plot."""

    L: int
    p: float
    x: float
    y: float
    y_err: float


def information_criteria(rss: float, n: int, k: int) -> tuple[float, float]:
    """Gaussian-residual AIC and BIC."""
    if rss <= 0 or n <= 0:
        raise DomainError("rss and n must be positive")
    base = n * math.log(rss / n)
    return base + 2 * k, base + k * math.log(n)


def _boot_rng(seed: int, b: int) -> np.random.Generator:
    key = (int(seed) & ((1 << 64) - 1)) | (int(b) << 64)
    return np.random.Generator(np.random.Philox(key=key))


# -- gap distributions ----------------------------------------------------------


def gaussian_fit(samples, rescale: float = 1.0, cut_sigmas: float = 3.0):
    """Gaussian envelope of rescaled gap samples by truncated maximum likelihood.

    Samples ``u = delta_e / rescale`` above ``cut_sigmas`` times the initial
    standard deviation are dropped, keeping the bulk and the negative tail
    that controls the failure rate.  The likelihood accounts for the
    truncation.

    Args:
        samples: A :class:`GapHistogram` or a 1-D array of ``delta_e``.
        rescale: Divisor applied to every sample (typically ``L^theta``).
        cut_sigmas: Upper cut in units of the initial standard deviation.

    Returns:
        ``(mu, sigma, stderrs)`` with ``stderrs = {"mu": ..., "sigma": ...}``.
    """
    if isinstance(samples, GapHistogram):
        samples = samples.samples()
    u = np.asarray(samples, dtype=float) / rescale
    if u.size < 100:
        raise DomainError("gaussian_fit needs at least 100 samples")
    s0 = float(u.std())
    if s0 == 0:
        raise DomainError("zero-variance input")
    cut = cut_sigmas * s0
    kept = u[u <= cut]
    m0 = float(kept.mean())

    def nll(theta):
        mu, log_s = theta
        s = math.exp(log_s)
        z = (kept - mu) / s
        return (
            0.5 * float(np.dot(z, z))
            + kept.size * log_s
            + kept.size * float(stats.norm.logcdf((cut - mu) / s))
        )

    res = optimize.minimize(nll, x0=[m0, math.log(float(kept.std()))], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 4000})
    mu, log_s = res.x
    sigma = math.exp(log_s)
    hess = _numerical_hessian(lambda t: nll([t[0], math.log(t[1])]), np.array([mu, sigma]))
    try:
        cov = np.linalg.inv(hess)
        errs = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        errs = np.array([np.nan, np.nan])
    return float(mu), float(sigma), {"mu": float(errs[0]), "sigma": float(errs[1])}


def _numerical_hessian(f, x, rel: float = 1e-4) -> np.ndarray:
    k = len(x)
    h = rel * np.maximum(np.abs(x), 1.0)
    H = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = h[i]
            ej[j] = h[j]
            H[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4 * h[i] * h[j]
            )
    return H


def gaussian_pfail(mu: float, sigma: float) -> float:
    """Failure rate implied by a Gaussian gap, ``(1 - erf(mu/(sigma sqrt 2))) / 2``."""
    return 0.5 * (1.0 - math.erf(mu / sigma / math.sqrt(2.0)))


def wasserstein1(a, b) -> float:
    """First Wasserstein distance between two 1-D empirical distributions.

    Args:
        a: ``(values, weights)`` or a :class:`GapHistogram`; weights need not
            be normalized.
        b: Same for the second distribution.

    Returns:
        ``sum |F_a - F_b| du`` over the merged sorted support.
    """
    va, wa = _as_dist(a)
    vb, wb = _as_dist(b)
    support = np.union1d(va, vb)
    fa = np.cumsum(np.bincount(np.searchsorted(support, va), weights=wa, minlength=len(support)))
    fb = np.cumsum(np.bincount(np.searchsorted(support, vb), weights=wb, minlength=len(support)))
    fa /= fa[-1]
    fb /= fb[-1]
    return float(np.sum(np.abs(fa - fb)[:-1] * np.diff(support)))


def _as_dist(h):
    if isinstance(h, GapHistogram):
        v, c = h.support()
        return v.astype(float), c.astype(float)
    v, w = h
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.size == 0 or w.sum() <= 0:
        raise DomainError("empty histogram")
    return v, w


def rescaled(h: GapHistogram, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Histogram on the axis ``u = delta_e / scale``."""
    v, c = h.support()
    return v / scale, c.astype(float)


def wasserstein_bootstrap(a: GapHistogram, b: GapHistogram, scale_a: float, scale_b: float,
                          n_boot: int = N_BOOT, seed: int = 0) -> tuple[float, float]:
    """W1 between rescaled histograms and its bootstrap standard error."""
    va, ca = rescaled(a, scale_a)
    vb, cb = rescaled(b, scale_b)
    w = wasserstein1((va, ca), (vb, cb))
    reps = np.empty(n_boot)
    for k in range(n_boot):
        rng = _boot_rng(seed, k)
        ra = rng.multinomial(int(ca.sum()), ca / ca.sum())
        rb = rng.multinomial(int(cb.sum()), cb / cb.sum())
        reps[k] = wasserstein1((va, ra), (vb, rb))
    return w, float(reps.std(ddof=1))


def stiffness_fit(means) -> tuple[float, float, dict]:
    """Fit ``<dE> = A L^theta`` by least squares on ``(ln L, ln mean)``.

    Args:
        means: Iterable of ``(L, mean)`` with at least four sizes.

    Returns:
        ``(theta, A, stderrs)``.
    """
    arr = np.asarray(list(means), dtype=float)
    if arr.shape[0] < 4:
        raise DomainError("stiffness_fit needs at least 4 sizes")
    if np.any(arr[:, 1] <= 0):
        raise DomainError("means must be positive")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    res = stats.linregress(x, y)
    A = math.exp(res.intercept)
    return float(res.slope), A, {"theta": float(res.stderr), "A": A * float(res.intercept_stderr)}


def moment_ratio(delta_e, n_boot: int = N_BOOT, seed: int = 0) -> tuple[float, float]:
    """``mean / std`` of gap samples with a bootstrap standard error."""
    d = np.asarray(delta_e, dtype=float)
    r = d.mean() / d.std(ddof=1)
    reps = np.empty(n_boot)
    for k in range(n_boot):
        s = _boot_rng(seed, k).choice(d, size=d.size, replace=True)
        reps[k] = s.mean() / s.std(ddof=1)
    return float(r), float(reps.std(ddof=1))


# -- least-squares machinery ----------------------------------------------------


def _lsq(resid_w, resid_raw, x0, names, family, k, extra=None) -> FitResult:
    n_params = len(x0)
    res = optimize.least_squares(resid_w, x0, method="lm", xtol=1e-8, ftol=1e-10,
                                 max_nfev=200 * (n_params + 1))
    r = resid_w(res.x)
    n = r.size
    chi2 = float(r @ r)
    raw = resid_raw(res.x)
    rss = float(raw @ raw)
    dof = max(n - n_params, 1)
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * (chi2 / dof)
        errs = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        errs = np.full(n_params, np.nan)
    aic, bic = information_criteria(max(rss, 1e-300), n, k)
    return FitResult(
        family=family,
        params={nm: float(v) for nm, v in zip(names, res.x)},
        stderrs={nm: float(e) for nm, e in zip(names, errs)},
        rss=rss,
        aic=aic,
        bic=bic,
        n=n,
        k=k,
        converged=bool(res.success and res.status > 0),
        chi2=chi2,
        extra=extra or {},
    )


def _points_array(points, width):
    arr = np.asarray([tuple(pt)[:width] for pt in points], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise DomainError(f"expected {width} columns per point")
    return arr


def crossing_estimate(L, p, y) -> float:
    """Crossing ``p`` of the curves of the two largest sizes (linear interpolation)."""
    L = np.asarray(L)
    sizes = np.unique(L)
    if sizes.size < 2:
        return float(np.median(p))
    a, b = sizes[-1], sizes[-2]
    pa, ya = np.asarray(p)[L == a], np.asarray(y)[L == a]
    pb, yb = np.asarray(p)[L == b], np.asarray(y)[L == b]
    grid = np.intersect1d(pa, pb)
    if grid.size < 2:
        return float(np.median(p))
    da = np.interp(grid, np.sort(pa), ya[np.argsort(pa)]) - np.interp(grid, np.sort(pb), yb[np.argsort(pb)])
    sign = np.flatnonzero(np.diff(np.sign(da)) != 0)
    if sign.size == 0:
        return float(grid[np.argmin(np.abs(da))])
    i = sign[0]
    t = da[i] / (da[i] - da[i + 1])
    return float(grid[i] + t * (grid[i + 1] - grid[i]))


def fit_g_collapse(points, p_c0: float | None = None, nu0: float = 1.5) -> FitResult:
    """Fit ``mu/sigma = g(x) = B2 x^2 + B1 x + B0`` with free ``p_c`` and ``nu``.

    Args:
        points: Rows ``(L, p, ratio, ratio_err)``.
        p_c0: Initial threshold; defaults to the crossing of the two largest
            sizes.
        nu0: Initial exponent.
    """
    arr = _points_array(points, 4)
    L, p, y, e = arr.T
    if np.unique(L).size < 3:
        raise DomainError("fit_g_collapse needs at least 3 sizes")
    if np.unique(p).size < 3:
        raise DomainError("fit_g_collapse needs at least 3 distinct error rates")
    if np.any(e <= 0):
        raise DomainError("standard errors must be positive")
    if p_c0 is None:
        p_c0 = crossing_estimate(L, p, y)
    x = scaling_variable(p, L, p_c0, nu0)
    b0 = np.polyfit(x, y, 2, w=1 / e)

    def model(t):
        B2, B1, B0, pc, nu = t
        xx = scaling_variable(p, L, pc, nu)
        return B2 * xx * xx + B1 * xx + B0

    return _lsq(lambda t: (model(t) - y) / e, lambda t: model(t) - y,
                np.r_[b0, p_c0, nu0], ("B2", "B1", "B0", "p_c", "nu"), "g_quadratic", 5)


def fit_failure_ansatz(points, family: str, p_c0: float | None = None, nu0: float = 1.5) -> FitResult:
    """Weighted nonlinear least-squares fit of a scaling ansatz to failure rates.

    Args:
        points: Rows ``(L, p, pfail, err)``.
        family: ``erf_quadratic``, ``erf_linear``, ``poly_simple`` or ``poly_L``.
        p_c0: Initial threshold, defaulting to the crossing of the two
            largest sizes.
        nu0: Initial exponent.
    """
    if family not in ANSATZ_FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    arr = _points_array(points, 4)
    L, p, y, e = arr.T
    if np.any(e <= 0):
        raise DomainError("singular weighting: standard errors must be positive")
    if p_c0 is None:
        p_c0 = crossing_estimate(L, p, y)
    names, k = ANSATZ_FAMILIES[family]
    x = scaling_variable(p, L, p_c0, nu0)
    if family.startswith("erf"):
        g = math.sqrt(2.0) * erfinv(np.clip(1.0 - 2.0 * y, -0.999, 0.999))
        deg = 2 if family == "erf_quadratic" else 1
        c0 = list(np.polyfit(x, g, deg))
    elif family == "poly_simple":
        c0 = list(np.polyfit(x, y, 2, w=1 / e))
    else:
        c0 = list(np.polyfit(x, y, 2, w=1 / e)) + [0.0, 1.0]

    def model(t):
        spec = AnsatzSpec(family, tuple(t[:-2]), t[-2], t[-1]) if t[-1] > 0 else None
        if spec is None:
            return np.full_like(y, 1e3)
        return np.asarray(eval_ansatz(spec, p, L), dtype=float)

    return _lsq(lambda t: (model(t) - y) / e, lambda t: model(t) - y,
                np.r_[c0, p_c0, nu0], tuple(names) + ("p_c", "nu"), family, k)


def rank_models(results: list[FitResult]) -> dict:
    """Order fits by AIC and by BIC (best first)."""
    return {
        "aic": [r.family for r in sorted(results, key=lambda r: r.aic)],
        "bic": [r.family for r in sorted(results, key=lambda r: r.bic)],
    }


def binomial_stderr(pfail, shots) -> np.ndarray:
    """Binomial standard error, floored at half a count for zero-failure points."""
    pfail = np.asarray(pfail, dtype=float)
    shots = np.asarray(shots, dtype=float)
    ph = np.clip(pfail, 0.5 / shots, 1.0 - 0.5 / shots)
    return np.sqrt(ph * (1.0 - ph) / shots)


# -- ordered regime ------------------------------------------------------------


def fit_surface_tension(points, capillary: bool = False, beta=None) -> dict:
    """Per-``p`` linear fits of ``-ln(P/2) = beta (sigma_eff L + delta)``.

    Args:
        points: Rows ``(L, p, pfail, err)``.
        capillary: Add the fixed ``-ln(L)/2`` capillary term to the model,
            appropriate for the clean (post-selected) interface.
        beta: Optional map ``p -> beta``; defaults to the Nishimori value.

    Returns:
        Map from ``p`` to a dict with ``sigma_eff``, ``delta``, their
        standard errors, ``beta_sigma`` and a ``flag`` (``ok`` or
        ``insufficient``).
    """
    arr = _points_array(points, 4)
    out = {}
    for pv in np.unique(arr[:, 1]):
        rows = arr[(arr[:, 1] == pv) & (arr[:, 2] > 0)]
        b = beta(pv) if callable(beta) else nishimori_point(float(pv)).beta
        if rows.shape[0] < 2 or np.unique(rows[:, 0]).size < 2:
            out[float(pv)] = {"flag": "insufficient", "n": int(rows.shape[0])}
            continue
        L, _, P, e = rows.T
        y = -np.log(P / 2.0)
        if capillary:
            y = y + 0.5 * np.log(L)
        sy = e / P
        w = 1.0 / np.maximum(sy, 1e-300) ** 2
        A = np.column_stack([L, np.ones_like(L)])
        Aw = A * np.sqrt(w)[:, None]
        yw = y * np.sqrt(w)
        coef, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
        resid = yw - Aw @ coef
        # Scale by the reduced chi^2 when there are residual degrees of freedom.
        scale = float(resid @ resid) / (len(y) - 2) if len(y) > 2 else 1.0
        cov = np.linalg.inv(Aw.T @ Aw) * scale
        slope, icpt = coef
        se = np.sqrt(np.diag(cov))
        out[float(pv)] = {
            "beta": b,
            "beta_sigma": float(slope),
            "sigma_eff": float(slope / b),
            "delta": float(icpt / b),
            "sigma_eff_err": float(se[0] / b),
            "delta_err": float(se[1] / b),
            "n": int(len(y)),
            "flag": "ok" if len(y) >= 4 else "insufficient",
        }
    return out


def sigma_zero_crossing(fits: dict, last: int = 3) -> float:
    """Extrapolated ``p`` where ``sigma_eff`` vanishes, from the largest ``p`` fits."""
    ok = sorted((p, v) for p, v in fits.items() if "sigma_eff" in v)
    if len(ok) < 2:
        raise DomainError("need at least two fitted points")
    ok = ok[-last:]
    ps = np.array([p for p, _ in ok])
    s = np.array([v["sigma_eff"] for _, v in ok])
    slope, icpt = np.polyfit(ps, s, 1)
    if slope >= 0:
        raise NonConvergenceError("sigma_eff does not decrease with p")
    return float(-icpt / slope)


# -- collapse window -----------------------------------------------------------


def collapse_spread(curves, epsilon: float = 0.0025, anchor: float | None = None) -> tuple[float, float]:
    """Widest contiguous ``x`` window where curves agree to within ``epsilon``.

    Args:
        curves: Sequence of ``(x, y)`` arrays, at least two.
        epsilon: Maximum allowed vertical spread.
        anchor: If given, return the window containing this ``x`` instead of
            the widest one.

    Returns:
        ``(x_lo, x_hi)`` with edges located by linear interpolation of the
        spread.  ``(nan, nan)`` if no such window exists.
    """
    if len(curves) < 2:
        raise DomainError("collapse_spread needs at least two curves")
    lo = max(float(np.min(x)) for x, _ in curves)
    hi = min(float(np.max(x)) for x, _ in curves)
    if lo >= hi:
        raise DomainError("curves have disjoint x supports")
    grid = np.unique(np.concatenate([np.asarray(x, dtype=float) for x, _ in curves]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    ys = []
    for x, y in curves:
        order = np.argsort(x)
        ys.append(np.interp(grid, np.asarray(x, dtype=float)[order], np.asarray(y, dtype=float)[order]))
    ys = np.array(ys)
    excess = ys.max(axis=0) - ys.min(axis=0) - epsilon
    inside = excess <= 0
    windows = []
    i = 0
    while i < len(grid):
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(grid) and inside[j + 1]:
            j += 1
        a = grid[i]
        if i > 0:
            a = grid[i - 1] + (grid[i] - grid[i - 1]) * excess[i - 1] / (excess[i - 1] - excess[i])
        b = grid[j]
        if j + 1 < len(grid):
            b = grid[j] + (grid[j + 1] - grid[j]) * excess[j] / (excess[j] - excess[j + 1])
        windows.append((float(a), float(b)))
        i = j + 1
    if not windows:
        return float("nan"), float("nan")
    if anchor is not None:
        for a, b in windows:
            if a <= anchor <= b:
                return a, b
        return float("nan"), float("nan")
    return max(windows, key=lambda w: w[1] - w[0])


def erf_intercept_pfail(A0: float) -> float:
    """Failure rate at threshold implied by an erf-ansatz intercept."""
    return 0.5 * (1.0 - erf(A0 / math.sqrt(2.0)))

"""Goodness-of-fit tests for the coefficient distribution.

* :func:`t1_simple` -- Kolmogorov-Smirnov test of a fully specified ``G0``;
  asymptotic Kolmogorov p-values.
* :func:`t1_composite` -- KS test of the Beta family with method-of-moments
  fitting and Monte Carlo critical values.
* :func:`t2_parametric` -- Wald-type test of a sqrt-Beta null built on the
  truncated maximum likelihood estimate and the Beta Fisher information.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError, EstimationError, SupportError
from .estimators import Ecdf, beta_mom, beta_mom_batch, estimate_coeffs, sample_moments
from .special_fn import (
    BetaParams,
    beta_cdf,
    chi2_2_isf,
    chi2_2_sf,
    digamma,
    kolmogorov_cdf,
    kolmogorov_isf,
    log_beta,
    trigamma,
)

T1_SIMPLE = "T1_simple"
T1_COMPOSITE = "T1_composite"
T2_PARAMETRIC = "T2_parametric"

CSV_HEADER = "method,statistic,p_value,critical_value,level,alpha_hat,beta_hat,mc_reps"


@dataclass(frozen=True)
class Simple:
    """``H0: G = g0`` for a fixed coefficient law ``g0``."""

    g0: object


@dataclass(frozen=True)
class CompositeBeta:
    """``H0: G`` is some Beta(alpha, beta) law on (0, 1)."""


@dataclass(frozen=True)
class CompositeSqrtBeta:
    """``H0``: the coefficients follow the sqrt-Beta law with parameters ``theta0``."""

    theta0: BetaParams

    def __post_init__(self):
        self.theta0.require_above_one()


@dataclass(frozen=True)
class GofResult:
    statistic: float
    p_value: float
    critical_value: float
    level: float
    method: str
    fitted_theta: BetaParams = None
    mc_reps: int = None

    @property
    def reject(self):
        return self.statistic > self.critical_value

    def to_csv_row(self):
        def fmt(v):
            return "" if v is None else f"{v:.17g}"

        a = b = None
        if self.fitted_theta is not None:
            a, b = self.fitted_theta.alpha, self.fitted_theta.beta
        reps = "" if self.mc_reps is None else str(self.mc_reps)
        return ",".join(
            [self.method, fmt(self.statistic), fmt(self.p_value), fmt(self.critical_value),
             fmt(self.level), fmt(a), fmt(b), reps]
        )


def _check_level(level):
    if not 0.0 < level < 1.0:
        raise ConfigurationError("level must lie in (0, 1)")


def ks_sup_distance(e, cdf):
    """``sup_x |G_hat(x) - F(x)|`` for a continuous CDF ``F``.

    The supremum is attained at a jump of the ECDF, either at the jump height or
    just below it. Tied points are merged into a single jump first.
    """
    pts = e.points if isinstance(e, Ecdf) else np.sort(np.asarray(e, dtype=float))
    N = pts.size
    vals, counts = np.unique(pts, return_counts=True)
    upper = np.cumsum(counts) / N
    lower = upper - counts / N
    F = np.asarray(cdf(vals), dtype=float)
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(lower - F))))


def _ks_sorted_rows(F_sorted):
    """Row-wise KS distance given ``F`` evaluated at each row's sorted sample."""
    N = F_sorted.shape[-1]
    i = np.arange(1, N + 1)
    d_plus = np.max(i / N - F_sorted, axis=-1)
    d_minus = np.max(F_sorted - (i - 1) / N, axis=-1)
    return np.maximum(d_plus, d_minus)


def t1_simple(e, null, level=0.05):
    """KS test of ``H0: G = G0`` with Kolmogorov-limit p-value and critical value."""
    _check_level(level)
    g0 = null.g0 if isinstance(null, Simple) else null
    stat = math.sqrt(e.N) * ks_sup_distance(e, g0.cdf)
    return GofResult(
        statistic=stat,
        p_value=1.0 - kolmogorov_cdf(stat),
        critical_value=kolmogorov_isf(level),
        level=level,
        method=T1_SIMPLE,
    )


def check_support(e, lo=0.0, hi=1.0):
    """Raise :class:`SupportError` unless every point lies strictly inside ``(lo, hi)``."""
    pts = e.points
    if pts.size and (pts[0] <= lo or pts[-1] >= hi):
        raise SupportError(
            f"coefficient estimates must lie in ({lo}, {hi}); found range [{pts[0]:.6g}, {pts[-1]:.6g}]"
        )


def _seed_sequence(rng):
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(0, 2**63)))
    return np.random.SeedSequence(rng)


def _child(ss, r):
    # explicit key: independent of how many children were spawned before
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (r,))


def composite_null_statistics(theta, N, mc_reps, rng, bootstrap="coefficient", panel_n=None, shock_b=0.0):
    """Monte Carlo draws of the composite KS statistic under ``Beta(theta)``.

    ``bootstrap="coefficient"`` draws ``N`` coefficients per replication;
    ``"panel"`` simulates whole panels of length ``panel_n`` with Beta(theta)
    coefficients and re-estimates them, which is slower but includes the
    estimation error of the coefficients.
    """
    ss = _seed_sequence(rng)
    if bootstrap == "coefficient":
        draws = np.empty((mc_reps, N))
        for r in range(mc_reps):
            g = np.random.Generator(np.random.PCG64(_child(ss, r)))
            draws[r] = g.beta(theta.alpha, theta.beta, size=N)
        draws.sort(axis=1)
    elif bootstrap == "panel":
        from .rcar_sim import BetaOn01, PanelConfig, simulate_panel

        if panel_n is None:
            raise ConfigurationError("panel bootstrap needs panel_n")
        draws = np.empty((mc_reps, N))
        for r in range(mc_reps):
            seed = int(_child(ss, r).generate_state(1, np.uint64)[0])
            cfg = PanelConfig(N=N, n=panel_n, coeff=BetaOn01(theta), shock_b=shock_b, seed=seed)
            draws[r] = estimate_coeffs(simulate_panel(cfg)).points
    else:
        raise ConfigurationError(f"unknown bootstrap {bootstrap!r}")
    m1 = draws.mean(axis=1)
    m2 = (draws * draws).mean(axis=1)
    a, b = beta_mom_batch(m1, m2)
    if not (np.all(a > 0) and np.all(b > 0)):
        raise EstimationError("moment fit failed in a Monte Carlo replication")
    F = beta_cdf(np.clip(draws, 0.0, 1.0), alpha=a[:, None], beta=b[:, None])
    return math.sqrt(N) * _ks_sorted_rows(F)


def upper_quantile(stats, level):
    """The ``ceil((1 - level) m)``-th order statistic of ``m`` Monte Carlo draws."""
    s = np.sort(np.asarray(stats, dtype=float))
    k = math.ceil((1.0 - level) * s.size - 1e-9)
    return float(s[min(max(k, 1), s.size) - 1])


def t1_composite(e, level=0.05, mc_reps=1000, rng=0, bootstrap="coefficient", panel_n=None, shock_b=0.0):
    """KS test of the Beta family with moment-fitted parameters.

    The critical value and p-value come from ``mc_reps`` replications of the
    whole procedure (draw, refit, KS distance) under the fitted Beta law.
    """
    _check_level(level)
    if mc_reps < 100:
        raise ConfigurationError("mc_reps must be at least 100")
    check_support(e)
    mu1, mu2 = sample_moments(e, 2)
    theta = beta_mom(mu1, mu2)
    stat = math.sqrt(e.N) * ks_sup_distance(e, lambda x: beta_cdf(x, theta))
    null_stats = composite_null_statistics(theta, e.N, mc_reps, rng, bootstrap, panel_n, shock_b)
    return GofResult(
        statistic=stat,
        p_value=float(np.mean(null_stats >= stat)),
        critical_value=upper_quantile(null_stats, level),
        level=level,
        method=T1_COMPOSITE,
        fitted_theta=theta,
        mc_reps=mc_reps,
    )


# ---------------------------------------------------------------------------
# parametric benchmark


def fisher_matrix(theta):
    """Fisher information of Beta(alpha, beta) per observation."""
    a, b = theta.alpha, theta.beta
    tab = trigamma(a + b)
    return np.array([[trigamma(a) - tab, -tab], [-tab, trigamma(b) - tab]])


def default_kappa(n=None):
    """Truncation ``1/(2 sqrt(n))`` when the series length is known, else 0.01."""
    return 0.5 / math.sqrt(n) if n else 0.01


BOX = (1.0 + 1e-6, 100.0)


def beta_mle(u, max_iter=200, tol=1e-10):
    """Maximum likelihood Beta(alpha, beta) fit to data in (0, 1).

    Projected Newton with step halving on the box ``[1 + 1e-6, 100]^2``.
    The Beta log-likelihood is concave in (alpha, beta), so the Newton
    direction with the exact Hessian ``-A(theta)`` is an ascent direction.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise SupportError("Beta MLE needs data strictly inside (0, 1)")
    s1 = float(np.mean(np.log(u)))
    s2 = float(np.mean(np.log1p(-u)))
    lo, hi = BOX

    def loglik(t):
        return (t[0] - 1.0) * s1 + (t[1] - 1.0) * s2 - float(log_beta(t[0], t[1]))

    def score(t):
        dab = digamma(t[0] + t[1])
        return np.array([s1 - digamma(t[0]) + dab, s2 - digamma(t[1]) + dab])

    m1, m2 = float(u.mean()), float(np.mean(u * u))
    try:
        start = beta_mom(m1, m2).as_tuple()
    except Exception:
        start = (2.0, 2.0)
    theta = np.clip(np.array(start), lo, hi)
    ll = loglik(theta)
    for _ in range(max_iter):
        g = score(theta)
        step = np.linalg.solve(fisher_matrix(BetaParams(*theta)), g)
        t = 1.0
        while True:
            cand = np.clip(theta + t * step, lo, hi)
            ll_c = loglik(cand)
            if ll_c >= ll - 1e-15 or t < 1e-12:
                break
            t *= 0.5
        move = cand - theta
        theta, ll = cand, ll_c
        if np.max(np.abs(move) / np.maximum(1.0, np.abs(theta))) < tol:
            on_box = (theta <= lo) | (theta >= hi)
            if on_box.any():
                raise EstimationError("MLE reached the parameter box boundary", last_iterate=BetaParams(*theta))
            return BetaParams(*theta)
    raise EstimationError(f"MLE did not converge in {max_iter} iterations", last_iterate=BetaParams(*theta))


def clamp_coeffs(e, kappa):
    """Estimates clipped into ``[kappa, 1 - kappa]``."""
    if not 0.0 <= kappa < 0.5:
        raise ConfigurationError("kappa must lie in [0, 0.5)")
    pts = e.points if isinstance(e, Ecdf) else np.asarray(e, dtype=float)
    return np.clip(pts, kappa, 1.0 - kappa)


def beran_mle(e, kappa):
    """MLE of the sqrt-Beta parameters from clamped coefficient estimates.

    The sqrt-Beta log-likelihood of ``a`` and the Beta log-likelihood of
    ``u = a^2`` differ by ``sum ln(2 a_i)``, which does not involve the
    parameters, so the fit is done on ``u``.
    """
    if e.N < 10:
        raise ConfigurationError("beran_mle needs N >= 10")
    a = clamp_coeffs(e, kappa)
    return beta_mle(a * a)


def t2_statistic(theta_hat, theta0, N):
    d = np.array(theta_hat.as_tuple()) - np.array(theta0.as_tuple())
    return float(N * d @ fisher_matrix(theta0) @ d)


def t2_parametric(e, theta0, kappa=None, level=0.05):
    """Wald-type test of the sqrt-Beta null ``theta0``, chi-square(2) calibrated."""
    _check_level(level)
    theta0.require_above_one()
    if kappa is None:
        kappa = default_kappa()
    theta_hat = beran_mle(e, kappa)
    stat = t2_statistic(theta_hat, theta0, e.N)
    return GofResult(
        statistic=stat,
        p_value=chi2_2_sf(stat),
        critical_value=chi2_2_isf(level),
        level=level,
        method=T2_PARAMETRIC,
        fitted_theta=theta_hat,
    )


def write_results_csv(results, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in results:
            fh.write(r.to_csv_row() + "\n")
    return path

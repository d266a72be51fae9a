"""Special functions used by the estimators and tests.

Everything here is vectorized over numpy arrays and falls back to a plain
``float`` for scalar input. The implementations are self-contained (no
``scipy.special``) so that the test-suite can check them against independent
oracles.

Methods
-------
log_gamma
    Upward recurrence to ``x >= 10`` followed by the Stirling series with
    Bernoulli terms through ``B_16``; truncation error below 1e-17 there.
digamma, trigamma
    Same shift (to ``x >= 10``), then the standard asymptotic expansions.
beta_cdf
    Modified Lentz evaluation of the incomplete Beta continued fraction, with
    the symmetry switch at ``x = (a + 1) / (a + b + 2)``.
kolmogorov_cdf
    Alternating series ``1 - 2 sum (-1)^(k-1) exp(-2 k^2 y^2)``; below
    ``y = 0.3`` the equivalent Jacobi theta form is used, since the alternating
    series needs thousands of cancelling terms there.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import ConvergenceError, DomainError

MAX_ITER = 10_000
_TINY = 1e-300
_CF_EPS = 1e-15
_SHIFT_TO = 10.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_{2k} / (2k (2k - 1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# B_{2k} / (2k), k = 1..7
_DIGAMMA_ASYMP = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_{2k}, k = 1..8
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters ``(alpha, beta)`` of a Beta law."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise DomainError(f"BetaParams.{name} must be a finite positive number, got {v!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    def require_above_one(self):
        """Raise unless ``alpha > 1`` and ``beta > 1``; returns ``self``."""
        if not (self.alpha > 1.0 and self.beta > 1.0):
            raise DomainError(
                f"this pathway needs alpha > 1 and beta > 1, got ({self.alpha}, {self.beta})"
            )
        return self

    def swapped(self):
        return BetaParams(self.beta, self.alpha)

    def moments(self):
        """First two raw moments of Beta(alpha, beta)."""
        a, b = self.alpha, self.beta
        m1 = a / (a + b)
        m2 = m1 * (a + 1.0) / (a + b + 1.0)
        return m1, m2

    def as_tuple(self):
        return (self.alpha, self.beta)


def _prepare(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _check_positive(arr, fname):
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{fname} requires finite positive arguments")


def _shift_up(z):
    """Return ``(z + k, k)`` with ``k`` the integer shift bringing every entry to >= 10."""
    k = np.ceil(np.maximum(_SHIFT_TO - z, 0.0))
    return z + k, k


def log_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    z, scalar = _prepare(x)
    _check_positive(z, "log_gamma")
    zs, k = _shift_up(z)
    # ln Gamma(z) = ln Gamma(z + k) - ln(z (z+1) ... (z+k-1))
    prod = np.ones_like(z)
    for j in range(int(k.max()) if k.size else 0):
        prod = np.where(j < k, prod * (z + j), prod)
    inv = 1.0 / zs
    inv2 = inv * inv
    series = np.zeros_like(zs)
    for c in reversed(_STIRLING):
        series = series * inv2 + c
    res = (zs - 0.5) * np.log(zs) - zs + _HALF_LOG_2PI + series * inv - np.log(prod)
    return _out(res, scalar)


def log_beta(a, b):
    """``ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = log_gamma(a) + log_gamma(b) - log_gamma(a + b)
    return res


def digamma(x):
    """Logarithmic derivative of the Gamma function for ``x > 0``."""
    z, scalar = _prepare(x)
    _check_positive(z, "digamma")
    zs, k = _shift_up(z)
    acc = np.zeros_like(z)
    for j in range(int(k.max()) if k.size else 0):
        acc = np.where(j < k, acc + 1.0 / (z + j), acc)
    inv2 = 1.0 / (zs * zs)
    series = np.zeros_like(zs)
    for c in reversed(_DIGAMMA_ASYMP):
        series = series * inv2 + c
    res = np.log(zs) - 0.5 / zs - series * inv2 - acc
    return _out(res, scalar)


def trigamma(x):
    """Second derivative of ``ln Gamma`` for ``x > 0``."""
    z, scalar = _prepare(x)
    _check_positive(z, "trigamma")
    zs, k = _shift_up(z)
    acc = np.zeros_like(z)
    for j in range(int(k.max()) if k.size else 0):
        acc = np.where(j < k, acc + 1.0 / ((z + j) * (z + j)), acc)
    inv = 1.0 / zs
    inv2 = inv * inv
    series = np.zeros_like(zs)
    for c in reversed(_BERNOULLI):
        series = series * inv2 + c
    res = inv + 0.5 * inv2 + series * inv2 * inv + acc
    return _out(res, scalar)


def _betacf(a, b, x):
    """Continued fraction for the incomplete Beta (modified Lentz), vectorized."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, MAX_ITER + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            return h
    raise ConvergenceError(f"incomplete Beta continued fraction did not converge in {MAX_ITER} steps")


def beta_cdf(x, params=None, *, alpha=None, beta=None):
    """Regularized incomplete Beta function ``I_x(alpha, beta)``.

    Parameters
    ----------
    x : float or array_like
        Points in ``[0, 1]``.
    params : BetaParams, optional
        Shape parameters. Alternatively pass ``alpha`` and ``beta`` as
        keywords; those may be arrays broadcasting against ``x`` (used by the
        Monte Carlo code, where every replication has its own fit).

    Returns
    -------
    float or ndarray
    """
    if params is not None:
        alpha, beta = params.alpha, params.beta
    xa, scalar = _prepare(x)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise DomainError("beta_cdf requires 0 <= x <= 1")
    _check_positive(a, "beta_cdf")
    _check_positive(b, "beta_cdf")
    xa, a, b = np.broadcast_arrays(xa, a, b)
    out = np.empty(xa.shape)
    lo = xa <= 0.0
    hi = xa >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    if mid.any():
        xm, am, bm = xa[mid], a[mid], b[mid]
        flip = xm > (am + 1.0) / (am + bm + 2.0)
        # evaluate the fraction where it converges fast: I_x(a,b) = 1 - I_{1-x}(b,a)
        xs = np.where(flip, 1.0 - xm, xm)
        as_ = np.where(flip, bm, am)
        bs = np.where(flip, am, bm)
        log_front = as_ * np.log(xs) + bs * np.log1p(-xs) - log_beta(as_, bs)
        val = np.exp(log_front) * _betacf(as_, bs, xs) / as_
        val = np.where(flip, 1.0 - val, val)
        out[mid] = np.clip(val, 0.0, 1.0)
    return _out(out, scalar)


def kolmogorov_cdf(y, tol=1e-14):
    """CDF of the Kolmogorov distribution (law of the sup of a Brownian bridge)."""
    ya, scalar = _prepare(y)
    out = np.zeros(ya.shape)
    flat_y = ya.ravel()
    flat = out.ravel()
    for idx, v in enumerate(flat_y):
        flat[idx] = _kolmogorov_scalar(float(v), tol)
    return _out(out, scalar)


def _kolmogorov_scalar(y, tol):
    if not y > 0.0:
        return 0.0
    if y < 0.3:
        # sqrt(2 pi)/y * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 y^2))
        c = math.pi * math.pi / (8.0 * y * y)
        total = 0.0
        for k in range(1, MAX_ITER + 1):
            term = math.exp(-((2 * k - 1) ** 2) * c)
            total += term
            if term < tol * max(total, _TINY):
                return min(1.0, math.sqrt(2.0 * math.pi) / y * total)
        raise ConvergenceError("Kolmogorov theta series did not converge")
    total = 0.0
    sign = 1.0
    for k in range(1, MAX_ITER + 1):
        term = math.exp(-2.0 * k * k * y * y)
        total += sign * term
        if term < tol:
            return min(1.0, max(0.0, 1.0 - 2.0 * total))
        sign = -sign
    raise ConvergenceError("Kolmogorov series did not converge")


def kolmogorov_sf(y):
    """Upper tail ``1 - K(y)``."""
    return 1.0 - kolmogorov_cdf(y)


def kolmogorov_isf(level, lo=0.2, hi=3.0, tol=1e-8):
    """Upper ``level`` quantile of the Kolmogorov law, by bisection."""
    if not 0.0 < level < 1.0:
        raise DomainError("level must lie in (0, 1)")
    target = 1.0 - level
    if kolmogorov_cdf(lo) > target or kolmogorov_cdf(hi) < target:
        raise DomainError(f"quantile for level {level} lies outside [{lo}, {hi}]")
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if kolmogorov_cdf(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            return 0.5 * (lo + hi)
    raise ConvergenceError("bisection did not converge")


def chi2_2_sf(x):
    """Survival function of the chi-square law with 2 degrees of freedom."""
    xa, scalar = _prepare(x)
    if np.any(~(xa >= 0.0)):
        raise DomainError("chi2_2_sf requires x >= 0")
    return _out(np.exp(-0.5 * xa), scalar)


def chi2_2_isf(level):
    """Upper ``level`` quantile of chi-square(2): ``2 ln(1/level)``."""
    if not 0.0 < level < 1.0:
        raise DomainError("level must lie in (0, 1)")
    return -2.0 * math.log(level)

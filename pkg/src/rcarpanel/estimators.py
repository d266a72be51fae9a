"""Coefficient estimation from panel data.

Lag-1 sample autocorrelation per series, the empirical CDF of those estimates,
their raw moments, the Beta method-of-moments fit and a kernel density
estimate of the coefficient density.
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSeries, MomentDomainError
from .special_fn import BetaParams

DEGENERATE_DENOM = 1e-300


def _pairwise_sum(v):
    # numpy's add.reduce is pairwise for contiguous float arrays
    return float(np.add.reduce(np.ascontiguousarray(v, dtype=float)))


def lag1_autocorr(series):
    """Centered lag-1 sample autocorrelation.

    ``sum_{t<n} (x_t - m)(x_{t+1} - m) / sum_t (x_t - m)^2`` with ``m`` the sample
    mean. Bounded by 1 in absolute value and invariant to ``x -> rho x + mu``.

    Raises
    ------
    DegenerateSeries
        If the series is (numerically) constant.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("lag1_autocorr needs a 1-d series of length >= 3")
    d = x - _pairwise_sum(x) / x.size
    den = _pairwise_sum(d * d)
    if not den > DEGENERATE_DENOM:
        raise DegenerateSeries("series has zero variance")
    num = _pairwise_sum(d[:-1] * d[1:])
    return num / den


def lag1_autocorr_rows(data):
    """Row-wise :func:`lag1_autocorr` for a 2-d array; returns an array of length ``N``."""
    x = np.asarray(data, dtype=float)
    d = x - (np.add.reduce(x, axis=1) / x.shape[1])[:, None]
    den = np.add.reduce(d * d, axis=1)
    bad = np.flatnonzero(~(den > DEGENERATE_DENOM))
    if bad.size:
        raise DegenerateSeries(f"series {bad[0]} has zero variance", index=int(bad[0]))
    num = np.add.reduce(d[:, :-1] * d[:, 1:], axis=1)
    return num / den


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Empirical distribution of the estimated coefficients.

    ``points`` are sorted ascending; ``index[k]`` is the series that produced
    ``points[k]``.
    """

    points: np.ndarray
    index: np.ndarray = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        idx = np.arange(pts.size) if self.index is None else np.asarray(self.index).ravel()
        if idx.size != pts.size:
            raise ValueError("index and points differ in length")
        order = np.argsort(pts, kind="stable")
        pts, idx = pts[order], idx[order]
        pts.setflags(write=False)
        idx.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "index", idx)

    @property
    def N(self):
        return self.points.size

    def __call__(self, x):
        return ecdf_eval(self, x)

    def by_series(self):
        """Estimates in original series order."""
        out = np.empty(self.N)
        out[self.index] = self.points
        return out


def ecdf_eval(e, x):
    """Fraction of points ``<= x`` (right-continuous)."""
    res = np.searchsorted(e.points, x, side="right") / e.N
    return float(res) if np.ndim(res) == 0 else res


def estimate_coeffs(panel):
    """Estimate every coefficient of ``panel`` and return their :class:`Ecdf`."""
    data = panel.data if hasattr(panel, "data") else panel
    a_hat = lag1_autocorr_rows(data)
    return Ecdf(a_hat)


def sample_moments(e, m=2):
    """Raw moments ``(1/N) sum a_hat^u`` for ``u = 1..m``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    pts = np.asarray(e.points if isinstance(e, Ecdf) else e, dtype=float)
    return np.array([_pairwise_sum(pts**u) / pts.size for u in range(1, m + 1)])


def beta_mom(mu1, mu2):
    """Beta parameters matching the first two raw moments.

    ``alpha = mu1 (mu1 - mu2) / (mu2 - mu1^2)`` and
    ``beta = (1 - mu1)(mu1 - mu2) / (mu2 - mu1^2)``.
    """
    var = mu2 - mu1 * mu1
    if not var > 0:
        raise MomentDomainError(f"mu2 - mu1^2 = {var:.6g} must be positive")
    if not mu2 > 0:
        raise MomentDomainError(f"mu2 = {mu2:.6g} must be positive")
    if not mu1 > mu2:
        raise MomentDomainError(f"mu1 = {mu1:.6g} must exceed mu2 = {mu2:.6g}")
    k = (mu1 - mu2) / var
    return BetaParams(mu1 * k, (1.0 - mu1) * k)


def beta_mom_batch(mu1, mu2):
    """Vectorized :func:`beta_mom` without validation; returns ``(alpha, beta)`` arrays."""
    k = (mu1 - mu2) / (mu2 - mu1 * mu1)
    return mu1 * k, (1.0 - mu1) * k


# ---------------------------------------------------------------------------
# kernel density estimation


@dataclass(frozen=True)
class KernelSpec:
    """A kernel supported on ``[-1, 1]`` with its squared L2 norm and second moment."""

    name: str
    l2_norm_sq: float
    mu2: float

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = np.abs(y) <= 1.0
        if self.name == "epanechnikov":
            k = 0.75 * (1.0 - y * y)
        elif self.name == "triangular":
            k = 1.0 - np.abs(y)
        elif self.name == "quartic":
            k = (15.0 / 16.0) * (1.0 - y * y) ** 2
        else:
            raise ValueError(f"unknown kernel {self.name!r}")
        return np.where(inside, k, 0.0)


EPANECHNIKOV = KernelSpec("epanechnikov", 0.6, 0.2)
TRIANGULAR = KernelSpec("triangular", 2.0 / 3.0, 1.0 / 6.0)
QUARTIC = KernelSpec("quartic", 5.0 / 7.0, 1.0 / 7.0)
KERNELS = {k.name: k for k in (EPANECHNIKOV, TRIANGULAR, QUARTIC)}


def kde_eval(e, kernel, h, x):
    """Kernel density estimate ``(1/(N h)) sum K((x - a_i)/h)`` at ``x``.

    No boundary correction is applied, so the estimate is biased within ``h``
    of the ends of the support.
    """
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    pts = e.points if isinstance(e, Ecdf) else np.asarray(e, dtype=float)
    xs = np.asarray(x, dtype=float)
    flat = xs.ravel()
    out = np.empty(flat.size)
    # chunk so the (chunk, N) kernel matrix stays small
    step = max(1, 2_000_000 // max(pts.size, 1))
    for s in range(0, flat.size, step):
        u = (flat[s:s + step, None] - pts[None, :]) / h
        out[s:s + step] = kernel(u).sum(axis=1)
    out /= pts.size * h
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def bandwidth_rule(N, c=1.0):
    """Bandwidth ``c N^(-1/5)``."""
    if N < 1 or not c > 0:
        raise ValueError("need N >= 1 and c > 0")
    return c * N ** (-0.2)


# ---------------------------------------------------------------------------
# CSV


def write_coeffs_csv(e, path):
    """Write ``series,a_hat`` rows in series order (1-based series labels)."""
    with open(Path(path), "w", newline="\n") as fh:
        fh.write("series,a_hat\n")
        for i, v in enumerate(e.by_series()):
            fh.write(f"{i + 1},{v:.17g}\n")
    return path


def read_coeffs_csv(path):
    with open(Path(path)) as fh:
        header = fh.readline().strip()
        if header != "series,a_hat":
            raise ValueError(f"{path}: expected header 'series,a_hat', got {header!r}")
        labels, vals = [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            s, v = line.split(",")
            labels.append(int(s) - 1)
            vals.append(float(v))
    return Ecdf(np.array(vals), index=np.array(labels, dtype=int))


def write_kde_csv(grid, values, path):
    with open(Path(path), "w", newline="\n") as fh:
        fh.write("x,g_hat\n")
        for x, g in zip(grid, values):
            fh.write(f"{x:.17g},{g:.17g}\n")
    return path

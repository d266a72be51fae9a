"""Simulation of random-coefficient AR(1) panels.

Each series follows ``X_i(t) = a_i X_i(t-1) + b eta(t) + c xi_i(t)`` with
``c = sqrt(1 - b^2)``, a random coefficient ``a_i`` drawn from a
:class:`CoeffDist`, a common shock stream ``eta`` shared by the whole panel and
idiosyncratic streams ``xi_i``.

Random streams
--------------
All randomness is derived from ``numpy.random.SeedSequence(seed)`` through
explicit spawn keys, so a series never depends on how many other series were
generated before it:

* common stream ``eta``: spawn key ``(panel_id, 0)``
* series ``i`` (its coefficient, then ``xi_i``): spawn key ``(panel_id, 1, i)``

Every stream drives a ``PCG64`` bit generator.
"""
from dataclasses import dataclass, field
import math
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate, signal

from .errors import ConfigurationError, DomainError, IntegrabilityError
from .special_fn import BetaParams, beta_cdf, log_beta

COMMON_STREAM = 0
SERIES_STREAM = 1


# ---------------------------------------------------------------------------
# coefficient laws


@dataclass(frozen=True)
class BetaOn01:
    """Beta(alpha, beta) law on (0, 1)."""

    params: BetaParams

    def sample(self, rng, size=None):
        return rng.beta(self.params.alpha, self.params.beta, size=size)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return beta_cdf(x, self.params)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.params.alpha, self.params.beta
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        val = np.exp((a - 1) * np.log(xs) + (b - 1) * np.log1p(-xs) - log_beta(a, b))
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class SqrtBeta:
    """Law of ``sqrt(U)`` with ``U ~ Beta(alpha, beta)``.

    Its density on (0, 1) is ``2/B(alpha, beta) x^(2 alpha - 1) (1 - x^2)^(beta - 1)``
    (substitute ``u = x^2`` in the Beta density), so the CDF is
    ``I_{x^2}(alpha, beta)``. Requires ``alpha, beta > 1``.
    """

    params: BetaParams

    def __post_init__(self):
        self.params.require_above_one()

    def sample(self, rng, size=None):
        return np.sqrt(rng.beta(self.params.alpha, self.params.beta, size=size))

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return beta_cdf(x * x, self.params)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.params.alpha, self.params.beta
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        val = 2.0 * np.exp((2 * a - 1) * np.log(xs) + (b - 1) * np.log1p(-xs * xs) - log_beta(a, b))
        return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class PointMass:
    """Degenerate law at ``a0``."""

    a0: float

    def __post_init__(self):
        if not -1.0 < self.a0 < 1.0:
            raise DomainError("PointMass.a0 must lie in (-1, 1)")

    def sample(self, rng, size=None):
        if size is None:
            return float(self.a0)
        return np.full(size, float(self.a0))

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.a0, 1.0, 0.0)


@dataclass(frozen=True)
class Uniform:
    """Uniform law on ``[lo, hi]`` with ``-1 < lo < hi < 1``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not -1.0 < self.lo < self.hi < 1.0:
            raise DomainError("Uniform needs -1 < lo < hi < 1")

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)


CoeffDist = Union[BetaOn01, SqrtBeta, PointMass, Uniform]


def sample_coeff(dist, rng):
    """Draw one coefficient from ``dist`` using generator ``rng``."""
    return float(dist.sample(rng))


# ---------------------------------------------------------------------------
# innovation laws


@dataclass(frozen=True)
class StandardNormal:
    def sample(self, rng, size):
        return rng.standard_normal(size)


@dataclass(frozen=True)
class StudentT:
    """Student-t with ``df > 4`` degrees of freedom, rescaled to unit variance."""

    df: float

    def __post_init__(self):
        if not self.df > 4:
            raise DomainError("StudentT needs df > 4 for finite fourth moments")

    def sample(self, rng, size):
        return rng.standard_t(self.df, size) / math.sqrt(self.df / (self.df - 2.0))


InnovDist = Union[StandardNormal, StudentT]


# ---------------------------------------------------------------------------
# panel


@dataclass(frozen=True)
class PanelConfig:
    N: int
    n: int
    coeff: CoeffDist
    shock_b: float = 0.0
    innov: InnovDist = field(default_factory=StandardNormal)
    burnin_eps: float = 1e-9
    burnin_cap: int = 100_000
    seed: int = 0
    panel_id: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigurationError("N must be a positive integer")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError("n must be a positive integer")
        if not 0.0 <= self.shock_b <= 1.0:
            raise ConfigurationError("shock_b must lie in [0, 1]")
        if not 0.0 < self.burnin_eps < 1.0:
            raise ConfigurationError("burnin_eps must lie in (0, 1)")
        if self.burnin_cap < 1:
            raise ConfigurationError("burnin_cap must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.panel_id < 0:
            raise ConfigurationError("panel_id must be nonnegative")

    @property
    def shock_c(self):
        return math.sqrt(1.0 - self.shock_b * self.shock_b)

    def to_metadata(self):
        """Flatten to ``key=value`` pairs (the sidecar format)."""
        meta = {
            "N": self.N,
            "n": self.n,
            "coeff": _dist_to_str(self.coeff),
            "shock_b": repr(float(self.shock_b)),
            "innov": "normal" if isinstance(self.innov, StandardNormal) else f"t:{self.innov.df!r}",
            "burnin_eps": repr(float(self.burnin_eps)),
            "burnin_cap": self.burnin_cap,
            "seed": self.seed,
            "panel_id": self.panel_id,
        }
        return {k: str(v) for k, v in meta.items()}

    @classmethod
    def from_metadata(cls, meta):
        innov = meta.get("innov", "normal")
        return cls(
            N=int(meta["N"]),
            n=int(meta["n"]),
            coeff=parse_coeff_dist(meta["coeff"]),
            shock_b=float(meta.get("shock_b", 0.0)),
            innov=StandardNormal() if innov == "normal" else StudentT(float(innov.split(":", 1)[1])),
            burnin_eps=float(meta.get("burnin_eps", 1e-9)),
            burnin_cap=int(meta.get("burnin_cap", 100_000)),
            seed=int(meta.get("seed", 0)),
            panel_id=int(meta.get("panel_id", 0)),
        )


def _dist_to_str(dist):
    if isinstance(dist, BetaOn01):
        return f"beta:{dist.params.alpha!r},{dist.params.beta!r}"
    if isinstance(dist, SqrtBeta):
        return f"sqrtbeta:{dist.params.alpha!r},{dist.params.beta!r}"
    if isinstance(dist, PointMass):
        return f"point:{dist.a0!r}"
    if isinstance(dist, Uniform):
        return f"uniform:{dist.lo!r},{dist.hi!r}"
    raise TypeError(f"unknown coefficient law {dist!r}")


def parse_coeff_dist(text):
    """Parse ``beta:A,B``, ``sqrtbeta:A,B``, ``point:A`` or ``uniform:LO,HI``."""
    kind, _, rest = text.strip().partition(":")
    try:
        vals = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ConfigurationError(f"bad coefficient law {text!r}") from exc
    kind = kind.lower()
    if kind == "beta" and len(vals) == 2:
        return BetaOn01(BetaParams(*vals))
    if kind == "sqrtbeta" and len(vals) == 2:
        return SqrtBeta(BetaParams(*vals))
    if kind == "point" and len(vals) == 1:
        return PointMass(vals[0])
    if kind == "uniform" and len(vals) == 2:
        return Uniform(*vals)
    raise ConfigurationError(f"bad coefficient law {text!r}")


@dataclass(frozen=True, eq=False)
class Panel:
    """An ``N x n`` panel; row ``i`` is series ``X_i(1..n)``.

    ``coeffs`` holds the true coefficients when the panel was simulated, and is
    ``None`` for ingested data.
    """

    data: np.ndarray
    coeffs: np.ndarray = None
    config: PanelConfig = None
    warnings: tuple = ()

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2:
            raise ConfigurationError("panel data must be two-dimensional")
        if not np.all(np.isfinite(data)):
            raise ConfigurationError("panel data must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if self.coeffs is not None:
            coeffs = np.array(self.coeffs, dtype=float)
            coeffs.setflags(write=False)
            object.__setattr__(self, "coeffs", coeffs)

    @property
    def N(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]


def _stream(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def burnin_length(coeffs, eps=1e-9, cap=100_000):
    """Shared burn-in: ``min(cap, max_i ceil(ln eps / ln |a_i|))``."""
    amax = float(np.max(np.abs(coeffs))) if len(coeffs) else 0.0
    if amax == 0.0:
        return 0, False
    need = math.ceil(math.log(eps) / math.log(amax))
    if need <= cap:
        return need, False
    # remaining weight of the X = 0 start after the capped burn-in
    return cap, amax**cap > math.sqrt(eps)


def simulate_panel(config):
    """Simulate a stationary RCAR(1) panel.

    Series start from ``X_i(-M) = 0`` with a burn-in ``M`` shared across the panel,
    so the common shock stream has a single time origin; the first ``M`` values are
    discarded. Output is bit-identical for identical ``config``.
    """
    N, n = config.N, config.n
    b, c = config.shock_b, config.shock_c
    gens = [_stream(config.seed, config.panel_id, SERIES_STREAM, i) for i in range(N)]
    coeffs = np.array([sample_coeff(config.coeff, g) for g in gens])
    M, capped = burnin_length(coeffs, config.burnin_eps, config.burnin_cap)
    length = M + n
    warnings = ()
    if capped:
        warnings = (
            f"burn-in capped at {M} steps; max |a_i| = {np.max(np.abs(coeffs)):.17g} "
            f"leaves initial-condition weight above sqrt(burnin_eps)",
        )

    common = None
    if b > 0.0:
        common = b * config.innov.sample(_stream(config.seed, config.panel_id, COMMON_STREAM), length)

    data = np.empty((N, n))
    for i, (a, g) in enumerate(zip(coeffs, gens)):
        if c > 0.0:
            shocks = c * config.innov.sample(g, length)
            if common is not None:
                shocks += common
        else:
            shocks = common
        data[i] = signal.lfilter([1.0], [1.0, -a], shocks)[M:]
    return Panel(data=data, coeffs=coeffs, config=config, warnings=warnings)


def theoretical_autocov(dist, lag):
    """Autocovariance ``int x^|lag| / (1 - x^2) dG(x)`` of the stationary solution.

    Unit innovation variance is assumed. Integrable Beta-type laws need
    ``beta > 1``; endpoint singularities are handled by algebraic-weight quadrature.
    """
    lag = abs(int(lag))
    if isinstance(dist, PointMass):
        a = dist.a0
        return a**lag / (1.0 - a * a)
    if isinstance(dist, Uniform):
        val, err = integrate.quad(lambda x: x**lag / (1.0 - x * x), dist.lo, dist.hi, epsabs=0, epsrel=1e-10)
        return _checked(val / (dist.hi - dist.lo), err / (dist.hi - dist.lo))
    if isinstance(dist, (BetaOn01, SqrtBeta)):
        a, b = dist.params.alpha, dist.params.beta
        if not b > 1.0:
            raise IntegrabilityError("E 1/(1 - |a|) is infinite for beta <= 1")
        lb = float(log_beta(a, b))
        if isinstance(dist, BetaOn01):
            # x^lag x^(a-1) (1-x)^(b-1) / ((1-x)(1+x)) / B
            wvar = (a - 1.0, b - 2.0)
            f = lambda x: x**lag / (1.0 + x)
            scale = math.exp(-lb)
        else:
            # x^lag 2 x^(2a-1) (1-x^2)^(b-1) / (1-x^2) / B
            wvar = (2.0 * a - 1.0 + lag, b - 2.0)
            f = lambda x: (1.0 + x) ** (b - 2.0)
            scale = 2.0 * math.exp(-lb)
        val, err = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=wvar, epsabs=0, epsrel=1e-10, limit=200)
        return _checked(scale * val, scale * err)
    raise TypeError(f"unknown coefficient law {dist!r}")


def _checked(val, err):
    if not np.isfinite(val) or err > 1e-6 * abs(val):
        raise IntegrabilityError(f"autocovariance quadrature did not converge (value {val}, error {err})")
    return val


# ---------------------------------------------------------------------------
# CSV


def write_panel_csv(panel, path, metadata=True):
    """Write ``t,x_1,...,x_N`` (one row per time index) and a ``.meta`` sidecar."""
    path = Path(path)
    N, n = panel.data.shape
    header = "t," + ",".join(f"x_{i + 1}" for i in range(N))
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for t in range(n):
            fh.write(str(t + 1) + "," + ",".join(f"{v:.17g}" for v in panel.data[:, t]) + "\n")
    if metadata and panel.config is not None:
        write_metadata(panel.config.to_metadata(), sidecar_path(path))
    return path


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_metadata(meta, path):
    with open(path, "w", newline="\n") as fh:
        for k, v in meta.items():
            fh.write(f"{k}={v}\n")


def read_metadata(path):
    meta = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigurationError(f"malformed metadata line {line!r}")
            meta[key.strip()] = value.strip()
    return meta


def read_panel_csv(path):
    """Read a panel written by :func:`write_panel_csv` (sidecar optional)."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if not header or header[0] != "t" or any(not h.startswith("x_") for h in header[1:]):
        raise ConfigurationError(f"{path}: expected header t,x_1,...,x_N")
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    config = None
    side = sidecar_path(path)
    if side.exists():
        config = PanelConfig.from_metadata(read_metadata(side))
    return Panel(data=raw[:, 1:].T, config=config)

"""Monte Carlo size/power study of the T1 and T2 tests.

For every alternative ``theta`` and replication, a panel with sqrt-Beta(theta)
coefficients is simulated, its coefficients are estimated, and both tests of
``H0: theta = theta0`` are run. Results are written as

* ``rows.csv``     -- ``beta_alt,rep,t1,p1,t2,p2`` (one row per panel)
* ``summary.csv``  -- ``beta_alt,level,size_or_power_t1,size_or_power_t2,reps_ok,reps_failed``
* ``pvalue_ecdf.csv`` -- ``beta_alt,statistic,p_value,ecdf`` step data of the
  p-value distributions

Every (alternative, replication) cell gets its own seed from
:func:`cell_seed`, so results do not depend on the number of workers.

Config files hold ``key = value`` lines; ``alt`` and ``level`` may repeat::

    reps = 500
    N = 250
    n = 817
    alpha0 = 2
    beta0 = 1.4
    alt = 2,1.4
    alt = 2,1.6
    shock_b = 0
    kappa = 0.0175
    mc_reps = 1000
    level = 0.05
    level = 0.10
    seed = 20240101
    out_dir = results/null_cell

``kappa`` may be omitted (then ``1/(2 sqrt(n))``). Two optional keys tune the
simulator's burn-in: ``burnin_eps`` and ``burnin_cap``.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math
import os
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, RcarError
from .estimators import estimate_coeffs
from .gof import Simple, default_kappa, t1_simple, t2_parametric
from .rcar_sim import PanelConfig, SqrtBeta, simulate_panel
from .special_fn import BetaParams

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
FULL_REPS = 5000

ROWS_HEADER = "beta_alt,rep,t1,p1,t2,p2"
SUMMARY_HEADER = "beta_alt,level,size_or_power_t1,size_or_power_t2,reps_ok,reps_failed"
ECDF_HEADER = "beta_alt,statistic,p_value,ecdf"


def splitmix64(x):
    """One step of the SplitMix64 output function (Steele, Lea & Flood)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def cell_seed(seed, alt_index, rep):
    """64-bit seed for one study cell: nested SplitMix64 over (seed, alt, rep)."""
    return splitmix64(splitmix64(splitmix64(seed & MASK64) ^ alt_index) ^ rep)


@dataclass(frozen=True)
class StudyConfig:
    reps: int = 500
    N: int = 250
    n: int = 817
    theta0: BetaParams = BetaParams(2.0, 1.4)
    alternatives: tuple = (BetaParams(2.0, 1.4),)
    shock_b: float = 0.0
    kappa: float = None
    mc_reps: int = 1000
    levels: tuple = (0.05, 0.10)
    seed: int = 0
    out_dir: str = None
    burnin_eps: float = 1e-9
    burnin_cap: int = 100_000

    def __post_init__(self):
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigurationError("reps must be a positive integer")
        if self.N < 1 or self.n < 3:
            raise ConfigurationError("need N >= 1 and n >= 3")
        if not self.alternatives:
            raise ConfigurationError("at least one alternative is required")
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels or any(not 0 < lv < 1 for lv in self.levels):
            raise ConfigurationError("levels must lie in (0, 1)")
        if list(self.levels) != sorted(self.levels):
            raise ConfigurationError("levels must be sorted ascending")
        if not 0.0 <= self.shock_b <= 1.0:
            raise ConfigurationError("shock_b must lie in [0, 1]")
        if self.mc_reps < 1:
            raise ConfigurationError("mc_reps must be positive")
        if not 0 <= self.seed <= MASK64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        self.theta0.require_above_one()
        for alt in self.alternatives:
            alt.require_above_one()

    @property
    def effective_kappa(self):
        return default_kappa(self.n) if self.kappa is None else self.kappa


@dataclass(frozen=True)
class StudyRow:
    beta_alt: float
    rep: int
    t1: float = None
    p1: float = None
    t2: float = None
    p2: float = None
    error: str = field(default=None, compare=False)

    @property
    def ok(self):
        return None not in (self.t1, self.p1, self.t2, self.p2)

    def to_csv(self):
        def fmt(v):
            return "" if v is None else f"{v:.17g}"

        return ",".join([fmt(self.beta_alt), str(self.rep), fmt(self.t1), fmt(self.p1), fmt(self.t2), fmt(self.p2)])


@dataclass
class StudyResult:
    config: StudyConfig
    rows: list
    summary: list

    def rejection_rate(self, beta_alt, level, which="t1"):
        for s in self.summary:
            if s["beta_alt"] == beta_alt and s["level"] == level:
                return s["size_or_power_" + which]
        raise KeyError((beta_alt, level))


# ---------------------------------------------------------------------------
# config files


_KEYS = {"reps", "N", "n", "alpha0", "beta0", "alt", "shock_b", "kappa", "mc_reps", "level", "seed", "out_dir",
         "burnin_eps", "burnin_cap"}


def parse_study_config(text):
    """Parse the ``key = value`` study format (see module docstring)."""
    single = {}
    alts, levels = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _KEYS:
            raise ConfigurationError(f"line {lineno}: unrecognized entry {raw!r}")
        try:
            if key == "alt":
                a, b = (float(v) for v in value.split(","))
                alts.append(BetaParams(a, b))
            elif key == "level":
                levels.append(float(value))
            else:
                if key in single:
                    raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
                single[key] = value
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    kw = {}
    try:
        for key in ("reps", "N", "n", "mc_reps", "seed", "burnin_cap"):
            if key in single:
                kw[key] = int(single[key])
        for key in ("shock_b", "kappa", "burnin_eps"):
            if key in single:
                kw[key] = float(single[key])
    except ValueError as exc:
        raise ConfigurationError(f"bad numeric value: {exc}") from exc
    if "alpha0" in single or "beta0" in single:
        kw["theta0"] = BetaParams(float(single.get("alpha0", 2.0)), float(single.get("beta0", 1.4)))
    if alts:
        kw["alternatives"] = tuple(alts)
    if levels:
        kw["levels"] = tuple(levels)
    if "out_dir" in single:
        kw["out_dir"] = single["out_dir"]
    return StudyConfig(**kw)


def read_study_config(path):
    return parse_study_config(Path(path).read_text())


def format_study_config(cfg):
    lines = [
        f"reps = {cfg.reps}",
        f"N = {cfg.N}",
        f"n = {cfg.n}",
        f"alpha0 = {cfg.theta0.alpha!r}",
        f"beta0 = {cfg.theta0.beta!r}",
    ]
    lines += [f"alt = {a.alpha!r},{a.beta!r}" for a in cfg.alternatives]
    lines += [f"shock_b = {cfg.shock_b!r}"]
    if cfg.kappa is not None:
        lines.append(f"kappa = {cfg.kappa!r}")
    lines += [f"mc_reps = {cfg.mc_reps}"]
    lines += [f"level = {lv!r}" for lv in cfg.levels]
    lines += [f"seed = {cfg.seed}", f"burnin_eps = {cfg.burnin_eps!r}", f"burnin_cap = {cfg.burnin_cap}"]
    if cfg.out_dir is not None:
        lines.append(f"out_dir = {cfg.out_dir}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# running


def cell_panel_config(cfg, alt_index, rep):
    """The panel simulated for one (alternative, rep) cell."""
    return PanelConfig(
        N=cfg.N,
        n=cfg.n,
        coeff=SqrtBeta(cfg.alternatives[alt_index]),
        shock_b=cfg.shock_b,
        burnin_eps=cfg.burnin_eps,
        burnin_cap=cfg.burnin_cap,
        seed=cell_seed(cfg.seed, alt_index, rep),
    )


def run_cell(cfg, alt_index, rep):
    """Simulate and test one panel; errors are captured in the returned row."""
    alt = cfg.alternatives[alt_index]
    t1 = p1 = t2 = p2 = None
    errors = []
    try:
        e = estimate_coeffs(simulate_panel(cell_panel_config(cfg, alt_index, rep)))
    except RcarError as exc:
        return StudyRow(alt.beta, rep, error=f"{type(exc).__name__}: {exc}")
    try:
        r1 = t1_simple(e, Simple(SqrtBeta(cfg.theta0)), cfg.levels[0])
        t1, p1 = r1.statistic, r1.p_value
    except RcarError as exc:
        errors.append(f"T1 {type(exc).__name__}: {exc}")
    try:
        r2 = t2_parametric(e, cfg.theta0, cfg.effective_kappa, cfg.levels[0])
        t2, p2 = r2.statistic, r2.p_value
    except RcarError as exc:
        errors.append(f"T2 {type(exc).__name__}: {exc}")
    return StudyRow(alt.beta, rep, t1, p1, t2, p2, error="; ".join(errors) or None)


def _run_chunk(args):
    cfg, cells = args
    return [run_cell(cfg, a, r) for a, r in cells]


def resolve_workers(workers=None):
    if workers is None:
        env = os.environ.get("RCAR_WORKERS")
        if env:
            try:
                workers = int(env)
            except ValueError as exc:
                raise ConfigurationError(f"RCAR_WORKERS must be an integer, got {env!r}") from exc
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigurationError("worker count must be positive")
    return workers


def run_study(cfg, workers=None, write=True):
    """Run every (alternative, rep) cell and summarize rejection rates.

    Rows come back in (alternative, rep) order whatever the worker count.
    Files are written to ``cfg.out_dir`` when ``write`` is true and the
    directory is set.
    """
    workers = resolve_workers(workers)
    cells = [(a, r) for a in range(len(cfg.alternatives)) for r in range(cfg.reps)]
    if workers == 1:
        rows = [run_cell(cfg, a, r) for a, r in cells]
    else:
        size = max(1, math.ceil(len(cells) / (workers * 8)))
        chunks = [(cfg, cells[i:i + size]) for i in range(0, len(cells), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_run_chunk, chunks) for row in part]
    failed = [r for r in rows if not r.ok]
    for r in failed:
        log.warning("beta_alt=%s rep=%d failed: %s", r.beta_alt, r.rep, r.error)
    result = StudyResult(cfg, rows, summarize(rows, cfg))
    if write and cfg.out_dir is not None:
        write_study(result, cfg.out_dir)
    return result


def summarize(rows, cfg):
    """Rejection rates per (alternative, level).

    Each statistic's rate is taken over the reps where that statistic was
    computed; ``reps_failed`` counts reps where either statistic failed.
    """

    def rate(ps, lv):
        return float(np.mean(ps < lv)) if ps.size else float("nan")

    out = []
    for alt in cfg.alternatives:
        mine = [r for r in rows if r.beta_alt == alt.beta]
        p1 = np.array([r.p1 for r in mine if r.p1 is not None])
        p2 = np.array([r.p2 for r in mine if r.p2 is not None])
        n_ok = sum(r.ok for r in mine)
        for lv in cfg.levels:
            out.append({
                "beta_alt": alt.beta,
                "level": lv,
                "size_or_power_t1": rate(p1, lv),
                "size_or_power_t2": rate(p2, lv),
                "reps_ok": n_ok,
                "reps_failed": len(mine) - n_ok,
            })
    return out


def pvalue_ecdf(rows, which="t1"):
    """Step points ``(p, F(p))`` of the empirical CDF of the p-values.

    Failed rows are skipped; tied p-values share one step.
    """
    attr = {"t1": "p1", "T1": "p1", "t2": "p2", "T2": "p2"}[which]
    ps = np.array([getattr(r, attr) for r in rows if getattr(r, attr) is not None])
    if ps.size == 0:
        raise ConfigurationError("no p-values to summarize")
    vals, counts = np.unique(ps, return_counts=True)
    heights = np.cumsum(counts) / ps.size
    return list(zip(vals.tolist(), heights.tolist()))


def write_study(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "rows.csv", "w", newline="\n") as fh:
        fh.write(ROWS_HEADER + "\n")
        for r in result.rows:
            fh.write(r.to_csv() + "\n")
    with open(out / "summary.csv", "w", newline="\n") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for s in result.summary:
            fh.write(
                f"{s['beta_alt']:.17g},{s['level']:.17g},{s['size_or_power_t1']:.17g},"
                f"{s['size_or_power_t2']:.17g},{s['reps_ok']},{s['reps_failed']}\n"
            )
    with open(out / "pvalue_ecdf.csv", "w", newline="\n") as fh:
        fh.write(ECDF_HEADER + "\n")
        for alt in result.config.alternatives:
            mine = [r for r in result.rows if r.beta_alt == alt.beta]
            for which in ("t1", "t2"):
                try:
                    curve = pvalue_ecdf(mine, which)
                except ConfigurationError:
                    continue
                for p, h in curve:
                    fh.write(f"{alt.beta:.17g},{which.upper()},{p:.17g},{h:.17g}\n")
    return out


def full_preset(cfg):
    """The full-scale variant of ``cfg`` (5000 replications per cell)."""
    return replace(cfg, reps=FULL_REPS)

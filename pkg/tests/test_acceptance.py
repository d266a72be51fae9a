"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte Carlo criteria run the desk-scale study (3 cells x 500 panels of
250 series of length 817). Expect several minutes on a single core; set
RCAR_WORKERS to use more.
"""
import math
from dataclasses import replace
from pathlib import Path

import mpmath
import numpy as np
import pytest
from scipy import integrate, stats

from rcarpanel.estimators import EPANECHNIKOV, KERNELS, Ecdf, beta_mom, estimate_coeffs, kde_eval
from rcarpanel.gof import default_kappa, t1_composite, t2_parametric
from rcarpanel.rcar_sim import PanelConfig, PointMass, simulate_panel
from rcarpanel.special_fn import BetaParams, beta_cdf, kolmogorov_cdf, log_gamma, trigamma
from rcarpanel.study import StudyConfig, cell_panel_config, pvalue_ecdf, run_study

pytestmark = pytest.mark.slow

THETA0 = BetaParams(2.0, 1.4)
SEED = 20240101
DESK = StudyConfig(
    reps=500,
    N=250,
    n=817,
    theta0=THETA0,
    alternatives=(THETA0, BetaParams(2.0, 1.6), BetaParams(2.0, 1.2)),
    shock_b=0.0,
    levels=(0.05, 0.10),
    seed=SEED,
)
ARTIFACTS = ("rows.csv", "summary.csv", "pvalue_ecdf.csv")


def within(x, target, tol):
    return abs(x - target) <= tol


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    out = tmp_path_factory.mktemp("desk")
    return run_study(replace(DESK, out_dir=str(out)), workers=1), out


# -- 1. null size of T1 --------------------------------------------------------


def test_c01_t1_size(desk, report):
    res, _ = desk
    s5 = res.rejection_rate(1.4, 0.05, "t1")
    s10 = res.rejection_rate(1.4, 0.10, "t1")
    ok = within(s5, 0.049, 0.03) and within(s10, 0.103, 0.03)
    report("criterion 1 (T1 size)", ok, f"size@5%={s5:.3f} (0.049+-0.03), size@10%={s10:.3f} (0.103+-0.03)")
    assert ok


def test_c01_null_pvalue_curve_band(desk, report):
    res, _ = desk
    null_rows = [r for r in res.rows if r.beta_alt == 1.4]
    curve = np.array(pvalue_ecdf(null_rows, "t1"))
    p, h = curve[:, 0], curve[:, 1]
    below = np.concatenate([[0.0], h[:-1]])
    dev = float(max(np.max(np.abs(h - p)), np.max(np.abs(below - p))))
    report("criterion 1 extra (null p-value ECDF band)", dev < 0.06, f"max deviation={dev:.4f} (< 0.06)")
    assert dev < 0.06


# -- 2. power of T1 ------------------------------------------------------------


def test_c02_t1_power(desk, report):
    res, _ = desk
    p16 = res.rejection_rate(1.6, 0.05, "t1")
    p12 = res.rejection_rate(1.2, 0.05, "t1")
    ok = within(p16, 0.576, 0.05) and within(p12, 0.532, 0.05)
    report("criterion 2 (T1 power)", ok, f"beta=1.6: {p16:.3f} (0.576+-0.05), beta=1.2: {p12:.3f} (0.532+-0.05)")
    assert ok


# -- 3. null size of T2, with the kappa sweep ------------------------------------


def test_c03_t2_size(desk, report):
    res, _ = desk
    s_default = res.rejection_rate(1.4, 0.05, "t2")
    detail = f"default kappa={default_kappa(DESK.n):.4f}: size@5%={s_default:.3f} (0.077+-0.05)"
    ok = within(s_default, 0.077, 0.05)
    if not ok:
        kappas = [0.005, 0.01, 0.02, default_kappa(DESK.n)]
        rejections = {k: [] for k in kappas}
        for rep in range(DESK.reps):
            e = estimate_coeffs(simulate_panel(cell_panel_config(DESK, 0, rep)))
            for k in kappas:
                try:
                    rejections[k].append(t2_parametric(e, THETA0, k, 0.05).p_value < 0.05)
                except Exception:
                    pass
        sweep = {k: float(np.mean(v)) for k, v in rejections.items()}
        ok = any(within(v, 0.077, 0.05) for v in sweep.values())
        detail += "; sweep " + ", ".join(f"kappa={k:.4f}: {v:.3f}" for k, v in sweep.items())
    report("criterion 3 (T2 size)", ok, detail)
    assert ok


# -- 4. common-shock effect ------------------------------------------------------


def test_c04_common_shock(desk, report):
    res, _ = desk
    reps = 300
    cfg = replace(DESK, reps=reps, alternatives=(THETA0,), shock_b=1.0, seed=SEED + 1, out_dir=None)
    shocked = run_study(cfg, write=False)
    p_b1 = np.array([r.p1 for r in shocked.rows if r.p1 is not None])
    p_b0 = np.array([r.p1 for r in res.rows if r.beta_alt == 1.4 and r.p1 is not None])
    x1, n1 = int(np.sum(p_b1 < 0.05)), p_b1.size
    x0, n0 = int(np.sum(p_b0 < 0.05)), p_b0.size
    pooled = (x1 + x0) / (n1 + n0)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n0))
    z = (x1 / n1 - x0 / n0) / se if se > 0 else math.inf
    pval = float(stats.norm.sf(z))
    ok = n1 >= 300 and x1 / n1 > x0 / n0 and pval < 0.01
    report("criterion 4 (common shock)", ok,
           f"size b=1: {x1 / n1:.3f} (n={n1}), b=0: {x0 / n0:.3f} (n={n0}), one-sided p={pval:.2e}")
    assert ok


# -- 5. estimator rate --------------------------------------------------------------


def test_c05_estimator_rate(report):
    ratios = {}
    for a0 in (0.0, 0.5, 0.9):
        rmse = []
        for n in (200, 800, 3200):
            p = simulate_panel(PanelConfig(N=500, n=n, coeff=PointMass(a0), seed=7, panel_id=n))
            e = estimate_coeffs(p)
            rmse.append(math.sqrt(np.mean((e.points - a0) ** 2)))
        ratios[a0] = (rmse[0] / rmse[1], rmse[1] / rmse[2])
    ok = all(r >= 1.6 for pair in ratios.values() for r in pair)
    detail = ", ".join(f"a0={a}: {r1:.2f}, {r2:.2f}" for a, (r1, r2) in ratios.items())
    report("criterion 5 (RMSE ratio >= 1.6)", ok, detail)
    assert ok


# -- 6. special functions ---------------------------------------------------------


def _trigamma_series(x, terms):
    k = np.arange(terms, dtype=float)
    out = np.empty_like(x)
    for i, v in enumerate(x):
        z = v + terms
        out[i] = np.sum(1.0 / (v + k[::-1]) ** 2) + 1 / z + 1 / (2 * z**2) + 1 / (6 * z**3)
    return out


def _kolmogorov_series(y, terms):
    k = np.arange(1, terms + 1, dtype=float)
    return 1.0 - 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * np.outer(y * y, k * k)), axis=1)


def test_c06_special_functions(report):
    grid = 1000
    errs = {}
    with mpmath.workdps(30):
        x = np.linspace(0.5, 100.0, grid)
        oracle = np.array([float(mpmath.loggamma(mpmath.mpf(v))) for v in x])
        errs["log_gamma"] = (float(np.max(np.abs(log_gamma(x) - oracle))), 1e-12)

        u = np.linspace(0.0005, 0.9995, grid)
        params = [(2.0, 1.4), (0.5, 0.5), (1.1, 5.0), (30.0, 2.5)]
        worst = 0.0
        for a, b in params:
            oracle = np.array([float(mpmath.betainc(a, b, 0, mpmath.mpf(v), regularized=True)) for v in u])
            worst = max(worst, float(np.max(np.abs(beta_cdf(u, BetaParams(a, b)) - oracle))))
        errs["beta_cdf"] = (worst, 1e-10)

    # direct series over 20,000 terms plus an Euler-Maclaurin tail
    x = np.linspace(0.1, 50.0, grid)
    errs["trigamma"] = (float(np.max(np.abs(trigamma(x) - _trigamma_series(x, 20_000)))), 1e-10)

    y = np.linspace(0.05, 3.0, grid)
    # a term drops below 1e-14 after ceil(sqrt(-ln 1e-14 / 2) / y) terms; take ten times that
    budget = 10 * (int(math.ceil(math.sqrt(-math.log(1e-14) / 2) / y.min())) + 1)
    errs["kolmogorov_cdf"] = (float(np.max(np.abs(kolmogorov_cdf(y) - _kolmogorov_series(y, budget)))), 1e-12)

    ok = all(err <= tol for err, tol in errs.values())
    report("criterion 6 (special functions)", ok,
           ", ".join(f"{name} max err {err:.1e} (<= {tol:.0e})" for name, (err, tol) in errs.items()))
    assert ok


# -- 7. method of moments -------------------------------------------------------------


def test_c07_beta_mom_round_trip(report):
    grid = [1.1, 1.4, 2.0, 3.0, 5.0]
    worst = 0.0
    for a in grid:
        for b in grid:
            m1 = a / (a + b)
            m2 = a * (a + 1) / ((a + b) * (a + b + 1))
            fit = beta_mom(m1, m2)
            worst = max(worst, abs(fit.alpha - a), abs(fit.beta - b))
    ok = worst <= 1e-10
    report("criterion 7 (beta_mom round trip)", ok, f"max abs error {worst:.1e} over 25 grid points (<= 1e-10)")
    assert ok


# -- 8. KDE normalization -----------------------------------------------------------------


def test_c08_kde(report):
    rng = np.random.default_rng(8)
    worst = 0.0
    for kernel in KERNELS.values():
        for _ in range(5):
            e = Ecdf(rng.uniform(-1, 1, rng.integers(5, 200)))
            h = rng.uniform(0.02, 0.5)
            x = np.linspace(e.points[0] - h, e.points[-1] + h, 200_001)
            mass = np.trapezoid(kde_eval(e, kernel, h, x), x)
            worst = max(worst, abs(mass - 1.0))
    kw = dict(epsabs=1e-13, epsrel=1e-13)
    l2 = integrate.quad(lambda v: EPANECHNIKOV(v) ** 2, -1, 1, **kw)[0]
    mu2 = integrate.quad(lambda v: v * v * EPANECHNIKOV(v), -1, 1, **kw)[0]
    ok = worst <= 1e-6 and abs(l2 - 0.6) <= 1e-10 and abs(mu2 - 0.2) <= 1e-10
    report("criterion 8 (KDE)", ok,
           f"max |mass - 1| {worst:.1e} over {3 * 5} fits; ||K||^2 err {abs(l2 - 0.6):.1e}, mu2 err {abs(mu2 - 0.2):.1e}")
    assert ok


# -- 9. composite test calibration --------------------------------------------------------------


def test_c09_composite_calibration(report):
    outer = 200
    rejects = 0
    for r in range(outer):
        rng = np.random.default_rng([9, r])
        e = Ecdf(rng.beta(2, 2, 250))
        rejects += t1_composite(e, 0.05, mc_reps=1000, rng=np.random.SeedSequence([9, r, 1])).p_value < 0.05
    rate = rejects / outer
    ok = within(rate, 0.05, 0.03)
    report("criterion 9 (composite calibration)", ok, f"rejection rate {rate:.3f} over {outer} reps (0.05+-0.03)")
    assert ok


# -- 10. determinism -----------------------------------------------------------------------------


def test_c10_determinism(desk, tmp_path, report):
    _, first = desk
    again = run_study(replace(DESK, out_dir=str(tmp_path)), workers=2)
    same = {name: (Path(first) / name).read_bytes() == (tmp_path / name).read_bytes() for name in ARTIFACTS}
    ok = all(same.values()) and len(again.rows) == 3 * DESK.reps
    report("criterion 10 (determinism)", ok,
           "second run with 2 workers vs first with 1: " + ", ".join(f"{k} {'identical' if v else 'DIFFERS'}"
                                                                      for k, v in same.items()))
    assert ok

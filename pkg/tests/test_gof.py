import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from rcarpanel.errors import ConfigurationError, EstimationError, SupportError
from rcarpanel.estimators import Ecdf
from rcarpanel.gof import (
    CSV_HEADER,
    Simple,
    beran_mle,
    beta_mle,
    clamp_coeffs,
    composite_null_statistics,
    fisher_matrix,
    ks_sup_distance,
    t1_composite,
    t1_simple,
    t2_parametric,
    t2_statistic,
    upper_quantile,
    write_results_csv,
)
from rcarpanel.rcar_sim import SqrtBeta
from rcarpanel.special_fn import BetaParams


class Unit:
    """Uniform(0, 1) law, only its CDF is needed."""

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def brute_force_ks(points, cdf, grid=100_000):
    pts = np.sort(points)
    x = np.linspace(-0.01, 1.01, grid)
    # approach each jump from both sides as well
    x = np.concatenate([x, pts, np.nextafter(pts, -np.inf)])
    ecdf = np.searchsorted(pts, x, side="right") / pts.size
    return np.max(np.abs(ecdf - cdf(x)))


# -- KS distance -------------------------------------------------------------


def test_ks_examples():
    assert ks_sup_distance(Ecdf([0.25, 0.75]), Unit().cdf) == pytest.approx(0.25, abs=1e-15)
    assert ks_sup_distance(Ecdf([0.5]), Unit().cdf) == pytest.approx(0.5, abs=1e-15)
    N = 40
    mid = (np.arange(1, N + 1) - 0.5) / N
    assert ks_sup_distance(Ecdf(mid), Unit().cdf) == pytest.approx(0.5 / N, abs=1e-15)


def test_ks_against_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(5):
        pts = rng.beta(2, 3, 30)
        d = ks_sup_distance(Ecdf(pts), Unit().cdf)
        assert d == pytest.approx(brute_force_ks(pts, Unit().cdf), abs=1e-12)


def test_ks_ties_merged():
    pts = [0.3, 0.3, 0.3, 0.9]
    d = ks_sup_distance(Ecdf(pts), Unit().cdf)
    assert d == pytest.approx(brute_force_ks(np.array(pts), Unit().cdf), abs=1e-12)
    assert d == pytest.approx(0.45, abs=1e-15)


def test_t1_simple_two_points():
    r = t1_simple(Ecdf([0.25, 0.75]), Simple(Unit()), 0.05)
    assert r.statistic == pytest.approx(0.35355339059327373, abs=1e-12)
    assert r.critical_value == pytest.approx(1.3581, abs=1e-4)
    assert not r.reject


def test_t1_simple_pvalues_uniform_under_null():
    g0 = SqrtBeta(BetaParams(2, 1.4))
    rng = np.random.default_rng(1)
    ps = [t1_simple(Ecdf(g0.sample(rng, 500)), Simple(g0)).p_value for _ in range(500)]
    assert stats.kstest(ps, "uniform").pvalue > 0.01


def test_t1_simple_rejects_wrong_law():
    rng = np.random.default_rng(2)
    e = Ecdf(SqrtBeta(BetaParams(2, 3)).sample(rng, 500))
    r = t1_simple(e, Simple(SqrtBeta(BetaParams(2, 1.4))))
    assert r.reject and r.p_value < 1e-3


def test_level_validation():
    with pytest.raises(ConfigurationError):
        t1_simple(Ecdf([0.5]), Simple(Unit()), 1.5)


# -- composite KS ------------------------------------------------------------


def test_composite_requires_support():
    with pytest.raises(SupportError):
        t1_composite(Ecdf([-0.1, 0.4, 0.5]), mc_reps=100)
    with pytest.raises(ConfigurationError):
        t1_composite(Ecdf([0.2, 0.4, 0.5]), mc_reps=99)


def test_composite_reproducible_and_monotone_in_level():
    e = Ecdf(np.random.default_rng(3).beta(2, 2, 100))
    r5 = t1_composite(e, 0.05, mc_reps=400, rng=7)
    r10 = t1_composite(e, 0.10, mc_reps=400, rng=7)
    assert r5.statistic == r10.statistic and r5.p_value == r10.p_value
    assert r5.critical_value >= r10.critical_value
    assert r5.fitted_theta.alpha > 0 and r5.mc_reps == 400


def test_composite_detects_two_point_law():
    e = Ecdf(np.repeat([0.1, 0.9], 125))
    r = t1_composite(e, mc_reps=200, rng=0)
    assert r.reject and r.p_value == 0.0


def test_composite_null_statistics_stream_independence():
    theta = BetaParams(2, 2)
    a = composite_null_statistics(theta, 50, 100, 11)
    b = composite_null_statistics(theta, 50, 200, 11)
    np.testing.assert_array_equal(a, b[:100])


def test_upper_quantile():
    s = np.arange(1, 101, dtype=float)
    assert upper_quantile(s, 0.05) == 95.0
    assert upper_quantile(s, 0.10) == 90.0
    assert upper_quantile(s[::-1], 0.05) == 95.0


# -- MLE and T2 --------------------------------------------------------------


def test_fisher_matrix_against_mpmath():
    A = fisher_matrix(BetaParams(2, 1.4))
    t2, t14, t34 = (float(mpmath.psi(1, v)) for v in (2, 1.4, 3.4))
    assert t2 == pytest.approx(0.6449340668482264, abs=1e-15)
    assert t14 == pytest.approx(1.0253565905295975, abs=1e-15)
    assert t34 == pytest.approx(0.3415413977858333, abs=1e-15)
    np.testing.assert_allclose(A, [[t2 - t34, -t34], [-t34, t14 - t34]], atol=1e-12)
    assert np.all(np.linalg.eigvalsh(A) > 0)


@pytest.mark.parametrize("a", [1.1, 2.0, 5.0, 20.0])
@pytest.mark.parametrize("b", [1.1, 1.4, 3.0, 50.0])
def test_fisher_matrix_positive_definite(a, b):
    A = fisher_matrix(BetaParams(a, b))
    assert A[0, 1] == A[1, 0]
    assert np.all(np.linalg.eigvalsh(A) > 0)


def test_beta_mle_recovers_parameters():
    u = np.random.default_rng(4).beta(2, 1.4, 50_000)
    fit = beta_mle(u)
    assert fit.alpha == pytest.approx(2, abs=0.05)
    assert fit.beta == pytest.approx(1.4, abs=0.05)


def test_beta_mle_swap_invariance():
    u = np.random.default_rng(5).beta(3, 1.5, 400)
    fit, swapped = beta_mle(u), beta_mle(1 - u)
    assert swapped.alpha == pytest.approx(fit.beta, rel=1e-8)
    assert swapped.beta == pytest.approx(fit.alpha, rel=1e-8)


def test_beta_mle_score_is_zero_at_optimum():
    from rcarpanel.special_fn import digamma

    u = np.random.default_rng(6).beta(2.5, 4, 1000)
    fit = beta_mle(u)
    dab = digamma(fit.alpha + fit.beta)
    assert np.mean(np.log(u)) - digamma(fit.alpha) + dab == pytest.approx(0, abs=1e-9)
    assert np.mean(np.log1p(-u)) - digamma(fit.beta) + dab == pytest.approx(0, abs=1e-9)


def test_beran_mle_consistency():
    a = SqrtBeta(BetaParams(2, 1.4)).sample(np.random.default_rng(7), 20_000)
    fit = beran_mle(Ecdf(a), 0.001)
    assert fit.alpha == pytest.approx(2, abs=0.1)
    assert fit.beta == pytest.approx(1.4, abs=0.1)


def test_beran_mle_degenerate_sample():
    with pytest.raises(EstimationError) as info:
        beran_mle(Ecdf(np.full(20, 0.5)), 0.01)
    assert info.value.last_iterate is not None


def test_beran_mle_small_sample():
    with pytest.raises(ConfigurationError):
        beran_mle(Ecdf([0.3, 0.5]), 0.01)


def test_clamp():
    np.testing.assert_allclose(clamp_coeffs(Ecdf([0.999, -0.2, 0.5]), 0.01), [0.01, 0.5, 0.99])
    with pytest.raises(ConfigurationError):
        clamp_coeffs(Ecdf([0.5]), 0.5)


def test_t2_statistic_zero_at_null():
    th = BetaParams(2, 1.4)
    assert t2_statistic(th, th, 250) == 0.0
    d = np.array([0.1, -0.05])
    expected = 250 * d @ fisher_matrix(th) @ d
    assert t2_statistic(BetaParams(2.1, 1.35), th, 250) == pytest.approx(expected, rel=1e-12)


def test_t2_parametric_result():
    a = SqrtBeta(BetaParams(2, 1.4)).sample(np.random.default_rng(8), 250)
    r = t2_parametric(Ecdf(a), BetaParams(2, 1.4), kappa=0.001, level=0.05)
    assert r.critical_value == pytest.approx(5.991464547107982, abs=1e-12)
    assert r.p_value == pytest.approx(math.exp(-r.statistic / 2), rel=1e-14)
    assert r.fitted_theta is not None


def test_t2_pvalues_uniform_on_true_coefficients():
    rng = np.random.default_rng(9)
    law = SqrtBeta(BetaParams(2, 1.4))
    ps = [t2_parametric(Ecdf(law.sample(rng, 250)), law.params, kappa=1e-6).p_value for _ in range(300)]
    assert stats.kstest(ps, "uniform").pvalue > 0.01


def test_results_csv(tmp_path):
    r = t2_parametric(Ecdf(SqrtBeta(BetaParams(2, 1.4)).sample(np.random.default_rng(1), 100)),
                      BetaParams(2, 1.4), kappa=0.01)
    path = write_results_csv([r], tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == "T2_parametric" and len(fields) == 8 and fields[-1] == ""
    assert float(fields[1]) == r.statistic

# %% [markdown]
# # Estimating the coefficient distribution
#
# Every series gives a lag-1 sample autocorrelation. Their empirical
# distribution estimates the law of the coefficients, and a kernel smoother
# turns it into a density estimate.

# %%
import numpy as np

from rcarpanel import BetaParams, PanelConfig, SqrtBeta, estimate_coeffs, simulate_panel
from rcarpanel.estimators import EPANECHNIKOV, bandwidth_rule, beta_mom, kde_eval, sample_moments

law = SqrtBeta(BetaParams(2.0, 1.4))
panel = simulate_panel(PanelConfig(N=250, n=817, coeff=law, seed=3))
e = estimate_coeffs(panel)

# %% [markdown]
# The estimates track the true coefficients with an error of order `n^(-1/2)`.

# %%
err = e.by_series() - panel.coeffs
print("rmse", np.sqrt(np.mean(err**2)).round(4))

# %% [markdown]
# Compare the ECDF with the true CDF at a few points.

# %%
for x in (0.3, 0.6, 0.8, 0.95):
    print(x, round(float(e(x)), 3), round(float(law.cdf(x)), 3))

# %% [markdown]
# Fitting a Beta law by the method of moments uses the first two sample moments.

# %%
mu1, mu2 = sample_moments(e, 2)
print(beta_mom(mu1, mu2))

# %% [markdown]
# An Epanechnikov density estimate with bandwidth `h = c N^(-1/5)`. Compare it
# with the sqrt-Beta density on a grid.

# %%
h = bandwidth_rule(e.N, 0.3)
grid = np.linspace(0.2, 0.95, 6)
print("h =", round(h, 4))
for x, g, f in zip(grid, kde_eval(e, EPANECHNIKOV, h, grid), law.pdf(grid)):
    print(f"{x:.2f}  kde {g:.3f}  true {f:.3f}")

# %% [markdown]
# # Goodness-of-fit tests on estimated coefficients
#
# Three tests are available:
#
# * `t1_simple` compares the ECDF with a fully specified law (Kolmogorov p-value).
# * `t1_composite` fits a Beta law by moments and calibrates by Monte Carlo.
# * `t2_parametric` is a Wald-type test built on the sqrt-Beta maximum likelihood fit.

# %%
from rcarpanel import BetaParams, PanelConfig, SqrtBeta, estimate_coeffs, simulate_panel
from rcarpanel.gof import Simple, t1_composite, t1_simple, t2_parametric

theta0 = BetaParams(2.0, 1.4)


def coeffs(theta, seed):
    return estimate_coeffs(simulate_panel(PanelConfig(N=250, n=817, coeff=SqrtBeta(theta), seed=seed)))


# %% [markdown]
# Under the null both tests should usually accept.

# %%
e = coeffs(theta0, 10)
print(t1_simple(e, Simple(SqrtBeta(theta0))))
print(t2_parametric(e, theta0, kappa=0.0175))

# %% [markdown]
# Under the alternative `beta = 1.6` the KS test has power of roughly 0.6 at
# this panel size, so a single panel may or may not be rejected.

# %%
e_alt = coeffs(BetaParams(2.0, 1.6), 11)
r = t1_simple(e_alt, Simple(SqrtBeta(theta0)))
print(r.statistic, r.p_value, r.reject)

# %% [markdown]
# The composite test asks whether the estimates look Beta distributed at all.
# Its critical value comes from refitting on 300 simulated samples.

# %%
r = t1_composite(e, level=0.05, mc_reps=300, rng=0)
print(r.fitted_theta, r.p_value, r.critical_value)

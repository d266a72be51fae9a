"""Random-coefficient AR(1) panels: simulation, coefficient-distribution
estimation and goodness-of-fit testing."""
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateSeries,
    DomainError,
    EstimationError,
    IntegrabilityError,
    MomentDomainError,
    RcarError,
    SupportError,
)
from .estimators import (
    EPANECHNIKOV,
    QUARTIC,
    TRIANGULAR,
    Ecdf,
    KernelSpec,
    bandwidth_rule,
    beta_mom,
    ecdf_eval,
    estimate_coeffs,
    kde_eval,
    lag1_autocorr,
    sample_moments,
)
from .gof import (
    CompositeBeta,
    CompositeSqrtBeta,
    GofResult,
    Simple,
    beran_mle,
    ks_sup_distance,
    t1_composite,
    t1_simple,
    t2_parametric,
)
from .rcar_sim import (
    BetaOn01,
    Panel,
    PanelConfig,
    PointMass,
    SqrtBeta,
    StandardNormal,
    StudentT,
    Uniform,
    sample_coeff,
    simulate_panel,
    theoretical_autocov,
)
from .special_fn import BetaParams
from .study import StudyConfig, pvalue_ecdf, run_study

__version__ = "0.1.0"

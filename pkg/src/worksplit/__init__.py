"""Bayesian split-fraction planning for two-unit parallel workloads.

Estimate each processing unit's completion-time characteristics
(mu, sigma, alpha, beta) from streamed (share, time) observations via
chained conjugate updates and Gibbs sampling, then sweep the split fraction
to find the mean-variance efficient frontier and pick the best split for a
QoS target.
"""

from .errors import (
    InfeasibleBudgetError,
    MomentInfeasibleError,
    NumericalError,
    ParameterError,
    QuadratureError,
    TraceFormatError,
    WorksplitError,
)
from .frontier import (
    FrontierPoint,
    SweepGrid,
    efficient_frontier,
    min_mu_given_variance,
    min_variance_given_mu,
    sweep,
)
from .gibbs import (
    GibbsConfig,
    GibbsResult,
    GibbsState,
    TracePoint,
    gibbs_sweep,
    initial_state,
    run,
)
from .inference import (
    Batch,
    BetaParams,
    NormalGammaParams,
    alpha_log_posterior_unnorm,
    beta_fit_from_moments,
    beta_log_posterior_unnorm,
    log_likelihood,
    normal_gamma_update,
    posterior_moments,
)
from .model import (
    SystemParams,
    UnitParams,
    completion_variance,
    component_cdf,
    expected_completion,
    negative_mass,
    task_cdf,
)
from .quadrature import QuadratureConfig, integrate_adaptive
from .simulate import (
    SplitPolicy,
    TraceRecord,
    generate_trace,
    load_trace,
    sample_completion,
    save_trace,
)

__version__ = "0.1.0"

__all__ = [
    "Batch",
    "BetaParams",
    "FrontierPoint",
    "GibbsConfig",
    "GibbsResult",
    "GibbsState",
    "InfeasibleBudgetError",
    "MomentInfeasibleError",
    "NormalGammaParams",
    "NumericalError",
    "ParameterError",
    "QuadratureConfig",
    "QuadratureError",
    "SplitPolicy",
    "SweepGrid",
    "SystemParams",
    "TraceFormatError",
    "TracePoint",
    "TraceRecord",
    "UnitParams",
    "WorksplitError",
    "alpha_log_posterior_unnorm",
    "beta_fit_from_moments",
    "beta_log_posterior_unnorm",
    "completion_variance",
    "component_cdf",
    "efficient_frontier",
    "expected_completion",
    "generate_trace",
    "gibbs_sweep",
    "initial_state",
    "integrate_adaptive",
    "load_trace",
    "log_likelihood",
    "min_mu_given_variance",
    "min_variance_given_mu",
    "negative_mass",
    "normal_gamma_update",
    "posterior_moments",
    "run",
    "sample_completion",
    "save_trace",
    "sweep",
    "task_cdf",
]

"""Gaussian variational approximation with manifold-constrained factors."""

from .errors import (
    DegenerateRetractionError,
    DimensionError,
    DivergenceError,
    GeometryError,
    IllConditionedCovarianceError,
    ManvbError,
    NumericalError,
)
from .factor_gaussian import (
    D2_FLOOR,
    NoiseDraw,
    Parameterization,
    VariationalParams,
    cov_matrix,
    elbo_estimate,
    log_det_sigma,
    sample_theta,
    sigma_inverse_apply,
    sigma_inverse_diag,
)
from .gradients import EuclideanGrad, grad_L1, grad_L2, grad_total
from .manifolds import (
    ManifoldKind,
    ManifoldPoint,
    TangentVector,
    project,
    random_point,
    retract,
    transport,
)
from .models import (
    Dataset,
    GaussianTargetModel,
    LogisticGaussianModel,
    LogisticHorseshoeModel,
    Model,
    gaussian_target_log_h,
    logistic_gaussian_log_h,
    logistic_horseshoe_log_h,
    predict_error,
)
from .optimizers import (
    AdadeltaState,
    HyperParams,
    OptimizerState,
    RuleKind,
    riemann_grad,
    step_crgd_m,
    step_euclidean_adadelta,
    step_rgd_adadelta,
    step_rgd_basic,
    step_rmsprop,
)
from .runner import (
    CVResult,
    RunConfig,
    RunResult,
    StoppingRule,
    TraceRecord,
    check_stopping,
    cross_validate,
    init_lambda,
    load_checkpoint,
    load_csv,
    run,
    run_model,
    save_checkpoint,
)

__version__ = "0.1.0"

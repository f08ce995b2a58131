"""Sequential sparse regression for streaming, evolving linear models.

The estimator couples an adaptive L1 penalty (model selection) with an
inertia penalty that keeps each epoch's estimate close to its state-space
prediction, weighted by the predicted covariance. Kalman filtering and the
per-epoch adaptive Lasso fall out as special cases and ship as baselines.
"""

from .baselines import kalman_gain, kalman_step, kalman_step_fast, local_adaptive_lasso
from .core import (
    ConfigError,
    DataError,
    EpochData,
    Hyperparams,
    ModelState,
    NoiseSpec,
    NumericalError,
    PredictedState,
    Scaler,
    StateTransition,
    ValidationReport,
    predict_response,
    standardize,
    symmetrize,
    validate_epoch,
)
from .estimator import (
    AugmentedData,
    DescentConfig,
    DescentResult,
    augment_data,
    closed_form_orthogonal,
    covariance_estimate,
    expand_model,
    inertial_ols,
    initial_state,
    innovation_noise_scale,
    irs_step,
    loss_gradient,
    objective,
    predict_state,
    proximal_descent,
    soft_threshold,
    tau_star,
)
from .features import FeatureSpec, build_features, load_transactions
from .harness import (
    ExperimentConfig,
    ReportRow,
    ReportTable,
    StateSpec,
    load_state,
    mape,
    rmse,
    run_experiment,
    save_state,
    write_score_table,
)
from .simgen import (
    DataStream,
    Exp2Config,
    evolve_theta_exp2,
    gen_exp1,
    gen_exp2,
    load_stream,
    save_stream,
)
from .tuning import GridSpec, cv_score, grid_search, kfold_split

__version__ = "0.1.0"

__all__ = [
    "AugmentedData",
    "ConfigError",
    "DataError",
    "DataStream",
    "DescentConfig",
    "DescentResult",
    "EpochData",
    "Exp2Config",
    "ExperimentConfig",
    "FeatureSpec",
    "GridSpec",
    "Hyperparams",
    "ModelState",
    "NoiseSpec",
    "NumericalError",
    "PredictedState",
    "ReportRow",
    "ReportTable",
    "Scaler",
    "StateSpec",
    "StateTransition",
    "ValidationReport",
    "augment_data",
    "build_features",
    "closed_form_orthogonal",
    "covariance_estimate",
    "cv_score",
    "evolve_theta_exp2",
    "expand_model",
    "gen_exp1",
    "gen_exp2",
    "grid_search",
    "inertial_ols",
    "initial_state",
    "innovation_noise_scale",
    "irs_step",
    "kalman_gain",
    "kalman_step",
    "kalman_step_fast",
    "kfold_split",
    "load_state",
    "load_stream",
    "load_transactions",
    "local_adaptive_lasso",
    "loss_gradient",
    "mape",
    "objective",
    "predict_response",
    "predict_state",
    "proximal_descent",
    "rmse",
    "run_experiment",
    "save_state",
    "save_stream",
    "soft_threshold",
    "standardize",
    "symmetrize",
    "tau_star",
    "validate_epoch",
    "write_score_table",
]

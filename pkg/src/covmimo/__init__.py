"""Covariance-aided channel estimation for multi-cell massive MIMO under
pilot contamination, with coordinated pilot assignment and Monte-Carlo
experiment tooling."""

from .channel import (
    AoaDensity,
    ArrayGeometry,
    GaussianAoa,
    NetworkScenario,
    PathProfile,
    PointAoa,
    UniformAoa,
    build_scenario,
    draw_channel,
    fold_angle,
    path_loss,
    steering_vector,
)
from .coordination import AssignmentState, exhaustive_assign, greedy_assign, network_utility
from .covariance import (
    CovarianceMatrix,
    QuadratureSpec,
    covariance_from_density,
    covariance_monte_carlo,
    link_covariance,
    load_covariances,
    save_covariances,
    validate_psd,
)
from .estimators import (
    analytic_mse_joint,
    analytic_mse_no_int,
    analytic_mse_single,
    default_pilot,
    joint_bayes_estimate,
    joint_mmse_estimate,
    ls_estimate,
    no_interference_estimate,
    simulate_received,
    single_mmse_estimate,
)
from .experiment import (
    AggregateResult,
    ExperimentConfig,
    emit_csv,
    mrc_rate,
    normalized_error,
    run_sweep,
)
from .subspace import (
    AngularSupport,
    effective_rank,
    fourier_basis,
    steering_null_projection,
    subspace_dimension_estimate,
    subspace_overlap,
)

__version__ = "0.1.0"

"""Spectral random walk solver for periodic 1-d stochastic PDEs."""

from spectrwm.semidiscretization import (
    FourierCoefficients,
    Grid,
    InitialCondition,
    ModelKind,
    ModelSpec,
    Nonlinearity,
    SpectralBasis,
    build_grid,
    drift_nonlinear,
    eigenbasis,
    from_spectral,
    initial_condition,
    laplacian_eigenvalues,
    laplacian_matvec,
    to_spectral,
)
from spectrwm.rng import RngStream, replica_stream
from spectrwm.jump_kernel import (
    EventLog,
    EventRecord,
    JumpState,
    Observer,
    RateTable,
    StepBudgetError,
    StiffnessError,
    Variant,
    academic_rates,
    apply_jump,
    compute_rates,
    detailed_balance_rates,
    fast_rates,
    make_state,
    sample_holding,
    sample_jump,
    simulate,
    step,
    write_event_log,
)
from spectrwm.oracles import (
    HeatParams,
    exp_time_integral,
    mode_variance,
    mode_variance_time_integral,
    LangevinTarget,
    QuadraticTestFunction,
    generator_residual,
    heat_covariance,
    heat_covariance_time_integral,
    heat_mean,
    ou_physical_moments,
    ou_physical_second_moment,
    ou_second_moment_time_integral,
    semidiscrete_ou_moments,
    semidiscrete_ou_time_integrals,
)
from spectrwm.estimators import (
    ConvergenceReport,
    ConvergenceRow,
    DivergenceMonitor,
    DivergenceReached,
    EstimateResult,
    EstimatorError,
    HoldingRow,
    MomentAccumulator,
    MonteCarloResult,
    TrajectoryRecorder,
    convergence_study,
    estimate_fixed_time,
    estimate_path_integral,
    holding_time_study,
    monte_carlo_run,
)
from spectrwm.baselines import (
    ChainResult,
    CnConfig,
    PcnConfig,
    cn_amplification,
    cn_step,
    pcn_step,
    run_chain,
)

__version__ = "0.1.0"

__all__ = [
    "ChainResult",
    "CnConfig",
    "ConvergenceReport",
    "ConvergenceRow",
    "DivergenceMonitor",
    "DivergenceReached",
    "EstimateResult",
    "EstimatorError",
    "EventLog",
    "EventRecord",
    "FourierCoefficients",
    "Grid",
    "HeatParams",
    "HoldingRow",
    "InitialCondition",
    "JumpState",
    "LangevinTarget",
    "ModelKind",
    "ModelSpec",
    "MomentAccumulator",
    "MonteCarloResult",
    "Nonlinearity",
    "Observer",
    "PcnConfig",
    "QuadraticTestFunction",
    "RateTable",
    "RngStream",
    "SpectralBasis",
    "StepBudgetError",
    "StiffnessError",
    "TrajectoryRecorder",
    "Variant",
    "build_grid",
    "cn_amplification",
    "cn_step",
    "academic_rates",
    "apply_jump",
    "compute_rates",
    "detailed_balance_rates",
    "fast_rates",
    "make_state",
    "sample_holding",
    "sample_jump",
    "convergence_study",
    "drift_nonlinear",
    "eigenbasis",
    "estimate_fixed_time",
    "estimate_path_integral",
    "from_spectral",
    "generator_residual",
    "heat_covariance",
    "heat_covariance_time_integral",
    "heat_mean",
    "exp_time_integral",
    "mode_variance",
    "mode_variance_time_integral",
    "holding_time_study",
    "initial_condition",
    "laplacian_eigenvalues",
    "laplacian_matvec",
    "monte_carlo_run",
    "ou_physical_moments",
    "ou_physical_second_moment",
    "ou_second_moment_time_integral",
    "pcn_step",
    "replica_stream",
    "run_chain",
    "semidiscrete_ou_moments",
    "semidiscrete_ou_time_integrals",
    "simulate",
    "step",
    "to_spectral",
    "write_event_log",
]

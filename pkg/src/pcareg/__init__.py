"""Asymptotics and simulation for PCA-pretrained linear probing.

Two-stage learning on spiked Gaussian data: a PCA representation is learned
from unlabelled samples and a downstream task is fit by minimum-norm
regression on the projected inputs.  The package provides the closed-form
high-dimensional limits of the estimation, generalisation and training
errors, the phase structure of the optimal representation size, and a
finite-sample Monte Carlo oracle that validates the formulas.
"""

from .errors import ConfigError, DomainError, NumericError, SingularityError
from .estimators import (
    MinNormLinearRegression,
    PCAPretrainer,
    PretrainedRegressor,
    min_norm_lstsq,
    pca_eigenbasis,
    pretrain_pca,
    pretrained_regression,
)
from .measures import (
    PopulationMassSpec,
    SampleMeasure,
    bbp_overlap,
    measure_tail_mass,
    sample_measure,
    spike_location,
)
from .mp import (
    MPSupport,
    mp_bulk_threshold,
    mp_cdf,
    mp_density,
    mp_inverse_moment,
    pseudoinverse_trace_limit,
)
from .phase import (
    AlphaGrid,
    PhaseCurvePoint,
    RegimeTag,
    TransitionSearch,
    endpoint_transition_curve,
    heatmap,
    optimal_alpha,
    stability_boundary,
    substitution_rate,
    train_optimal_alpha,
)
from .projections import (
    ProjectionLimits,
    VectorSpec,
    effective_projection,
    perp_projection,
    projection_bundle,
)
from .risk import (
    ModelParams,
    RiskBreakdown,
    TestSpike,
    TestSpikeSpec,
    estimation_error,
    generalisation_error,
    risk_limits_gamma_l_zero,
    risk_limits_gamma_u_zero,
    training_error,
)
from .simulate import (
    FiniteInstance,
    TrialAggregate,
    TrialResult,
    baselines,
    generate_instance,
    run_alpha_sweep,
    run_trials,
)

__version__ = "0.1.0"

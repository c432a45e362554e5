from .behavior import (
    BehaviorModel,
    BaselineModel,
    IncreasingCostModel,
    LearningModel,
    PoolingModel,
    GeneralModel,
    Trajectory,
    conducts_study,
    continue_decision,
    create_behavior_model,
    latent_matrix,
    mean_multipliers,
    n_max_increasing_cost,
    next_latent,
    reported_statistic,
    simulate_trajectory,
)

from .calib import (
    MatchedPairsStudy,
    SdBounds,
    BoundsEstimate,
    REFERENCE_BOUNDS,
    calibrate_prior,
    cost_ratio_bounds_table,
    elicitation_bounds,
    elicitation_bounds_monte_carlo,
    implied_n_bar,
    load_studies,
    matched_pairs_sd_bounds,
    reference_comparison,
)

from .config import (
    RunConfig,
)

from .dist import (
    RandomStream,
    cholesky_lower,
    sample_mvn,
    sample_std_normal,
    standard_normals,
    std_normal_cdf,
    std_normal_quantile,
)

from .errors import (
    ICCVError,
    InvalidArgumentError,
    FactorizationError,
    UnsupportedPriorError,
    SingularPriorError,
    UnsupportedModelError,
    PreconditionError,
    SearchFailureError,
    NoThresholdError,
    InconsistentSummaryError,
    InsufficientDataError,
    ConfigError,
)

from .incentives import (
    CostSchedule,
    ConstantCost,
    PowerLawCost,
    Incentives,
    create_cost_schedule,
)

from .omega import (
    OmegaGenerator,
    IdentityOmega,
    PoolingOmega,
    EquicorrelatedOmega,
    ExplicitOmega,
    create_omega,
)

from .priors import (
    Tail,
    Prior,
    PointMassPrior,
    UniformPrior,
    NormalPrior,
    MvnPrior,
    PosteriorScalar,
    create_prior,
    exceedance_prob,
    exceedance_prob_quadrature,
    posterior_general,
    posterior_scalar,
    rejection_prob,
    rejection_prob_quadrature,
    subjective_mixture,
)

from .replicate_runner import (
    NoiseBlock,
    ReplicateRunner,
    simulate_block,
    tally_outcomes,
)

from .solver import (
    SizeEstimate,
    ICCVResult,
    ZGrid,
    baseline_threshold,
    classical_quantile,
    estimate_power,
    estimate_size,
    find_iccv,
    mean_num_studies,
    size_closed_form_iid,
    size_curve,
)

from .sweeps import (
    sweep,
)

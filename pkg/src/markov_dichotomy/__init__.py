"""Equivalence vs. mutual singularity of non-stationary finite-alphabet Markov measures."""

from .model import (
    ONE_SIDED,
    TWO_SIDED,
    CanonicalChain,
    ConstantTail,
    IncompatibleChainsError,
    MeasureSpec,
    PowerTail,
    SpecFormatError,
    SpecNumericError,
    TransitionSequence,
    build_chain,
    canonicalize,
    load_spec,
    parse_spec,
    serialize_spec,
    spec_from_dict,
    spec_to_dict,
    support_pattern,
    transition_at,
)
from .engine import (
    CylinderEvent,
    LocalContinuityError,
    NullEventError,
    conditional_marginal,
    conditional_pair,
    event_probability,
    hellinger_integral,
    hellinger_trajectory,
    local_hellinger,
    marginal,
    pair_probability,
    window_product,
    z_mean,
)
from .criteria import (
    ClassMembership,
    DecideOptions,
    DecisionReport,
    SeriesClassification,
    class_s_sufficient,
    class_window_estimate,
    d_n_squared,
    decide,
    loc_abs_continuous,
    series_classify,
)
from .applications import (
    ShiftReport,
    StationarizationReport,
    shift_analysis,
    shifted_chain,
    stationarize,
    stationary_distribution,
    subshift_support_check,
)
from .montecarlo import (
    LOG_SENTINEL,
    TrajectoryBatch,
    WeightSequence,
    fatou_diagnostic,
    loglr_trajectories,
    sample_paths,
    terminal_log_ratios,
)

__version__ = "0.1.0"

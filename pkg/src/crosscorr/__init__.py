"""Correlation measures of binary sequence families.

Core objects live in submodules; the names below are the stable surface:

- sequences and families: :mod:`crosscorr.seqcore`
- exact and randomized measures: :mod:`crosscorr.measures`
- tail probabilities and analytic bounds: :mod:`crosscorr.tailmath`
- trial runners and record IO: :mod:`crosscorr.experiments`
- HTTP service and CLI: :mod:`crosscorr.service`, :mod:`crosscorr.cli`
"""
from .seqcore import (
    BinarySequence,
    GeneratorSample,
    SequenceFamily,
    random_sequence,
    read_sequences,
    sample_family,
    sample_generator,
    stream,
    write_sequences,
)
from .measures import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    MeasureResult,
    ShiftPattern,
    correlation_measure,
    correlation_v,
    count_windows,
    cross_correlation_k_tuple,
    estimate_phi,
    evaluate_pattern,
    phi,
    phi_tilde,
)
from .tailmath import (
    PointMassBound,
    RkResult,
    TheoremBand,
    binom_point_lower_bound,
    binom_tail_exact,
    collision_free_probability,
    hoeffding_bound,
    logbinom_ratio,
    ml_tail,
    rk_threshold,
    signed_sum_tail_exact,
    theorem_band,
)
from .experiments import (
    RECORD_FIELDS,
    BoundsRecord,
    CollisionReport,
    ExperimentConfig,
    collision_experiment,
    exact_distribution_oracle,
    format_record,
    read_records,
    record_to_dict,
    run_trials,
    summarize,
    tv_distance,
    write_records,
)

__all__ = [
    "BinarySequence",
    "BoundsRecord",
    "BudgetExceededError",
    "CollisionReport",
    "DEFAULT_BUDGET",
    "ExperimentConfig",
    "GeneratorSample",
    "MeasureResult",
    "PointMassBound",
    "RECORD_FIELDS",
    "RkResult",
    "SequenceFamily",
    "ShiftPattern",
    "TheoremBand",
    "binom_point_lower_bound",
    "binom_tail_exact",
    "collision_experiment",
    "collision_free_probability",
    "correlation_measure",
    "correlation_v",
    "count_windows",
    "cross_correlation_k_tuple",
    "estimate_phi",
    "evaluate_pattern",
    "exact_distribution_oracle",
    "format_record",
    "hoeffding_bound",
    "logbinom_ratio",
    "ml_tail",
    "phi",
    "phi_tilde",
    "random_sequence",
    "read_records",
    "read_sequences",
    "record_to_dict",
    "rk_threshold",
    "run_trials",
    "sample_family",
    "sample_generator",
    "signed_sum_tail_exact",
    "stream",
    "summarize",
    "theorem_band",
    "tv_distance",
    "write_records",
]

__version__ = "0.1.0"

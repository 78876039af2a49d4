"""Norm-preserving sketches of noisy vectors.

Seeded, matrix-free gaussian / s-hashing / scaled-sampling operators, an
additive-Gaussian corruption model with streaming statistics, the
closed-form bounds tying the two together, and a Monte Carlo experiment
harness that validates the bounds empirically.
"""

from .bounds import (
    EmbeddingParams,
    NoiseTailParams,
    TailBounds,
    hashing_m,
    hashing_m_value,
    n0_threshold,
    noise_peak_bound,
    noisy_norm_interval,
    noisy_nu_bound,
    norm_slack,
    nu_bar,
    sampling_m,
    sampling_m_value,
    solve_n0,
    tail_bounds,
)
from .errors import BadDimensions, BadParams, DimensionMismatch, TooLarge, ZeroVector
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    TrialRecord,
    acceptance_check,
    default_config,
    run_experiment,
    write_outputs,
)
from .noise import NoiseModel, NoisyStats, corrupt, corrupt_streaming, recover_norm_sq, vector_stats
from .sketch import (
    GAUSSIAN,
    HASHING,
    SAMPLING,
    SketchOperator,
    apply,
    embedding_distortion,
    make_operator,
    materialize,
    operator_descriptor,
    parse_descriptor,
)
from .vectors import Vector, norm2, norm2_sq, norm_inf, nu, read_vector, write_vector

__version__ = "0.1.0"

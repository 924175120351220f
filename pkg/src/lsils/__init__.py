"""Landscape-smoothing iterated local search for UBQP.

Maximizes f(x) = x^T Q x over binary vectors, optionally blending the
objective with a unimodal toy problem anchored at the best-known solution,
plus an exhaustive landscape laboratory for small instances.
"""

from .qubo import (
    GainCache,
    UbqpInstance,
    apply_flip,
    as_solution,
    evaluate,
    flip_delta,
    max_abs,
    mean_abs,
    random_solution,
    seeded_rng,
)
from .smoothing import (
    LambdaSchedule,
    SmoothedObjective,
    ToyKind,
    ToyMatrix,
    auto_alpha,
    construct_toy,
    lambda_at,
    smoothed_evaluate,
    smoothed_flip_delta,
    toy_evaluate,
    toy_flip_delta,
)
from .bench_io import (
    ParseError,
    RunLogRecord,
    attach_excess,
    excess,
    gen_random_instance,
    load_optima,
    parse_orlib,
    read_runlog_csv,
    runlog_filename,
    serialize_orlib,
    write_runlog_csv,
)
from .search import (
    BestTracker,
    Budget,
    RunResult,
    SearchConfig,
    ils,
    local_search,
    lsils,
    perturb,
    sample_distinct_positions,
)
from .landscape import (
    LandscapeReport,
    analyze,
    collision_probability,
    enumerate_local_optima,
    enumerate_values,
    lambda_sweep,
    solution_from_index,
    value_histogram,
)

__version__ = "0.1.0"

__all__ = [
    "GainCache",
    "UbqpInstance",
    "apply_flip",
    "as_solution",
    "evaluate",
    "flip_delta",
    "max_abs",
    "mean_abs",
    "random_solution",
    "seeded_rng",
    "LambdaSchedule",
    "SmoothedObjective",
    "ToyKind",
    "ToyMatrix",
    "auto_alpha",
    "construct_toy",
    "lambda_at",
    "smoothed_evaluate",
    "smoothed_flip_delta",
    "toy_evaluate",
    "toy_flip_delta",
    "ParseError",
    "RunLogRecord",
    "attach_excess",
    "excess",
    "gen_random_instance",
    "load_optima",
    "parse_orlib",
    "read_runlog_csv",
    "runlog_filename",
    "serialize_orlib",
    "write_runlog_csv",
    "BestTracker",
    "Budget",
    "RunResult",
    "SearchConfig",
    "ils",
    "local_search",
    "lsils",
    "perturb",
    "sample_distinct_positions",
    "LandscapeReport",
    "analyze",
    "collision_probability",
    "enumerate_local_optima",
    "enumerate_values",
    "lambda_sweep",
    "solution_from_index",
    "value_histogram",
    "__version__",
]

"""qvar: a single-server queueing laboratory for waiting-time variance.

Every work-conserving, non-preemptive service discipline leaves the mean
wait untouched but moves the *variance* of the wait: serving in arrival
order minimizes it, serving the latest arrival first maximizes it.  This
package lets you see that from three independent directions --

* a discrete-event simulator with first-come, last-come, and random-order
  disciplines sharing identical arrival/service randomness,
* exact combinatorics on extracted busy periods (exhaustive enumeration of
  realizable service orders, a swap-by-swap descent from any order to the
  stack order), and
* closed-form formulas for the memoryless queue to calibrate against.

See the ``qvar`` command-line tool or import the pieces directly.
"""

from .busy_period import (
    BusyPeriod,
    Permutation,
    is_realizable,
    mean_square_wait,
    pairing_objective,
    validate_busy_period,
    waiting_times,
)
from .errors import (
    ConfigError,
    DuplicateTimestampError,
    EmptyAfterWarmupError,
    ExtremalityViolationError,
    FirstServiceNotImmediateError,
    InfeasibleError,
    InvalidRateError,
    LengthMismatchError,
    MalformedInputError,
    MalformedTraceError,
    NoBadPairsError,
    NotRealizableError,
    NotSortedError,
    QvarError,
    SizeMismatchError,
    TooLargeError,
    UnstableError,
    ValidationError,
)
from .instances import random_busy_period, random_realizable_permutation
from .permutations import (
    BadPair,
    DescentStep,
    DescentTrace,
    ExtremalityReport,
    bad_pairs,
    check_extremality,
    descent_swap,
    descent_to_lcfs,
    enumerate_realizable,
    fcfs_permutation,
    lcfs_permutation,
)
from .analytics import (
    ComparisonTable,
    ConsistencyReport,
    DisciplineSummary,
    LittleReport,
    MM1Prediction,
    compare_disciplines,
    consistency_check,
    little_check,
    mm1_predict,
)
from .simulate import (
    Coupling,
    Discipline,
    SimConfig,
    SimTrace,
    extract_busy_periods,
    per_period_wait_sums,
    read_trace_jsonl,
    run_simulation,
    write_trace_jsonl,
)
from .stats import WaitStats, compute_stats
from .variates import (
    Distribution,
    draw_variates,
    make_streams,
    parse_distribution,
    sample_variate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # data model
    "BusyPeriod",
    "Permutation",
    "validate_busy_period",
    "is_realizable",
    "pairing_objective",
    "waiting_times",
    "mean_square_wait",
    # combinatorics
    "BadPair",
    "DescentStep",
    "DescentTrace",
    "ExtremalityReport",
    "fcfs_permutation",
    "lcfs_permutation",
    "enumerate_realizable",
    "bad_pairs",
    "descent_swap",
    "descent_to_lcfs",
    "check_extremality",
    # random instances
    "random_busy_period",
    "random_realizable_permutation",
    # variates and streams
    "Distribution",
    "parse_distribution",
    "sample_variate",
    "draw_variates",
    "make_streams",
    # simulation
    "Discipline",
    "Coupling",
    "SimConfig",
    "SimTrace",
    "run_simulation",
    "extract_busy_periods",
    "per_period_wait_sums",
    "write_trace_jsonl",
    "read_trace_jsonl",
    # statistics
    "WaitStats",
    "compute_stats",
    # analytics
    "MM1Prediction",
    "ConsistencyReport",
    "LittleReport",
    "DisciplineSummary",
    "ComparisonTable",
    "mm1_predict",
    "consistency_check",
    "little_check",
    "compare_disciplines",
    # errors
    "QvarError",
    "ValidationError",
    "LengthMismatchError",
    "NotSortedError",
    "DuplicateTimestampError",
    "FirstServiceNotImmediateError",
    "InfeasibleError",
    "SizeMismatchError",
    "NotRealizableError",
    "TooLargeError",
    "InvalidRateError",
    "UnstableError",
    "ConfigError",
    "MalformedInputError",
    "MalformedTraceError",
    "EmptyAfterWarmupError",
    "NoBadPairsError",
    "ExtremalityViolationError",
]

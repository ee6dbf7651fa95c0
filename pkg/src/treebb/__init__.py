"""treebb: discrete simulation-based optimization on integer lattices via
stochastic branch-and-bound with adaptive regression-tree partitioning."""

from .archive import ObservationRecord, SampleArchive
from .bench import (
    AggregateReport,
    Arm,
    ExperimentSpec,
    hit_rate,
    post_evaluate,
    preset,
    run_experiment,
)
from .errors import (
    DimensionMismatchError,
    EmptyRegionError,
    FeasibleSetTooLarge,
    InfeasiblePointError,
    InternalConsistencyError,
    TreebbError,
)
from .optimizer import (
    AdaptiveHyperplane,
    AdaptiveParallel,
    EsbbOptimizer,
    EsbbState,
    GenericSplit,
    IterationRecord,
    RunConfig,
    RunResult,
    allocate_samples,
    estimate_bound,
    initialize,
    iterate,
    partition_step,
    run,
    strategy_from_name,
)
from .problems import (
    CallableProblem,
    GriewankLatticeProblem,
    LinearInequality,
    ProblemDefinition,
    SyntheticFleetProblem,
    griewank_value,
    make_problem,
)
from .regions import (
    Partition,
    Subregion,
    apply_cut,
    enumerate_region,
    finalize_partition,
    is_singleton,
    longest_dimension,
    root_region,
    split_box_equal,
    validate_partition,
)
from .sampling import (
    WalkConfig,
    sample_hit_and_run,
    sample_region,
    sample_uniform_box,
)
from .stats import (
    TTestResult,
    mean_ci,
    one_sample_two_sided,
    regularized_incomplete_beta,
    student_t_cdf,
    t_quantile,
    welch_one_sided,
)
from .streams import RandomStream
from .tree import (
    RegressionTree,
    SplitFeature,
    TreeConfig,
    TreePartitionRegressor,
    axis_features,
    best_split,
    candidate_thresholds,
    feature_matrix,
    fit_adaptive,
    greedy_tree,
    local_search,
    make_cluster_features,
    partition_sse,
    tree_to_partition,
)

__version__ = "0.1.0"

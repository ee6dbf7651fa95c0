"""The branch-and-bound driver: partition, sample, bound, allocate, repeat.

One iteration splits the current best subregion (generic equal split, or the
adaptive tree fit on the archived points inside it), samples the fresh
subregions from a fixed total budget, samples the other subregions according
to the allocation computed at the previous iteration, simulates replications
for every sampled point, re-estimates each subregion's empirical bound (the
maximum cumulative mean among its archived points), picks the next best
subregion, and computes the next allocation.  The final answer is always the
archived point with the maximum cumulative mean.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .archive import SampleArchive
from .errors import EmptyRegionError, InfeasiblePointError, InternalConsistencyError
from .problems import ProblemDefinition
from .regions import (
    Partition,
    Subregion,
    enumerate_region,
    finalize_partition,
    is_singleton,
    longest_dimension,
    root_region,
    split_box_equal,
    validate_partition,
)
from .sampling import WalkConfig, sample_region
from .streams import RandomStream
from .tree import (
    TreeConfig,
    axis_features,
    fit_adaptive,
    make_cluster_features,
    tree_to_partition,
)
from .validation import as_point, check_positive_int

NEG_INF = float("-inf")

PARTITION_EVENTS = ("none", "generic", "adaptive", "fallback")


@dataclass(frozen=True)
class GenericSplit:
    """Equal box split of the best subregion into ``omega`` slabs."""

    omega: int = 2
    dimension_rule: str = "longest"  # or "random"

    def __post_init__(self):
        check_positive_int("omega", self.omega, minimum=2)
        if self.dimension_rule not in ("longest", "random"):
            raise ValueError("dimension_rule must be 'longest' or 'random'")


@dataclass(frozen=True)
class AdaptiveParallel:
    """Tree partition on the decision variables only."""

    tree: TreeConfig = TreeConfig()


@dataclass(frozen=True)
class AdaptiveHyperplane:
    """Tree partition with extra cluster-total splitting features.

    ``clusters=None`` means: take the cluster structure from the problem
    (problems expose a ``clusters`` attribute when they have one).
    """

    tree: TreeConfig = TreeConfig()
    clusters: tuple | None = None


def strategy_from_name(name: str, omega: int = 2, tree: TreeConfig | None = None,
                       clusters=None):
    tree = tree or TreeConfig()
    if name == "generic":
        return GenericSplit(omega=omega)
    if name == "parallel":
        return AdaptiveParallel(tree=tree)
    if name == "hyperplane":
        return AdaptiveHyperplane(tree=tree, clusters=clusters)
    raise ValueError(f"unknown strategy {name!r}; use generic, parallel or hyperplane")


@dataclass(frozen=True)
class RunConfig:
    n0: int = 10
    nu_r_total: int = 10
    nu_o: int = 5
    dn_f: int = 10
    dn_a: int = 2
    max_iterations: int = 40
    strategy: object = AdaptiveParallel()
    warm_start: tuple | None = None
    master_seed: int = 0
    seed_tag: str = ""
    nu_r_per_region: bool = False
    walk: WalkConfig = WalkConfig()
    max_total_replications: int | None = None
    max_seconds: float | None = None
    debug_checks: bool = False
    debug_trace: bool = False

    def __post_init__(self):
        for name in ("n0", "nu_r_total", "nu_o", "dn_f", "dn_a", "max_iterations"):
            check_positive_int(name, getattr(self, name))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    incumbent: tuple
    incumbent_mean: float  # internal (maximization) scale
    incumbent_n: int
    n_regions: int
    total_calls: int
    partition_event: str


@dataclass
class EsbbState:
    k: int
    partition: list
    best_id: int
    archive: SampleArchive
    training: list
    theta: dict
    bounds: dict
    trace: list
    ids: object
    region_points: dict = field(default_factory=dict)
    point_region: dict = field(default_factory=dict)
    feasible_counts: dict = field(default_factory=dict)
    debug_lines: list = field(default_factory=list)
    init_stream: RandomStream = None
    arm_stream: RandomStream = None

    def best_region(self) -> Subregion:
        for r in self.partition:
            if r.id == self.best_id:
                return r
        raise InternalConsistencyError(f"best region {self.best_id} not in partition")

    def is_exhausted(self, region: Subregion, problem) -> bool:
        """True when every feasible point of the region is already archived.

        Decidable only for regions within the enumeration budget; larger
        regions are never considered exhausted.  Fresh sampling of an
        exhausted region cannot discover anything, so the ranked half of the
        allocation skips it (the uniform half still revisits it, which keeps
        refining its means).
        """
        if region.id not in self.feasible_counts:
            if region.box_point_count <= 4096:
                count = len(enumerate_region(region, problem))
            else:
                count = None
            self.feasible_counts[region.id] = count
        count = self.feasible_counts[region.id]
        if count is None:
            return False
        return len(self.region_points.get(region.id, ())) >= count


def _region_bound(state: EsbbState, region_id: int) -> float:
    pts = state.region_points.get(region_id, ())
    if not pts:
        return NEG_INF
    records = state.archive.records
    return max(records[p].mean for p in pts)


def estimate_bound(region: Subregion, archive: SampleArchive,
                   problem: ProblemDefinition) -> float:
    """Empirical upper bound: max cumulative mean among archived points in
    the region; -inf when no archived point lies inside."""
    best = NEG_INF
    for _, mean, _ in archive.points_in(region, problem):
        if mean > best:
            best = mean
    return best


def _register_point(state: EsbbState, point: tuple, region_id: int):
    if point in state.point_region:
        return
    state.point_region[point] = region_id
    state.region_points.setdefault(region_id, []).append(point)


def _route_points(state: EsbbState, parent: Subregion, children, problem) -> None:
    """Move the parent's archived points onto the children (exactly one each)."""
    pts = state.region_points.pop(parent.id, [])
    for pt in pts:
        arr = np.asarray(pt)
        target = None
        for child in children:
            if child.contains_box(arr) and child.contains_cuts(arr):
                if target is not None:
                    raise InternalConsistencyError(
                        f"point {pt} belongs to two children of region {parent.id}")
                target = child
        if target is None:
            raise InternalConsistencyError(
                f"point {pt} belongs to no child of region {parent.id}")
        state.point_region[pt] = target.id
        state.region_points.setdefault(target.id, []).append(pt)


def initialize(problem: ProblemDefinition, cfg: RunConfig, run_index: int = 0) -> EsbbState:
    """Draw the initial uniform pool (plus the warm start, if any), simulate
    ``dn_f`` replications of each, and set up the single-region partition.

    The initial pool's randomness depends only on (master_seed, run_index),
    never on the strategy tag, so different strategies can share pools.
    """
    init_stream = RandomStream(cfg.master_seed, "init", run_index)
    arm_stream = RandomStream(cfg.master_seed, "arm", cfg.seed_tag, run_index)
    ids = itertools.count(0)
    root = root_region(problem, ids)
    archive = SampleArchive(debug=cfg.debug_checks)
    state = EsbbState(
        k=0, partition=[root], best_id=root.id, archive=archive,
        training=[], theta={}, bounds={}, trace=[], ids=ids,
        init_stream=init_stream, arm_stream=arm_stream,
    )
    pool = sample_region(root, problem, cfg.n0, archive,
                         init_stream.child("pool"), cfg.walk)
    if cfg.warm_start is not None:
        warm = as_point(cfg.warm_start, problem.dimension)
        if not problem.is_feasible(warm):
            raise InfeasiblePointError(f"warm start {warm} is infeasible")
        pool = pool + [warm]
    plan = archive.replication_plan(pool, cfg.dn_f, cfg.dn_a)
    for j, (point, reps) in enumerate(plan):
        obs = problem.evaluate_many(point, reps, init_stream.child("noise", j))
        archive.record(point, obs, iteration=0)
        _register_point(state, point, root.id)
    state.bounds = {root.id: _region_bound(state, root.id)}
    state.training = list(state.region_points.get(root.id, []))
    incumbent, mean = archive.incumbent()
    state.trace.append(IterationRecord(
        iteration=0, incumbent=incumbent, incumbent_mean=mean,
        incumbent_n=archive.count(incumbent), n_regions=1,
        total_calls=problem.call_count, partition_event="none",
    ))
    _check_budget_identity(state, problem)
    return state


def _check_budget_identity(state: EsbbState, problem: ProblemDefinition):
    if problem.call_count != state.archive.total_replications:
        raise InternalConsistencyError(
            f"budget identity violated: {problem.call_count} simulator calls vs "
            f"{state.archive.total_replications} archived replications")


def _check_child_max_identity(state: EsbbState, parent_bound: float, children):
    """Immediately after a split, the best child bound must equal the parent's."""
    child_max = NEG_INF
    for child in children:
        child_max = max(child_max, _region_bound(state, child.id))
    if child_max != parent_bound:
        raise InternalConsistencyError(
            f"child-max bound {child_max!r} != parent bound {parent_bound!r}")


def partition_step(state: EsbbState, problem: ProblemDefinition, cfg: RunConfig,
                   stream: RandomStream):
    """Split the best subregion; returns (new partition list, new regions, event).

    Singleton best regions are left alone.  The adaptive strategies fall back
    to a generic two-way split along the longest dimension whenever the
    fitted tree degenerates to a single leaf (too few training points or no
    strictly improving split).
    """
    best = state.best_region()
    if is_singleton(best, problem):
        return list(state.partition), [], "none"

    strategy = cfg.strategy
    event = "generic"
    children = None

    if isinstance(strategy, (AdaptiveParallel, AdaptiveHyperplane)):
        training = state.training
        if len(training) >= 2 * strategy.tree.min_leaf:
            X = np.asarray(training, dtype=np.int64)
            y = np.asarray([state.archive.records[p].mean for p in training])
            features = axis_features(problem.dimension)
            if isinstance(strategy, AdaptiveHyperplane):
                clusters = strategy.clusters
                if clusters is None:
                    clusters = getattr(problem, "clusters", ())
                features = features + make_cluster_features(clusters, problem.dimension)
            fitted = fit_adaptive(X, y, features, strategy.tree, stream.child("fit"))
            if not fitted.root.is_leaf:
                partition = tree_to_partition(fitted, best, problem, X, state.ids)
                children = list(partition.members)
                event = "adaptive"
                if cfg.debug_trace:
                    state.debug_lines.append("tree:")
                    state.debug_lines.extend(
                        "  " + line for line in fitted.to_text().splitlines())
        if children is None:
            event = "fallback"

    if children is None:
        if isinstance(strategy, GenericSplit):
            omega = strategy.omega
            rule = strategy.dimension_rule
        else:
            omega, rule = 2, "longest"
        if rule == "random":
            dim = int(stream.child("dim").integers(0, best.dimension))
        else:
            dim = longest_dimension(best)
        raw = split_box_equal(best, dim, omega, state.ids)
        known = state.region_points.get(best.id, ())
        children = list(finalize_partition(best, raw.members, problem,
                                           known_points=known).members)

    parent_bound = _region_bound(state, best.id)
    _route_points(state, best, children, problem)
    _check_child_max_identity(state, parent_bound, children)

    new_partition = [r for r in state.partition if r.id != best.id] + children
    return new_partition, children, event


def _largest_remainder_shares(total: int, weights) -> list:
    """Integer shares summing to ``total``, proportional to ``weights``;
    remainders round in weight-descending (then first-come) order."""
    w = np.asarray(weights, dtype=np.float64)
    if w.sum() <= 0 or total <= 0:
        return [0] * len(weights)
    quota = total * w / w.sum()
    shares = np.floor(quota).astype(np.int64)
    rem = int(total - shares.sum())
    order = sorted(range(len(weights)), key=lambda i: (-(quota[i] - shares[i]), i))
    for i in order[:rem]:
        shares[i] += 1
    return [int(s) for s in shares]


def allocate_samples(state: EsbbState, cfg: RunConfig, stream: RandomStream,
                     problem: ProblemDefinition | None = None) -> dict:
    """Distribute ``nu_o`` samples over the non-best subregions.

    Half (rounded up) goes by bound rank: regions with finite bounds sorted
    by bound descending get weight (m - rank + 1).  Regions whose feasible
    points are all archived already are skipped by the ranked half - they
    have no improvement potential left to discover.  The rest lands
    uniformly at random, one sample at a time, over all non-best regions -
    including unranked and exhausted ones, which keeps every region sampled
    infinitely often in the limit.
    """
    others = [r for r in state.partition if r.id != state.best_id]
    if not others:
        return {}
    theta = {r.id: 0 for r in others}
    ranked = [r for r in others if state.bounds.get(r.id, NEG_INF) > NEG_INF]
    if problem is not None:
        ranked = [r for r in ranked if not state.is_exhausted(r, problem)]
    ranked.sort(key=lambda r: (-state.bounds[r.id], r.id))
    det_half = (cfg.nu_o + 1) // 2
    uniform_half = cfg.nu_o - det_half
    if ranked:
        m = len(ranked)
        weights = [m - rank for rank in range(m)]
        for region, share in zip(ranked, _largest_remainder_shares(det_half, weights)):
            theta[region.id] += share
    else:
        uniform_half += det_half
    # the uniform half is uniform over the unexplored solution space, the
    # same sense in which initialization samples the feasible region: a
    # region is drawn proportionally to its lattice size.  Every region keeps
    # a positive floor, so each is still sampled infinitely often.
    volumes = np.asarray([float(r.box_point_count) for r in others])
    cum = np.cumsum(volumes / volumes.sum())
    for _ in range(uniform_half):
        pick = others[int(np.searchsorted(cum, stream.random()))]
        theta[pick.id] += 1
    total = sum(theta.values())
    if total != cfg.nu_o:
        raise InternalConsistencyError(f"theta sums to {total}, expected {cfg.nu_o}")
    return theta


def iterate(state: EsbbState, problem: ProblemDefinition, cfg: RunConfig) -> EsbbState:
    """One full iteration; mutates and returns the state."""
    k = state.k
    it_stream = state.arm_stream.child("iter", k)

    partition, new_regions, event = partition_step(
        state, problem, cfg, it_stream.child("partition"))
    state.partition = partition

    # sampled points, each tagged with the region it was drawn from;
    # an unsplit (singleton) best region is its own trivial partition and
    # still receives the full best-region budget, so a lucky champion keeps
    # accumulating replications until its mean reverts toward the truth
    sampled: list = []
    fresh_targets = new_regions if new_regions else [state.best_region()]
    if fresh_targets:
        if cfg.nu_r_per_region:
            shares = [cfg.nu_r_total] * len(fresh_targets)
        else:
            shares = _largest_remainder_shares(
                cfg.nu_r_total, [1.0] * len(fresh_targets))
        for region, share in zip(fresh_targets, shares):
            if share == 0:
                continue
            try:
                pts = sample_region(region, problem, share, state.archive,
                                    it_stream.child("sample-new", region.id), cfg.walk,
                                    starts=state.region_points.get(region.id, ()))
            except EmptyRegionError:
                continue
            sampled.extend((pt, region.id) for pt in pts)

    new_ids = {r.id for r in fresh_targets}
    for region in partition:
        share = state.theta.get(region.id, 0)
        if share == 0 or region.id in new_ids:
            continue
        try:
            pts = sample_region(region, problem, share, state.archive,
                                it_stream.child("sample-other", region.id), cfg.walk,
                                starts=state.region_points.get(region.id, ()))
        except EmptyRegionError:
            continue
        sampled.extend((pt, region.id) for pt in pts)

    plan = state.archive.replication_plan([pt for pt, _ in sampled],
                                          cfg.dn_f, cfg.dn_a)
    origin = {}
    for pt, rid in sampled:
        origin.setdefault(as_point(pt), rid)
    for j, (point, reps) in enumerate(plan):
        obs = problem.evaluate_many(point, reps, it_stream.child("noise", j))
        state.archive.record(point, obs, iteration=k + 1)
        _register_point(state, point, origin[point])

    state.bounds = {r.id: _region_bound(state, r.id) for r in partition}

    def tie_key(region):
        reps_inside = sum(state.archive.records[p].n
                          for p in state.region_points.get(region.id, ()))
        return (-state.bounds[region.id], reps_inside, region.id)

    state.best_id = min(partition, key=tie_key).id
    state.theta = allocate_samples(state, cfg, it_stream.child("alloc"), problem)
    state.training = list(state.region_points.get(state.best_id, []))

    incumbent, mean = state.archive.incumbent()
    state.k = k + 1
    state.trace.append(IterationRecord(
        iteration=state.k, incumbent=incumbent, incumbent_mean=mean,
        incumbent_n=state.archive.count(incumbent), n_regions=len(partition),
        total_calls=problem.call_count, partition_event=event,
    ))
    if cfg.debug_trace:
        state.debug_lines.append(
            f"iteration {state.k} event={event} best={state.best_id} "
            f"incumbent={incumbent} regions={len(partition)}")
        state.debug_lines.append("partition:")
        state.debug_lines.extend("  " + r.to_line() for r in partition)
    _check_budget_identity(state, problem)
    if cfg.debug_checks:
        _debug_checks(state, problem)
    return state


def _debug_checks(state: EsbbState, problem: ProblemDefinition):
    best = state.best_region()
    scan = {pt for pt, _, _ in state.archive.points_in(best, problem)}
    if scan != set(state.training):
        raise InternalConsistencyError(
            "training set disagrees with archive scan of the best region")
    root_box = math.prod(u - l + 1 for l, u in zip(problem.lower, problem.upper))
    if root_box <= 4096:
        ids = itertools.count(10**9)
        origin = root_region(problem, ids)
        validate_partition(origin, Partition(tuple(state.partition), origin.id), problem)


@dataclass(frozen=True)
class RunResult:
    problem_name: str
    final_point: tuple
    final_mean: float  # internal scale
    final_n: int
    trace: tuple
    total_calls: int
    distinct_points: int
    debug_text: str | None = None

    def write_csv(self, fobj, run_id: int, problem: ProblemDefinition) -> None:
        """Per-iteration trace rows; incumbent means on the display scale."""
        fobj.write("run_id,iteration,incumbent_coords,incumbent_mean,"
                   "incumbent_n,n_regions,total_sim_calls,partition_event\n")
        for rec in self.trace:
            coords = ";".join(str(c) for c in rec.incumbent)
            mean = problem.to_display(rec.incumbent_mean)
            fobj.write(f"{run_id},{rec.iteration},{coords},{mean!r},"
                       f"{rec.incumbent_n},{rec.n_regions},{rec.total_calls},"
                       f"{rec.partition_event}\n")


def run(problem: ProblemDefinition, cfg: RunConfig, run_index: int = 0) -> RunResult:
    """Initialize and iterate to the iteration cap (or optional replication /
    wall-clock caps); the final solution is the incumbent."""
    started = time.perf_counter()
    state = initialize(problem, cfg, run_index)
    for _ in range(cfg.max_iterations):
        if cfg.max_total_replications is not None and \
                state.archive.total_replications >= cfg.max_total_replications:
            break
        if cfg.max_seconds is not None and \
                time.perf_counter() - started >= cfg.max_seconds:
            break
        iterate(state, problem, cfg)
    point, mean = state.archive.incumbent()
    return RunResult(
        problem_name=problem.name,
        final_point=point,
        final_mean=mean,
        final_n=state.archive.count(point),
        trace=tuple(state.trace),
        total_calls=problem.call_count,
        distinct_points=len(state.archive),
        debug_text="\n".join(state.debug_lines) if cfg.debug_trace else None,
    )


class EsbbOptimizer(BaseEstimator):
    """Scikit-learn style facade over the driver.

    ``fit(problem)`` runs the full optimization and exposes the result as
    fitted attributes: ``best_point_``, ``best_value_`` (display scale),
    ``best_n_``, ``result_``.  All constructor arguments are plain
    parameters, so ``get_params`` / ``set_params`` / ``clone`` work as usual.
    """

    def __init__(self, strategy="parallel", omega=2, max_depth=2, min_leaf=2,
                 restarts=10, clusters=None, n0=10, nu_r_total=10, nu_o=5,
                 dn_f=10, dn_a=2, max_iterations=40, warm_start=None,
                 random_state=0):
        self.strategy = strategy
        self.omega = omega
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.restarts = restarts
        self.clusters = clusters
        self.n0 = n0
        self.nu_r_total = nu_r_total
        self.nu_o = nu_o
        self.dn_f = dn_f
        self.dn_a = dn_a
        self.max_iterations = max_iterations
        self.warm_start = warm_start
        self.random_state = random_state

    def _config(self) -> RunConfig:
        if isinstance(self.strategy, str):
            tree = TreeConfig(max_depth=self.max_depth, min_leaf=self.min_leaf,
                              restarts=self.restarts)
            strategy = strategy_from_name(self.strategy, omega=self.omega,
                                          tree=tree, clusters=self.clusters)
        else:
            strategy = self.strategy
        return RunConfig(
            n0=self.n0, nu_r_total=self.nu_r_total, nu_o=self.nu_o,
            dn_f=self.dn_f, dn_a=self.dn_a, max_iterations=self.max_iterations,
            strategy=strategy, warm_start=self.warm_start,
            master_seed=int(self.random_state or 0),
            seed_tag=str(self.strategy),
        )

    def fit(self, problem: ProblemDefinition, run_index: int = 0):
        result = run(problem, self._config(), run_index=run_index)
        self.result_ = result
        self.best_point_ = result.final_point
        self.best_value_ = problem.to_display(result.final_mean)
        self.best_n_ = result.final_n
        return self

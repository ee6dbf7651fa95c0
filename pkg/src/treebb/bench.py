"""Experiment harness: multi-run campaigns, aggregation, hit rates, and the
post-hoc evaluation protocol (fresh replications of every final solution,
one-sided two-sample tests between arms).

All arms of one experiment share the initial-pool randomness run by run (so
every strategy starts from an identical sample pool) and diverge afterwards
through independent streams.  Every file this module writes is a pure
function of the experiment spec, byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import svgplot
from .optimizer import RunConfig, TreeConfig, run, strategy_from_name
from .problems import ProblemDefinition, make_problem
from .stats import mean_ci, one_sample_two_sided, welch_one_sided
from .streams import RandomStream
from .validation import as_point


@dataclass(frozen=True)
class Arm:
    name: str
    strategy: str  # generic | parallel | hyperplane
    omega: int = 2
    max_depth: int = 2
    min_leaf: int = 2
    restarts: int = 10


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    problem: str
    arms: tuple
    runs_per_arm: int = 50
    problem_overrides: dict = field(default_factory=dict)
    config: RunConfig = RunConfig()
    post_eval_replications: int = 50
    warm_start_rule: str | None = None  # None | "uniform-fill"
    out_dir: str = "bench-out"
    svg: bool = True
    debug_trace: bool = False


@dataclass
class ArmOutcome:
    name: str
    results: list            # RunResult per run
    final_points: list
    post_eval: list           # np.ndarray of fresh observations per run
    true_values: list | None  # display-scale deterministic values, if known


@dataclass
class AggregateReport:
    spec: ExperimentSpec
    iterations: list
    curves: dict        # arm -> (means, half_widths) on the display scale
    arm_outcomes: dict  # arm -> ArmOutcome
    hit_rates: dict     # arm -> (exact, indifferent) when the optimum is known
    p_matrices: dict    # (arm_a, arm_b) -> ndarray of one-sided p-values
    files: list


def _build_problem(spec: ExperimentSpec) -> ProblemDefinition:
    return make_problem(spec.problem, **spec.problem_overrides)


def _arm_config(spec: ExperimentSpec, arm: Arm, problem: ProblemDefinition) -> RunConfig:
    tree = TreeConfig(max_depth=arm.max_depth, min_leaf=arm.min_leaf,
                      restarts=arm.restarts)
    clusters = getattr(problem, "clusters", None)
    strategy = strategy_from_name(arm.strategy, omega=arm.omega, tree=tree,
                                  clusters=tuple(clusters) if clusters else None)
    warm = None
    if spec.warm_start_rule == "uniform-fill":
        warm = problem.uniform_fill()
    return replace(spec.config, strategy=strategy, seed_tag=arm.name,
                   warm_start=warm, debug_trace=spec.debug_trace)


def post_evaluate(problem: ProblemDefinition, solutions, reps: int,
                  stream: RandomStream) -> list:
    """Fresh independent replications per solution (never reusing archive
    draws); the raw material for the pairwise test matrices."""
    if reps < 2:
        raise ValueError("reps must be >= 2")
    out = []
    for j, sol in enumerate(solutions):
        pt = as_point(sol, problem.dimension)
        out.append(problem.evaluate_many(pt, reps, stream.child("post", j)))
    return out


def hit_rate(final_points, post_eval_display, optimum_point, optimum_display,
             alpha: float = 0.05) -> tuple:
    """(exact hits, statistically-indifferent hits) against a known optimum.

    A run is an exact hit when its final point equals the optimum, and an
    indifferent hit when a two-sided one-sample test cannot reject that its
    fresh post-evaluation mean equals the true optimal value.
    """
    optimum_point = tuple(optimum_point)
    exact = sum(1 for pt in final_points if tuple(pt) == optimum_point)
    indifferent = 0
    for obs in post_eval_display:
        if one_sample_two_sided(obs, optimum_display).p_value_one_sided > alpha:
            indifferent += 1
    return exact, indifferent


def run_experiment(spec: ExperimentSpec) -> AggregateReport:
    os.makedirs(spec.out_dir, exist_ok=True)
    files = []
    outcomes = {}

    for arm in spec.arms:
        results = []
        for run_index in range(spec.runs_per_arm):
            problem = _build_problem(spec)
            cfg = _arm_config(spec, arm, problem)
            result = run(problem, cfg, run_index=run_index)
            results.append(result)
            path = os.path.join(spec.out_dir,
                                f"{spec.name}__{arm.name}__run{run_index:03d}.csv")
            with open(path, "w", encoding="utf-8") as fobj:
                result.write_csv(fobj, run_index, problem)
            files.append(path)
            if result.debug_text is not None:
                dbg = os.path.join(spec.out_dir,
                                   f"{spec.name}__{arm.name}__run{run_index:03d}.debug.txt")
                with open(dbg, "w", encoding="utf-8") as fobj:
                    fobj.write(result.debug_text + "\n")
                files.append(dbg)

        post_problem = _build_problem(spec)
        post_stream = RandomStream(spec.config.master_seed, "post-eval", arm.name)
        finals = [r.final_point for r in results]
        raw_post = post_evaluate(post_problem, finals,
                                 spec.post_eval_replications, post_stream)
        post_display = [np.asarray([post_problem.to_display(v) for v in obs])
                        for obs in raw_post]
        true_values = None
        probe = _build_problem(spec)
        if probe.true_value(finals[0]) is not None:
            true_values = [probe.to_display(probe.true_value(pt)) for pt in finals]
        outcomes[arm.name] = ArmOutcome(
            name=arm.name, results=results, final_points=finals,
            post_eval=post_display, true_values=true_values,
        )

    # aggregate incumbent curves on the display scale
    n_iters = min(len(r.trace) for o in outcomes.values() for r in o.results)
    iterations = list(range(n_iters))
    probe = _build_problem(spec)
    curves = {}
    for arm_name, outcome in outcomes.items():
        means, hws = [], []
        for it in iterations:
            vals = [probe.to_display(r.trace[it].incumbent_mean)
                    for r in outcome.results]
            if len(vals) >= 2:
                m, hw = mean_ci(vals, 0.95)
            else:
                m, hw = float(vals[0]), 0.0
            means.append(m)
            hws.append(hw)
        curves[arm_name] = (means, hws)

    agg_path = os.path.join(spec.out_dir, f"{spec.name}__aggregate.csv")
    with open(agg_path, "w", encoding="utf-8") as fobj:
        fobj.write("iteration,arm,mean_incumbent,ci_half_width\n")
        for arm in spec.arms:
            means, hws = curves[arm.name]
            for it in iterations:
                fobj.write(f"{it},{arm.name},{means[it]!r},{hws[it]!r}\n")
    files.append(agg_path)

    hit_rates = {}
    optimum = probe.true_optimum()
    if optimum is not None:
        opt_point, opt_internal = optimum
        opt_display = probe.to_display(opt_internal)
        for arm_name, outcome in outcomes.items():
            hit_rates[arm_name] = hit_rate(outcome.final_points, outcome.post_eval,
                                           opt_point, opt_display)

    p_matrices = {}
    arm_names = [a.name for a in spec.arms]
    for i, a in enumerate(arm_names):
        for b in arm_names[i + 1:]:
            # one-sided: is arm b's final solution better than arm a's?
            pa, pb = outcomes[a], outcomes[b]
            sign = -1.0 if probe.negated else 1.0
            mat = np.empty((len(pa.post_eval), len(pb.post_eval)))
            for ri, obs_a in enumerate(pa.post_eval):
                for cj, obs_b in enumerate(pb.post_eval):
                    mat[ri, cj] = welch_one_sided(sign * obs_a, sign * obs_b).p_value_one_sided
            p_matrices[(a, b)] = mat

    summary_path = os.path.join(spec.out_dir, f"{spec.name}__summary.txt")
    with open(summary_path, "w", encoding="utf-8") as fobj:
        _write_summary(fobj, spec, outcomes, hit_rates, p_matrices, probe)
    files.append(summary_path)

    if spec.svg:
        svg_path = os.path.join(spec.out_dir, f"{spec.name}.svg")
        series = [(arm.name, iterations, curves[arm.name][0], curves[arm.name][1])
                  for arm in spec.arms]
        objective = "objective estimate (minimized)" if probe.negated \
            else "objective estimate (maximized)"
        svgplot.write_line_plot(svg_path, spec.name, "iteration", objective, series)
        files.append(svg_path)

    return AggregateReport(spec=spec, iterations=iterations, curves=curves,
                           arm_outcomes=outcomes, hit_rates=hit_rates,
                           p_matrices=p_matrices, files=files)


def _write_summary(fobj, spec, outcomes, hit_rates, p_matrices, probe):
    fobj.write(f"experiment: {spec.name}\n")
    fobj.write(f"problem: {spec.problem} {spec.problem_overrides}\n")
    fobj.write(f"runs per arm: {spec.runs_per_arm}, "
               f"post-eval replications: {spec.post_eval_replications}\n\n")
    fobj.write("final-solution statistics (post-evaluation, display scale)\n")
    for name, outcome in outcomes.items():
        means = [float(np.mean(o)) for o in outcome.post_eval]
        stds = [float(np.std(o, ddof=1)) for o in outcome.post_eval]
        fobj.write(f"  {name}: mean of means {np.mean(means):.4f}, "
                   f"mean sd {np.mean(stds):.4f}\n")
        if outcome.true_values is not None:
            fobj.write(f"  {name}: mean true value {np.mean(outcome.true_values):.6f}\n")
    if hit_rates:
        fobj.write("\nhit rates (exact optimum / statistically indifferent at 0.05)\n")
        for name, (exact, indiff) in hit_rates.items():
            n = spec.runs_per_arm
            fobj.write(f"  {name}: {exact}/{n} exact, {indiff}/{n} indifferent\n")
    for (a, b), mat in p_matrices.items():
        fobj.write(f"\none-sided p-values, H1: {b} better than {a} "
                   f"(rows = {a} runs, columns = {b} runs)\n")
        for row in mat:
            fobj.write("  " + " ".join(f"{v:.4f}" for v in row) + "\n")
        rejected = int((mat < 0.05).sum())
        fobj.write(f"  rejected at 0.05: {rejected}/{mat.size}\n")


# -- experiment presets ----------------------------------------------------

def preset(name: str, runs: int | None = None, seed: int = 2024,
           out_dir: str = "bench-out", svg: bool = True, demand: str = "high",
           **overrides) -> ExperimentSpec:
    """Built-in experiment specs; ``overrides`` feed the problem factory."""
    if name in ("griewank-centered", "griewank-shifted"):
        arms = (
            Arm(name="generic", strategy="generic", omega=2),
            Arm(name="parallel", strategy="parallel", max_depth=2, min_leaf=2),
        )
        cfg = RunConfig(n0=10, nu_r_total=10, nu_o=5, dn_f=10, dn_a=2,
                        max_iterations=40, master_seed=seed)
        return ExperimentSpec(
            name=name, problem=name, arms=arms,
            runs_per_arm=50 if runs is None else runs,
            problem_overrides=overrides, config=cfg,
            out_dir=out_dir, svg=svg,
        )
    if name == "fleet-synthetic":
        arms = (
            Arm(name="generic", strategy="generic", omega=3),
            Arm(name="parallel", strategy="parallel", max_depth=2, min_leaf=2),
            Arm(name="hyperplane", strategy="hyperplane", max_depth=2, min_leaf=2),
        )
        cfg = RunConfig(n0=20, nu_r_total=20, nu_o=10, dn_f=5, dn_a=2,
                        max_iterations=40, master_seed=seed)
        overrides.setdefault("demand_scale", 2.0 if demand == "high" else 0.5)
        return ExperimentSpec(
            name=f"{name}-{demand}", problem="fleet-synthetic", arms=arms,
            runs_per_arm=5 if runs is None else runs,
            problem_overrides=overrides, config=cfg,
            warm_start_rule="uniform-fill", out_dir=out_dir, svg=svg,
        )
    raise ValueError(f"unknown experiment preset {name!r}")

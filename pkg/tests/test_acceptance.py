"""Acceptance suite: every numbered criterion as one test, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

The two lattice benchmark campaigns and the fleet campaign are session
fixtures shared by several criteria.  All campaigns run the canonical master
seed; nothing here is tuned per seed.
"""

import itertools
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import chi2

import treebb
from treebb import (
    Arm,
    CallableProblem,
    ExperimentSpec,
    GenericSplit,
    LinearInequality,
    Partition,
    RandomStream,
    RunConfig,
    Subregion,
    TreeConfig,
    WalkConfig,
    enumerate_region,
    finalize_partition,
    axis_features,
    best_split,
    feature_matrix,
    fit_adaptive,
    greedy_tree,
    local_search,
    make_cluster_features,
    make_problem,
    mean_ci,
    root_region,
    run,
    sample_hit_and_run,
    sample_uniform_box,
    split_box_equal,
    student_t_cdf,
    tree_to_partition,
    validate_partition,
    welch_one_sided,
)
from treebb.bench import preset, run_experiment

from conftest import brute_force_best_split, brute_force_best_tree_sse
from test_stats import T_CDF_FIXTURES, WELCH_A, WELCH_B

MASTER_SEED = 2024


def report(criterion, ok, details):
    print(f"\nCRITERION {criterion}: {'PASS' if ok else 'FAIL'} ({details})")
    return ok


def _griewank_campaign(name, tmp_path_factory):
    t0 = time.perf_counter()
    spec = preset(name, runs=50, seed=MASTER_SEED,
                  out_dir=str(tmp_path_factory.mktemp(name)), svg=False)
    rep = run_experiment(spec)
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


@pytest.fixture(scope="session")
def centered_report(tmp_path_factory):
    return _griewank_campaign("griewank-centered", tmp_path_factory)


@pytest.fixture(scope="session")
def shifted_report(tmp_path_factory):
    return _griewank_campaign("griewank-shifted", tmp_path_factory)


@pytest.fixture(scope="session")
def fleet_report(tmp_path_factory):
    t0 = time.perf_counter()
    spec = preset("fleet-synthetic", runs=20, seed=MASTER_SEED,
                  out_dir=str(tmp_path_factory.mktemp("fleet")), svg=False,
                  demand="high")
    spec = replace(spec, arms=tuple(a for a in spec.arms
                                    if a.strategy in ("parallel", "hyperplane")))
    rep = run_experiment(spec)
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def test_criterion_01_centered_exact_gap(centered_report):
    rep = centered_report
    exact_gen = rep.hit_rates["generic"][0] / 50.0
    exact_par = rep.hit_rates["parallel"][0] / 50.0
    gap = exact_par - exact_gen
    ok = gap >= 0.20 and rep.runtime_seconds <= 120.0
    report(1, ok, f"adaptive {exact_par:.2f} vs generic {exact_gen:.2f}, "
                  f"gap {gap:+.2f} (needs >= 0.20), "
                  f"runtime {rep.runtime_seconds:.0f}s (needs <= 120)")
    assert rep.runtime_seconds <= 120.0
    assert gap >= 0.20


def test_criterion_02_centered_indifferent_gap(centered_report):
    rep = centered_report
    ind_gen = rep.hit_rates["generic"][1] / 50.0
    ind_par = rep.hit_rates["parallel"][1] / 50.0
    gap = ind_par - ind_gen
    ok = gap >= 0.25
    report(2, ok, f"adaptive {ind_par:.2f} vs generic {ind_gen:.2f}, "
                  f"gap {gap:+.2f} (needs >= 0.25)")
    assert gap >= 0.25


def test_criterion_03_shifted_exact_gap(shifted_report):
    rep = shifted_report
    exact_gen = rep.hit_rates["generic"][0] / 50.0
    exact_par = rep.hit_rates["parallel"][0] / 50.0
    gap = exact_par - exact_gen
    ok = gap >= 0.15 and rep.runtime_seconds <= 120.0
    report(3, ok, f"adaptive {exact_par:.2f} vs generic {exact_gen:.2f}, "
                  f"gap {gap:+.2f} (needs >= 0.15), "
                  f"runtime {rep.runtime_seconds:.0f}s (needs <= 120)")
    assert rep.runtime_seconds <= 120.0
    assert gap >= 0.15


def test_criterion_04_true_value_welch(centered_report, shifted_report):
    ps = {}
    for name, rep in (("centered", centered_report), ("shifted", shifted_report)):
        gen = np.asarray(rep.arm_outcomes["generic"].true_values)
        par = np.asarray(rep.arm_outcomes["parallel"].true_values)
        # display scale is minimization: internal maximization sense negates
        ps[name] = welch_one_sided(-gen, -par).p_value_one_sided
    ok = all(p < 0.05 for p in ps.values())
    report(4, ok, f"one-sided Welch p: centered {ps['centered']:.4f}, "
                  f"shifted {ps['shifted']:.4f} (both need < 0.05)")
    assert ps["centered"] < 0.05
    assert ps["shifted"] < 0.05


def test_criterion_05_fleet_hyperplane_beats_parallel(fleet_report):
    rep = fleet_report
    par = [float(np.mean(o)) for o in rep.arm_outcomes["parallel"].post_eval]
    hyp = [float(np.mean(o)) for o in rep.arm_outcomes["hyperplane"].post_eval]
    res = welch_one_sided(par, hyp)
    ok = (np.mean(hyp) >= np.mean(par) and res.p_value_one_sided < 0.05
          and rep.runtime_seconds <= 600.0)
    report(5, ok, f"hyperplane mean {np.mean(hyp):.1f} vs parallel "
                  f"{np.mean(par):.1f}, one-sided p {res.p_value_one_sided:.4f} "
                  f"(needs < 0.05), runtime {rep.runtime_seconds:.0f}s (needs <= 600)")
    assert rep.runtime_seconds <= 600.0
    assert np.mean(hyp) >= np.mean(par)
    assert res.p_value_one_sided < 0.05


def test_criterion_06_partition_validity_fuzz():
    rng = np.random.default_rng(60)
    failures = 0
    built = 0
    trial = 0
    while built < 1000:
        trial += 1
        p = int(rng.integers(1, 4))
        lower = rng.integers(-6, 4, size=p)
        width = rng.integers(1, {1: 400, 2: 40, 3: 12}[p], size=p)
        upper = lower + width
        constraints = ()
        if rng.random() < 0.3 and p >= 2:
            coeffs = np.zeros(p)
            coeffs[:2] = 1.0
            bound = float(lower[:2].sum() + width[:2].sum())
            constraints = (LinearInequality(tuple(coeffs), bound, "<="),)
        problem = CallableProblem(tuple(lower), tuple(upper), fn=lambda q: 0.0,
                                  constraints=constraints)
        ids = itertools.count()
        region = root_region(problem, ids)
        pts = enumerate_region(region, problem)
        if len(pts) < 2:
            continue
        k = int(rng.integers(2, min(16, len(pts)) + 1))
        sample_idx = rng.choice(len(pts), size=k, replace=False)
        sample = [pts[i] for i in sample_idx]
        labels = rng.normal(size=k)
        kind = rng.integers(0, 3)
        try:
            if kind == 0 or k < 4:
                dim = int(rng.integers(0, p))
                omega = int(rng.integers(2, 5))
                raw = split_box_equal(region, dim, omega, ids)
                part = finalize_partition(region, raw.members, problem,
                                          known_points=sample)
            else:
                X = np.asarray(sample)
                feats = axis_features(p)
                if kind == 2 and p >= 2:
                    feats = feats + make_cluster_features([tuple(range(p))], p)
                tree = fit_adaptive(X, labels, feats, TreeConfig(2, 2, 3),
                                    RandomStream(trial, "fuzz"))
                if tree.root.is_leaf:
                    raw = split_box_equal(region, 0, 2, ids)
                    part = finalize_partition(region, raw.members, problem,
                                              known_points=sample)
                else:
                    part = tree_to_partition(tree, region, problem, X, ids)
            validate_partition(region, part, problem)
        except AssertionError:
            failures += 1
        built += 1
    ok = failures == 0
    report(6, ok, f"{built} partitions validated, {failures} failures")
    assert failures == 0


def test_criterion_07_tree_exactness():
    rng = np.random.default_rng(70)
    # (a) best_split equals brute force on 500 instances
    mismatches = 0
    for _ in range(500):
        n = int(rng.integers(4, 31))
        f = int(rng.integers(1, 4))
        Fm = rng.integers(-8, 9, size=(n, f)).astype(float)
        y = rng.normal(size=n)
        min_leaf = int(rng.integers(1, 3))
        ours = best_split(Fm, y, min_leaf)
        brute = brute_force_best_split(Fm, y, np.arange(n), min_leaf)
        if (ours is None) != (brute is None):
            mismatches += 1
        elif ours is not None and abs(ours.sse - brute[0]) > 1e-9 * max(1.0, brute[0]):
            mismatches += 1
    # (b) local search never worse than greedy (200 paired instances)
    ls_regressions = 0
    for trial in range(200):
        n = int(rng.integers(4, 26))
        X = rng.integers(0, 10, size=(n, 2))
        y = rng.normal(size=n)
        cfg = TreeConfig(max_depth=2, min_leaf=1, restarts=1)
        feats = axis_features(2)
        Fm = feature_matrix(X, feats)
        greedy = greedy_tree(Fm, y, feats, cfg)
        refined = local_search(greedy, Fm, y, cfg, RandomStream(trial, "ls"))
        if refined.sse(y) > greedy.sse(y) + 1e-9:
            ls_regressions += 1
    # (c) depth-2 local search with 10 restarts matches the exhaustive
    # optimal tree on >= 95% of 200 tiny instances
    matched = 0
    for trial in range(200):
        n = int(rng.integers(4, 13))
        X = rng.integers(0, 8, size=(n, 2))
        y = rng.normal(size=n)
        feats = axis_features(2)
        fitted = fit_adaptive(X, y, feats, TreeConfig(2, 1, 10),
                              RandomStream(trial, "opt"))
        Fm = feature_matrix(X, feats)
        optimal = brute_force_best_tree_sse(Fm, y, np.arange(n), 1, 2)
        if fitted.sse(y) <= optimal + 1e-9 * max(1.0, optimal):
            matched += 1
    ok = mismatches == 0 and ls_regressions == 0 and matched >= 190
    report(7, ok, f"best_split mismatches {mismatches}/500, local-search "
                  f"regressions {ls_regressions}/200, exhaustive matches "
                  f"{matched}/200 (needs >= 190)")
    assert mismatches == 0
    assert ls_regressions == 0
    assert matched >= 190


def _chi_square_p(counts, expected):
    counts = np.asarray(counts, dtype=float)
    stat = ((counts - expected) ** 2 / expected).sum()
    return float(chi2.sf(stat, df=len(counts) - 1))


def test_criterion_08_sampler_uniformity():
    draws = 50_000
    results = {}

    # fixture 1: pure box, rejection sampler
    prob1 = CallableProblem((0, 0), (9, 9), fn=lambda q: 0.0)
    reg1 = Subregion(0, None, (0, 0), (9, 9))
    pts = sample_uniform_box(reg1, prob1, draws, RandomStream(80, "f1"))
    counts = np.zeros(100)
    for x, y in pts:
        counts[x * 10 + y] += 1
    results["box/rejection"] = _chi_square_p(counts, draws / 100)

    # fixture 2: problem-constrained box, rejection sampler
    prob2 = CallableProblem((0, 0), (5, 5), fn=lambda q: 0.0,
                            constraints=(LinearInequality((1.0, 2.0), 7.0, "<="),))
    reg2 = Subregion(0, None, (0, 0), (5, 5))
    support2 = enumerate_region(reg2, prob2)
    index2 = {p: i for i, p in enumerate(support2)}
    pts = sample_uniform_box(reg2, prob2, draws, RandomStream(80, "f2"))
    counts = np.zeros(len(support2))
    for p in pts:
        counts[index2[p]] += 1
    results["constrained/rejection"] = _chi_square_p(counts, draws / len(support2))

    # fixture 3: hyperplane-cut region, hit-and-run walks
    prob3 = CallableProblem((0, 0), (3, 3), fn=lambda q: 0.0)
    reg3 = Subregion(0, None, (0, 0), (3, 3),
                     cuts=(LinearInequality((1.0, 1.0), 4.0, "<"),),
                     witness=(0, 0))
    support3 = enumerate_region(reg3, prob3)
    index3 = {p: i for i, p in enumerate(support3)}
    counts = np.zeros(len(support3))
    stream = RandomStream(80, "f3")
    cfg = WalkConfig(warmup_steps=40)
    for k in range(draws):
        counts[index3[sample_hit_and_run(reg3, prob3, (0, 0),
                                         stream.child(k), cfg)]] += 1
    results["cut/hit-and-run"] = _chi_square_p(counts, draws / len(support3))

    # hit-and-run must also be uniform on the constrained box fixture
    counts = np.zeros(len(support2))
    stream = RandomStream(80, "f2w")
    for k in range(draws):
        counts[index2[sample_hit_and_run(reg2, prob2, (0, 0),
                                         stream.child(k), cfg)]] += 1
    results["constrained/hit-and-run"] = _chi_square_p(counts, draws / len(support2))

    ok = all(p > 1e-3 for p in results.values())
    report(8, ok, "; ".join(f"{k} p={v:.4f}" for k, v in results.items())
                  + " (all need > 0.001)")
    for name, p in results.items():
        assert p > 1e-3, name


def test_criterion_09_bound_identity_full_run():
    # the driver raises InternalConsistencyError on any violation of the
    # child-max identity; a full adaptive campaign run must complete clean
    prob = make_problem("griewank-centered")
    cfg = RunConfig(n0=10, nu_r_total=10, nu_o=5, dn_f=10, dn_a=2,
                    max_iterations=40, master_seed=MASTER_SEED,
                    strategy=treebb.AdaptiveParallel(TreeConfig(2, 2, 10)))
    result = run(prob, cfg)
    splits = sum(1 for r in result.trace
                 if r.partition_event in ("generic", "adaptive", "fallback"))
    ok = splits >= 20
    report(9, ok, f"full run completed with {splits} splits, zero bound-identity "
                  f"violations (violations raise)")
    assert splits >= 20


def test_criterion_10_budget_and_determinism(tmp_path):
    import io
    traces = []
    for _ in range(2):
        prob = make_problem("griewank-centered")
        cfg = RunConfig(n0=10, nu_r_total=10, nu_o=5, dn_f=10, dn_a=2,
                        max_iterations=40, master_seed=MASTER_SEED,
                        strategy=treebb.AdaptiveParallel(TreeConfig(2, 2, 10)))
        result = run(prob, cfg)
        assert result.total_calls == prob.call_count
        buf = io.StringIO()
        result.write_csv(buf, run_id=0, problem=prob)
        traces.append(buf.getvalue().encode())
    ok = traces[0] == traces[1]
    report(10, ok, f"budget identity held every iteration (asserted in-run); "
                   f"same-seed traces byte-identical: {ok}")
    assert traces[0] == traces[1]


def _random_noiseless_problem(seed):
    rng = np.random.default_rng(seed)
    if rng.random() < 0.5:
        width = int(rng.integers(60, 500))
        lower, upper = (0,), (width - 1,)
    else:
        side = int(rng.integers(8, 23))
        lower, upper = (0, 0), (side - 1, side - 1)
    p = len(lower)
    centers = rng.uniform(0, np.asarray(upper), size=(3, p))
    heights = rng.uniform(0.5, 2.0, size=3)
    scales = rng.uniform(2.0, max(upper) / 2.0, size=3)

    def fn(pt):
        x = np.asarray(pt, dtype=float)
        return float(sum(h * np.exp(-((x - c) ** 2).sum() / (2 * s * s))
                         for h, c, s in zip(heights, centers, scales)))

    return CallableProblem(lower, upper, fn=fn, noise_sigma=0.0,
                           name=f"noiseless-{seed}")


def test_criterion_11_noiseless_convergence():
    solved = 0
    for seed in range(10):
        prob = _random_noiseless_problem(seed)
        optimum = prob.true_optimum()[0]
        cfg = RunConfig(n0=5, nu_r_total=6, nu_o=3, dn_f=1, dn_a=1,
                        max_iterations=200, master_seed=seed,
                        strategy=treebb.AdaptiveParallel(TreeConfig(2, 2, 5)))
        result = run(prob, cfg)
        solved += result.final_point == optimum
    ok = solved == 10
    report(11, ok, f"{solved}/10 noiseless problems solved exactly in "
                   f"200 iterations (needs 10/10)")
    assert solved == 10


def test_criterion_12_statistics_kit():
    cdf_err = max(abs(student_t_cdf(t, df) - expected)
                  for t, df, expected in T_CDF_FIXTURES)
    welch_res = welch_one_sided(WELCH_A, WELCH_B)
    welch_err = abs(welch_res.p_value_one_sided - 6.7652484330908806e-5)

    rng = np.random.default_rng(120)
    covered = 0
    trials = 10_000
    for _ in range(trials):
        sample = rng.normal(1.5, 2.0, 15)
        m, hw = mean_ci(sample, 0.95)
        covered += (m - hw) <= 1.5 <= (m + hw)
    coverage = covered / trials
    ok = cdf_err <= 1e-10 and welch_err <= 1e-9 and abs(coverage - 0.95) < 0.02
    report(12, ok, f"max t-cdf error {cdf_err:.1e} (<= 1e-10), Welch p error "
                   f"{welch_err:.1e} (<= 1e-9), CI coverage {coverage:.3f} "
                   f"(within 0.95 +/- 0.02)")
    assert cdf_err <= 1e-10
    assert welch_err <= 1e-9
    assert abs(coverage - 0.95) < 0.02

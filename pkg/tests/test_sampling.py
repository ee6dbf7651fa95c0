import itertools

import numpy as np
import pytest
from scipy.stats import chi2

from treebb import (
    CallableProblem,
    EmptyRegionError,
    InfeasiblePointError,
    LinearInequality,
    RandomStream,
    SampleArchive,
    Subregion,
    WalkConfig,
    enumerate_region,
    sample_hit_and_run,
    sample_region,
    sample_uniform_box,
)


def flat_problem(lower, upper, constraints=()):
    return CallableProblem(lower=lower, upper=upper, fn=lambda p: 0.0,
                           constraints=constraints)


def chi_square_p(counts, expected):
    counts = np.asarray(counts, dtype=float)
    stat = ((counts - expected) ** 2 / expected).sum()
    return float(chi2.sf(stat, df=len(counts) - 1))


class TestRandomStream:
    def test_identical_lineage_identical_draws(self):
        a = RandomStream(42, "x", 3).normal(size=10)
        b = RandomStream(42, "x", 3).normal(size=10)
        assert a.tolist() == b.tolist()

    def test_distinct_purpose_diverges(self):
        a = RandomStream(42, "x").normal(size=10)
        b = RandomStream(42, "y").normal(size=10)
        assert a.tolist() != b.tolist()

    def test_child_extends_lineage(self):
        a = RandomStream(42).child("iter", 3, "noise")
        b = RandomStream(42, "iter", 3, "noise")
        assert a.normal(size=4).tolist() == b.normal(size=4).tolist()

    def test_bad_tag_rejected(self):
        with pytest.raises(TypeError):
            RandomStream(1, 3.5)


class TestUniformBox:
    def test_membership(self):
        prob = flat_problem((0, 0), (1, 1))
        region = Subregion(0, None, (0, 0), (1, 1))
        pts = sample_uniform_box(region, prob, 4, RandomStream(1))
        assert len(pts) == 4
        assert all(p in {(0, 0), (0, 1), (1, 0), (1, 1)} for p in pts)

    def test_count_zero(self):
        prob = flat_problem((0,), (5,))
        region = Subregion(0, None, (0,), (5,))
        assert sample_uniform_box(region, prob, 0, RandomStream(1)) == []

    def test_uniformity_chi_square(self):
        prob = flat_problem((0, 0), (9, 9))
        region = Subregion(0, None, (0, 0), (9, 9))
        pts = sample_uniform_box(region, prob, 20_000, RandomStream(3, "chi"))
        counts = np.zeros((10, 10))
        for x, y in pts:
            counts[x, y] += 1
        assert chi_square_p(counts.ravel(), 200.0) > 1e-3

    def test_constraint_rejection(self):
        prob = flat_problem((0, 0), (5, 5),
                            constraints=(LinearInequality((1.0, 1.0), 7.0, "<="),))
        region = Subregion(0, None, (0, 0), (5, 5))
        pts = sample_uniform_box(region, prob, 500, RandomStream(5))
        assert all(sum(p) <= 7 for p in pts)

    def test_empty_region_error(self):
        prob = flat_problem((0, 0), (5, 5))
        # contradictory cuts make the region empty; no witness available
        region = Subregion(0, None, (0, 0), (5, 5), cuts=(
            LinearInequality((1.0, 0.0), 2.0, "<"),
            LinearInequality((1.0, 0.0), 4.0, ">="),
        ))
        with pytest.raises(EmptyRegionError):
            sample_uniform_box(region, prob, 3, RandomStream(7),
                               WalkConfig(max_rejections=200))

    def test_determinism(self):
        prob = flat_problem((0, 0), (9, 9))
        region = Subregion(0, None, (0, 0), (9, 9))
        a = sample_uniform_box(region, prob, 50, RandomStream(11, "s"))
        b = sample_uniform_box(region, prob, 50, RandomStream(11, "s"))
        assert a == b


def triangle_region():
    """Box [0,3]^2 with the cut x0 + x1 < 4: exactly 10 feasible points."""
    prob = flat_problem((0, 0), (3, 3))
    region = Subregion(0, None, (0, 0), (3, 3),
                       cuts=(LinearInequality((1.0, 1.0), 4.0, "<"),),
                       witness=(0, 0))
    return prob, region


class TestHitAndRun:
    def test_single_point_region(self):
        prob = flat_problem((0, 0), (9, 9))
        region = Subregion(0, None, (4, 4), (4, 4), witness=(4, 4))
        pt = sample_hit_and_run(region, prob, (4, 4), RandomStream(1))
        assert pt == (4, 4)

    def test_infeasible_start_rejected(self):
        prob, region = triangle_region()
        with pytest.raises(InfeasiblePointError):
            sample_hit_and_run(region, prob, (3, 3), RandomStream(1))

    def test_stays_inside(self):
        prob, region = triangle_region()
        stream = RandomStream(3, "walks")
        for k in range(200):
            pt = sample_hit_and_run(region, prob, (0, 0), stream.child(k))
            assert region.contains(prob, pt)

    def test_uniformity_vs_enumeration(self):
        prob, region = triangle_region()
        support = enumerate_region(region, prob)
        assert len(support) == 10
        index = {p: i for i, p in enumerate(support)}
        counts = np.zeros(10)
        stream = RandomStream(9, "unif")
        n = 20_000
        cfg = WalkConfig(warmup_steps=40)
        for k in range(n):
            counts[index[sample_hit_and_run(region, prob, (0, 0),
                                            stream.child(k), cfg)]] += 1
        assert chi_square_p(counts, n / 10) > 1e-3

    def test_two_starts_same_distribution(self):
        prob, region = triangle_region()
        support = enumerate_region(region, prob)
        index = {p: i for i, p in enumerate(support)}
        cfg = WalkConfig(warmup_steps=40)
        for start in ((0, 0), (1, 2)):
            counts = np.zeros(10)
            stream = RandomStream(21, "inv", str(start))
            for k in range(15_000):
                counts[index[sample_hit_and_run(region, prob, start,
                                                stream.child(k), cfg)]] += 1
            assert chi_square_p(counts, 1500.0) > 1e-3


class TestSampleRegion:
    def test_pure_box_dispatch_matches(self):
        prob = flat_problem((0, 0), (9, 9))
        region = Subregion(0, None, (0, 0), (9, 9))
        archive = SampleArchive()
        a = sample_region(region, prob, 20, archive, RandomStream(4, "d"))
        b = sample_uniform_box(region, prob, 20, RandomStream(4, "d"))
        assert a == b

    def test_cut_region_feasible_outputs(self):
        prob, region = triangle_region()
        archive = SampleArchive()
        archive.record((1, 1), [0.5], iteration=0)
        pts = sample_region(region, prob, 5, archive, RandomStream(6, "cut"))
        assert len(pts) == 5
        assert all(region.contains(prob, p) for p in pts)

    def test_tight_cut_uses_walks_from_archive(self):
        # acceptance is 1/36 < 5%: the pilot routes to hit-and-run
        prob = flat_problem((0, 0), (5, 5))
        region = Subregion(0, None, (0, 0), (5, 5), cuts=(
            LinearInequality((1.0, 1.0), 0.5, "<"),), witness=None)
        archive = SampleArchive()
        archive.record((0, 0), [1.0], iteration=0)
        pts = sample_region(region, prob, 3, archive, RandomStream(8))
        assert pts == [(0, 0), (0, 0), (0, 0)]

    def test_empty_cut_region_raises(self):
        prob = flat_problem((0, 0), (5, 5))
        region = Subregion(0, None, (0, 0), (5, 5), cuts=(
            LinearInequality((1.0, 1.0), -1.0, "<"),))
        with pytest.raises(EmptyRegionError):
            sample_region(region, prob, 2, SampleArchive(), RandomStream(9))

    def test_count_zero(self):
        prob, region = triangle_region()
        assert sample_region(region, prob, 0, SampleArchive(), RandomStream(1)) == []

    def test_explicit_starts_override(self):
        prob = flat_problem((0, 0), (5, 5))
        region = Subregion(0, None, (0, 0), (5, 5), cuts=(
            LinearInequality((1.0, 1.0), 0.5, "<"),))
        pts = sample_region(region, prob, 2, None, RandomStream(3),
                            starts=[(0, 0)])
        assert pts == [(0, 0), (0, 0)]


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(warmup_steps=0)
    with pytest.raises(ValueError):
        WalkConfig(max_rejections=0)
    assert WalkConfig().warmup_for(3) == 60
    assert WalkConfig(warmup_steps=7).warmup_for(3) == 7

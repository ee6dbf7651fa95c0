"""Uniform sampling of feasible points from subregions.

Box-shaped regions use batched rejection sampling; regions carrying
hyperplane cuts use a coordinate-direction hit-and-run walk over the lattice
(one independent walk per requested point, started from an archived interior
point or the region witness).  A cheap pilot decides between the two for cut
regions.  Sampling is with replacement: re-drawn points are priced by the
archive's revisit rule, not redrawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegionError, InfeasiblePointError
from .regions import Subregion
from .streams import RandomStream

#: pilot fraction above which rejection sampling beats walking for cut regions
_PILOT_ACCEPTANCE = 0.05
_PILOT_DRAWS = 100


@dataclass(frozen=True)
class WalkConfig:
    """Hit-and-run parameters.  ``warmup_steps=None`` means 20 * dimension."""

    warmup_steps: int | None = None
    max_rejections: int = 10_000

    def __post_init__(self):
        if self.warmup_steps is not None and self.warmup_steps < 1:
            raise ValueError("warmup_steps must be >= 1")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")

    def warmup_for(self, dimension: int) -> int:
        return self.warmup_steps if self.warmup_steps is not None else 20 * dimension


def _acceptance_mask(region, problem, pts: np.ndarray) -> np.ndarray:
    ok = problem.feasible_rows(pts)
    for c in region.cuts:
        ok &= c.satisfied_rows(pts)
    return ok


def _rejection(region, problem, count, stream, max_rejections):
    """Uniform draws from the region box filtered by cuts and constraints.

    Returns the accepted points (possibly fewer than ``count`` if the
    rejection budget ran out) plus a flag saying whether it was exhausted.
    """
    lower = np.asarray(region.lower)
    upper = np.asarray(region.upper)
    accepted: list = []
    rejected = 0
    batch = min(4096, max(64, 2 * count))
    while len(accepted) < count:
        pts = stream.integers(lower, upper + 1, size=(batch, region.dimension))
        ok = _acceptance_mask(region, problem, pts)
        for row in pts[ok]:
            accepted.append(tuple(int(v) for v in row))
            if len(accepted) == count:
                break
        rejected += int(batch - ok.sum())
        if len(accepted) < count and rejected > max_rejections:
            return accepted, True
    return accepted, False


def _interval_bound(rest, coeff, bound, relation):
    """Tighten the move interval along one axis for a single constraint.

    Returns (kind, limit) where kind is 'hi' or 'lo'.  Candidate limits are
    computed in floats then nudged until they actually satisfy the relation,
    which makes the result exact on the integer lattice.
    """
    q = (bound - rest) / coeff

    def holds(t):
        v = coeff * t + rest
        if relation == "<":
            return v < bound
        if relation == "<=":
            return v <= bound
        return v >= bound

    if (coeff > 0) == (relation in ("<", "<=")):
        t = math.floor(q)
        while not holds(t):
            t -= 1
        while holds(t + 1):
            t += 1
        return "hi", t
    t = math.ceil(q)
    while not holds(t):
        t += 1
    while holds(t - 1):
        t -= 1
    return "lo", t


def _constraint_rows(region, problem):
    return [(tuple(float(v) for v in c.coefficients), c.relation, float(c.bound))
            for c in tuple(region.cuts) + tuple(problem.constraints)]


def _walk(region, problem, start, steps, stream, rows=None):
    """Coordinate-direction hit-and-run: ``steps`` moves from ``start``.

    Every move jumps to a uniform integer on the maximal feasible segment
    through the current point along a uniformly chosen axis, so every
    intermediate position stays inside region AND problem constraints.
    """
    p = region.dimension
    x = [int(v) for v in start]
    if rows is None:
        rows = _constraint_rows(region, problem)
    values = [sum(c * v for c, v in zip(coef, x)) for coef, _, _ in rows]
    lower, upper = region.lower, region.upper

    dims = stream.integers(0, p, size=steps)
    for d in dims:
        d = int(d)
        lo, hi = lower[d], upper[d]
        for i, (coef, rel, bound) in enumerate(rows):
            cd = coef[d]
            if cd == 0.0:
                continue
            rest = values[i] - cd * x[d]
            kind, limit = _interval_bound(rest, cd, bound, rel)
            if kind == "hi":
                if limit < hi:
                    hi = limit
            elif limit > lo:
                lo = limit
        # the current position is always inside the interval
        t = int(stream.integers(lo, hi + 1))
        if t != x[d]:
            delta = t - x[d]
            for i, (coef, _, _) in enumerate(rows):
                cd = coef[d]
                if cd != 0.0:
                    values[i] += cd * delta
            x[d] = t
    return tuple(x)


def sample_hit_and_run(region: Subregion, problem, start, stream: RandomStream,
                       cfg: WalkConfig = WalkConfig()) -> tuple:
    """One uniform-ish point: a warmed-up lattice walk from ``start``."""
    if not region.contains(problem, start):
        raise InfeasiblePointError(f"walk start {tuple(start)} is outside the region")
    steps = cfg.warmup_for(region.dimension)
    return _walk(region, problem, start, steps, stream)


def sample_uniform_box(region: Subregion, problem, count, stream: RandomStream,
                       cfg: WalkConfig = WalkConfig()) -> list:
    """``count`` uniform points via rejection; duplicates allowed.

    If the rejection budget is exhausted, the remaining points come from
    hit-and-run walks started at the region witness; with no witness either,
    the region is reported empty.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return []
    accepted, exhausted = _rejection(region, problem, count, stream, cfg.max_rejections)
    if not exhausted:
        return accepted
    start = region.witness if region.witness is not None else (
        accepted[0] if accepted else None)
    if start is None or not region.contains(problem, start):
        raise EmptyRegionError(
            f"region {region.id}: rejection exhausted and no witness available")
    steps = cfg.warmup_for(region.dimension)
    while len(accepted) < count:
        accepted.append(_walk(region, problem, start, steps, stream))
    return accepted


def sample_region(region: Subregion, problem, count, archive, stream: RandomStream,
                  cfg: WalkConfig = WalkConfig(), starts=None) -> list:
    """Dispatch: rejection for box regions, hit-and-run for cut regions.

    Cut regions first estimate the box-to-region acceptance with a small
    pilot; when cuts are loose enough (> 5% acceptance) rejection is cheaper
    than walking.  Walks start from a uniformly chosen archived point inside
    the region, falling back to the region witness; callers that already
    track the archived points per region can pass them as ``starts``.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return []
    if not region.cuts:
        return sample_uniform_box(region, problem, count, stream, cfg)

    lower = np.asarray(region.lower)
    upper = np.asarray(region.upper)
    pilot = stream.integers(lower, upper + 1, size=(_PILOT_DRAWS, region.dimension))
    acceptance = float(_acceptance_mask(region, problem, pilot).mean())
    if acceptance > _PILOT_ACCEPTANCE:
        return sample_uniform_box(region, problem, count, stream, cfg)

    if starts is None and archive is not None:
        starts = [pt for pt, _, _ in archive.points_in(region, problem)]
    starts = list(starts) if starts else []
    if not starts:
        if region.witness is not None and region.contains(problem, region.witness):
            starts = [region.witness]
        else:
            raise EmptyRegionError(
                f"region {region.id}: no interior start for hit-and-run")
    steps = cfg.warmup_for(region.dimension)
    rows = _constraint_rows(region, problem)
    out = []
    for _ in range(count):
        start = starts[int(stream.integers(0, len(starts)))]
        out.append(_walk(region, problem, start, steps, stream, rows))
    return out

"""Discrete simulation-based optimization problems over integer lattices.

A problem is a finite feasible set (an integer hyperbox intersected with
linear inequality constraints) plus a stochastic oracle returning noisy
observations of the objective.  The canonical sense is maximization; a
problem whose user-facing objective is minimized carries ``negated=True``
and negates at the oracle boundary, so reports re-negate for display.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    FeasibleSetTooLarge,
    InfeasiblePointError,
)
from .streams import RandomStream
from .validation import as_int_array, as_point

RELATIONS = ("<", "<=", ">=")


@dataclass(frozen=True)
class LinearInequality:
    """A linear constraint ``a . x REL b`` with REL one of '<', '<=', '>='."""

    coefficients: tuple
    bound: float
    relation: str = "<="

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "bound", float(self.bound))
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {self.relation!r}")
        if not any(c != 0.0 for c in coeffs):
            raise ValueError("at least one coefficient must be nonzero")

    def value(self, point) -> float:
        x = np.asarray(point, dtype=np.float64)
        if x.shape != (len(self.coefficients),):
            raise DimensionMismatchError(
                f"point length {x.size} != coefficient length {len(self.coefficients)}"
            )
        return float(np.dot(self.coefficients, x))

    def satisfied(self, point) -> bool:
        v = self.value(point)
        if self.relation == "<":
            return v < self.bound
        if self.relation == "<=":
            return v <= self.bound
        return v >= self.bound

    def satisfied_rows(self, points: np.ndarray) -> np.ndarray:
        """Vectorized ``satisfied`` over an (n, p) array of points."""
        v = points @ np.asarray(self.coefficients)
        if self.relation == "<":
            return v < self.bound
        if self.relation == "<=":
            return v <= self.bound
        return v >= self.bound

    def __str__(self):
        terms = ",".join(repr(c) for c in self.coefficients)
        return f"{terms} {self.relation} {self.bound!r}"


class ProblemDefinition:
    """Base class for problems: box bounds, linear constraints, and an oracle.

    Subclasses implement ``_observe_many(x, n, stream)`` returning ``n``
    independent observations at integer point ``x``.  Construction verifies
    the feasible set is nonempty by locating one feasible witness point.
    Instances are immutable after construction except for the simulator
    call counter, so one instance must not be shared across concurrent runs.
    """

    def __init__(self, dimension, lower, upper, constraints=(), negated=False,
                 name="problem"):
        self.dimension = int(dimension)
        self.lower = tuple(int(v) for v in lower)
        self.upper = tuple(int(v) for v in upper)
        if len(self.lower) != self.dimension or len(self.upper) != self.dimension:
            raise DimensionMismatchError("bounds must have length equal to dimension")
        if any(l > u for l, u in zip(self.lower, self.upper)):
            raise ValueError("lower bound exceeds upper bound")
        self.constraints = tuple(constraints)
        for c in self.constraints:
            if len(c.coefficients) != self.dimension:
                raise DimensionMismatchError("constraint length != dimension")
        self.negated = bool(negated)
        self.name = name
        self._lower_arr = np.asarray(self.lower, dtype=np.int64)
        self._upper_arr = np.asarray(self.upper, dtype=np.int64)
        self._calls = 0
        self.witness = self._find_witness()

    # -- feasibility ------------------------------------------------------

    def is_feasible(self, point) -> bool:
        x = as_int_array(point, self.dimension)
        if (x < self._lower_arr).any() or (x > self._upper_arr).any():
            return False
        return all(c.satisfied(x) for c in self.constraints)

    def feasible_rows(self, points: np.ndarray) -> np.ndarray:
        """Vectorized feasibility over an (n, p) integer array."""
        ok = ((points >= self._lower_arr) & (points <= self._upper_arr)).all(axis=1)
        for c in self.constraints:
            ok &= c.satisfied_rows(points)
        return ok

    def _find_witness(self):
        probes = [
            np.clip(np.zeros(self.dimension, dtype=np.int64),
                    self._lower_arr, self._upper_arr),
            self._lower_arr,
            self._upper_arr,
            (self._lower_arr + self._upper_arr) // 2,
        ]
        for probe in probes:
            pt = tuple(int(v) for v in probe)
            if self.is_feasible(pt):
                return pt
        for count, pt in enumerate(self._iter_box()):
            if count >= 50_000:
                break
            if all(c.satisfied(np.asarray(pt)) for c in self.constraints):
                return pt
        raise ValueError(f"problem {self.name!r}: could not find any feasible point")

    def _iter_box(self):
        ranges = [range(l, u + 1) for l, u in zip(self.lower, self.upper)]
        return itertools.product(*ranges)

    def enumerate_feasible(self, limit) -> list:
        """All feasible points in lexicographic order.

        Raises FeasibleSetTooLarge as soon as ``limit + 1`` feasible points
        have been visited.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        out = []
        for pt in self._iter_box():
            if all(c.satisfied(np.asarray(pt)) for c in self.constraints):
                out.append(pt)
                if len(out) > limit:
                    raise FeasibleSetTooLarge(limit)
        return out

    # -- oracle -----------------------------------------------------------

    @property
    def call_count(self) -> int:
        """Cumulative simulator invocations (one per observation)."""
        return self._calls

    def evaluate(self, point, stream: RandomStream) -> float:
        """One stochastic observation of the objective at ``point``."""
        return float(self.evaluate_many(point, 1, stream)[0])

    def evaluate_many(self, point, n, stream: RandomStream) -> np.ndarray:
        """``n`` independent observations; increments the call counter by n."""
        pt = as_point(point, self.dimension)
        if not self.is_feasible(pt):
            raise InfeasiblePointError(f"point {pt} is infeasible for {self.name!r}")
        if n < 1:
            raise ValueError("n must be >= 1")
        obs = np.asarray(self._observe_many(np.asarray(pt, dtype=np.int64), n, stream),
                         dtype=np.float64)
        self._calls += int(n)
        return obs

    def _observe_many(self, x: np.ndarray, n: int, stream: RandomStream) -> np.ndarray:
        raise NotImplementedError

    # -- reporting --------------------------------------------------------

    def to_display(self, value: float) -> float:
        """Map an internal (maximization-sense) value to the user-facing scale."""
        return -value if self.negated else value

    def true_value(self, point):
        """Deterministic expected internal value at ``point``, if known."""
        return None

    def true_optimum(self):
        """(point, internal value) of the known global optimum, or None."""
        return None


class CallableProblem(ProblemDefinition):
    """A lattice problem built from a deterministic function plus Gaussian noise.

    ``fn(point) -> float`` is interpreted in the internal maximization sense.
    Useful for constructing small noiseless or synthetic test problems.
    """

    def __init__(self, lower, upper, fn, noise_sigma=0.0, constraints=(),
                 name="callable"):
        self.fn = fn
        self.noise_sigma = float(noise_sigma)
        super().__init__(len(lower), lower, upper, constraints=constraints,
                         negated=False, name=name)

    def _observe_many(self, x, n, stream):
        base = float(self.fn(tuple(int(v) for v in x)))
        return base + stream.normal(0.0, self.noise_sigma, size=n)

    def true_value(self, point):
        return float(self.fn(as_point(point, self.dimension)))

    def true_optimum(self):
        best = None
        for pt in self.enumerate_feasible(limit=1_000_000):
            v = self.true_value(pt)
            if best is None or v > best[1]:
                best = (pt, v)
        return best


def griewank_value(real_coords) -> float:
    """The standard multimodal benchmark value at a real-valued point:
    ``1 + sum_i x_i^2/4000 - prod_i cos(x_i / sqrt(i+1))``.
    """
    coords = np.asarray(real_coords, dtype=np.float64)
    if coords.ndim != 1 or coords.size == 0:
        raise ValueError("expected a nonempty 1-D coordinate vector")
    quad = float(np.sum(coords * coords)) / 4000.0
    prod = 1.0
    for i, v in enumerate(coords):
        prod *= math.cos(float(v) / math.sqrt(i + 1.0))
    return 1.0 + quad - prod


def _griewank_rows(points: np.ndarray) -> np.ndarray:
    quad = (points * points).sum(axis=1) / 4000.0
    denom = np.sqrt(np.arange(1, points.shape[1] + 1, dtype=np.float64))
    prod = np.cos(points / denom).prod(axis=1)
    return 1.0 + quad - prod


class GriewankLatticeProblem(ProblemDefinition):
    """The benchmark function discretized onto an integer lattice.

    The continuous box ``[domain_low, domain_high]`` is divided into
    ``lattice_points_per_dim`` points per dimension.  Decision variables are
    lattice indices shifted to be symmetric integers (for 101 points: -50..50),
    mapped affinely back to real coordinates for evaluation.  Observations are
    the (negated, since this is a minimization problem) function value plus
    zero-mean Gaussian noise with standard deviation ``noise_sigma``.
    """

    def __init__(self, domain_low=(-5.0, -5.0), domain_high=(5.0, 5.0),
                 lattice_points_per_dim=101, noise_sigma=0.01, name=None):
        low = tuple(float(v) for v in domain_low)
        high = tuple(float(v) for v in domain_high)
        if len(low) != len(high):
            raise DimensionMismatchError("domain bounds disagree on dimension")
        m = int(lattice_points_per_dim)
        if m < 2:
            raise ValueError("lattice_points_per_dim must be >= 2")
        p = len(low)
        shift = (m - 1) // 2
        self.domain_low = low
        self.domain_high = high
        self.lattice_points_per_dim = m
        self.noise_sigma = float(noise_sigma)
        self.step = tuple((h - l) / (m - 1) for l, h in zip(low, high))
        self.center = tuple(l + shift * s for l, s in zip(low, self.step))
        super().__init__(
            p,
            lower=(-shift,) * p,
            upper=(m - 1 - shift,) * p,
            negated=True,
            name=name or "griewank",
        )
        self._optimum = None

    def to_real(self, point) -> np.ndarray:
        x = as_int_array(point, self.dimension)
        return np.asarray(self.center) + x * np.asarray(self.step)

    def _observe_many(self, x, n, stream):
        g = griewank_value(np.asarray(self.center) + x * np.asarray(self.step))
        return -(g + stream.normal(0.0, self.noise_sigma, size=n))

    def true_value(self, point):
        return -griewank_value(self.to_real(point))

    def true_optimum(self):
        if self._optimum is None:
            grids = np.meshgrid(
                *[np.arange(l, u + 1) for l, u in zip(self.lower, self.upper)],
                indexing="ij",
            )
            pts = np.stack([g.ravel() for g in grids], axis=1)
            reals = np.asarray(self.center) + pts * np.asarray(self.step)
            vals = _griewank_rows(reals)
            i = int(np.argmin(vals))
            self._optimum = (tuple(int(v) for v in pts[i]), -float(vals[i]))
        return self._optimum


# -- synthetic fleet assignment ------------------------------------------


def _default_fleet_geometry(stations: int, stream: RandomStream):
    """Station coordinates in clumps, per-station demand intensity.

    Returns (coords, per-station base rates).  Stations are scattered around
    a handful of clump centers; two clump pairs sit close enough that
    radius-based clusters overlap across them, so demand spills between
    neighborhoods and cluster totals drive the profit surface.
    """
    centers = [(1.0, 1.0), (2.3, 1.7), (5.5, 1.0), (8.5, 1.2), (9.5, 2.5), (5.0, 5.5)]
    hotness = [2.2, 1.6, 0.9, 1.2, 0.5, 1.8]
    coords = []
    rates = []
    for i in range(stations):
        clump = i % len(centers)
        cx, cy = centers[clump]
        jitter = stream.normal(0.0, 0.4, size=2)
        coords.append((cx + float(jitter[0]), cy + float(jitter[1])))
        # rates low enough that at high demand the profit peaks at an interior
        # cluster total: beyond it, extra vehicles only add parking cost
        rates.append(2.4 * hotness[clump])
    return coords, rates


def clusters_from_coordinates(coords, radius: float):
    """One cluster per station: all stations within ``radius``; duplicates removed."""
    pts = np.asarray(coords, dtype=np.float64)
    n = pts.shape[0]
    seen = {}
    for i in range(n):
        d = np.sqrt(((pts - pts[i]) ** 2).sum(axis=1))
        members = tuple(int(j) for j in np.nonzero(d <= radius)[0])
        seen.setdefault(members, None)
    return list(seen.keys())


class SyntheticFleetProblem(ProblemDefinition):
    """A fleet-assignment analogue with analytic demand.

    ``x_i`` vehicles are parked at station ``i`` subject to per-station
    capacities and a total-fleet budget.  Demand arrives per cluster of
    nearby stations: one observation is

        sum_j r_j * min(sum_{i in C_j} x_i, d_j)  -  sum_i c_i x_i

    with ``d_j ~ Poisson(lambda_j)`` drawn fresh each replication.  Clusters
    may overlap, which is exactly the spillover structure that makes cluster
    totals better splitting features than per-station counts.
    """

    def __init__(self, stations=23, capacity=16, total_fleet=211, clusters=None,
                 cluster_rates=None, revenue_per_serve=None, costs=None,
                 demand_scale=1.0, cluster_radius=1.6, geometry_seed=7,
                 name="fleet-synthetic"):
        stations = int(stations)
        caps = np.full(stations, int(capacity), dtype=np.int64) \
            if np.isscalar(capacity) else np.asarray(capacity, dtype=np.int64)
        if caps.size != stations:
            raise DimensionMismatchError("capacities must have one entry per station")
        geo = RandomStream(geometry_seed, "fleet-geometry")
        coords, base_rates = _default_fleet_geometry(stations, geo)
        self.coordinates = coords
        if clusters is None:
            clusters = clusters_from_coordinates(coords, cluster_radius)
        self.clusters = [tuple(sorted(int(i) for i in c)) for c in clusters]
        for c in self.clusters:
            if not c:
                raise ValueError("clusters must be nonempty")
            if any(i < 0 or i >= stations for i in c):
                raise ValueError("cluster index out of range")
        covered = set(itertools.chain.from_iterable(self.clusters))
        if covered != set(range(stations)):
            raise ValueError("every station must belong to at least one cluster")
        self.demand_scale = float(demand_scale)
        if cluster_rates is None:
            cluster_rates = [
                self.demand_scale * sum(base_rates[i] for i in c) for c in self.clusters
            ]
        self.cluster_rates = np.asarray(cluster_rates, dtype=np.float64)
        if revenue_per_serve is None:
            rev = geo.child("revenue")
            revenue_per_serve = 10.0 + rev.random(len(self.clusters)) * 3.0 - 1.5
        self.revenue_per_serve = np.asarray(revenue_per_serve, dtype=np.float64)
        if costs is None:
            cst = geo.child("costs")
            costs = 4.0 + cst.random(stations) * 1.0 - 0.5
        self.costs = np.asarray(costs, dtype=np.float64)
        if self.cluster_rates.size != len(self.clusters) \
                or self.revenue_per_serve.size != len(self.clusters):
            raise DimensionMismatchError("per-cluster parameter length mismatch")
        if self.costs.size != stations:
            raise DimensionMismatchError("costs must have one entry per station")
        self.total_fleet = int(total_fleet)
        self.capacities = caps
        # membership matrix: row j selects stations in cluster j
        self._membership = np.zeros((len(self.clusters), stations), dtype=np.float64)
        for j, c in enumerate(self.clusters):
            self._membership[j, list(c)] = 1.0
        super().__init__(
            stations,
            lower=(0,) * stations,
            upper=tuple(int(v) for v in caps),
            constraints=(LinearInequality((1.0,) * stations, self.total_fleet, "<="),),
            negated=False,
            name=name,
        )

    def _observe_many(self, x, n, stream):
        supply = self._membership @ x
        demand = stream.poisson(self.cluster_rates, size=(n, self.cluster_rates.size))
        served = np.minimum(supply[None, :], demand)
        revenue = served @ self.revenue_per_serve
        return revenue - float(self.costs @ x)

    def true_value(self, point):
        """Exact expected profit via E[min(y, Poisson(lam))]."""
        x = as_int_array(point, self.dimension)
        supply = self._membership @ x
        total = -float(self.costs @ x)
        for j, lam in enumerate(self.cluster_rates):
            total += self.revenue_per_serve[j] * _expected_min_poisson(int(supply[j]), lam)
        return total

    def uniform_fill(self) -> tuple:
        """A deterministic 'reasonably good' assignment: spread the fleet evenly."""
        base = self.total_fleet // self.dimension
        rem = self.total_fleet - base * self.dimension
        x = np.full(self.dimension, base, dtype=np.int64)
        x[:rem] += 1
        x = np.minimum(x, self.capacities)
        return tuple(int(v) for v in x)


def _expected_min_poisson(y: int, lam: float) -> float:
    """E[min(y, D)] for D ~ Poisson(lam) and integer y >= 0."""
    if y <= 0:
        return 0.0
    if lam <= 0.0:
        return 0.0
    # E[min(y, D)] = y - sum_{k=0}^{y-1} (y - k) P(D = k)
    pmf = math.exp(-lam)
    acc = y * pmf
    for k in range(1, y):
        pmf *= lam / k
        acc += (y - k) * pmf
    return y - acc


PROBLEM_REGISTRY = {
    "griewank-centered": lambda **kw: GriewankLatticeProblem(
        name="griewank-centered", **kw),
    "griewank-shifted": lambda **kw: GriewankLatticeProblem(
        domain_low=(-1.0, -1.0), domain_high=(9.0, 9.0),
        name="griewank-shifted", **kw),
    "fleet-synthetic": lambda **kw: SyntheticFleetProblem(**kw),
}


def make_problem(name: str, **overrides) -> ProblemDefinition:
    """Instantiate a built-in problem by name with parameter overrides."""
    try:
        factory = PROBLEM_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(PROBLEM_REGISTRY))
        raise ValueError(f"unknown problem {name!r}; known: {known}") from None
    return factory(**overrides)

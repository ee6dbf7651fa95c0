"""Subregions of the feasible lattice: hyperboxes plus accumulated linear cuts.

A subregion is the unit the optimizer partitions, samples, and bounds.
Membership is the conjunction of the region box, the region's inherited
cuts, and the owning problem's constraints.  Axis-aligned cuts are always
materialized as box tightening so purely box-shaped regions stay in the
cheap rejection-sampling regime.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatchError, FeasibleSetTooLarge
from .problems import LinearInequality, ProblemDefinition
from .validation import as_int_array

#: point budget below which emptiness/singleton questions are answered exactly
ENUMERATION_BUDGET = 4096


@dataclass(frozen=True)
class Subregion:
    id: int
    parent_id: int | None
    lower: tuple
    upper: tuple
    cuts: tuple = ()
    witness: tuple | None = None

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise DimensionMismatchError("bounds disagree on dimension")
        if any(l > u for l, u in zip(self.lower, self.upper)):
            raise ValueError(f"empty box: lower={self.lower} upper={self.upper}")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> tuple:
        return tuple(u - l for l, u in zip(self.lower, self.upper))

    @property
    def box_point_count(self) -> int:
        return math.prod(u - l + 1 for l, u in zip(self.lower, self.upper))

    def contains_box(self, point) -> bool:
        x = as_int_array(point, self.dimension)
        return bool(((x >= np.asarray(self.lower)) & (x <= np.asarray(self.upper))).all())

    def contains_cuts(self, point) -> bool:
        return all(c.satisfied(np.asarray(point)) for c in self.cuts)

    def contains(self, problem: ProblemDefinition, point) -> bool:
        """Region box AND region cuts AND problem constraints."""
        x = as_int_array(point, self.dimension)
        return (self.contains_box(x) and self.contains_cuts(x)
                and problem.is_feasible(x))

    def contains_rows(self, problem: ProblemDefinition, points: np.ndarray) -> np.ndarray:
        ok = ((points >= np.asarray(self.lower)) & (points <= np.asarray(self.upper))).all(axis=1)
        for c in self.cuts:
            ok &= c.satisfied_rows(points)
        ok &= problem.feasible_rows(points)
        return ok

    def with_witness(self, point) -> "Subregion":
        return replace(self, witness=tuple(int(v) for v in point))

    def to_line(self) -> str:
        """One-line text form: id|parent|lo:hi;lo:hi|cut|cut with each cut as
        comma-joined coefficients, relation, threshold."""
        parent = "-" if self.parent_id is None else str(self.parent_id)
        bounds = ";".join(f"{l}:{u}" for l, u in zip(self.lower, self.upper))
        cuts = "|".join(
            ",".join(repr(c) for c in cut.coefficients) + f",{cut.relation},{cut.bound!r}"
            for cut in self.cuts
        )
        base = f"{self.id}|{parent}|{bounds}"
        return f"{base}|{cuts}" if cuts else base


@dataclass(frozen=True)
class Partition:
    """A disjoint, covering set of nonempty subregions of one origin region."""

    members: tuple
    origin: int


def root_region(problem: ProblemDefinition, ids) -> Subregion:
    return Subregion(
        id=next(ids), parent_id=None,
        lower=problem.lower, upper=problem.upper,
        cuts=(), witness=problem.witness,
    )


def longest_dimension(region: Subregion) -> int:
    """Index of the widest box dimension; ties break to the lowest index."""
    widths = region.widths
    return int(max(range(len(widths)), key=lambda i: (widths[i], -i)))


def split_box_equal(region: Subregion, dim: int, omega: int, ids) -> Partition:
    """Divide the region's box into ``omega`` consecutive slabs along ``dim``.

    Slab sizes differ by at most one, larger slabs first.  If the box holds
    fewer than ``omega`` distinct values along ``dim``, one slab per value is
    produced.  Cuts are inherited unchanged; the box is split regardless of
    any cuts present.
    """
    if omega < 2:
        raise ValueError(f"omega must be >= 2, got {omega}")
    if not 0 <= dim < region.dimension:
        raise ValueError(f"dim {dim} out of range")
    lo, hi = region.lower[dim], region.upper[dim]
    width = hi - lo + 1
    k = min(omega, width)
    base, rem = divmod(width, k)
    members = []
    start = lo
    for slab in range(k):
        size = base + (1 if slab < rem else 0)
        lower = list(region.lower)
        upper = list(region.upper)
        lower[dim] = start
        upper[dim] = start + size - 1
        child = Subregion(
            id=next(ids), parent_id=region.id,
            lower=tuple(lower), upper=tuple(upper), cuts=region.cuts,
        )
        if region.witness is not None and child.contains_box(region.witness):
            child = child.with_witness(region.witness)
        members.append(child)
        start += size
    return Partition(members=tuple(members), origin=region.id)


def apply_cut(region: Subregion, coefficients, threshold: float, ids):
    """Split a region by ``a . x < t`` / ``a . x >= t``.

    An axis-aligned cut (exactly one coefficient, equal to +1) tightens the
    children's boxes instead of storing an inequality.  The two children tile
    the parent exactly: every lattice point lands on one side.
    """
    coeffs = tuple(float(c) for c in coefficients)
    if len(coeffs) != region.dimension:
        raise DimensionMismatchError("coefficient length != region dimension")
    nonzero = [i for i, c in enumerate(coeffs) if c != 0.0]
    if not nonzero:
        raise ValueError("cut coefficients must not all be zero")
    threshold = float(threshold)

    if len(nonzero) == 1 and coeffs[nonzero[0]] == 1.0:
        d = nonzero[0]
        right_lo = math.ceil(threshold)
        left_hi = right_lo - 1
        if not region.lower[d] <= left_hi or not right_lo <= region.upper[d]:
            raise ValueError(
                f"axis cut at {threshold} does not separate box range "
                f"[{region.lower[d]}, {region.upper[d]}] along dim {d}"
            )
        llo, lup = list(region.lower), list(region.upper)
        rlo, rup = list(region.lower), list(region.upper)
        lup[d] = left_hi
        rlo[d] = right_lo
        left = Subregion(next(ids), region.id, tuple(llo), tuple(lup), region.cuts)
        right = Subregion(next(ids), region.id, tuple(rlo), tuple(rup), region.cuts)
    else:
        left = Subregion(next(ids), region.id, region.lower, region.upper,
                         region.cuts + (LinearInequality(coeffs, threshold, "<"),))
        right = Subregion(next(ids), region.id, region.lower, region.upper,
                          region.cuts + (LinearInequality(coeffs, threshold, ">="),))

    if region.witness is not None:
        w = region.witness
        for side in (left, right):
            if side.contains_box(w) and side.contains_cuts(w):
                if side is left:
                    left = left.with_witness(w)
                else:
                    right = right.with_witness(w)
                break
    return left, right


def box_lattice(region: Subregion) -> np.ndarray:
    """All box lattice points, lexicographic row order.  Caller must have
    checked ``box_point_count`` against a budget first."""
    axes = [np.arange(l, u + 1, dtype=np.int64)
            for l, u in zip(region.lower, region.upper)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def enumerate_region(region: Subregion, problem: ProblemDefinition,
                     limit: int | None = None) -> list:
    """Feasible points of the region in lexicographic order.

    With a ``limit``, raises FeasibleSetTooLarge once limit+1 points are seen.
    """
    if region.box_point_count <= ENUMERATION_BUDGET:
        pts = box_lattice(region)
        ok = region.contains_rows(problem, pts)
        rows = [tuple(int(v) for v in r) for r in pts[ok]]
        if limit is not None and len(rows) > limit:
            raise FeasibleSetTooLarge(limit)
        return rows
    out = []
    ranges = [range(l, u + 1) for l, u in zip(region.lower, region.upper)]
    for pt in itertools.product(*ranges):
        arr = np.asarray(pt)
        if region.contains_cuts(arr) and problem.is_feasible(arr):
            out.append(pt)
            if limit is not None and len(out) > limit:
                raise FeasibleSetTooLarge(limit)
    return out


def is_singleton(region: Subregion, problem: ProblemDefinition) -> bool:
    """True iff the region holds exactly one feasible point.

    All box widths zero is an immediate yes; boxes up to the enumeration
    budget are decided exactly; larger regions answer False conservatively
    (the only cost of a wrong False is one redundant partition attempt).
    """
    if all(w == 0 for w in region.widths):
        return True
    if region.box_point_count <= ENUMERATION_BUDGET:
        pts = box_lattice(region)
        return int(region.contains_rows(problem, pts).sum()) == 1
    return False


def find_witness(region: Subregion, problem: ProblemDefinition,
                 candidates=()) -> tuple | None:
    """Locate a feasible point inside the region, or prove emptiness.

    Returns a witness point, or None when none was found.  ``candidates``
    (e.g. archived points) are tried first, then box corners and the box
    midpoint, then exact enumeration when the box is small enough.
    """
    for pt in candidates:
        if region.contains(problem, pt):
            return tuple(int(v) for v in pt)
    if region.witness is not None and region.contains(problem, region.witness):
        return region.witness
    probes = [
        region.lower,
        region.upper,
        tuple((l + u) // 2 for l, u in zip(region.lower, region.upper)),
    ]
    for pt in probes:
        if region.contains(problem, pt):
            return tuple(int(v) for v in pt)
    if region.box_point_count <= ENUMERATION_BUDGET:
        pts = box_lattice(region)
        ok = region.contains_rows(problem, pts)
        hit = np.argmax(ok)
        if ok[hit]:
            return tuple(int(v) for v in pts[hit])
        return None
    return None


def finalize_partition(origin: Subregion, children, problem: ProblemDefinition,
                       known_points=()) -> Partition:
    """Attach witnesses and drop provably empty members.

    Members whose emptiness cannot be decided within the enumeration budget
    are kept without a witness; sampling treats them as possibly empty and
    allocates zero if they never produce a point.
    """
    kept = []
    for child in children:
        w = find_witness(child, problem, candidates=known_points)
        if w is not None:
            kept.append(child.with_witness(w))
        elif child.box_point_count > ENUMERATION_BUDGET:
            kept.append(child)
        # else: provably empty, dropped; siblings still cover the origin
    if not kept:
        raise ValueError("partition would be empty: origin region has no feasible point")
    return Partition(members=tuple(kept), origin=origin.id)


def validate_partition(origin: Subregion, partition: Partition,
                       problem: ProblemDefinition) -> None:
    """Exhaustively check disjointness, coverage, and witness validity.

    Only usable when the origin box fits the enumeration budget; used by
    tests and debug runs.
    """
    if origin.box_point_count > ENUMERATION_BUDGET:
        raise ValueError("origin region too large to validate exhaustively")
    pts = box_lattice(origin)
    inside = origin.contains_rows(problem, pts)
    membership = np.zeros(len(pts), dtype=np.int64)
    for member in partition.members:
        membership += member.contains_rows(problem, pts).astype(np.int64)
    if (membership[inside] != 1).any():
        bad = pts[inside & (membership != 1)][:5]
        raise AssertionError(f"partition not a disjoint cover; e.g. {bad.tolist()}")
    if (membership[~inside] != 0).any():
        bad = pts[(~inside) & (membership != 0)][:5]
        raise AssertionError(f"partition leaks outside origin; e.g. {bad.tolist()}")
    for member in partition.members:
        if member.witness is None:
            if not member.contains_rows(problem, pts).any():
                raise AssertionError(f"member {member.id} is empty")
        elif not member.contains(problem, member.witness):
            raise AssertionError(f"member {member.id} witness invalid")

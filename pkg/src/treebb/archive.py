"""The archive of evaluated points: replication counts and running statistics.

Every evaluated point keeps first and second moments only (memory grows with
distinct points, not replications); raw observation traces are retained only
in debug mode.  Points are keyed by their exact coordinate tuple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_point


@dataclass
class ObservationRecord:
    point: tuple
    n: int
    total: float
    total_sq: float
    first_iteration: int
    raw: list | None = None

    @property
    def mean(self) -> float:
        return self.total / self.n

    @property
    def variance(self) -> float:
        """Sample variance from the stored moments (clamped at zero)."""
        if self.n < 2:
            return 0.0
        v = (self.total_sq - self.total * self.total / self.n) / (self.n - 1)
        return max(v, 0.0)


class SampleArchive:
    """All evaluated points with their cumulative statistics."""

    def __init__(self, debug: bool = False):
        self.records: dict = {}
        self.total_replications = 0
        self.debug = debug

    def __len__(self):
        return len(self.records)

    def __contains__(self, point):
        return as_point(point) in self.records

    def record(self, point, observations, iteration: int) -> ObservationRecord:
        """Fold new observations into the point's running statistics."""
        obs = np.asarray(observations, dtype=np.float64)
        if obs.size == 0:
            raise ValueError("observations must be nonempty")
        key = as_point(point)
        rec = self.records.get(key)
        if rec is None:
            rec = ObservationRecord(
                point=key, n=0, total=0.0, total_sq=0.0,
                first_iteration=int(iteration),
                raw=[] if self.debug else None,
            )
            self.records[key] = rec
        rec.n += int(obs.size)
        rec.total += float(obs.sum())
        rec.total_sq += float((obs * obs).sum())
        if rec.raw is not None:
            rec.raw.extend(float(v) for v in obs)
        self.total_replications += int(obs.size)
        return rec

    def cumulative_mean(self, point) -> float:
        key = as_point(point)
        try:
            return self.records[key].mean
        except KeyError:
            raise KeyError(f"point {key} has never been evaluated") from None

    def count(self, point) -> int:
        return self.records[as_point(point)].n

    def replication_plan(self, sampled_points, dn_f: int, dn_a: int) -> list:
        """Replications owed to each distinct point of one iteration's sample set.

        A point absent from the archive earns ``dn_f`` per occurrence, a
        revisited point ``dn_a`` per occurrence; multiplicity within the
        sample set multiplies the increment.  Output order is first-encounter
        order.
        """
        if dn_f < 1 or dn_a < 1:
            raise ValueError("replication increments must be >= 1")
        multiplicity: dict = {}
        for raw in sampled_points:
            key = as_point(raw)
            multiplicity[key] = multiplicity.get(key, 0) + 1
        return [
            (key, m * (dn_a if key in self.records else dn_f))
            for key, m in multiplicity.items()
        ]

    def points_in(self, region, problem) -> list:
        """(point, mean, n) for every archived point the region contains."""
        out = []
        for key, rec in self.records.items():
            if region.contains(problem, key):
                out.append((key, rec.mean, rec.n))
        return out

    def incumbent(self) -> tuple:
        """The archived point with maximal cumulative mean.

        Ties break toward larger replication count (better estimated), then
        toward the lexicographically smaller point.
        """
        if not self.records:
            raise KeyError("archive is empty")
        best = None
        for key, rec in self.records.items():
            if best is None:
                best = rec
                continue
            if (rec.mean, rec.n, tuple(-c for c in rec.point)) > \
                    (best.mean, best.n, tuple(-c for c in best.point)):
                best = rec
        return best.point, best.mean

    def write_csv(self, fobj) -> None:
        """Dump as CSV: x_0..x_{p-1}, n, mean, variance, first_iteration."""
        if not self.records:
            fobj.write("n,mean,variance,first_iteration\n")
            return
        p = len(next(iter(self.records)))
        header = [f"x_{i}" for i in range(p)] + ["n", "mean", "variance", "first_iteration"]
        fobj.write(",".join(header) + "\n")
        for key, rec in self.records.items():
            row = [str(c) for c in key]
            row += [str(rec.n), repr(rec.mean), repr(rec.variance), str(rec.first_iteration)]
            fobj.write(",".join(row) + "\n")

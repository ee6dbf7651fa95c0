import numpy as np
import pytest

from treebb import CallableProblem, GriewankLatticeProblem


@pytest.fixture
def tiny_box_problem():
    """An unconstrained 10x5 lattice with a smooth deterministic objective."""
    return CallableProblem(
        lower=(0, 0), upper=(9, 4),
        fn=lambda pt: -((pt[0] - 6) ** 2 + 2.0 * (pt[1] - 1) ** 2),
        name="tiny-box",
    )


@pytest.fixture
def centered_griewank():
    return GriewankLatticeProblem()


def brute_force_best_split(Fm, y, idx, min_leaf):
    """Independent oracle: every (column, threshold) pair, direct SSE."""
    best = None
    n = idx.size
    for col in range(Fm.shape[1]):
        vals = np.unique(Fm[idx, col])
        for thr in (vals[:-1] + vals[1:]) / 2.0:
            mask = Fm[idx, col] < thr
            left, right = idx[mask], idx[~mask]
            if left.size < min_leaf or right.size < min_leaf:
                continue
            sse = float(((y[left] - y[left].mean()) ** 2).sum()
                        + ((y[right] - y[right].mean()) ** 2).sum())
            if best is None or sse < best[0]:
                best = (sse, col, float(thr))
    return best


def brute_force_best_tree_sse(Fm, y, idx, min_leaf, depth):
    """Independent oracle: exhaustive minimum SSE over all trees of depth
    <= ``depth`` respecting the leaf bound, by direct recursion over every
    candidate split."""
    leaf = float(((y[idx] - y[idx].mean()) ** 2).sum())
    if depth == 0 or idx.size < 2 * min_leaf:
        return leaf
    best = leaf
    for col in range(Fm.shape[1]):
        vals = np.unique(Fm[idx, col])
        for thr in (vals[:-1] + vals[1:]) / 2.0:
            mask = Fm[idx, col] < thr
            left, right = idx[mask], idx[~mask]
            if left.size < min_leaf or right.size < min_leaf:
                continue
            sse = (brute_force_best_tree_sse(Fm, y, left, min_leaf, depth - 1)
                   + brute_force_best_tree_sse(Fm, y, right, min_leaf, depth - 1))
            best = min(best, sse)
    return best

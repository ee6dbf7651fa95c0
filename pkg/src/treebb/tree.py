"""Regression trees that group sampled points with similar performance.

The partitioning objective is the within-leaf sum of squared label
deviations, subject to a minimum leaf size and a maximum depth; there is no
complexity penalty anywhere in scoring.  Trees are fit by greedy top-down
initialization followed by a local search (visit nodes in random order; try
replacing each node's split with every candidate, collapsing it, or
promoting a child; accept only strict improvements) restarted from several
diversified greedy trees.

Split features are either raw decision variables (axis features) or known
linear combinations of them (hyperplane features, e.g. cluster totals).  A
sample routes left iff its feature value is strictly below the threshold,
matching the sidedness of region cuts so leaves convert exactly into
subregions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import InternalConsistencyError
from .problems import LinearInequality
from .regions import Partition, Subregion
from .streams import RandomStream
from .validation import check_X_y

#: a split must beat the parent SSE by more than this relative margin
IMPROVEMENT_RTOL = 1e-12


@dataclass(frozen=True)
class SplitFeature:
    """A candidate splitting direction: one coordinate or a linear combination."""

    kind: str                 # "axis" | "hyperplane"
    index: int
    coefficients: tuple | None = None

    @staticmethod
    def axis(i: int) -> "SplitFeature":
        return SplitFeature("axis", int(i), None)

    @staticmethod
    def hyperplane(j: int, coefficients) -> "SplitFeature":
        coeffs = tuple(float(c) for c in coefficients)
        if not any(c != 0.0 for c in coeffs):
            raise ValueError("hyperplane feature needs a nonzero coefficient")
        return SplitFeature("hyperplane", int(j), coeffs)

    def values(self, X: np.ndarray) -> np.ndarray:
        if self.kind == "axis":
            return X[:, self.index].astype(np.float64)
        return X @ np.asarray(self.coefficients)

    @property
    def label(self) -> str:
        return f"x{self.index}" if self.kind == "axis" else f"c{self.index}"


def axis_features(p: int) -> list:
    return [SplitFeature.axis(i) for i in range(p)]


def make_cluster_features(clusters, p: int) -> list:
    """One 0/1-coefficient feature per distinct cluster of variable indices."""
    seen = {}
    for cluster in clusters:
        members = tuple(sorted(int(i) for i in cluster))
        if not members:
            raise ValueError("clusters must be nonempty")
        if members[0] < 0 or members[-1] >= p:
            raise ValueError(f"cluster index out of range 0..{p - 1}: {members}")
        seen.setdefault(members, None)
    out = []
    for j, members in enumerate(seen):
        coeffs = [0.0] * p
        for i in members:
            coeffs[i] = 1.0
        out.append(SplitFeature.hyperplane(j, coeffs))
    return out


def feature_matrix(X: np.ndarray, features) -> np.ndarray:
    """Columns of feature values, in the canonical (axis-first) order of
    ``features``; tie-breaking everywhere follows this column order."""
    X = np.asarray(X, dtype=np.float64)
    return np.column_stack([f.values(X) for f in features])


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 2
    min_leaf: int = 2
    restarts: int = 10

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    @property
    def max_subregions(self) -> int:
        return 2 ** self.max_depth


class Node:
    """A mutable tree node; leaves carry member sample indices and their mean."""

    __slots__ = ("feature", "threshold", "left", "right", "members", "value", "alive")

    def __init__(self, members: np.ndarray, value: float):
        self.feature = None
        self.threshold = None
        self.left = None
        self.right = None
        self.members = members
        self.value = value
        self.alive = True

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _leaf_sse(y: np.ndarray, members: np.ndarray) -> float:
    vals = y[members]
    s = float(vals.sum())
    q = float((vals * vals).sum())
    return max(q - s * s / vals.size, 0.0)


def _leaf_mean(y: np.ndarray, members: np.ndarray) -> float:
    return float(y[members].mean())


def partition_sse(groups) -> float:
    """Sum over groups of squared deviations from each group's own mean."""
    total = 0.0
    for g in groups:
        arr = np.asarray(g, dtype=np.float64)
        if arr.size == 0:
            raise ValueError("groups must be nonempty")
        total += float(((arr - arr.mean()) ** 2).sum())
    return total


def candidate_thresholds(values) -> np.ndarray:
    """Midpoints between consecutive distinct sorted values."""
    v = np.unique(np.asarray(values, dtype=np.float64))
    return (v[:-1] + v[1:]) / 2.0


class SplitChoice(NamedTuple):
    column: int
    threshold: float
    sse: float


def best_split(Fm: np.ndarray, y: np.ndarray, min_leaf: int,
               idx: np.ndarray | None = None, columns=None) -> SplitChoice | None:
    """The (feature, threshold) pair minimizing the two-group SSE.

    Candidates are restricted to splits leaving at least ``min_leaf`` samples
    on each side.  Ties break toward the earlier column (axis features come
    before hyperplane features), then the lower threshold.  One prefix-sum
    scan per column: O(columns * n log n).
    """
    if idx is None:
        idx = np.arange(len(y))
    n = idx.size
    if n < 2 * min_leaf or n < 2:
        return None
    ysub = y[idx]
    cols = range(Fm.shape[1]) if columns is None else sorted(columns)
    best = None
    for col in cols:
        v = Fm[idx, col]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        cut = np.nonzero(vs[:-1] < vs[1:])[0]
        if cut.size == 0:
            continue
        ys = ysub[order]
        cs = np.cumsum(ys)
        cq = np.cumsum(ys * ys)
        stot, qtot = cs[-1], cq[-1]
        sizes = cut + 1
        ok = (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not ok.any():
            continue
        sizes = sizes[ok]
        cutk = cut[ok]
        sl = cs[sizes - 1]
        ql = cq[sizes - 1]
        sse = (ql - sl * sl / sizes) + ((qtot - ql) - (stot - sl) ** 2 / (n - sizes))
        k = int(np.argmin(sse))
        if best is None or sse[k] < best[0]:
            thr = float((vs[cutk[k]] + vs[cutk[k] + 1]) / 2.0)
            best = (float(sse[k]), col, thr)
    if best is None:
        return None
    return SplitChoice(column=best[1], threshold=best[2], sse=max(best[0], 0.0))


def _improves(parent_sse: float, child_sse: float) -> bool:
    return parent_sse > 0.0 and child_sse < parent_sse * (1.0 - IMPROVEMENT_RTOL)


class RegressionTree:
    """A fitted tree plus the feature list and the config it was fit under."""

    def __init__(self, root: Node, features, config: TreeConfig):
        self.root = root
        self.features = list(features)
        self.config = config

    def nodes_with_depth(self) -> list:
        out = []

        def rec(node, depth):
            out.append((node, depth))
            if not node.is_leaf:
                rec(node.left, depth + 1)
                rec(node.right, depth + 1)

        rec(self.root, 0)
        return out

    def leaves(self) -> list:
        return [n for n, _ in self.nodes_with_depth() if n.is_leaf]

    @property
    def depth(self) -> int:
        return max(d for n, d in self.nodes_with_depth() if n.is_leaf)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    def sse(self, y: np.ndarray) -> float:
        return sum(_leaf_sse(y, leaf.members) for leaf in self.leaves())

    def route(self, feature_row: np.ndarray) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if feature_row[node.feature] < node.threshold else node.right
        return node

    def assign(self, Fm: np.ndarray) -> np.ndarray:
        """Leaf ordinal (preorder) for each feature-matrix row."""
        leaves = self.leaves()
        leaf_pos = {id(leaf): i for i, leaf in enumerate(leaves)}
        return np.asarray([leaf_pos[id(self.route(row))] for row in Fm], dtype=np.int64)

    def copy(self) -> "RegressionTree":
        def rec(node):
            clone = Node(node.members, node.value)
            clone.feature = node.feature
            clone.threshold = node.threshold
            if not node.is_leaf:
                clone.left = rec(node.left)
                clone.right = rec(node.right)
            return clone

        return RegressionTree(rec(self.root), self.features, self.config)

    def to_text(self) -> str:
        lines = []

        def rec(node, depth):
            pad = "  " * depth
            if node.is_leaf:
                lines.append(f"{pad}leaf n={node.members.size} mean={node.value!r}")
            else:
                label = self.features[node.feature].label
                lines.append(f"{pad}split {label} < {node.threshold!r}")
                rec(node.left, depth + 1)
                rec(node.right, depth + 1)

        rec(self.root, 0)
        return "\n".join(lines)


def _make_leaf(y, members) -> Node:
    return Node(members, _leaf_mean(y, members))


def _make_branch(y, members, col, thr, Fm, left_sub, right_sub) -> Node:
    node = Node(members, None)
    node.feature = col
    node.threshold = thr
    node.left = left_sub
    node.right = right_sub
    return node


def _split_members(Fm, members, col, thr):
    mask = Fm[members, col] < thr
    return members[mask], members[~mask]


def greedy_tree(Fm: np.ndarray, y: np.ndarray, features, cfg: TreeConfig,
                columns=None, idx: np.ndarray | None = None) -> RegressionTree:
    """Classic top-down recursive partitioning under the depth and leaf bounds."""
    if idx is None:
        idx = np.arange(len(y), dtype=np.int64)
    if idx.size < cfg.min_leaf:
        raise ValueError(f"need at least min_leaf={cfg.min_leaf} samples, got {idx.size}")

    def build(members, depth):
        leaf = _make_leaf(y, members)
        if depth >= cfg.max_depth or members.size < 2 * cfg.min_leaf:
            return leaf
        choice = best_split(Fm, y, cfg.min_leaf, idx=members, columns=columns)
        if choice is None or not _improves(_leaf_sse(y, members), choice.sse):
            return leaf
        left_m, right_m = _split_members(Fm, members, choice.column, choice.threshold)
        node = _make_branch(y, members, choice.column, choice.threshold, Fm,
                            build(left_m, depth + 1), build(right_m, depth + 1))
        return node

    return RegressionTree(build(idx, 0), features, cfg)


def _grow_greedy_node(Fm, y, members, cfg, budget, columns=None) -> Node:
    """Greedy subtree over ``members`` with at most ``budget`` further levels."""
    leaf = _make_leaf(y, members)
    if budget < 1 or members.size < 2 * cfg.min_leaf:
        return leaf
    choice = best_split(Fm, y, cfg.min_leaf, idx=members, columns=columns)
    if choice is None or not _improves(_leaf_sse(y, members), choice.sse):
        return leaf
    left_m, right_m = _split_members(Fm, members, choice.column, choice.threshold)
    return _make_branch(y, members, choice.column, choice.threshold, Fm,
                        _grow_greedy_node(Fm, y, left_m, cfg, budget - 1, columns),
                        _grow_greedy_node(Fm, y, right_m, cfg, budget - 1, columns))


def _subtree_sse(node: Node, y: np.ndarray) -> float:
    if node.is_leaf:
        return _leaf_sse(y, node.members)
    return _subtree_sse(node.left, y) + _subtree_sse(node.right, y)


# -- exhaustive root-candidate scan for a two-level budget -----------------

def _opt1_over_grids(C, S, Q, side_n, side_s, side_q, bound_ok, min_leaf):
    """Best single-split-or-leaf SSE of one side, for every root candidate.

    C/S/Q: (G, K, n) cumulative count/sum/sum-of-squares of the side's points
    with child-feature rank <= j.  side_n/s/q: (K,) side totals.  bound_ok:
    (G, 1, n) marks rank positions that are genuine value boundaries.
    """
    c1 = C
    c2 = side_n[None, :, None] - c1
    s1, q1 = S, Q
    s2 = side_s[None, :, None] - s1
    q2 = side_q[None, :, None] - q1
    valid = (c1 >= min_leaf) & (c2 >= min_leaf) & bound_ok
    with np.errstate(divide="ignore", invalid="ignore"):
        sse = (q1 - s1 * s1 / np.where(c1 > 0, c1, 1.0)) + \
              (q2 - s2 * s2 / np.where(c2 > 0, c2, 1.0))
    sse = np.where(valid, sse, np.inf)
    best_split_sse = sse.min(axis=(0, 2))
    leaf_sse = np.maximum(side_q - side_s * side_s / side_n, 0.0)
    return np.minimum(leaf_sse, best_split_sse)


def best_depth2_root(Fm: np.ndarray, y: np.ndarray, members: np.ndarray,
                     min_leaf: int) -> tuple | None:
    """Exhaustive root choice for a depth-2 budget.

    For every candidate (feature, threshold) at the root, both sides are
    priced at their optimal depth-<=1 SSE (leaf or best single split, which is
    exactly what a greedy regrow produces).  Returns (total_sse, column,
    threshold) for the best candidate, or None if no candidate is feasible.
    Fully vectorized; one (G, n, n) prefix grid per root feature.
    """
    idx = members
    n = idx.size
    if n < 2 * min_leaf:
        return None
    sub = Fm[idx]
    ys = y[idx]
    ys2 = ys * ys
    G = sub.shape[1]
    orders = np.argsort(sub, axis=0, kind="stable")
    ranks = np.empty((n, G), dtype=np.int64)
    for g in range(G):
        ranks[orders[:, g], g] = np.arange(n)
    sorted_vals = np.take_along_axis(sub, orders, axis=0)
    stot, qtot = float(ys.sum()), float(ys2.sum())

    bound_ok = np.zeros((G, 1, n), dtype=bool)
    bound_ok[:, 0, : n - 1] = (sorted_vals[:-1, :] < sorted_vals[1:, :]).T

    g_rep = np.repeat(np.arange(G), n)
    j_flat = ranks.T.reshape(-1)
    ys_tiled = np.tile(ys, G)
    ys2_tiled = np.tile(ys2, G)

    best = None
    for fpos in range(G):
        vf = sorted_vals[:, fpos]
        cut = np.nonzero(vf[:-1] < vf[1:])[0]
        if cut.size == 0:
            continue
        sizes = cut + 1
        ok = (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not ok.any():
            continue
        sizes = sizes[ok]
        cutk = cut[ok]
        rf = ranks[:, fpos]
        f_flat = np.tile(rf, G)

        C = np.zeros((G, n, n))
        S = np.zeros((G, n, n))
        Q = np.zeros((G, n, n))
        C[g_rep, f_flat, j_flat] = 1.0
        S[g_rep, f_flat, j_flat] = ys_tiled
        Q[g_rep, f_flat, j_flat] = ys2_tiled
        for M in (C, S, Q):
            np.cumsum(M, axis=1, out=M)
            np.cumsum(M, axis=2, out=M)

        ys_f = ys[orders[:, fpos]]
        pf_s = np.cumsum(ys_f)
        pf_q = np.cumsum(ys_f * ys_f)
        left_n = sizes.astype(np.float64)
        left_s = pf_s[sizes - 1]
        left_q = pf_q[sizes - 1]

        Cl = C[:, sizes - 1, :]
        Sl = S[:, sizes - 1, :]
        Ql = Q[:, sizes - 1, :]
        opt_left = _opt1_over_grids(Cl, Sl, Ql, left_n, left_s, left_q,
                                    bound_ok, min_leaf)

        Cr = C[:, -1:, :] - Cl
        Sr = S[:, -1:, :] - Sl
        Qr = Q[:, -1:, :] - Ql
        right_n = n - left_n
        opt_right = _opt1_over_grids(Cr, Sr, Qr, right_n, stot - left_s,
                                     qtot - left_q, bound_ok, min_leaf)

        total = opt_left + opt_right
        k = int(np.argmin(total))
        if best is None or total[k] < best[0]:
            thr = float((vf[cutk[k]] + vf[cutk[k] + 1]) / 2.0)
            best = (float(total[k]), fpos, thr)
    return best


def _best_replacement(Fm, y, members, cfg, budget, scan_memo) -> Node | None:
    """The best subtree over ``members`` rooted at a fresh split, with
    greedily regrown children under ``budget - 1`` further levels."""
    if members.size < 2 * cfg.min_leaf or budget < 1:
        return None
    if budget == 1:
        choice = best_split(Fm, y, cfg.min_leaf, idx=members)
        if choice is None:
            return None
        left_m, right_m = _split_members(Fm, members, choice.column, choice.threshold)
        return _make_branch(y, members, choice.column, choice.threshold, Fm,
                            _make_leaf(y, left_m), _make_leaf(y, right_m))
    if budget == 2:
        key = members.tobytes()
        if key in scan_memo:
            hit = scan_memo[key]
        else:
            hit = best_depth2_root(Fm, y, members, cfg.min_leaf)
            scan_memo[key] = hit
        if hit is None:
            return None
        _, col, thr = hit
        left_m, right_m = _split_members(Fm, members, col, thr)
        return _make_branch(y, members, col, thr, Fm,
                            _grow_greedy_node(Fm, y, left_m, cfg, 1),
                            _grow_greedy_node(Fm, y, right_m, cfg, 1))
    # deeper budgets: try every candidate explicitly (rare; only for D >= 3)
    best_node, best_sse = None, math.inf
    for col in range(Fm.shape[1]):
        for thr in candidate_thresholds(Fm[members, col]):
            left_m, right_m = _split_members(Fm, members, col, float(thr))
            if left_m.size < cfg.min_leaf or right_m.size < cfg.min_leaf:
                continue
            node = _make_branch(y, members, col, float(thr), Fm,
                                _grow_greedy_node(Fm, y, left_m, cfg, budget - 1),
                                _grow_greedy_node(Fm, y, right_m, cfg, budget - 1))
            sse = _subtree_sse(node, y)
            if sse < best_sse:
                best_node, best_sse = node, sse
    return best_node


def _refit_structure(structure: Node, members, Fm, y, min_leaf) -> Node | None:
    """Re-route ``members`` through an existing split structure; None if any
    leaf ends up below ``min_leaf``."""
    if structure.is_leaf:
        if members.size < min_leaf:
            return None
        return _make_leaf(y, members)
    left_m, right_m = _split_members(Fm, members, structure.feature,
                                     structure.threshold)
    left = _refit_structure(structure.left, left_m, Fm, y, min_leaf)
    if left is None:
        return None
    right = _refit_structure(structure.right, right_m, Fm, y, min_leaf)
    if right is None:
        return None
    return _make_branch(y, members, structure.feature, structure.threshold, Fm,
                        left, right)


def _mark_dead(node: Node):
    node.alive = False
    if not node.is_leaf:
        _mark_dead(node.left)
        _mark_dead(node.right)


def _adopt(node: Node, replacement: Node):
    if not node.is_leaf:
        _mark_dead(node.left)
        _mark_dead(node.right)
    node.feature = replacement.feature
    node.threshold = replacement.threshold
    node.left = replacement.left
    node.right = replacement.right
    node.members = replacement.members
    node.value = replacement.value


def local_search(tree: RegressionTree, Fm: np.ndarray, y: np.ndarray,
                 cfg: TreeConfig, stream: RandomStream,
                 scan_memo: dict | None = None) -> RegressionTree:
    """Refine a tree until a full pass over its nodes yields no improvement.

    Each pass visits the current nodes in a random order.  At every node the
    candidate moves are: (a) replace its split (or, for a leaf, introduce one)
    by the best candidate with greedily regrown children under the remaining
    depth budget, (b) collapse a branch to a leaf, (c) promote either child,
    re-routing the node's samples through it.  The best move is taken iff it
    strictly decreases the total SSE and preserves the depth and leaf-size
    constraints, so the SSE trace is strictly decreasing and the search
    terminates.
    """
    if scan_memo is None:
        scan_memo = {}
    tree = tree.copy()
    while True:
        nodes = tree.nodes_with_depth()
        order = stream.permutation(len(nodes))
        changed = False
        for pos in order:
            node, depth = nodes[pos]
            if not node.alive:
                continue
            current = _subtree_sse(node, y)
            if current <= 0.0:
                continue
            budget = cfg.max_depth - depth
            candidates = []
            alt = _best_replacement(Fm, y, node.members, cfg, budget, scan_memo)
            if alt is not None:
                candidates.append((_subtree_sse(alt, y), 0, alt))
            if not node.is_leaf:
                candidates.append((_leaf_sse(y, node.members), 1,
                                   _make_leaf(y, node.members)))
                for tag, child in ((2, node.left), (3, node.right)):
                    refit = _refit_structure(child, node.members, Fm, y, cfg.min_leaf)
                    if refit is not None:
                        candidates.append((_subtree_sse(refit, y), tag, refit))
            if not candidates:
                continue
            candidates.sort(key=lambda c: (c[0], c[1]))
            best_sse, _, best_node = candidates[0]
            if _improves(current, best_sse):
                _adopt(node, best_node)
                changed = True
        if not changed:
            return tree


def _bootstrap_columns(n_columns: int, stream: RandomStream) -> list:
    """A bootstrap draw over feature columns, deduplicated in draw order.

    Restart diversity comes from which features are available to the greedy
    initializer, not from scan-order tricks.
    """
    draws = stream.integers(0, n_columns, size=n_columns)
    out = []
    for d in draws:
        d = int(d)
        if d not in out:
            out.append(d)
    return out


def fit_adaptive(X, y, features, cfg: TreeConfig, stream: RandomStream) -> RegressionTree:
    """Best-of-restarts tree: greedy + local search, then ``restarts - 1``
    bootstrap-initialized greedy trees + local search; lowest SSE wins
    (ties keep the earlier restart)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) == 0:
        raise ValueError("need at least one sample")
    Fm = feature_matrix(X, features)
    n = len(y)
    idx = np.arange(n, dtype=np.int64)
    if n < 2 * cfg.min_leaf:
        return RegressionTree(_make_leaf(y, idx), features, cfg)
    scan_memo: dict = {}
    init = greedy_tree(Fm, y, features, cfg)
    best = local_search(init, Fm, y, cfg, stream.child("ls", 0), scan_memo)
    best_sse = best.sse(y)
    for r in range(1, cfg.restarts):
        cols = _bootstrap_columns(Fm.shape[1], stream.child("boot", r))
        init_r = greedy_tree(Fm, y, features, cfg, columns=cols)
        cand = local_search(init_r, Fm, y, cfg, stream.child("ls", r), scan_memo)
        cand_sse = cand.sse(y)
        if cand_sse < best_sse:
            best, best_sse = cand, cand_sse
    return best


def tree_to_partition(tree: RegressionTree, parent: Subregion, problem,
                      points: np.ndarray, ids) -> Partition:
    """Convert leaves into subregions of ``parent``.

    Axis splits tighten the box; hyperplane splits become linear cuts with
    complementary '<' / '>=' sides.  Every leaf's subregion is witnessed by
    one of its member points; a witness failing containment indicates an
    internal inconsistency and raises.
    """
    points = np.asarray(points, dtype=np.int64)
    members_out = []

    def rec(node, lower, upper, cuts):
        if node.is_leaf:
            witness = tuple(int(v) for v in points[node.members[0]])
            sub = Subregion(next(ids), parent.id, tuple(lower), tuple(upper),
                            tuple(cuts), witness=None)
            if not sub.contains(problem, witness):
                raise InternalConsistencyError(
                    f"leaf witness {witness} escaped its subregion {sub.to_line()}")
            members_out.append(sub.with_witness(witness))
            return
        feat = tree.features[node.feature]
        thr = node.threshold
        if feat.kind == "axis":
            d = feat.index
            right_lo = math.ceil(thr)
            left_hi = right_lo - 1
            if not (lower[d] <= left_hi and right_lo <= upper[d]):
                raise InternalConsistencyError(
                    f"axis split at {thr} leaves an empty side of [{lower[d]}, {upper[d]}]")
            lo_l, up_l = list(lower), list(upper)
            lo_r, up_r = list(lower), list(upper)
            up_l[d] = left_hi
            lo_r[d] = right_lo
            rec(node.left, lo_l, up_l, cuts)
            rec(node.right, lo_r, up_r, cuts)
        else:
            rec(node.left, list(lower), list(upper),
                cuts + [LinearInequality(feat.coefficients, thr, "<")])
            rec(node.right, list(lower), list(upper),
                cuts + [LinearInequality(feat.coefficients, thr, ">=")])

    rec(tree.root, list(parent.lower), list(parent.upper), list(parent.cuts))
    return Partition(members=tuple(members_out), origin=parent.id)


class TreePartitionRegressor(BaseEstimator, RegressorMixin):
    """Scikit-learn style regressor wrapping the optimal-tree fit.

    Parameters
    ----------
    max_depth, min_leaf, restarts : tree structure constraints and the number
        of local-search restarts.
    hyperplanes : optional list of coefficient vectors (length n_features)
        used as extra splitting features alongside the raw coordinates.
    random_state : seed for the restart/visit-order randomness.
    """

    def __init__(self, max_depth=2, min_leaf=2, restarts=10, hyperplanes=None,
                 random_state=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.restarts = restarts
        self.hyperplanes = hyperplanes
        self.random_state = random_state

    def _features(self, p):
        feats = axis_features(p)
        if self.hyperplanes is not None:
            for j, coeffs in enumerate(self.hyperplanes):
                coeffs = tuple(float(c) for c in coeffs)
                if len(coeffs) != p:
                    raise ValueError("hyperplane coefficient length != n_features")
                feats.append(SplitFeature.hyperplane(j, coeffs))
        return feats

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        cfg = TreeConfig(max_depth=self.max_depth, min_leaf=self.min_leaf,
                         restarts=self.restarts)
        seed = 0 if self.random_state is None else int(self.random_state)
        stream = RandomStream(seed, "tree-regressor")
        features = self._features(X.shape[1])
        self.tree_ = fit_adaptive(X, y, features, cfg, stream)
        self._train_X = X
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "tree_"):
            raise AttributeError("this estimator is not fitted yet; call fit first")

    def predict(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        Fm = feature_matrix(X, self.tree_.features)
        return np.asarray([self.tree_.route(row).value for row in Fm])

    def apply(self, X):
        """Preorder leaf index for each row."""
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        return self.tree_.assign(feature_matrix(X, self.tree_.features))

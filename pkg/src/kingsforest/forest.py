"""King-rooted, depth-bounded CART trees, forests, and path extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .data import CLASSIFICATION, Dataset, SeedContext


@dataclass
class TreeParams:
    """Knobs shared by every tree of a forest.

    mtry=None draws ceil(sqrt(pool size)) candidate variables per node.
    bootstrap=False trains on the full sample (out-of-bag set empty), which
    is mainly useful for comparing against exhaustive oracles.
    """

    mtry: int | None = None
    min_leaf: int = 5
    bootstrap: bool = True

    def __post_init__(self):
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")

    def resolve_mtry(self, pool_size: int) -> int:
        if self.mtry is not None:
            return min(self.mtry, pool_size)
        return min(pool_size, math.ceil(math.sqrt(pool_size)))


class Leaf:
    __slots__ = ("value", "n")

    def __init__(self, value, n):
        self.value = value
        self.n = n


class SplitNode:
    """Internal node: samples with value < threshold go left.

    The root of a King's tree sits at depth 1 and always splits the King;
    no variable repeats along a root-to-leaf path.
    """

    __slots__ = ("var", "threshold", "depth", "left", "right")

    def __init__(self, var, threshold, depth, left, right):
        self.var = var
        self.threshold = threshold
        self.depth = depth
        self.left = left
        self.right = right


@dataclass
class KingTree:
    root: object
    king: int | None
    inbag: np.ndarray
    oob: np.ndarray
    pvim: float = float("nan")
    _split_vars: np.ndarray = field(default=None, repr=False, compare=False)

    def split_variables(self) -> np.ndarray:
        """Sorted unique indices of variables splitting at least one node."""
        if self._split_vars is None:
            seen = []
            stack = [self.root]
            while stack:
                node = stack.pop()
                if isinstance(node, SplitNode):
                    seen.append(node.var)
                    stack.append(node.left)
                    stack.append(node.right)
            self._split_vars = (
                np.unique(np.asarray(seen, dtype=np.intp))
                if seen
                else np.empty(0, dtype=np.intp)
            )
        return self._split_vars

    def n_splits(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, SplitNode):
                count += 1
                stack.append(node.left)
                stack.append(node.right)
        return count


@dataclass
class KingForest:
    trees: list
    king: int | None
    max_depth: int
    candidate_pool: np.ndarray
    weights_used: np.ndarray


@dataclass(frozen=True)
class PathRecord:
    """One ordered depth-d split sequence aggregated over a forest."""

    vars: tuple
    depth: int
    reproduction_count: int
    pvim_sum: float = 0.0

    @property
    def avg_pvim(self) -> float:
        return self.pvim_sum / self.reproduction_count


def predict_tree(root, x, rows, override_var=None, override_values=None):
    """Predictions of one tree for x[rows].

    override_var/override_values substitute a single column of the
    evaluation block (aligned with rows) without touching the dataset;
    this is how permuted-column predictions are produced.
    """
    rows = np.asarray(rows, dtype=np.intp)
    out = np.empty(rows.shape[0], dtype=np.float64)
    stack = [(root, np.arange(rows.shape[0], dtype=np.intp))]
    while stack:
        node, pos = stack.pop()
        if isinstance(node, Leaf):
            out[pos] = node.value
            continue
        if override_var is not None and node.var == override_var:
            vals = override_values[pos]
        else:
            vals = x[rows[pos], node.var]
        mask = vals < node.threshold
        stack.append((node.left, pos[mask]))
        stack.append((node.right, pos[~mask]))
    return out


def _sse(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    s = float(v.sum())
    return float((v * v).sum()) - s * s / v.shape[0]


def impurity_decrease(y_parent, y_left, y_right, task="regression") -> float:
    """Total impurity drop of one split.

    Regression uses variance times node size (i.e. within-node sum of
    squares); classification uses Gini impurity times node size, which for
    0/1 labels is exactly twice the variance form.
    """
    y_left = np.asarray(y_left, dtype=np.float64)
    y_right = np.asarray(y_right, dtype=np.float64)
    if y_left.shape[0] == 0 or y_right.shape[0] == 0:
        raise ValueError("both children must be nonempty")
    dec = _sse(y_parent) - _sse(y_left) - _sse(y_right)
    if task == CLASSIFICATION:
        return 2.0 * dec
    return dec


def weighted_sample(population, weights, k, rng) -> np.ndarray:
    """Draw k items without replacement, probability proportional to weight.

    Sequential draws with renormalization: each draw picks from the items
    not yet taken, with probability weight over remaining total. If the
    remaining weights are all zero the draw falls back to uniform over what
    is left rather than aborting. Taken items keep their slot but drop to
    zero weight, which removes them from the cumulative search exactly.
    """
    population = np.asarray(population, dtype=np.intp)
    m = population.shape[0]
    if k >= m:
        return population.copy()
    w = np.asarray(weights, dtype=np.float64).copy()
    if w.shape != population.shape:
        raise ValueError("weights must align with the population")
    chosen = np.empty(k, dtype=np.intp)
    cum = np.empty(m, dtype=np.float64)
    alive = np.ones(m, dtype=bool)
    for i in range(k):
        np.cumsum(w, out=cum)
        total = cum[-1]
        if total <= 0.0:
            remaining = np.flatnonzero(alive)
            j = int(remaining[rng.integers(remaining.shape[0])])
        else:
            j = int(np.searchsorted(cum, rng.random() * total, side="right"))
            if j >= m:  # u rounded up onto the total
                j = m - 1
            while not alive[j]:
                j -= 1
        chosen[i] = population[j]
        alive[j] = False
        w[j] = 0.0
    return chosen


def _best_split(xcols, yvals, cand_vars, min_leaf):
    """Best (variable, threshold) over candidate columns by impurity decrease.

    Thresholds are midpoints between consecutive distinct sorted values of a
    candidate within the node. Ties in decrease break on the lowest variable
    index, then the lowest threshold, so the outcome is independent of
    candidate order. Returns None when no split has positive decrease.
    """
    m = yvals.shape[0]
    order = np.argsort(xcols, axis=0, kind="stable")
    xs = np.take_along_axis(xcols, order, axis=0)
    ys = yvals[order]
    cs = np.cumsum(ys, axis=0)
    cs2 = np.cumsum(ys * ys, axis=0)
    tot = float(yvals.sum())
    tot2 = float((yvals * yvals).sum())
    parent = tot2 - tot * tot / m

    left_n = np.arange(1, m, dtype=np.float64)[:, None]
    ls = cs[:-1]
    lq = cs2[:-1]
    sse_left = lq - ls * ls / left_n
    rs = tot - ls
    rq = tot2 - lq
    right_n = m - left_n
    sse_right = rq - rs * rs / right_n
    dec = parent - sse_left - sse_right

    counts = np.arange(1, m)[:, None]
    valid = (xs[1:] > xs[:-1]) & (counts >= min_leaf) & ((m - counts) >= min_leaf)
    if not valid.any():
        return None
    dec = np.where(valid, dec, -np.inf)
    best = dec.max()
    if best <= 0.0:
        return None
    # Identical partitions reached through different variables are exact
    # mathematical ties; their float scores differ only by summation order,
    # so anything within a relative hair of the best is treated as tied.
    rows, cols = np.nonzero(dec >= best * (1.0 - 1e-9))
    pick = None
    for r, c in zip(rows.tolist(), cols.tolist()):
        a = xs[r, c]
        b = xs[r + 1, c]
        t = 0.5 * (a + b)
        if t <= a:  # midpoint rounded onto the lower value
            t = b
        key = (int(cand_vars[c]), float(t))
        if pick is None or key < pick:
            pick = key
    return pick[0], pick[1], float(best)


def _leaf_value(yvals, classification) -> float:
    if classification:
        ones = float(yvals.sum())
        return 1.0 if 2.0 * ones > yvals.shape[0] else 0.0
    return float(yvals.mean())


def build_tree(
    data: Dataset, king, weights, pool, max_depth, params: TreeParams, rng
) -> KingTree:
    """Grow one depth-bounded CART tree on a bootstrap sample.

    The root always splits the King (when one is given); every deeper node
    draws mtry candidates from the pool, minus the variables already used on
    its path, with probability proportional to the sampling weights, and
    splits on the candidate/threshold pair with the largest impurity
    decrease. Growth stops at max_depth, at min_leaf, on a pure node, or
    when no split has positive decrease.
    """
    pool = np.unique(np.asarray(pool, dtype=np.intp))
    if pool.shape[0] == 0:
        raise ValueError("candidate pool is empty")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape[0] != data.n_vars:
        raise ValueError("one sampling weight per variable expected")
    if (weights < 0).any():
        raise ValueError("sampling weights must be nonnegative")
    if king is not None and king not in pool:
        raise ValueError("the King must belong to the candidate pool")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    n = data.n_samples
    if n < 2 * params.min_leaf:
        raise ValueError("not enough samples for min_leaf")

    x, y = data.x, data.y
    classification = data.task == CLASSIFICATION
    if params.bootstrap:
        inbag = np.sort(rng.integers(0, n, size=n))
        counts = np.bincount(inbag, minlength=n)
        oob = np.flatnonzero(counts == 0)
    else:
        inbag = np.arange(n, dtype=np.intp)
        oob = np.empty(0, dtype=np.intp)
    mtry = params.resolve_mtry(pool.shape[0])

    def grow(idx, depth, avail):
        yv = y[idx]
        m = idx.shape[0]
        if depth > max_depth or m < 2 * params.min_leaf or (yv == yv[0]).all():
            return Leaf(_leaf_value(yv, classification), m)
        if depth == 1 and king is not None:
            cands = np.asarray([king], dtype=np.intp)
        else:
            if avail.shape[0] == 0:
                return Leaf(_leaf_value(yv, classification), m)
            cands = weighted_sample(avail, weights[avail], mtry, rng)
        found = _best_split(x[np.ix_(idx, cands)], yv, cands, params.min_leaf)
        if found is None:
            return Leaf(_leaf_value(yv, classification), m)
        var, threshold, _ = found
        mask = x[idx, var] < threshold
        child_avail = avail[avail != var]
        left = grow(idx[mask], depth + 1, child_avail)
        right = grow(idx[~mask], depth + 1, child_avail)
        return SplitNode(var, threshold, depth, left, right)

    root_avail = pool if king is None else pool[pool != king]
    root = grow(inbag.astype(np.intp), 1, root_avail)
    diagnostics.bump("trees_built")
    return KingTree(root=root, king=king, inbag=inbag, oob=oob)


def build_forest(
    data: Dataset, king, weights, pool, max_depth, params: TreeParams, n_trees, seeds
) -> KingForest:
    """Build n_trees independent trees; tree j draws its stream from (seeds, j)."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    seeds = seeds if isinstance(seeds, SeedContext) else SeedContext(int(seeds))
    trees = [
        build_tree(data, king, weights, pool, max_depth, params, seeds.child(j).rng())
        for j in range(n_trees)
    ]
    diagnostics.bump("forests_built")
    return KingForest(
        trees=trees,
        king=king,
        max_depth=max_depth,
        candidate_pool=np.unique(np.asarray(pool, dtype=np.intp)),
        weights_used=np.asarray(weights, dtype=np.float64).copy(),
    )


def iter_depth_sequences(tree: KingTree, depth: int):
    """Yield the ordered variable chain of every depth-`depth` split node."""
    stack = [(tree.root, ())]
    while stack:
        node, prefix = stack.pop()
        if not isinstance(node, SplitNode):
            continue
        seq = prefix + (node.var,)
        if len(seq) == depth:
            yield seq
        else:
            stack.append((node.left, seq))
            stack.append((node.right, seq))


def extract_paths(forest: KingForest, depth: int) -> list:
    """Distinct ordered depth-d split sequences with reproduction counts.

    A sequence occurs once per depth-d split node realizing it; branches
    with fewer than d splits contribute nothing. pvim_sum is left at zero
    here and filled in by the path-scoring layer.
    """
    if depth < 2 or depth > forest.max_depth:
        raise ValueError("depth must be between 2 and the forest's max_depth")
    counts = {}
    for tree in forest.trees:
        for seq in iter_depth_sequences(tree, depth):
            counts[seq] = counts.get(seq, 0) + 1
    bound = len(forest.trees) * 2 ** (depth - 1)
    if len(counts) > bound:
        raise RuntimeError(
            f"{len(counts)} distinct depth-{depth} paths exceed the {bound} bound"
        )
    return [
        PathRecord(vars=seq, depth=depth, reproduction_count=c)
        for seq, c in sorted(counts.items())
    ]


def dump_tree(tree: KingTree, names=None) -> str:
    """Indented one-node-per-line rendering, for fixtures and debugging."""

    def name(v):
        return names[v] if names is not None else f"x{v + 1}"

    lines = []

    def walk(node, depth):
        pad = "  " * (depth - 1)
        if isinstance(node, Leaf):
            lines.append(f"{pad}leaf value={node.value!r} n={node.n}")
            return
        lines.append(f"{pad}[d{node.depth}] {name(node.var)} < {node.threshold!r}")
        walk(node.left, depth + 1)
        walk(node.right, depth + 1)

    walk(tree.root, 1)
    return "\n".join(lines)

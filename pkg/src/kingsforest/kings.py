"""Per-King weight learning, final depth-1..D forests, and path shortlists."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, parallel
from .data import Dataset, SeedContext
from .forest import (
    KingForest,
    PathRecord,
    TreeParams,
    build_tree,
    iter_depth_sequences,
)
from .pvim import PvimParams, kings_pvim


def default_candidate_count(n_samples: int) -> int:
    """Default candidate-pool size: floor(n / (2 ln n))."""
    return max(1, int(n_samples / (2.0 * math.log(n_samples))))


@dataclass
class KingParams:
    """Forest sizes and list lengths for one King's run.

    n_candidates=None resolves to floor(n / (2 ln n)) at run time.
    path_pvim_once_per_tree switches the path score from once-per-occurrence
    to once-per-tree accumulation, for sensitivity checks.
    """

    n_trees: int = 100
    max_depth: int = 4
    n_iter: int = 7
    n_candidates: int | None = None
    n_top: int = 20
    tree: TreeParams = field(default_factory=TreeParams)
    pvim: PvimParams = field(default_factory=PvimParams)
    path_pvim_once_per_tree: bool = False

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.n_iter < 1:
            raise ValueError("n_trees, max_depth and n_iter must all be >= 1")
        if self.n_candidates is not None and self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.n_top < 1:
            raise ValueError("n_top must be >= 1")


@dataclass
class KingReport:
    """Everything learned about one King.

    shortlists[d][metric] holds the top paths of the depth-d final forest,
    ranked by metric ("pvim_sum" or "count"), ties broken by variable tuple.
    pvim_profile is the per-depth mean of per-tree importances; the sum
    variant is kept alongside because either aggregation can be of interest.
    """

    king: int
    w: np.ndarray
    pvim_profile: np.ndarray
    pvim_profile_sum: np.ndarray
    shortlists: dict
    pool: np.ndarray


def update_weights(w_prev, forest: KingForest) -> np.ndarray:
    """Add each positive-importance tree's PVIM to every variable it splits.

    A tree contributes its importance once per variable it uses, no matter
    how many nodes split that variable; trees with importance <= 0 are
    ignored entirely.
    """
    w = np.asarray(w_prev, dtype=np.float64)
    delta = np.zeros_like(w)
    for tree in forest.trees:
        v = tree.pvim
        if v > 0.0:
            delta[tree.split_variables()] += v
    return w + delta


def rank_variables(w) -> np.ndarray:
    """Variable indices by descending weight; equal weights by ascending index."""
    w = np.asarray(w, dtype=np.float64)
    return np.lexsort((np.arange(w.shape[0]), -w)).astype(np.intp)


def score_paths(forest: KingForest, depth, once_per_tree=False) -> list:
    """Depth-d path records carrying reproduction counts and PVIM sums.

    Each occurrence of a path adds its tree's importance to pvim_sum (or
    once per tree under once_per_tree). Counts are unconditional: trees with
    non-positive importance still contribute occurrences, and their
    importance enters the sum with its sign.
    """
    if depth < 2 or depth > forest.max_depth:
        raise ValueError("depth must be between 2 and the forest's max_depth")
    table = {}
    for tree in forest.trees:
        v = tree.pvim
        if math.isnan(v):
            raise ValueError("tree importances must be computed before scoring paths")
        seen = set()
        for seq in iter_depth_sequences(tree, depth):
            entry = table.setdefault(seq, [0, 0.0])
            entry[0] += 1
            if once_per_tree:
                if seq not in seen:
                    entry[1] += v
                    seen.add(seq)
            else:
                entry[1] += v
    bound = len(forest.trees) * 2 ** (depth - 1)
    if len(table) > bound:
        raise RuntimeError(
            f"{len(table)} distinct depth-{depth} paths exceed the {bound} bound"
        )
    return [
        PathRecord(vars=seq, depth=depth, reproduction_count=c, pvim_sum=s)
        for seq, (c, s) in sorted(table.items())
    ]


def rank_records(records, metric, n_top) -> list:
    """Shortlist: records by metric descending, ties by variable tuple."""
    if metric == "pvim_sum":
        key = lambda r: (-r.pvim_sum, r.vars)
    elif metric == "count":
        key = lambda r: (-r.reproduction_count, r.vars)
    else:
        raise ValueError(f"unknown path metric {metric!r}")
    return sorted(records, key=key)[:n_top]


def _forest_task(args):
    """Build and score a chunk of one forest's trees (runs in a worker)."""
    king, weights, pool, max_depth, tree_params, pvim_params, master, bkey, pkey, js = args
    data = parallel.shared()
    trees = []
    for j in js:
        rng = SeedContext(master, bkey + (j,)).rng()
        tree = build_tree(data, king, weights, pool, max_depth, tree_params, rng)
        rows = pvim_params.rows_for(tree)
        if rows is None or len(rows) == 0:
            diagnostics.bump("empty_oob")
            tree.pvim = 0.0
        else:
            prng = SeedContext(master, pkey + (j,)).rng()
            tree.pvim = kings_pvim(tree, data, king, pvim_params, prng)
        trees.append(tree)
    return trees


def build_scored_forest(
    data, king, weights, pool, max_depth, params: KingParams, seeds, workers=None
) -> KingForest:
    """One forest with per-tree importances, built across the worker pool.

    Tree j's build stream comes from (seeds, 0, j) and its permutation
    stream from (seeds, 1, j); chunked execution therefore reproduces the
    serial build_forest + forest_pvims pipeline exactly, for any pool size.
    """
    weights = np.asarray(weights, dtype=np.float64)
    pool = np.unique(np.asarray(pool, dtype=np.intp))
    own = None
    if workers is None:
        workers = own = parallel.Workers(1, payload=data)
    try:
        chunks = parallel.chunk_indices(params.n_trees, workers.size * 4)
        bkey = seeds.child(0).key
        pkey = seeds.child(1).key
        tasks = [
            (king, weights, pool, max_depth, params.tree, params.pvim,
             seeds.master_seed, bkey, pkey, js)
            for js in chunks
        ]
        trees = [t for chunk in workers.map(_forest_task, tasks) for t in chunk]
    finally:
        if own is not None:
            own.close()
    diagnostics.bump("forests_built")
    return KingForest(
        trees=trees,
        king=king,
        max_depth=max_depth,
        candidate_pool=pool,
        weights_used=weights.copy(),
    )


def select_pool(w, king, n_candidates) -> np.ndarray:
    """Top-weighted candidate pool with the King force-included.

    When the King misses the cut it replaces the lowest-ranked member, so
    the pool size stays at n_candidates (or at p when p is smaller).
    """
    w = np.asarray(w, dtype=np.float64)
    n_candidates = min(n_candidates, w.shape[0])
    top = rank_variables(w)[:n_candidates]
    if king not in top:
        top = top.copy()
        top[-1] = king
    return np.sort(top)


def run_kings_forests(
    data: Dataset, king, w_init, params: KingParams, seeds, workers=None
) -> KingReport:
    """Weight-update loop plus final depth-1..D forests for one King.

    Iterations t = 1..n_iter build disposable forests over the full variable
    set with the current weights, score every tree's King importance, and
    fold positive importances into the weights. The final forests are then
    built over the top-n_candidates pool, one per depth d = 1..D; their
    depth-d paths (d >= 2) are ranked into the two shortlists.
    """
    p = data.n_vars
    king = int(king)
    if not 0 <= king < p:
        raise ValueError(f"King index {king} out of range")
    w = np.asarray(w_init, dtype=np.float64).copy()
    if w.shape[0] != p:
        raise ValueError("one initial weight per variable expected")
    if (w < 0).any() or not (w > 0).any():
        raise ValueError("initial weights must be nonnegative with a positive entry")
    seeds = seeds if isinstance(seeds, SeedContext) else SeedContext(int(seeds))

    own = None
    if workers is None:
        workers = own = parallel.Workers(1, payload=data)
    try:
        full_pool = np.arange(p, dtype=np.intp)
        for t in range(1, params.n_iter + 1):
            forest = build_scored_forest(
                data, king, w, full_pool, params.max_depth, params,
                seeds.child(0, t), workers,
            )
            w = update_weights(w, forest)

        n_c = params.n_candidates or default_candidate_count(data.n_samples)
        pool = select_pool(w, king, n_c)

        profile = np.empty(params.max_depth, dtype=np.float64)
        profile_sum = np.empty(params.max_depth, dtype=np.float64)
        shortlists = {}
        for d in range(1, params.max_depth + 1):
            forest = build_scored_forest(
                data, king, w, pool, d, params, seeds.child(1, d), workers
            )
            pvims = np.asarray([tree.pvim for tree in forest.trees])
            profile[d - 1] = pvims.mean()
            profile_sum[d - 1] = pvims.sum()
            if d >= 2:
                records = score_paths(forest, d, params.path_pvim_once_per_tree)
                shortlists[d] = {
                    "pvim_sum": rank_records(records, "pvim_sum", params.n_top),
                    "count": rank_records(records, "count", params.n_top),
                }
    finally:
        if own is not None:
            own.close()

    return KingReport(
        king=king,
        w=w,
        pvim_profile=profile,
        pvim_profile_sum=profile_sum,
        shortlists=shortlists,
        pool=pool,
    )

"""Permutation importance of the King variable on held-out samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .data import CLASSIFICATION, Dataset, SeedContext, permute_column
from .forest import KingForest, KingTree, predict_tree


@dataclass
class PvimParams:
    """How the importance of the King is evaluated.

    holdout=None scores each tree on its own out-of-bag rows; otherwise the
    given row indices are used for every tree. With n_permutations > 1 the
    importance is averaged over that many independent permutations.
    """

    holdout: np.ndarray | None = None
    n_permutations: int = 1

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be >= 1")
        if self.holdout is not None:
            self.holdout = np.asarray(self.holdout, dtype=np.intp)

    def rows_for(self, tree: KingTree) -> np.ndarray:
        return self.holdout if self.holdout is not None else tree.oob


def _prediction_error(y_true, y_hat, classification) -> float:
    if classification:
        return float(np.count_nonzero(y_true != y_hat))
    d = y_true - y_hat
    return float(d @ d)


def pvim_given_permutation(tree: KingTree, data: Dataset, king, rows, permuted):
    """Importance under one explicit permutation of the King's column.

    Returns (error after - error before) / |rows|, where error is the sum of
    squared residuals for regression and the misclassification count for
    classification; the permuted values replace the King's column on the
    evaluation rows only.
    """
    rows = np.asarray(rows, dtype=np.intp)
    classification = data.task == CLASSIFICATION
    y_true = data.y[rows]
    base = predict_tree(tree.root, data.x, rows)
    star = predict_tree(
        tree.root, data.x, rows, override_var=king, override_values=permuted
    )
    before = _prediction_error(y_true, base, classification)
    after = _prediction_error(y_true, star, classification)
    return (after - before) / rows.shape[0]


def kings_pvim(tree: KingTree, data: Dataset, king, params: PvimParams, rng) -> float:
    """Accuracy loss from permuting the King within the evaluation rows.

    Positive values mean the tree relies on the King's actual values;
    a tree that never splits the King scores exactly zero. Values may be
    negative and are not clamped here.
    """
    rows = params.rows_for(tree)
    if rows is None or len(rows) == 0:
        raise ValueError("empty evaluation set: supply a holdout for this tree")
    rows = np.asarray(rows, dtype=np.intp)
    if king not in tree.split_variables():
        return 0.0
    total = 0.0
    col = data.x[rows, king]
    for _ in range(params.n_permutations):
        total += pvim_given_permutation(tree, data, king, rows, permute_column(col, rng))
    return total / params.n_permutations


def forest_pvims(forest: KingForest, data: Dataset, params: PvimParams, seeds) -> np.ndarray:
    """Per-tree King importance, stored on each tree.

    Tree j permutes with the stream derived from (seeds, j). A tree whose
    bootstrap covered every sample has no out-of-bag rows; its importance is
    defined as 0.0 and counted in the `empty_oob` diagnostics counter.
    """
    seeds = seeds if isinstance(seeds, SeedContext) else SeedContext(int(seeds))
    out = np.empty(len(forest.trees), dtype=np.float64)
    for j, tree in enumerate(forest.trees):
        rows = params.rows_for(tree)
        if rows is None or len(rows) == 0:
            diagnostics.bump("empty_oob")
            tree.pvim = 0.0
        else:
            tree.pvim = kings_pvim(tree, data, forest.king, params, seeds.child(j).rng())
        out[j] = tree.pvim
    return out


def depth_profile_pvim(forests, data: Dataset, params: PvimParams, seeds) -> np.ndarray:
    """Mean per-tree King importance for forests of maximum depth 1..D.

    Expects one forest per depth, in order, all sharing the same King; the
    d-th entry is the mean over that forest's trees.
    """
    seeds = seeds if isinstance(seeds, SeedContext) else SeedContext(int(seeds))
    kings = {f.king for f in forests}
    if len(kings) != 1:
        raise ValueError("all forests must share the same King")
    for d, f in enumerate(forests, start=1):
        if f.max_depth != d:
            raise ValueError("expected one forest per depth d = 1..D, in order")
    profile = np.empty(len(forests), dtype=np.float64)
    for d, f in enumerate(forests, start=1):
        profile[d - 1] = forest_pvims(f, data, params, seeds.child(d)).mean()
    return profile

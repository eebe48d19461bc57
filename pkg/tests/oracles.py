"""Independent reference implementations used to cross-check the library.

Everything here is written the slow, literal way on purpose: brute-force
enumeration, per-row tree walks, four-loop double centering. These never
share code paths with the package.
"""

import numpy as np

from kingsforest.forest import Leaf, SplitNode


# --- exhaustive greedy CART -------------------------------------------------

def _sse_of(vals):
    vals = np.asarray(vals, dtype=np.float64)
    return float(np.var(vals) * vals.shape[0])


def cart_best_split(x, y, idx, variables, min_leaf):
    """Scan every (variable, threshold) pair; candidates within a relative
    hair of the best decrease count as tied and the lowest (variable,
    threshold) wins. Returns (var, threshold, decrease) or None."""
    found = []
    parent = _sse_of(y[idx])
    for var in sorted(variables):
        vals = x[idx, var]
        uniq = np.unique(vals)
        for a, b in zip(uniq[:-1], uniq[1:]):
            t = 0.5 * (a + b)
            if t <= a:
                t = b
            left = idx[vals < t]
            right = idx[vals >= t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            dec = parent - _sse_of(y[left]) - _sse_of(y[right])
            if dec > 0.0:
                found.append((dec, var, float(t)))
    if not found:
        return None
    best = max(dec for dec, _, _ in found)
    tied = [(var, t) for dec, var, t in found if dec >= best * (1.0 - 1e-9)]
    var, t = min(tied)
    return var, t, best


def cart_oracle(x, y, king, max_depth, min_leaf):
    """Greedy regression CART considering all variables at every node, the
    root forced to the king, no variable reused along a path."""

    def grow(idx, depth, banned):
        yv = y[idx]
        if depth > max_depth or len(idx) < 2 * min_leaf or np.all(yv == yv[0]):
            return {"leaf": float(yv.mean()), "n": len(idx)}
        if depth == 1 and king is not None:
            variables = [king]
        else:
            variables = [v for v in range(x.shape[1]) if v not in banned]
            if not variables:
                return {"leaf": float(yv.mean()), "n": len(idx)}
        found = cart_best_split(x, y, idx, variables, min_leaf)
        if found is None:
            return {"leaf": float(yv.mean()), "n": len(idx)}
        var, t, _ = found
        mask = x[idx, var] < t
        return {
            "var": var,
            "threshold": t,
            "left": grow(idx[mask], depth + 1, banned | {var}),
            "right": grow(idx[~mask], depth + 1, banned | {var}),
        }

    start = set() if king is None else {king}
    return grow(np.arange(x.shape[0]), 1, start)


def assert_same_tree(node, ref, leaf_tol=1e-12):
    """Node-for-node comparison of a built tree against an oracle tree."""
    if isinstance(node, Leaf):
        assert "leaf" in ref, f"builder made a leaf where oracle split {ref.get('var')}"
        assert abs(node.value - ref["leaf"]) <= leaf_tol * max(1.0, abs(ref["leaf"]))
        assert node.n == ref["n"]
        return
    assert "leaf" not in ref, "builder split where oracle made a leaf"
    assert node.var == ref["var"]
    assert node.threshold == ref["threshold"]
    assert_same_tree(node.left, ref["left"], leaf_tol)
    assert_same_tree(node.right, ref["right"], leaf_tol)


# --- tree interpretation and permutation importance -------------------------

def interpret_row(node, values):
    """Walk one sample through a tree, one comparison at a time."""
    while isinstance(node, SplitNode):
        node = node.left if values[node.var] < node.threshold else node.right
    return node.value


def pvim_oracle(tree, x, y, rows, king, permuted, classification):
    """Literal held-out evaluation: squared error (or misclassification)
    totals before and after substituting the permuted king column."""
    before = 0.0
    after = 0.0
    for pos, i in enumerate(rows):
        values = {v: x[i, v] for v in range(x.shape[1])}
        yhat = interpret_row(tree.root, values)
        values[king] = permuted[pos]
        ystar = interpret_row(tree.root, values)
        if classification:
            before += float(yhat != y[i])
            after += float(ystar != y[i])
        else:
            before += (y[i] - yhat) ** 2
            after += (y[i] - ystar) ** 2
    return (after - before) / len(rows)


def count_depth_splits(root, depth):
    """Number of split nodes sitting exactly at the given depth."""

    def walk(node, d):
        if not isinstance(node, SplitNode):
            return 0
        if d == depth:
            return 1
        return walk(node.left, d + 1) + walk(node.right, d + 1)

    return walk(root, 1)


# --- weight update ----------------------------------------------------------

def update_weights_oracle(w_prev, forest):
    """The double sum over (variable, tree) pairs, literally."""
    w_prev = np.asarray(w_prev, dtype=np.float64)
    out = np.empty_like(w_prev)
    for i in range(w_prev.shape[0]):
        s = 0.0
        for tree in forest.trees:
            if tree.pvim > 0.0 and i in tree.split_variables():
                s += tree.pvim
        out[i] = w_prev[i] + s
    return out


# --- distance correlation ---------------------------------------------------

def dcor_naive(a, b):
    """Four-loop double centering, no vectorization anywhere."""
    n = len(a)
    A = [[abs(a[i] - a[j]) for j in range(n)] for i in range(n)]
    B = [[abs(b[i] - b[j]) for j in range(n)] for i in range(n)]

    def center(M):
        rows = [sum(r) / n for r in M]
        cols = [sum(M[i][j] for i in range(n)) / n for j in range(n)]
        grand = sum(rows) / n
        return [[M[i][j] - rows[i] - cols[j] + grand for j in range(n)] for i in range(n)]

    A = center(A)
    B = center(B)
    dcov2 = sum(A[i][j] * B[i][j] for i in range(n) for j in range(n)) / n**2
    dvar_a = sum(A[i][j] ** 2 for i in range(n) for j in range(n)) / n**2
    dvar_b = sum(B[i][j] ** 2 for i in range(n) for j in range(n)) / n**2
    if dvar_a <= 0 or dvar_b <= 0:
        return 0.0
    r2 = dcov2 / (dvar_a * dvar_b) ** 0.5
    return max(r2, 0.0) ** 0.5

"""Outer iteration: King selection, accumulated weights, and interaction typing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import parallel
from .data import Dataset, SeedContext, permute_column
from .forest import build_forest
from .kings import KingParams, rank_variables, run_kings_forests
from .pvim import pvim_given_permutation

ACCOMPANIED = "accompanied"
SYNERGISTIC = "synergistic"
HIERARCHICAL = "hierarchical"


@dataclass
class IkfParams:
    """Outer-loop controls.

    alpha is the fraction of variables dropped from the survivor set each
    iteration; the loop stops once the survivor set has at most
    survivor_threshold members (default max(10, ceil(0.02 p))) or after
    max_kings Kings. first_king is "auto" (vanilla-forest importance),
    "random", or a variable name/index. tau_main=None thresholds main
    effects at a quarter of the largest depth-1 King importance, floored at
    a tenth of the response variance; order_tau=None defaults to a tenth of
    each King's largest profile value.
    """

    alpha: float = 0.5
    survivor_threshold: int | None = None
    max_kings: int | None = None
    first_king: object = "auto"
    king: KingParams = field(default_factory=KingParams)
    tau_main: float | None = None
    tau_dir: float = 1e-6
    order_tau: float | None = None
    restrict_survivors: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.survivor_threshold is not None and self.survivor_threshold < 1:
            raise ValueError("survivor_threshold must be >= 1")
        if self.max_kings is not None and self.max_kings < 1:
            raise ValueError("max_kings must be >= 1")
        if self.tau_dir < 0 or (self.tau_main is not None and self.tau_main < 0):
            raise ValueError("typing thresholds must be nonnegative")
        if self.order_tau is not None and self.order_tau < 0:
            raise ValueError("order_tau must be nonnegative")


@dataclass(frozen=True)
class TypedInteraction:
    """A candidate interaction with its inferred structure.

    dominant is an ordered proper prefix of one ordering of vars, only set
    for hierarchical interactions; low_confidence marks candidates whose
    directions all fell below the threshold.
    """

    vars: tuple
    order: int
    kind: str
    dominant: tuple | None = None
    low_confidence: bool = False
    evidence: dict = field(default_factory=dict, compare=False)


@dataclass
class IkfReport:
    W: np.ndarray
    kings: list
    survived_trace: list
    shortlists: dict
    typed_interactions: list
    inferred_orders: dict


def default_survivor_threshold(p: int) -> int:
    return max(10, math.ceil(0.02 * p))


def infer_orders(profile, tau) -> set:
    """Interaction orders suggested by a King's depth profile.

    Order 1 is claimed when the depth-1 value clears tau; order d >= 2 when
    the step from depth d-1 to depth d does. A non-increasing profile can
    therefore claim at most order 1.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    profile = np.asarray(profile, dtype=np.float64)
    orders = set()
    if profile.shape[0] >= 1 and profile[0] > tau:
        orders.add(1)
    for d in range(2, profile.shape[0] + 1):
        if profile[d - 1] - profile[d - 2] > tau:
            orders.add(d)
    return orders


def classify_interaction(ordering, forward, backward, main_pvims, tau_main, tau_dir):
    """Type one candidate interaction from direction-wise average PVIMs.

    `ordering` is the forward direction with the suspected nested variable
    last; `forward`/`backward` are the average importances of that ordering
    and of the orderings led by the last variable. Any member with a known
    depth-1 importance above tau_main makes the interaction accompanied;
    otherwise two live directions mean synergistic and a single live
    direction means hierarchical, with the leading element(s) dominant.
    """
    ordering = tuple(ordering)
    evidence = {
        "forward": float(forward),
        "backward": float(backward),
        "main_pvims": {v: float(main_pvims[v]) for v in ordering if v in main_pvims},
        "tau_main": float(tau_main),
        "tau_dir": float(tau_dir),
    }
    members = tuple(sorted(ordering))
    order = len(ordering)
    if any(v in main_pvims and main_pvims[v] > tau_main for v in ordering):
        return TypedInteraction(members, order, ACCOMPANIED, evidence=evidence)
    if forward > tau_dir and backward > tau_dir:
        return TypedInteraction(members, order, SYNERGISTIC, evidence=evidence)
    if forward > tau_dir:
        return TypedInteraction(
            members, order, HIERARCHICAL, dominant=ordering[:-1], evidence=evidence
        )
    if backward > tau_dir:
        return TypedInteraction(
            members, order, HIERARCHICAL, dominant=(ordering[-1],), evidence=evidence
        )
    return TypedInteraction(
        members, order, SYNERGISTIC, low_confidence=True, evidence=evidence
    )


def choose_first_king(data: Dataset, params: IkfParams, seeds) -> int:
    """Resolve the first King: a named variable, a random one, or the top
    variable of a vanilla (free-rooted, uniform-weight) forest by standard
    permutation importance."""
    seeds = seeds if isinstance(seeds, SeedContext) else SeedContext(int(seeds))
    fk = params.first_king
    if isinstance(fk, (int, np.integer)) or (isinstance(fk, str) and fk not in ("auto", "random")):
        return data.var_index(fk)
    p = data.n_vars
    if fk == "random":
        return int(seeds.child(9, 0).rng().integers(p))
    weights = np.ones(p)
    pool = np.arange(p, dtype=np.intp)
    forest = build_forest(
        data, None, weights, pool, params.king.max_depth, params.king.tree,
        params.king.n_trees, seeds.child(9, 1),
    )
    importance = np.zeros(p)
    scored = 0
    for j, tree in enumerate(forest.trees):
        rows = tree.oob
        if rows.shape[0] == 0:
            continue
        scored += 1
        rng = seeds.child(9, 2, j).rng()
        for v in tree.split_variables():
            col = data.x[rows, v]
            importance[v] += pvim_given_permutation(
                tree, data, int(v), rows, permute_column(col, rng)
            )
    return int(np.argmax(importance / max(scored, 1)))


def survivor_cut(w, alpha, restrict_to=None) -> set:
    """The variables surviving one iteration: the top (1 - alpha) fraction.

    By default the cut ranks all p variables; with restrict_to it ranks only
    those indices and keeps the top (1 - alpha) fraction of them.
    """
    w = np.asarray(w, dtype=np.float64)
    if restrict_to is None:
        keep = math.ceil((1.0 - alpha) * w.shape[0])
        return set(rank_variables(w)[:keep].tolist())
    restrict_to = np.asarray(sorted(restrict_to), dtype=np.intp)
    keep = math.ceil((1.0 - alpha) * restrict_to.shape[0])
    order = rank_variables(w[restrict_to])
    return set(restrict_to[order[:keep]].tolist())


def _concatenate_shortlists(reports) -> dict:
    out = {}
    for rep in reports:
        for d, metrics in rep.shortlists.items():
            slot = out.setdefault(d, {"pvim_sum": [], "count": []})
            for metric, records in metrics.items():
                slot[metric].extend(records)
    return out


def _directional_averages(shortlists):
    """Map each observed ordered path to its average importance per record."""
    averages = {}
    for metrics in shortlists.values():
        for records in metrics.values():
            for rec in records:
                averages.setdefault(rec.vars, rec.avg_pvim)
    return averages


def type_interactions(reports, shortlists, tau_main, tau_dir, scale=0.0) -> list:
    """Classify every variable set appearing in the concatenated shortlists.

    Direction evidence is the average importance of each observed ordering;
    orderings never observed count as zero. The candidate's forward
    direction puts the most nested-looking member last.

    The default main-effect threshold is a quarter of the largest depth-1
    importance, floored at a tenth of `scale` (the response variance): the
    largest depth-1 value always clears a purely relative cut even when it
    is noise, so without the floor some interaction would be called
    accompanied on data with no main effects at all.
    """
    main_pvims = {rep.king: float(rep.pvim_profile[0]) for rep in reports}
    if tau_main is None:
        peak = max(main_pvims.values(), default=0.0)
        tau_main = max(0.25 * max(peak, 0.0), 0.1 * float(scale))
    averages = _directional_averages(shortlists)
    groups = {}
    for ordering, avg in averages.items():
        groups.setdefault(frozenset(ordering), []).append((ordering, avg))

    typed = []
    for members in sorted(groups, key=lambda s: tuple(sorted(s))):
        observed = dict(groups[members])
        best = {}
        for ordering, avg in observed.items():
            lead, tail = ordering[0], ordering[-1]
            best[("last", tail)] = max(best.get(("last", tail), 0.0), avg)
            best[("first", lead)] = max(best.get(("first", lead), 0.0), avg)
        ranked = sorted(
            members,
            key=lambda v: (
                -(best.get(("last", v), 0.0) - best.get(("first", v), 0.0)),
                v,
            ),
        )
        nested = ranked[0]
        forward = best.get(("last", nested), 0.0)
        backward = best.get(("first", nested), 0.0)
        candidates = [o for o in observed if o[-1] == nested]
        if candidates:
            ordering = max(candidates, key=lambda o: observed[o])
        else:
            ordering = tuple(sorted(members - {nested})) + (nested,)
        typed.append(
            classify_interaction(
                ordering, forward, backward, main_pvims, tau_main, tau_dir
            )
        )
    typed.sort(
        key=lambda t: (-max(t.evidence["forward"], t.evidence["backward"]), t.vars)
    )
    return typed


def run_ikf(data: Dataset, params: IkfParams, seeds, workers=None) -> IkfReport:
    """Iterate Kings until the survivor set is small enough.

    Each iteration runs the single-King pipeline with unit initial weights,
    intersects the survivor set with the top (1 - alpha) fraction of that
    King's weights, accumulates the weights into W, and crowns the
    highest-W variable not yet used. Shortlists are concatenated across
    Kings and every shortlisted variable set is typed.
    """
    p = data.n_vars
    seeds = seeds if isinstance(seeds, SeedContext) else SeedContext(int(seeds))
    threshold = params.survivor_threshold or default_survivor_threshold(p)

    own = None
    if workers is None:
        workers = own = parallel.Workers(1, payload=data)
    try:
        king = choose_first_king(data, params, seeds)
        W = np.zeros(p)
        survived = set(range(p))
        reports = []
        trace = []
        while True:
            i = len(reports) + 1
            rep = run_kings_forests(
                data, king, np.ones(p), params.king, seeds.child(2, i), workers
            )
            reports.append(rep)
            restrict = survived if params.restrict_survivors else None
            survived = survived & survivor_cut(rep.w, params.alpha, restrict)
            trace.append(np.asarray(sorted(survived), dtype=np.intp))
            W = W + rep.w
            crowned = {r.king for r in reports}
            if len(survived) <= threshold:
                break
            if params.max_kings is not None and len(reports) >= params.max_kings:
                break
            if len(crowned) >= p:
                break
            king = next(
                int(v) for v in rank_variables(W) if int(v) not in crowned
            )
    finally:
        if own is not None:
            own.close()

    shortlists = _concatenate_shortlists(reports)
    typed = type_interactions(
        reports, shortlists, params.tau_main, params.tau_dir,
        scale=float(np.var(data.y)),
    )
    orders = {}
    for rep in reports:
        tau = params.order_tau
        if tau is None:
            tau = 0.1 * max(float(rep.pvim_profile.max()), 0.0)
        orders[rep.king] = tuple(sorted(infer_orders(rep.pvim_profile, tau)))
    return IkfReport(
        W=W,
        kings=reports,
        survived_trace=trace,
        shortlists=shortlists,
        typed_interactions=typed,
        inferred_orders=orders,
    )

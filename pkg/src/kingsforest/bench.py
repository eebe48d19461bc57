"""Simulation scenarios, recovery metrics, the DC-SIS baseline, and the
multi-replication experiment runner."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import parallel
from .data import Dataset, SeedContext, as_seed
from .ikf import IkfParams, run_ikf
from .kings import rank_variables

IKF = "ikf"
DCSIS = "dcsis"


def _need(p, cols, sid):
    if p <= max(cols):
        raise ValueError(f"scenario {sid} needs p >= {max(cols) + 1}")


def _resp_a1(x, s):
    return s * x[:, 0] * x[:, 2] - s * x[:, 4] * (x[:, 6] < 0.2)


def _resp_a2(x, s):
    return 2 * s * x[:, 0] * np.sin(x[:, 2]) + 2 * s * x[:, 4] * np.cos(x[:, 6] + np.pi / 2)


def _resp_a3(x, s):
    return s * np.exp(x[:, 0]) * x[:, 2] / 2 - s * np.log(5 * np.abs(x[:, 4])) * x[:, 6]


def _resp_a4(x, s):
    return s * x[:, 0] * x[:, 2] ** 2 / 2 - s * np.sign(x[:, 4]) * x[:, 6] ** 2


def _resp_a5(x, s):
    return s * x[:, 0] * x[:, 2] + 1.5 * s * x[:, 4] * np.sin(x[:, 6])


def _resp_b1(x, s):
    return s * x[:, 0] * (1 + x[:, 2]) ** 2 * np.sin(x[:, 4])


def _resp_b2(x, s):
    return s * x[:, 0] * np.log(5 * np.abs(1 + x[:, 2])) * np.sin(x[:, 4])


def _resp_b3(x, s):
    return s * x[:, 0] * np.sign(1 + x[:, 2]) * np.sin(x[:, 4])


def _resp_b4(x, s):
    return s * x[:, 0] * x[:, 2] * np.sin(x[:, 4])


def _resp_b5(x, s):
    return s * x[:, 0] * x[:, 2] * x[:, 4]


_A_TRUTH = (0, 2, 4, 6)
_A_INTERACTIONS = ((0, 2), (4, 6))
_B_TRUTH = (0, 2, 4)
_B_INTERACTIONS = ((0, 2, 4),)

_RESPONSES = {
    "a1": _resp_a1, "a2": _resp_a2, "a3": _resp_a3, "a4": _resp_a4, "a5": _resp_a5,
    "b1": _resp_b1, "b2": _resp_b2, "b3": _resp_b3, "b4": _resp_b4, "b5": _resp_b5,
}

SCENARIO_IDS = tuple(sorted(_RESPONSES))


def scenario_response(scenario_id, x, s=2.0) -> np.ndarray:
    """Noise-free response of one scenario evaluated on rows of x."""
    sid = str(scenario_id).lower()
    if sid not in _RESPONSES:
        raise ValueError(f"unknown scenario {scenario_id!r}")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    truth = _A_TRUTH if sid.startswith("a") else _B_TRUTH
    _need(x.shape[1], truth, sid)
    return _RESPONSES[sid](x, float(s))


@dataclass(frozen=True)
class Scenario:
    """One simulated ground truth: id picks the functional form, s its scale.

    Category "a" uses four active variables in two pairwise interactions;
    category "b" uses three active variables in one third-order interaction.
    """

    id: str
    n: int = 200
    p: int = 500
    s: float = 2.0

    def __post_init__(self):
        sid = str(self.id).lower()
        if sid not in _RESPONSES:
            raise ValueError(f"unknown scenario {self.id!r}")
        object.__setattr__(self, "id", sid)
        if self.n < 2:
            raise ValueError("n must be >= 2")
        _need(self.p, self.truth, sid)

    @property
    def truth(self) -> tuple:
        return _A_TRUTH if self.id.startswith("a") else _B_TRUTH

    @property
    def interactions(self) -> tuple:
        return _A_INTERACTIONS if self.id.startswith("a") else _B_INTERACTIONS

    @property
    def suggested_depth(self) -> int:
        return 4 if self.id.startswith("a") else 5


def generate(scenario: Scenario, seed) -> Dataset:
    """Simulate one dataset: x and the noise are i.i.d. standard normal.

    The predictor matrix is drawn before the noise, so two scenarios with
    the same seed and the same (n, p) share the same x and differ only in y;
    that makes paired method comparisons possible.
    """
    rng = as_seed(seed).rng()
    x = rng.standard_normal((scenario.n, scenario.p))
    e = rng.standard_normal(scenario.n)
    y = scenario_response(scenario.id, x, scenario.s) + e
    return Dataset(x=x, y=y)


def mrs(ranking, truth) -> int:
    """Minimum ranked-list prefix length that covers every truth variable."""
    positions = {int(v): i for i, v in enumerate(ranking)}
    worst = -1
    for v in truth:
        if int(v) not in positions:
            raise ValueError(f"truth variable {v} missing from the ranking")
        worst = max(worst, positions[int(v)])
    return worst + 1


def interaction_hit(shortlists, target) -> bool:
    """True when some shortlisted path matches the target set, in any order."""
    target = frozenset(int(v) for v in target)
    metrics = shortlists.get(len(target), {})
    for records in metrics.values():
        for rec in records:
            if frozenset(rec.vars) == target:
                return True
    return False


def distance_correlation(a, b) -> float:
    """Sample distance correlation via double-centered pairwise distances.

    The O(n^2) estimator; a constant vector has zero distance variance and
    its correlation is defined as 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    def centered(v):
        d = np.abs(v[:, None] - v[None, :])
        row = d.mean(axis=1, keepdims=True)
        col = d.mean(axis=0, keepdims=True)
        return d - row - col + d.mean()

    A = centered(a)
    B = centered(b)
    dvar_a = (A * A).mean()
    dvar_b = (B * B).mean()
    if dvar_a <= 0.0 or dvar_b <= 0.0:
        return 0.0
    r2 = (A * B).mean() / math.sqrt(dvar_a * dvar_b)
    return math.sqrt(max(r2, 0.0))


def dc_sis(data: Dataset) -> np.ndarray:
    """Rank variables by distance correlation with the response, descending."""
    if data.n_samples < 4:
        raise ValueError("need at least 4 samples")
    y = data.y
    dy = np.abs(y[:, None] - y[None, :])
    B = dy - dy.mean(axis=1, keepdims=True) - dy.mean(axis=0, keepdims=True) + dy.mean()
    dvar_b = (B * B).mean()
    scores = np.zeros(data.n_vars)
    if dvar_b > 0.0:
        for j in range(data.n_vars):
            v = data.x[:, j]
            d = np.abs(v[:, None] - v[None, :])
            A = d - d.mean(axis=1, keepdims=True) - d.mean(axis=0, keepdims=True) + d.mean()
            dvar_a = (A * A).mean()
            if dvar_a > 0.0:
                r2 = (A * B).mean() / math.sqrt(dvar_a * dvar_b)
                scores[j] = math.sqrt(max(r2, 0.0))
    return rank_variables(scores)


def model_sizes(n: int) -> tuple:
    """The two reporting sizes: d1 = floor(n / (2 ln n)), d2 = floor(n / ln n)."""
    return int(n / (2.0 * math.log(n))), int(n / math.log(n))


def nearest_rank_quantiles(values, qs=(5, 25, 50, 75, 95)) -> dict:
    """Nearest-rank (inverse empirical CDF) quantiles of a sample."""
    ordered = sorted(values)
    r = len(ordered)
    if r == 0:
        raise ValueError("no values")
    return {q: ordered[max(1, math.ceil(q / 100.0 * r)) - 1] for q in qs}


@dataclass
class RunMetrics:
    """Per-replication outcomes; interaction fields are None for rankers
    that produce no path shortlists."""

    mrs: int
    irr: dict | None
    orr: bool | None
    ps: dict = field(default_factory=dict)
    pa: dict = field(default_factory=dict)

    @property
    def p_inter(self):
        return self.orr


@dataclass
class ExperimentResult:
    scenario: Scenario
    method: str
    replications: int
    master_seed: int
    metrics: list
    details: list
    mrs_quantiles: dict
    irr_rates: dict | None
    orr_rate: float | None
    ps_rates: dict
    pa_rates: dict
    sizes: tuple


def _evaluate_ranking(ranking, scenario):
    sizes = model_sizes(scenario.n)
    labels = ("d1", "d2")
    ps = {}
    pa = {}
    for label, size in zip(labels, sizes):
        head = set(int(v) for v in ranking[:size])
        ps[label] = {int(v): (int(v) in head) for v in scenario.truth}
        pa[label] = all(ps[label].values())
    return mrs(ranking, scenario.truth), ps, pa


def _experiment_task(args):
    scenario, method, params, master, r = args
    ctx = SeedContext(master, (3, r))
    data = generate(scenario, ctx.child(0))
    detail = {}
    if method == DCSIS:
        ranking = dc_sis(data)
        m, ps, pa = _evaluate_ranking(ranking, scenario)
        metrics = RunMetrics(mrs=m, irr=None, orr=None, ps=ps, pa=pa)
    else:
        report = run_ikf(data, params, ctx.child(1))
        ranking = rank_variables(report.W)
        m, ps, pa = _evaluate_ranking(ranking, scenario)
        irr = {
            target: interaction_hit(report.shortlists, target)
            for target in scenario.interactions
        }
        metrics = RunMetrics(mrs=m, irr=irr, orr=all(irr.values()), ps=ps, pa=pa)
        records = {}
        for d, metrics_d in report.shortlists.items():
            seen = {}
            for lst in metrics_d.values():
                for rec in lst:
                    seen[rec.vars] = (rec.reproduction_count, rec.pvim_sum)
            records[d] = sorted(
                (vars_, c, s) for vars_, (c, s) in seen.items()
            )
        detail = {
            "paths": records,
            "typed": {t.vars: t.kind for t in report.typed_interactions},
            "kings": [rep.king for rep in report.kings],
        }
    return metrics, detail


def run_experiment(
    scenario: Scenario, method, params: IkfParams, replications, seed, workers=1
) -> ExperimentResult:
    """Run seeded replications of one method on one scenario.

    Replications execute independently (optionally across a worker pool with
    deterministic per-replication streams) and aggregate in replication
    order: MRS quantiles, per-interaction and overall recovery rates, and
    truth-inclusion proportions at the two model sizes.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    method = str(method).lower()
    if method not in (IKF, DCSIS):
        raise ValueError(f"unknown method {method!r}")
    master = as_seed(seed).master_seed
    tasks = [(scenario, method, params, master, r) for r in range(replications)]
    with parallel.Workers(workers) as pool:
        outcomes = pool.map(_experiment_task, tasks)
    metrics = [m for m, _ in outcomes]
    details = [d for _, d in outcomes]

    quantiles = nearest_rank_quantiles([m.mrs for m in metrics])
    if method == IKF:
        irr_rates = {
            target: float(np.mean([m.irr[target] for m in metrics]))
            for target in scenario.interactions
        }
        orr_rate = float(np.mean([m.orr for m in metrics]))
    else:
        irr_rates = None
        orr_rate = None
    ps_rates = {}
    pa_rates = {}
    for label in ("d1", "d2"):
        ps_rates[label] = {
            int(v): float(np.mean([m.ps[label][v] for m in metrics]))
            for v in scenario.truth
        }
        pa_rates[label] = float(np.mean([m.pa[label] for m in metrics]))
    return ExperimentResult(
        scenario=scenario,
        method=method,
        replications=replications,
        master_seed=master,
        metrics=metrics,
        details=details,
        mrs_quantiles=quantiles,
        irr_rates=irr_rates,
        orr_rate=orr_rate,
        ps_rates=ps_rates,
        pa_rates=pa_rates,
        sizes=model_sizes(scenario.n),
    )

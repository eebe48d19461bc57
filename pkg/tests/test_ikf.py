import numpy as np
import pytest

from kingsforest.data import Dataset, SeedContext
from kingsforest.forest import PathRecord
from kingsforest.ikf import (
    ACCOMPANIED,
    HIERARCHICAL,
    SYNERGISTIC,
    IkfParams,
    choose_first_king,
    classify_interaction,
    default_survivor_threshold,
    infer_orders,
    run_ikf,
    survivor_cut,
    type_interactions,
)
from kingsforest.kings import KingParams, KingReport, rank_variables


def noise_data(n, p, seed):
    rng = SeedContext(seed).rng()
    return Dataset(x=rng.standard_normal((n, p)), y=rng.standard_normal(n))


def small_params(**kw):
    king = KingParams(n_trees=kw.pop("n_trees", 20), max_depth=kw.pop("max_depth", 2),
                      n_iter=kw.pop("n_iter", 2), n_candidates=kw.pop("n_candidates", 5))
    return IkfParams(king=king, **kw)


class TestChooseFirstKing:
    def test_named_by_string_and_index(self):
        data = noise_data(30, 6, 1)
        assert choose_first_king(data, small_params(first_king="x5"), SeedContext(1)) == 4
        assert choose_first_king(data, small_params(first_king=2), SeedContext(1)) == 2

    def test_named_out_of_range(self):
        data = noise_data(30, 6, 2)
        with pytest.raises(Exception, match="x9"):
            choose_first_king(data, small_params(first_king="x9"), SeedContext(2))

    def test_random_is_reproducible(self):
        data = noise_data(30, 6, 3)
        params = small_params(first_king="random")
        a = choose_first_king(data, params, SeedContext(42))
        b = choose_first_king(data, params, SeedContext(42))
        assert a == b

    def test_auto_finds_strong_main_effect(self):
        hits = 0
        for seed in range(20):
            rng = SeedContext(100 + seed).rng()
            x = rng.standard_normal((150, 10))
            y = 5.0 * x[:, 1] + rng.standard_normal(150)
            data = Dataset(x=x, y=y)
            params = small_params(n_trees=50, max_depth=3)
            if choose_first_king(data, params, SeedContext(200 + seed)) == 1:
                hits += 1
        assert hits >= 18


class TestSurvivorCut:
    def test_alpha_half_keeps_ceil_half(self):
        w = np.arange(500, dtype=float)
        assert len(survivor_cut(w, 0.5)) == 250
        assert len(survivor_cut(np.arange(7, dtype=float), 0.5)) == 4

    def test_keeps_top_weighted(self):
        w = np.array([0.1, 5.0, 0.2, 4.0])
        assert survivor_cut(w, 0.5) == {1, 3}

    def test_restricted_variant(self):
        w = np.array([9.0, 1.0, 8.0, 7.0, 6.0, 0.5])
        assert survivor_cut(w, 0.5, restrict_to={1, 4, 5}) == {1, 4}

    def test_default_survivor_threshold(self):
        assert default_survivor_threshold(200) == 10
        assert default_survivor_threshold(1000) == 20


class TestInferOrders:
    def test_flat_zero_profile(self):
        assert infer_orders([0.0, 0.0, 0.0], 0.5) == set()

    def test_jump_at_depth_two_only(self):
        assert infer_orders([0.19, 3.75, 4.03, 4.47], 0.5) == {2}

    def test_moderate_jump_profile(self):
        assert infer_orders([0.20, 1.11, 1.33, 1.24], 0.5) == {2}

    def test_main_effect_claimed_above_tau(self):
        assert infer_orders([0.20, 1.11, 1.33, 1.24], 0.1) == {1, 2, 3}

    def test_monotone_nonincreasing_claims_at_most_order_one(self):
        rng = SeedContext(9).rng()
        for _ in range(50):
            profile = np.sort(rng.standard_normal(5))[::-1]
            assert infer_orders(profile, 0.0) <= {1}

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            infer_orders([1.0], -0.1)


class TestClassifyInteraction:
    def test_both_directions_live_no_main_is_synergistic(self):
        t = classify_interaction((8, 3), 0.0323, 0.0090, {8: 1e-17, 3: -2e-17},
                                 tau_main=0.01, tau_dir=1e-6)
        assert t.kind == SYNERGISTIC
        assert t.vars == (3, 8)
        assert t.dominant is None

    def test_dead_reverse_direction_is_hierarchical(self):
        t = classify_interaction((8, 5), 0.0459, 2e-16, {8: 1e-17, 5: 0.0},
                                 tau_main=0.01, tau_dir=1e-6)
        assert t.kind == HIERARCHICAL
        assert t.dominant == (8,)

    def test_member_with_main_effect_is_accompanied(self):
        t = classify_interaction((4, 6), 2.1, 0.5, {4: 1.0, 6: -0.1},
                                 tau_main=0.25, tau_dir=1e-6)
        assert t.kind == ACCOMPANIED

    def test_reverse_only_direction_dominant_is_last(self):
        t = classify_interaction((2, 7), 0.0, 0.2, {}, tau_main=0.5, tau_dir=1e-6)
        assert t.kind == HIERARCHICAL
        assert t.dominant == (7,)

    def test_all_dead_is_low_confidence_synergistic(self):
        t = classify_interaction((1, 2), 0.0, 0.0, {}, tau_main=0.5, tau_dir=1e-6)
        assert t.kind == SYNERGISTIC
        assert t.low_confidence

    def test_triple_dominant_prefix(self):
        t = classify_interaction((0, 4, 2), 1.9, 0.0, {}, tau_main=0.5, tau_dir=1e-6)
        assert t.kind == HIERARCHICAL
        assert t.dominant == (0, 4)
        assert t.order == 3

    def test_homogeneous_under_joint_rescaling(self):
        rng = SeedContext(11).rng()
        for _ in range(100):
            fwd, bwd = rng.random(2) * 0.1
            mains = {0: float(rng.standard_normal()), 1: float(rng.standard_normal())}
            tau_main, tau_dir = rng.random(2) * 0.1
            base = classify_interaction((0, 1), fwd, bwd, mains, tau_main, tau_dir)
            c = float(rng.random() * 100 + 0.01)
            scaled = classify_interaction(
                (0, 1), fwd * c, bwd * c, {k: v * c for k, v in mains.items()},
                tau_main * c, tau_dir * c,
            )
            assert base.kind == scaled.kind
            assert base.dominant == scaled.dominant


def fake_report(king, p, profile, records_by_depth):
    shortlists = {}
    for d, recs in records_by_depth.items():
        shortlists[d] = {
            "pvim_sum": [PathRecord(v, d, c, s) for v, c, s in recs],
            "count": [PathRecord(v, d, c, s) for v, c, s in recs],
        }
    return KingReport(
        king=king, w=np.ones(p), pvim_profile=np.asarray(profile, dtype=float),
        pvim_profile_sum=np.asarray(profile, dtype=float), shortlists=shortlists,
        pool=np.arange(p),
    )


class TestTypeInteractions:
    def test_pair_seen_both_ways_is_synergistic(self):
        rep_a = fake_report(0, 6, [0.01, 0.5], {2: [((0, 1), 10, 5.0)]})
        rep_b = fake_report(1, 6, [0.02, 0.4], {2: [((1, 0), 8, 4.0)]})
        shortlists = {2: {"pvim_sum": rep_a.shortlists[2]["pvim_sum"] + rep_b.shortlists[2]["pvim_sum"],
                          "count": []}}
        typed = type_interactions([rep_a, rep_b], shortlists, tau_main=None, tau_dir=1e-6, scale=1.0)
        kinds = {t.vars: t for t in typed}
        assert kinds[(0, 1)].kind == SYNERGISTIC

    def test_pair_seen_one_way_is_hierarchical(self):
        rep_a = fake_report(0, 6, [0.01, 0.5], {2: [((0, 3), 10, 5.0)]})
        shortlists = {2: {"pvim_sum": rep_a.shortlists[2]["pvim_sum"], "count": []}}
        typed = type_interactions([rep_a], shortlists, tau_main=None, tau_dir=1e-6, scale=1.0)
        kinds = {t.vars: t for t in typed}
        assert kinds[(0, 3)].kind == HIERARCHICAL
        assert kinds[(0, 3)].dominant == (0,)

    def test_main_effect_member_accompanied(self):
        rep_a = fake_report(0, 6, [2.0, 2.5], {2: [((0, 2), 10, 5.0)]})
        rep_b = fake_report(2, 6, [0.0, 0.3], {2: [((2, 0), 9, 4.0)]})
        shortlists = {2: {"pvim_sum": rep_a.shortlists[2]["pvim_sum"] + rep_b.shortlists[2]["pvim_sum"],
                          "count": []}}
        typed = type_interactions([rep_a, rep_b], shortlists, tau_main=None, tau_dir=1e-6, scale=1.0)
        kinds = {t.vars: t for t in typed}
        assert kinds[(0, 2)].kind == ACCOMPANIED


class TestRunIkf:
    def test_max_kings_one(self):
        data = noise_data(60, 8, 20)
        params = small_params(max_kings=1, first_king=3)
        report = run_ikf(data, params, SeedContext(20))
        assert len(report.kings) == 1
        assert report.kings[0].king == 3
        assert np.array_equal(report.W, report.kings[0].w)

    def test_survived_chain_and_distinct_kings(self):
        data = noise_data(80, 12, 21)
        params = small_params(survivor_threshold=3, first_king=0)
        report = run_ikf(data, params, SeedContext(21))
        kings = [rep.king for rep in report.kings]
        assert len(set(kings)) == len(kings)
        previous = set(range(12))
        for s in report.survived_trace:
            current = set(s.tolist())
            assert current <= previous
            previous = current
        assert len(report.survived_trace[-1]) <= 3 or len(kings) == 12

    def test_accumulated_weights_are_exact_sum(self):
        data = noise_data(60, 8, 22)
        params = small_params(max_kings=3, survivor_threshold=1, first_king=0)
        report = run_ikf(data, params, SeedContext(22))
        total = np.zeros(8)
        for rep in report.kings:
            total = total + rep.w
        assert np.array_equal(report.W, total)

    def test_deterministic_king_order(self):
        data = noise_data(60, 8, 23)
        params = small_params(max_kings=3, survivor_threshold=1, first_king="auto")
        a = run_ikf(data, params, SeedContext(23))
        b = run_ikf(data, params, SeedContext(23))
        assert [r.king for r in a.kings] == [r.king for r in b.kings]
        assert np.array_equal(a.W, b.W)

    def test_classification_mode_end_to_end(self):
        # binary response driven by a pairwise interaction; importance is
        # misclassification-rate increase in this mode
        rng = SeedContext(950).rng()
        x = rng.standard_normal((300, 12))
        flip = rng.random(300) < 0.1
        y = ((x[:, 1] * x[:, 4] > 0) ^ flip).astype(float)
        data = Dataset(x=x, y=y, task="classification")
        params = IkfParams(
            king=KingParams(n_trees=60, max_depth=2, n_iter=4), max_kings=3
        )
        report = run_ikf(data, params, SeedContext(951))
        top4 = set(rank_variables(report.W)[:4].tolist())
        assert {1, 4} <= top4
        pairs = {tuple(sorted(r.vars)) for r in report.shortlists[2]["pvim_sum"][:5]}
        assert (1, 4) in pairs

    def test_top_four_recover_truth_in_majority_of_seeds(self):
        wins = 0
        for seed in range(10):
            rng = SeedContext(700 + seed).rng()
            x = rng.standard_normal((200, 50))
            y = 2 * x[:, 0] * x[:, 2] - 2 * x[:, 4] * (x[:, 6] < 0.2) + rng.standard_normal(200)
            data = Dataset(x=x, y=y)
            params = IkfParams(king=KingParams(n_trees=60, max_depth=3, n_iter=4))
            report = run_ikf(data, params, SeedContext(800 + seed))
            top4 = set(rank_variables(report.W)[:4].tolist())
            wins += top4 == {0, 2, 4, 6}
        assert wins >= 6

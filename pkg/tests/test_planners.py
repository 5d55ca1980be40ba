"""
Planner tests
Selection rules, quantile schedules, NormalGamma updates, search loops and commitment
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import kstest, norm

from app.core.posterior import make_gaussian, point_mass
from app.core.search_tree import EdgeStat, SearchNode, StateRef
from app.environments.maze import MazeEnv, maze_generate
from app.environments.tree import FullTree
from app.errors import InvalidArgumentError, InvalidConfigError, InvalidParameterError
from app.oracles.providers import OracleSpec, TablePosteriorProvider, build_provider
from app.oracles.reference import brute_force_ts_distribution, build_enumerated_tree
from app.planners.models import Algorithm, CommitmentKind, CommitmentSpec, DngNodeStat, PlannerConfig
from app.planners.search import commit, commitment_scores, make_selector, run_search, run_search_sh
from app.planners.selection import (
    bayes_ucb_level,
    bayes_uct2_level,
    bayes_uct2_scores,
    bts_quantile_level,
    dng_backup,
    puct_prior,
    sample_dng_value,
    select_bayes_ucb,
    select_bayes_uct2,
    select_bts,
    select_dng,
    select_puct,
    select_tsts
)


def make_node(dists, visits=1, values=None, edge_visits=None, rewards=None):
    """Expanded node with one edge per posterior"""
    edges = []
    for a, dist in enumerate(dists):
        mean = dist.moments[0]
        edges.append(EdgeStat(
            action=a,
            reward=rewards[a] if rewards else 0.0,
            posterior=dist,
            child=StateRef(None, 1, (a,)),
            prior_mean=mean,
            value=mean if values is None else values[a],
            visit_count=edge_visits[a] if edge_visits else 0
        ))
    return SearchNode(StateRef(None), edges, visit_count=visits)


def frequency(select, node, trials=10_000, seed=0):
    rng = np.random.default_rng(seed)
    picks = np.array([select(node, rng) for _ in range(trials)])
    return np.bincount(picks, minlength=len(node.edges)) / trials


@pytest.fixture
def gt_tree():
    """Depth-3 binary tree whose best return hides behind a worse first step"""
    return FullTree(3, 2, {(0,): 1.0, (1, 1, 0): 3.0})


@pytest.fixture
def exact_oracle(gt_tree):
    return build_provider(gt_tree, OracleSpec(kind="gt", error_scale=0.0), 0)


class TestPlannerConfig:
    """Configuration parsing and validation"""

    def test_defaults(self):
        cfg = PlannerConfig()
        assert cfg.algorithm == Algorithm.BTS
        assert cfg.budget_T == 50
        assert cfg.effective_beta == 3.0
        assert cfg.commitment.kind == CommitmentKind.MCTS

    def test_algorithm_names_are_case_insensitive(self):
        assert PlannerConfig(algorithm="bayesucb").algorithm == Algorithm.BAYES_UCB
        assert PlannerConfig(algorithm="sh_puct").algorithm == Algorithm.SH_PUCT
        assert PlannerConfig(algorithm="BayesUCB").effective_beta == 0.5

    def test_commitment_string(self):
        cfg = PlannerConfig(commitment="quantile(0.1)")
        assert cfg.commitment == CommitmentSpec(kind=CommitmentKind.QUANTILE, alpha=0.1)
        assert cfg.label == "BTS/quantile(0.1)"

    @pytest.mark.parametrize("kwargs", [
        {"budget_T": 0},
        {"alpha0": 1.0},
        {"alpha0": 0.0},
        {"beta": -1.0},
        {"softmax_temp": 0.0},
        {"bins_m": 1},
        {"commitment": "quantile(1.5)"},
        {"commitment": "mcts(2)"},
        {"commitment": "greedy"},
    ])
    def test_invalid_values(self, kwargs):
        with pytest.raises(ValidationError):
            PlannerConfig(**kwargs)

    def test_commitment_round_trip_text(self):
        for text in ("mcts", "quantile(0.25)", "softmax(2)"):
            assert str(CommitmentSpec.parse(text)) == text

    def test_dng_stat_validation(self):
        with pytest.raises(InvalidParameterError):
            DngNodeStat(0.0, 0.0, 1.0, 1.0)


class TestThompsonSelection:
    """select_tsts"""

    def test_point_masses(self):
        node = make_node([point_mass(1.0), point_mass(2.0), point_mass(0.0)])
        assert set(frequency(select_tsts, node, trials=100).nonzero()[0]) == {1}

    def test_equal_gaussians(self):
        node = make_node([make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)])
        assert frequency(select_tsts, node)[0] == pytest.approx(0.5, abs=0.02)

    def test_two_gaussians_analytic_frequency(self):
        node = make_node([make_gaussian(1.0, 1.0), make_gaussian(0.0, 1.0)])
        assert frequency(select_tsts, node)[0] == pytest.approx(norm.cdf(1.0 / math.sqrt(2.0)), abs=0.01)

    def test_huge_fixed_sigma_is_near_uniform(self):
        env = MazeEnv(maze_generate(3, 9, 9), 30)
        provider = build_provider(env, OracleSpec(kind="fixed", error_scale=0.5, fixed_sigma=1e6), 3)
        node = make_node(provider.query(env.root()))
        np.testing.assert_allclose(frequency(select_tsts, node, trials=20_000), 0.25, atol=0.015)


class TestQuantileSchedules:
    """BTS and Bayes-UCB levels"""

    def test_bts_first_visit_is_alpha0(self):
        assert bts_quantile_level(1, 0.3, 3.0) == pytest.approx(0.3)

    def test_bts_closed_form(self):
        assert bts_quantile_level(4, 0.5, 3.0) == pytest.approx(1.0 - 0.5 * math.exp(-1.0))
        assert bts_quantile_level(4, 0.5, 3.0) == pytest.approx(0.81606, abs=1e-5)

    def test_bts_limit(self):
        assert bts_quantile_level(10 ** 6, 0.5, 3.0) == pytest.approx(1.0, abs=1e-6)

    def test_bts_strictly_increasing(self):
        levels = [bts_quantile_level(n, 0.5, 3.0) for n in range(1, 30)]
        assert all(b > a for a, b in zip(levels, levels[1:]))

    def test_bayes_ucb_levels(self):
        assert bayes_ucb_level(1, 0.5) == 0.5
        assert bayes_ucb_level(10, 0.5) == pytest.approx(0.95)
        assert bayes_ucb_level(1, 2.0) == 0.001

    def test_bayes_ucb_increasing(self):
        levels = [bayes_ucb_level(n, 0.5) for n in range(1, 30)]
        assert all(b > a for a, b in zip(levels, levels[1:]))

    @pytest.mark.parametrize("func, args", [
        (bts_quantile_level, (0, 0.5, 3.0)),
        (bayes_ucb_level, (0, 0.5)),
        (bayes_uct2_level, (0,)),
    ])
    def test_zero_visits_rejected(self, func, args):
        with pytest.raises(InvalidArgumentError):
            func(*args)


class TestQuantileSelection:
    """select_bts and select_bayes_ucb"""

    def test_bts_median_on_first_visit(self):
        node = make_node([make_gaussian(15.0, 10.0), make_gaussian(20.0, 2.0)], visits=1)
        assert select_bts(node, 0.5, 3.0) == 1

    def test_bts_optimistic_after_visits(self):
        # level 1 - 0.5 e^-2 ~ 0.93 favours the wide arm
        node = make_node([make_gaussian(15.0, 10.0), make_gaussian(20.0, 2.0)], visits=7)
        assert select_bts(node, 0.5, 3.0) == 0

    def test_bayes_ucb_at_level_point_nine(self):
        # 15 + 1.2816 * 10 = 27.8 > 20 + 1.2816 * 2 = 22.6
        node = make_node([make_gaussian(15.0, 10.0), make_gaussian(20.0, 2.0)], visits=10)
        assert bayes_ucb_level(10, 1.0) == pytest.approx(0.9)
        assert select_bayes_ucb(node, 1.0) == 0

    def test_point_masses_ignore_level(self):
        node = make_node([point_mass(1.0), point_mass(3.0), point_mass(2.0)], visits=50)
        assert select_bts(node, 0.5, 3.0) == 1
        assert select_bayes_ucb(node, 0.5) == 1

    def test_ties_go_to_lowest_index(self):
        node = make_node([point_mass(2.0), point_mass(2.0)], visits=3)
        assert select_bts(node, 0.5, 3.0) == 0
        assert select_bayes_uct2(node) == 0


class TestBayesUct2:
    """Mean plus sqrt(2 ln N variance)"""

    def test_first_visit_is_greedy(self):
        node = make_node([make_gaussian(0.0, 5.0), make_gaussian(1.0, 0.1)], visits=1)
        assert select_bayes_uct2(node) == 1

    def test_score_at_three_visits(self):
        node = make_node([make_gaussian(0.0, 1.0)], visits=3)
        assert bayes_uct2_scores(node)[0] == pytest.approx(math.sqrt(2.0 * math.log(3.0)))

    def test_matches_gaussian_quantile_at_equivalent_level(self):
        node = make_node([make_gaussian(2.0, 3.0)], visits=20)
        level = bayes_uct2_level(20)
        assert bayes_uct2_scores(node)[0] == pytest.approx(2.0 + 3.0 * norm.ppf(level))

    def test_bonus_nondecreasing(self):
        bonuses = [bayes_uct2_scores(make_node([make_gaussian(0.0, 1.0)], visits=n))[0] for n in range(1, 20)]
        assert all(b >= a for a, b in zip(bonuses, bonuses[1:]))


class TestPuct:
    """Prior-weighted UCT on scalar values"""

    def test_zero_c_is_greedy(self):
        node = make_node([make_gaussian(0.0, 1.0), make_gaussian(5.0, 1.0)], values=[3.0, 1.0], visits=4)
        assert select_puct(node, 0.0, 2.0) == 0

    def test_unvisited_arm_wins_on_equal_values(self):
        node = make_node([point_mass(0.0), point_mass(0.0)], visits=3, edge_visits=[3, 0])
        assert select_puct(node, 1.0, 2.0) == 1

    def test_prior_softmax(self):
        node = make_node([point_mass(0.0), point_mass(2.0)])
        prior = puct_prior(node, 2.0)
        assert prior.sum() == pytest.approx(1.0)
        assert prior[1] / prior[0] == pytest.approx(math.e)

    def test_high_temperature_is_uniform(self):
        node = make_node([point_mass(0.0), point_mass(2.0), point_mass(-1.0)])
        np.testing.assert_allclose(puct_prior(node, 1e9), np.full(3, 1.0 / 3.0))

    def test_non_positive_temperature(self):
        with pytest.raises(InvalidArgumentError):
            puct_prior(make_node([point_mass(0.0)]), 0.0)


class TestDng:
    """NormalGamma statistics and Thompson sampling over them"""

    def test_zero_residual_update(self):
        updated = dng_backup(DngNodeStat(0.0, 0.001, 1.0, 100.0), 0.0)
        assert updated.mu0 == 0.0
        assert updated.lam == pytest.approx(1.001)
        assert updated.alpha == 1.5
        assert updated.beta == 100.0

    def test_update_uses_pre_update_lambda(self):
        updated = dng_backup(DngNodeStat(0.0, 1.0, 1.0, 1.0), 2.0)
        assert updated.mu0 == pytest.approx(1.0)
        assert updated.lam == 2.0
        assert updated.beta == pytest.approx(2.0)

    def test_huge_lambda_keeps_mean(self):
        updated = dng_backup(DngNodeStat(1.0, 1e12, 1.0, 1.0), 100.0)
        assert updated.mu0 == pytest.approx(1.0, abs=1e-9)

    def test_sampled_mean_follows_t_distribution(self):
        rng = np.random.default_rng(3)
        stat = DngNodeStat(0.0, 1.0, 1.0, 1.0)
        draws = np.array([sample_dng_value(stat, rng) for _ in range(100_000)])
        assert kstest(draws, "t", args=(2,)).statistic < 0.02

    def test_sharp_stats_pick_larger_mean(self):
        node = make_node([point_mass(0.0), point_mass(0.0)])
        node.edges[0].dng = DngNodeStat(1.0, 1e9, 1.0, 1.0)
        node.edges[1].dng = DngNodeStat(1.5, 1e9, 1.0, 1.0)
        assert frequency(select_dng, node, trials=500)[1] == 1.0

    def test_symmetric_stats(self):
        node = make_node([point_mass(0.0), point_mass(0.0)])
        for edge in node.edges:
            edge.dng = DngNodeStat(0.0, 1.0, 1.0, 1.0)
        assert frequency(select_dng, node)[0] == pytest.approx(0.5, abs=0.02)

    def test_unvisited_edges_use_oracle_mean(self):
        node = make_node([point_mass(5.0), point_mass(0.0)])
        node.edges[1].dng = DngNodeStat(0.0, 1e9, 1.0, 1.0)
        assert select_dng(node, np.random.default_rng(0)) == 0


class TestZeroVarianceAgreement:
    """Bayesian selectors collapse to greedy on point masses"""

    @pytest.mark.parametrize("algorithm", ["TSTS", "BTS", "BayesUCB", "BayesUCT2"])
    def test_all_pick_the_greedy_arm(self, algorithm):
        node = make_node([point_mass(0.2), point_mass(1.7), point_mass(-3.0)], visits=9)
        select = make_selector(PlannerConfig(algorithm=algorithm))
        assert select(node, np.random.default_rng(0)) == 1

    @pytest.mark.parametrize("algorithm", ["TSTS", "BTS", "BayesUCB", "BayesUCT2"])
    def test_scale_equivariance(self, algorithm):
        dists = [make_gaussian(1.0, 2.0), make_gaussian(2.0, 0.5), make_gaussian(-1.0, 4.0)]
        select = make_selector(PlannerConfig(algorithm=algorithm))
        for visits in (1, 2, 5, 20):
            base = make_node(dists, visits=visits)
            scaled = make_node([make_gaussian(7.0 * d.mean, 7.0 * d.std) for d in dists], visits=visits)
            assert select(base, np.random.default_rng(visits)) == select(scaled, np.random.default_rng(visits))

    def test_greedy_has_no_selection_rule(self):
        with pytest.raises(InvalidConfigError):
            make_selector(PlannerConfig(algorithm="GREEDY"))


class TestRunSearch:
    """Full search loops"""

    def test_single_iteration_expands_once(self, gt_tree, exact_oracle):
        outcome = run_search(gt_tree, exact_oracle, PlannerConfig(algorithm="TSTS", budget_T=1))
        assert outcome.tree_stats["expansions"] == 2
        assert len(outcome.explored_leaves) == 1

    @pytest.mark.parametrize("algorithm", ["TSTS", "BTS", "BayesUCB", "BayesUCT2", "PUCT", "DNG"])
    def test_exhaustive_budget_finds_optimum(self, gt_tree, exact_oracle, algorithm):
        cfg = PlannerConfig(algorithm=algorithm, budget_T=14)
        outcome = run_search(gt_tree, exact_oracle, cfg, np.random.default_rng(0))
        assert int(np.argmax([d.moments[0] for d in outcome.root_posteriors])) == 1
        assert commit(outcome, cfg.commitment) == 1
        assert outcome.root_backed_values[1] == pytest.approx(3.0)

    def test_explored_leaves_bounded_by_budget(self):
        env = FullTree(3, 2)
        oracle = TablePosteriorProvider({}, default=[make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)])
        outcome = run_search(env, oracle, PlannerConfig(algorithm="TSTS", budget_T=200))
        # 2 + 4 expandable states below the root
        assert len(outcome.explored_leaves) == 6
        assert outcome.tree_stats["iterations"] == 200

    def test_same_seed_same_outcome(self):
        env = MazeEnv(maze_generate(11, 9, 9), 30)
        oracle = build_provider(env, OracleSpec(kind="gt", error_scale=0.5), 11)
        cfg = PlannerConfig(algorithm="TSTS", budget_T=25, seed=5)
        first = run_search(env, oracle, cfg)
        second = run_search(env, oracle, cfg)
        assert first.root_backed_values == second.root_backed_values
        assert first.explored_leaves == second.explored_leaves
        assert [d.moments for d in first.root_posteriors] == [d.moments for d in second.root_posteriors]

    def test_deterministic_mode_ignores_passed_rng(self, gt_tree):
        oracle = TablePosteriorProvider({}, default=[make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)])
        cfg = PlannerConfig(algorithm="TSTS", budget_T=5, seed=9, deterministic_mode=True)
        first = run_search(gt_tree, oracle, cfg, np.random.default_rng(1))
        second = run_search(gt_tree, oracle, cfg, np.random.default_rng(2))
        assert first.explored_leaves == second.explored_leaves

    def test_greedy_does_not_search(self, gt_tree, exact_oracle):
        outcome = run_search(gt_tree, exact_oracle, PlannerConfig(algorithm="GREEDY", budget_T=10))
        assert outcome.tree_stats["iterations"] == 0
        assert outcome.explored_leaves == []

    def test_terminal_root_rejected(self, gt_tree, exact_oracle):
        with pytest.raises(InvalidArgumentError):
            run_search(gt_tree, exact_oracle, PlannerConfig(), root_state=(0, 0, 0))

    def test_dng_stats_are_maintained(self, gt_tree, exact_oracle):
        outcome = run_search(gt_tree, exact_oracle, PlannerConfig(algorithm="DNG", budget_T=6))
        visited = [e for e in outcome.tree.root.edges if e.visit_count > 0]
        assert visited and all(e.dng is not None for e in visited)
        assert sum(e.dng.lam - 0.001 for e in visited) == pytest.approx(6.0)

    def test_summary_is_plain(self, gt_tree, exact_oracle):
        summary = run_search(gt_tree, exact_oracle, PlannerConfig(budget_T=2)).summary()
        assert summary["explored"] == 2
        assert len(summary["root_means"]) == 2


class TestSequentialHalving:
    """Halving at the root, P-UCT below it"""

    def test_schedule_on_four_arms(self):
        env = FullTree(3, 4)
        oracle = TablePosteriorProvider({}, default=[make_gaussian(float(a), 1.0) for a in range(4)])
        outcome = run_search_sh(env, oracle, PlannerConfig(algorithm="SH_PUCT", budget_T=16))
        visits = [e.visit_count for e in outcome.tree.root.edges]
        assert sum(visits) == 16
        assert min(visits) == 2
        assert sorted(visits) == [2, 2, 6, 6]
        assert visits[outcome.recommended_action] == 6

    def test_budget_below_arms(self):
        env = FullTree(2, 4)
        oracle = TablePosteriorProvider({}, default=[point_mass(0.0)] * 4)
        with pytest.raises(InvalidConfigError):
            run_search(env, oracle, PlannerConfig(algorithm="SH_PUCT", budget_T=3))

    def test_single_action_falls_back_to_puct(self):
        env = FullTree(3, 1)
        oracle = TablePosteriorProvider({}, default=[point_mass(0.0)])
        outcome = run_search(env, oracle, PlannerConfig(algorithm="SH_PUCT", budget_T=4))
        assert outcome.recommended_action is None
        assert outcome.tree_stats["iterations"] == 4

    def test_terminal_win_arm(self):
        env = FullTree(1, 2, {(1,): 1.0})
        oracle = build_provider(env, OracleSpec(kind="gt", error_scale=0.0), 0)
        cfg = PlannerConfig(algorithm="SH_PUCT", budget_T=2)
        outcome = run_search(env, oracle, cfg)
        assert outcome.recommended_action == 1
        assert commit(outcome, cfg.commitment) == 1


class TestCommit:
    """mcts, quantile and softmax commitment"""

    @pytest.fixture
    def outcome(self):
        env = FullTree(3, 2)
        oracle = TablePosteriorProvider({
            (): [make_gaussian(1.0, 0.1), make_gaussian(0.8, 3.0)],
            (0,): [make_gaussian(1.0, 0.1), make_gaussian(0.5, 0.1)],
            (1,): [make_gaussian(0.8, 3.0), make_gaussian(0.0, 0.1)],
        })
        return run_search(env, oracle, PlannerConfig(algorithm="BTS", budget_T=2))

    def test_mcts_takes_best_expected_branch(self, outcome):
        assert commit(outcome, CommitmentSpec()) == 0

    def test_optimistic_quantile_prefers_wide_branch(self, outcome):
        assert commit(outcome, CommitmentSpec.parse("quantile(0.9)")) == 1

    def test_median_matches_mcts(self, outcome):
        mcts = commitment_scores(outcome, CommitmentSpec())
        median = commitment_scores(outcome, CommitmentSpec.parse("quantile(0.5)"))
        np.testing.assert_allclose(mcts, median)

    def test_cold_softmax_is_mcts(self, outcome):
        rng = np.random.default_rng(0)
        picks = {commit(outcome, CommitmentSpec.parse("softmax(0.0001)"), rng) for _ in range(50)}
        assert picks == {0}

    def test_softmax_needs_rng(self, outcome):
        with pytest.raises(InvalidArgumentError):
            commit(outcome, CommitmentSpec.parse("softmax(1)"))

    def test_recommended_action_wins_for_mcts_only(self, outcome):
        outcome.recommended_action = 1
        assert commit(outcome, CommitmentSpec()) == 1
        assert commit(outcome, CommitmentSpec.parse("quantile(0.5)")) == 0


@pytest.mark.slow
class TestProbabilityMatching:
    """Forward TSTS passes sample leaves with the Thompson-sampling probabilities"""

    def test_first_pass_matches_brute_force(self):
        env = FullTree(3, 2)
        provider = TablePosteriorProvider({
            (0,): [make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)],
            (1,): [make_gaussian(0.7, 0.5), make_gaussian(0.7, 0.5)],
        }, default=[make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)])
        tree = build_enumerated_tree(env, provider, expand_depth=2)

        rng = np.random.default_rng(21)
        counts = {}
        trials = 10_000
        for _ in range(trials):
            a = select_tsts(tree.root, rng, exact=True)
            b = select_tsts(tree.nodes[(a,)], rng, exact=True)
            counts[(a, b)] = counts.get((a, b), 0) + 1

        reference = brute_force_ts_distribution(
            env, provider, 200_000, np.random.default_rng(22), tree=tree
        ).as_dict()
        assert set(reference) == {(0, 0), (0, 1), (1, 0), (1, 1)}
        tv = 0.5 * sum(abs(counts.get(leaf, 0) / trials - p) for leaf, p in reference.items())
        assert tv < 0.03

    def test_first_pass_with_distinct_leaf_means(self):
        print("\n🎯 Comparing first TSTS passes with the Thompson-sampling distribution...")
        env = FullTree(3, 2)
        provider = TablePosteriorProvider({
            (0,): [make_gaussian(0.0, 1.0), make_gaussian(0.5, 1.0)],
            (1,): [make_gaussian(1.0, 1.0), make_gaussian(1.5, 1.0)],
        }, default=[make_gaussian(0.0, 1.0), make_gaussian(0.0, 1.0)])
        tree = build_enumerated_tree(env, provider, expand_depth=2)

        rng = np.random.default_rng(31)
        counts = {}
        trials = 20_000
        for _ in range(trials):
            a = select_tsts(tree.root, rng, exact=True)
            b = select_tsts(tree.nodes[(a,)], rng, exact=True)
            counts[(a, b)] = counts.get((a, b), 0) + 1

        reference = brute_force_ts_distribution(
            env, provider, 1_000_000, np.random.default_rng(32), tree=tree
        ).as_dict()
        assert max(reference, key=reference.get) == (1, 1)
        tv = 0.5 * sum(abs(counts.get(leaf, 0) / trials - p) for leaf, p in reference.items())
        assert tv < 0.03
        print(f"    ✅ total variation {tv:.4f}")

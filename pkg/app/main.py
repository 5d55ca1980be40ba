"""
bayes-tree-planner command line
Plan, run episodes and sweeps, generate mazes, check regret bounds, dump trees,
calibrate the predictor error and compare experiment results
"""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.config import get_settings
from app.core.posterior import describe
from app.core.search_tree import dump_tree
from app.environments.maze import Action, MazeEnv, maze_generate
from app.environments.tree import concentrated_prior, enumerate_edges, needle_tree
from app.errors import BayesPlanError, InvalidConfigError
from app.harness.acceptance import PlannerLabels, load_results, run_checks
from app.harness.bound_check import bound_check
from app.harness.calibration import calibrate, save_calibration
from app.harness.episode import COMMIT_STREAM, online_episode
from app.harness.spec_loader import load_experiment_spec, parse_env_seeds, parse_int_list
from app.oracles.providers import OracleSpec, build_provider
from app.orchestrator import ExperimentOrchestrator
from app.planners.models import Algorithm, PlannerConfig
from app.planners.search import commit, run_search
from app.utils.seeding import derive_rng

# Configure logging
logger = logging.getLogger(__name__)


def _add_env_args(parser: argparse.ArgumentParser):
    maze_config = get_settings().get_maze_config()
    parser.add_argument("--env", choices=["maze", "needle"], default="maze", help="Environment family")
    parser.add_argument("--env-seed", type=int, default=0, help="Environment generation seed")
    parser.add_argument("--width", type=int, default=maze_config["width"], help="Maze width (odd)")
    parser.add_argument("--height", type=int, default=maze_config["height"], help="Maze height (odd)")
    parser.add_argument("--horizon", type=int, default=maze_config["horizon"], help="Maze search depth cap")
    parser.add_argument("--depth", type=int, default=4, help="Needle tree depth")
    parser.add_argument("--branching", type=int, default=2, help="Needle tree branching")


def _add_planner_args(parser: argparse.ArgumentParser):
    posterior_config = get_settings().get_posterior_config()
    parser.add_argument("--seed", type=int, required=True, help="Planner and episode seed")
    parser.add_argument("--algorithm", default="BTS", choices=[a.value for a in Algorithm], help="Search strategy")
    parser.add_argument("--budget", type=int, default=50, help="Search iterations per decision (budget_T)")
    parser.add_argument("--alpha0", type=float, default=0.5, help="BTS initial quantile")
    parser.add_argument("--beta", type=float, default=None, help="BTS rate / Bayes-UCB beta")
    parser.add_argument("--puct-c", type=float, default=1.0, help="P-UCT exploration constant")
    parser.add_argument("--softmax-temp", type=float, default=2.0, help="P-UCT prior temperature")
    parser.add_argument("--commitment", default="mcts", help="mcts, quantile(A) or softmax(T)")
    parser.add_argument("--deterministic", action="store_true", help="Re-seed the search identically each step")
    parser.add_argument("--bins", type=int, default=posterior_config["bins_m"], help="Max-backup bins")
    parser.add_argument("--exact", action="store_true", default=posterior_config["exact"],
                        help="Exact-CDF quantiles and sampling")
    parser.add_argument("--oracle", choices=["gt", "fixed", "noised"], default="gt", help="Value oracle kind")
    parser.add_argument("--error-scale", type=float, default=0.5, help="Predictor error scale")
    parser.add_argument("--fixed-sigma", type=float, default=1.0, help="Std of the fixed-sigma oracle")
    parser.add_argument("--rho", type=float, default=20.0, help="Sigma perturbation percent for the noised oracle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayes-tree-planner", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default=None, help="Override BAYESPLAN_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)
    maze_config = get_settings().get_maze_config()
    harness_config = get_settings().get_harness_config()

    plan = sub.add_parser("plan", help="One search; prints root posteriors and the committed action")
    _add_env_args(plan)
    _add_planner_args(plan)

    episode = sub.add_parser("episode", help="One online episode")
    _add_env_args(episode)
    _add_planner_args(episode)
    episode.add_argument("--step-cap", type=int, default=harness_config["step_cap"], help="Episode step cap k")

    experiment = sub.add_parser("experiment", help="Full sweep from an INI spec")
    experiment.add_argument("spec", help="Experiment spec file")
    experiment.add_argument("--output", default=None, help="CSV path overriding the spec")
    experiment.add_argument("--workers", type=int, default=None, help="Worker processes")

    gen = sub.add_parser("gen-maze", help="Print a generated maze")
    gen.add_argument("--seed", type=int, required=True, help="Generation seed")
    gen.add_argument("--width", type=int, default=maze_config["width"])
    gen.add_argument("--height", type=int, default=maze_config["height"])

    bound = sub.add_parser("bound-check", help="Empirical regret against the Thompson-sampling bound")
    bound.add_argument("--seed", type=int, required=True, help="Seed for tree draws and discovery")
    bound.add_argument("--depth", type=int, default=3)
    bound.add_argument("--branching", type=int, default=2)
    bound.add_argument("--budgets", default=None, help="Budgets, e.g. 1-14 (default 1..|Z|)")
    bound.add_argument("--repetitions", type=int, default=10000)
    bound.add_argument("--rule", choices=["thompson", "agnostic", "adversarial"], default="thompson")
    bound.add_argument("--focus", type=int, default=None, help="Edge index of a concentrated prior")
    bound.add_argument("--mass", type=float, default=0.95, help="Prior mass on the focus edge")
    bound.add_argument("--json", action="store_true", help="Print the report as JSON")

    dump = sub.add_parser("dump-tree", help="Serialize the tree of one search")
    _add_env_args(dump)
    _add_planner_args(dump)
    dump.add_argument("--format", choices=["json", "text"], default="text")

    calibrate = sub.add_parser("calibrate", help="Tune the predictor error scale against greedy")
    calibrate.add_argument("--seeds", default="train:20", help="Maze seeds, e.g. train:20 or 0-9")
    calibrate.add_argument("--target", type=float, default=0.6, help="Greedy success rate to fall below")
    calibrate.add_argument("--iterations", type=int, default=10, help="Bisection steps")
    calibrate.add_argument("--width", type=int, default=maze_config["width"])
    calibrate.add_argument("--height", type=int, default=maze_config["height"])
    calibrate.add_argument("--horizon", type=int, default=maze_config["horizon"])
    calibrate.add_argument("--step-cap", type=int, default=harness_config["step_cap"])
    calibrate.add_argument("--output", default=str(Path(harness_config["results_dir"]) / "calibration.json"),
                           help="Where to write the calibration record")

    check = sub.add_parser("check-results", help="Directional comparisons over experiment CSVs")
    check.add_argument("results", nargs="+", help="Result CSVs with distinct planner labels")
    check.add_argument("--budget", type=int, default=50, help="Budget the comparisons are read at")
    check.add_argument("--label", action="append", default=[], metavar="ROLE=NAME",
                       help="Override a planner label, e.g. puct_fixed=puct")
    check.add_argument("--json", action="store_true", help="Print the checks as JSON")
    return parser


def _planner_config(args) -> PlannerConfig:
    try:
        return _build_planner_config(args)
    except ValidationError as e:
        raise InvalidConfigError(f"invalid planner options: {e}")


def _build_planner_config(args) -> PlannerConfig:
    return PlannerConfig(
        algorithm=args.algorithm,
        budget_T=args.budget,
        alpha0=args.alpha0,
        beta=args.beta,
        puct_c=args.puct_c,
        softmax_temp=args.softmax_temp,
        commitment=args.commitment,
        seed=args.seed,
        deterministic_mode=args.deterministic,
        bins_m=args.bins,
        exact_posterior_ops=args.exact
    )


def _environment(args):
    if args.env == "needle":
        env, _ = needle_tree(args.env_seed, args.depth, args.branching)
        return env, [str(a) for a in env.actions()]
    maze = maze_generate(args.env_seed, args.width, args.height)
    return MazeEnv(maze, args.horizon), [a.name for a in Action]


def _oracle(env, args):
    try:
        spec = OracleSpec(kind=args.oracle, error_scale=args.error_scale, fixed_sigma=args.fixed_sigma,
                          rho_percent=args.rho, error_floor=get_settings().get_harness_config()["error_floor"])
    except ValidationError as e:
        raise InvalidConfigError(f"invalid oracle options: {e}")
    return build_provider(env, spec, args.env_seed)


def cmd_plan(args) -> int:
    env, names = _environment(args)
    cfg = _planner_config(args)
    outcome = run_search(env, _oracle(env, args), cfg)
    action = commit(outcome, cfg.commitment, derive_rng(cfg.seed, COMMIT_STREAM))
    gt = env.gt_q(env.root())

    print(f"{'action':<8} {'predicted':>10} {'gt':>10} {'sigma':>10} {'backed':>10}")
    for a, (dist, prior_mean, backed) in enumerate(zip(
            outcome.root_posteriors, outcome.root_prior_means, outcome.root_backed_values)):
        summary = describe(dist)
        print(f"{names[a]:<8} {prior_mean:>10.3f} {gt[a]:>10.3f} {summary['std']:>10.3f} {backed:>10.3f}")
    print(f"committed: {names[action]}")
    return 0


def cmd_episode(args) -> int:
    env, names = _environment(args)
    cfg = _planner_config(args)
    result = online_episode(env, cfg, _oracle(env, args), args.step_cap, args.seed)
    print(json.dumps({
        "solved": result.solved,
        "steps": result.steps_taken,
        "total_reward": result.total_reward,
        "mean_regret": result.mean_regret,
        "actions": [names[a] for a in result.committed_actions]
    }, indent=2))
    return 0


def cmd_experiment(args) -> int:
    get_settings().log_configuration_status()
    spec = load_experiment_spec(args.spec)
    report = asyncio.run(ExperimentOrchestrator(args.workers).run_experiment(spec, args.output))
    print(f"{report['computed']} cells computed, {report['skipped']} skipped -> {report['csv']}")
    return 0


def cmd_gen_maze(args) -> int:
    print(maze_generate(args.seed, args.width, args.height).to_text())
    return 0


def cmd_bound_check(args) -> int:
    n_leaves = len(enumerate_edges(args.depth, args.branching))
    budgets = parse_int_list(args.budgets) if args.budgets else list(range(1, n_leaves + 1))
    prior = None
    if args.focus is not None:
        prior = concentrated_prior(n_leaves, args.focus, args.mass)
    report = bound_check(args.depth, args.branching, budgets, args.repetitions, args.seed, prior, args.rule)
    print(json.dumps(report.to_dict(), indent=2) if args.json else report.to_text())
    return 0 if report.passed else 3


def cmd_dump_tree(args) -> int:
    env, names = _environment(args)
    outcome = run_search(env, _oracle(env, args), _planner_config(args))
    print(dump_tree(outcome.tree, args.format, names))
    return 0


def cmd_calibrate(args) -> int:
    seeds = parse_env_seeds(args.seeds)
    error_floor = get_settings().get_harness_config()["error_floor"]
    record = calibrate(seeds, args.target, args.iterations, args.width, args.height,
                       args.horizon, args.step_cap, error_floor)
    save_calibration(record, args.output)
    print(json.dumps(record.model_dump(exclude={"seeds"}), indent=2))
    if not record.below_target:
        logger.warning(f"⚠️ Greedy still solves {record.greedy_success:.0%}, not below {record.target:.0%}")
    return 0


def _planner_labels(pairs: List[str]) -> PlannerLabels:
    overrides = {}
    for pair in pairs:
        role, sep, name = pair.partition("=")
        if not sep or role not in PlannerLabels.model_fields:
            raise InvalidConfigError(f"invalid label override {pair!r}")
        overrides[role] = name
    return PlannerLabels(**overrides)


def cmd_check_results(args) -> int:
    checks = run_checks(load_results(args.results), args.budget, _planner_labels(args.label))
    if args.json:
        print(json.dumps([c.to_dict() for c in checks], indent=2))
    else:
        for check in checks:
            print(f"{check.name:<24} {check.status:<5} {check.detail}")
    return 3 if any(c.passed is False for c in checks) else 0


COMMANDS = {
    "plan": cmd_plan,
    "episode": cmd_episode,
    "experiment": cmd_experiment,
    "gen-maze": cmd_gen_maze,
    "bound-check": cmd_bound_check,
    "dump-tree": cmd_dump_tree,
    "calibrate": cmd_calibrate,
    "check-results": cmd_check_results
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )
    try:
        return COMMANDS[args.command](args)
    except BayesPlanError as e:
        logger.error(f"❌ {e.message}")
        print(f"error: {e.message}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"❌ Unexpected failure in {args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""
Experiment specification files

An INI file with one [experiment] section and one [planner:NAME] section per
planner. Planner keys are PlannerConfig field names. List values are
comma-separated; integer lists accept inclusive ranges such as 0-99, and
env_seeds also accepts the named sets train, test, train:N and test:N.

    [experiment]
    name = noise-ablation
    env_seeds = test:100
    budgets = 50
    oracle = noised
    rho_percent = 20

    [planner:bts]
    algorithm = BTS
    alpha0 = 0.5
    beta = 3

A calibration key names a record written by the calibrate command. When the
file exists its error scale and error floor replace the oracle keys; when it
does not, the spec runs with its own error_scale and a warning is logged.
"""
import configparser
import logging
from pathlib import Path
from typing import Any, Dict, List

from pydantic import ValidationError

from app.config import get_settings
from app.errors import InvalidConfigError
from app.harness.calibration import load_calibration
from app.harness.models import ExperimentSpec, PlannerEntry
from app.oracles.providers import OracleSpec
from app.planners.models import PlannerConfig
from app.utils.seeding import standard_seed_split

# Configure logging
logger = logging.getLogger(__name__)

EXPERIMENT_SECTION = "experiment"
PLANNER_PREFIX = "planner:"
ORACLE_KEYS = {"oracle": "kind", "error_scale": "error_scale", "error_floor": "error_floor",
               "fixed_sigma": "fixed_sigma", "rho_percent": "rho_percent"}


def parse_int_list(text: str) -> List[int]:
    """'1, 3, 10-12' -> [1, 3, 10, 11, 12]"""
    values: List[int] = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        if "-" in token.lstrip("-"):
            start, end = token.split("-", 1)
            lo, hi = int(start), int(end)
            if hi < lo:
                raise InvalidConfigError(f"empty range {token!r}")
            values.extend(range(lo, hi + 1))
        else:
            values.append(int(token))
    return values


def parse_env_seeds(text: str, split_base: int = 0) -> List[int]:
    """Explicit seeds, or a prefix of the standard train/test split"""
    name, _, count = text.strip().partition(":")
    if name in ("train", "test"):
        train, test = standard_seed_split(split_base)
        seeds = train if name == "train" else test
        if count:
            n = int(count)
            if not 0 < n <= len(seeds):
                raise InvalidConfigError(f"{name} split holds {len(seeds)} seeds, asked for {n}")
            seeds = seeds[:n]
        return list(seeds)
    return parse_int_list(text)


def _planner_entry(name: str, section: configparser.SectionProxy) -> PlannerEntry:
    return PlannerEntry(name=name, config=PlannerConfig(**dict(section)))


def _apply_calibration(oracle: Dict[str, Any], path: str):
    if not Path(path).exists():
        scale = oracle.get("error_scale", "default")
        logger.warning(f"⚠️ Calibration record {path} not found; keeping error_scale={scale}")
        return
    record = load_calibration(path)
    oracle["error_scale"] = record.error_scale
    oracle["error_floor"] = record.error_floor
    logger.info(f"🔧 Error scale {record.error_scale:.4f} from {path} (greedy {record.greedy_success:.0%})")


def spec_from_parser(parser: configparser.ConfigParser) -> ExperimentSpec:
    if not parser.has_section(EXPERIMENT_SECTION):
        raise InvalidConfigError("experiment spec needs an [experiment] section")

    raw: Dict[str, Any] = dict(parser[EXPERIMENT_SECTION])
    oracle = {ORACLE_KEYS[k]: raw.pop(k) for k in list(raw) if k in ORACLE_KEYS}
    oracle.setdefault("error_floor", get_settings().get_harness_config()["error_floor"])
    calibration = raw.pop("calibration", None)
    if calibration:
        _apply_calibration(oracle, calibration)
    try:
        split_base = int(raw.pop("seed_split_base", 0))
        if "env_seeds" in raw:
            raw["env_seeds"] = parse_env_seeds(raw["env_seeds"], split_base)
        if "budgets" in raw:
            raw["budgets"] = parse_int_list(raw["budgets"])
        planners = [
            _planner_entry(section[len(PLANNER_PREFIX):], parser[section])
            for section in parser.sections() if section.startswith(PLANNER_PREFIX)
        ]
        spec = ExperimentSpec(oracle=OracleSpec(**oracle), planners=planners, **raw)
    except (ValidationError, ValueError) as e:
        raise InvalidConfigError(f"invalid experiment spec: {e}")
    return spec


def load_experiment_spec(path: str) -> ExperimentSpec:
    """Parse an experiment INI file"""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as f:
            parser.read_file(f)
    except OSError as e:
        raise InvalidConfigError(f"cannot read experiment spec {path}: {e}")
    except configparser.Error as e:
        raise InvalidConfigError(f"malformed experiment spec {path}: {e}")
    spec = spec_from_parser(parser)
    logger.info(f"🔧 Loaded experiment '{spec.name}': {len(spec.planners)} planners, {spec.n_cells} cells")
    return spec


def load_experiment_text(text: str) -> ExperimentSpec:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise InvalidConfigError(f"malformed experiment spec: {e}")
    return spec_from_parser(parser)

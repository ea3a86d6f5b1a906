import argparse
import logging
import os
import time
from typing import Optional, Sequence

from runner.commands import RunContext, get_command, list_commands
from runner.config import LOG_LEVELS, config
from runner.logging_utils import run_logger
from runner.scenarios import ScenarioError, load_scenario
from runner.writers import ArtifactWriter

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_CONFIG = 2


def _setup_logging(level: str) -> None:
    # Log directory must exist before the FileHandler opens its file
    os.makedirs(config.LOG_DIR, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(os.path.join(config.LOG_DIR, "run_execution.log")),
            logging.StreamHandler(),
        ],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Exact solvers for sticky particles and scalar conservation laws")
    parser.add_argument("command", choices=list_commands(), help="Solver or experiment to run")
    parser.add_argument("--config", type=str, default=config.DEFAULT_SCENARIO, help="Scenario YAML file")
    parser.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed")
    parser.add_argument("--out", type=str, default=None, help="Output directory (default OUTPUT_DIR/<command>)")
    parser.add_argument("--workers", type=int, default=None, help="Processes for mc-stats")
    parser.add_argument("--tolerance", type=float, default=None, help="Pass/fail threshold")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_level or config.LOG_LEVEL)

    started = time.perf_counter()
    out_dir = config.output_dir_for(args.command, args.out)
    row = {"command": args.command, "scenario": args.config, "seed": args.seed, "output_dir": out_dir}

    def finish(code: int, status: str) -> int:
        run_logger.log_row({
            **row, "status": status, "exit_code": code,
            "wall_seconds": round(time.perf_counter() - started, 3),
        })
        return code

    if args.workers is not None and args.workers < 1:
        logger.error("--workers must be >= 1, got %d", args.workers)
        return finish(EXIT_BAD_CONFIG, "bad-config")
    if args.tolerance is not None and args.tolerance < 0:
        logger.error("--tolerance must be >= 0, got %g", args.tolerance)
        return finish(EXIT_BAD_CONFIG, "bad-config")

    # ── Scenario ──────────────────────────────────────────────────────────────
    try:
        cfg = load_scenario(args.config)
    except ScenarioError as e:
        logger.error("%s", e)
        return finish(EXIT_BAD_CONFIG, "bad-config")

    seed = args.seed if args.seed is not None else cfg.seed
    if args.tolerance is not None:
        tolerance = args.tolerance
    elif cfg.tolerance is not None:
        tolerance = cfg.tolerance
    else:
        tolerance = config.DEFAULT_TOLERANCE
    row["seed"] = seed

    # ── Command ───────────────────────────────────────────────────────────────
    writer = ArtifactWriter(out_dir)
    ctx = RunContext(writer, tolerance, seed, args.workers or config.DEFAULT_WORKERS)
    logger.info("Running '%s' on scenario '%s' (seed=%s, tolerance=%g)", args.command, cfg.name, seed, tolerance)
    try:
        result = get_command(args.command)(cfg, ctx)
    except ScenarioError as e:
        logger.error("%s", e)
        return finish(EXIT_BAD_CONFIG, "bad-config")
    except Exception:
        logger.exception("Command '%s' failed", args.command)
        return finish(EXIT_FAILED, "error")

    resolved = cfg.model_copy(update={"seed": seed, "tolerance": tolerance}).model_dump(mode="json")
    writer.manifest(args.command, resolved, seed, tolerance, {"passed": result.passed, **result.status})

    if not result.passed:
        logger.warning("'%s' did not meet tolerance %g: %s", args.command, tolerance, result.status)
        return finish(EXIT_FAILED, "tolerance-failed")
    logger.info("'%s' passed; %d artifacts in %s", args.command, len(writer.files), out_dir)
    return finish(EXIT_OK, "passed")


if __name__ == "__main__":
    raise SystemExit(main())

"""
sam-dde command line entry point
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from ..bench.sweep import OMEGA_LISTS, preset
from ..config import initialize_config
from ..error_handling import ErrorHandler, create_success_response
from ..utils.logging import configure_logging, get_sam_logger
from ..utils.metrics import metrics
from .commands import COMMANDS
from .models import RunConfig, parse_overrides

logger = get_sam_logger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Log level")
    common.add_argument("--seed", type=int, help="Seed for random probes")
    common.add_argument("--workers", type=int, help="Concurrent sweep cells")
    common.add_argument("--out", help="Output CSV path (default: stdout)")
    common.add_argument("--format", choices=["csv"], default="csv", help="Output format")
    return common


def _problem_options() -> argparse.ArgumentParser:
    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--problem", help="toggle | toggle-gene | newpro (default toggle)")
    problem.add_argument(
        "--set", dest="overrides", action="append", metavar="KEY=VALUE", help="Problem parameter override"
    )
    problem.add_argument("--tmax", dest="t_max", type=float, help="End of the integration interval")
    return problem


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sam-dde", description="Stroboscopic averaging for delay equations with fast periodic forcing"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    parents = [_common_options(), _problem_options()]

    run = sub.add_parser("run", parents=parents, help="Integrate with SAM on one grid")
    run.add_argument("--N", type=int, required=True, help="Macro steps per delay")
    run.add_argument("--nu-max", dest="nu_max", type=int, help="Micro steps per period (default c*N)")
    run.add_argument("--c", type=int, help="nu_max = c*N")
    run.add_argument("--omega", required=True, help="Frequency, e.g. 200, 8pi, 8pi+pi/64")
    run.add_argument("--forward-only", action="store_true", help="Forward differences at every step")

    ref = sub.add_parser("reference", parents=parents, help="Dense reference solution")
    ref.add_argument("--omega", required=True)
    ref.add_argument("--reference", choices=["averaged", "oscillatory"], default="averaged")
    ref.add_argument("--points", type=int, default=201, help="Uniform output points")

    table = sub.add_parser("table", parents=parents, help="Error table over (N, Omega)")
    table.add_argument("--preset", help="tab4 | tab2 | tab3 | h2 | noh2 | gene")
    table.add_argument("--reference", choices=["averaged", "oscillatory"], help="Default averaged, or the preset's")
    table.add_argument("--N", dest="N_list", help="Comma-separated N values")
    table.add_argument("--omega", dest="omega_list", help="Comma-separated frequencies")
    table.add_argument("--omega-list", dest="omega_list_name", help="Built-in frequency list name")
    table.add_argument("--c", type=int, help="nu_max = c*N")
    table.add_argument("--plot", help="Also write a gnuplot script")

    ratios = sub.add_parser("ratios", parents=parents, help="Diagonal and column error ratios")
    ratios.add_argument("--preset")
    ratios.add_argument("--from-csv", dest="csv_in", help="Table CSV written by `table`")

    check = sub.add_parser("avg-check", parents=parents, help="Check averaged right-hand sides")
    check.add_argument("--omega", required=True)
    check.add_argument("--samples", type=int, default=100)

    timing = sub.add_parser("timing", parents=parents, help="SAM vs oscillatory reference wall time")
    timing.add_argument("--omega", required=True)
    timing.add_argument("--N", type=int, required=True)
    timing.add_argument("--c", type=int)
    timing.add_argument("--tol", type=float, default=1e-8)
    timing.add_argument("--repeats", type=int)
    return parser


_NOT_REQUEST_FIELDS = {"config", "log_level", "workers", "omega_list_name"}


def request_from_args(args: argparse.Namespace) -> RunConfig:
    values: Dict[str, Any] = {k: v for k, v in vars(args).items() if v is not None and k not in _NOT_REQUEST_FIELDS}
    values["overrides"] = parse_overrides(getattr(args, "overrides", None))
    name = getattr(args, "omega_list_name", None)
    if name:
        values["omega_list"] = name
        # a named list without --N takes the rows of the preset of the same name
        if name in OMEGA_LISTS and "N_list" not in values and "preset" not in values:
            values["N_list"] = list(preset(name).N_list)
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    operation = f"sam-dde {args.command}"
    configure_logging(args.log_level or "INFO")
    try:
        config = initialize_config(
            args.config, {"log_level": args.log_level, "seed": args.seed, "workers": args.workers}
        )
        configure_logging("DEBUG" if config.debug_mode else config.log_level)
        logger.debug("configuration", config=config.to_dict())
        metrics.reset()
        request = request_from_args(args)
        logger.debug("dispatch", command=request.command, problem=request.problem)
        summary = COMMANDS[request.command](request)
    except Exception as e:
        response = ErrorHandler.handle_error(e, operation)
        print(json.dumps(response, default=str), file=sys.stderr)
        return ErrorHandler.exit_code_for(e)
    print(json.dumps(create_success_response(f"{operation} completed", summary), default=str), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

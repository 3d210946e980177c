# ============================================================================
# CLI ENTRY POINT
# File: src/orchestrator/main.py
# Purpose: Parse flags into a RunConfig, run the graph, emit the table
# ============================================================================

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from src.config import load_settings
from src.orchestrator.graph_nodes import EXIT_USAGE
from src.orchestrator.pipeline_graph import run_pipeline
from src.orchestrator.pipeline_state import COMMANDS, FORMATS, RunConfig

logger = logging.getLogger(__name__)


class UsageParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 2 through the logger."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        logger.error(f"Usage error: {message}")
        sys.exit(EXIT_USAGE)


def parse_params(items: Optional[List[str]]) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for item in items or []:
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"--param expects k=v, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        description="Birman-Schwinger determinant verification suites (jost, det1d, ratio1d, wa, ssf, sdet, disk, sweep)"
    )
    parser.add_argument("--command", required=True, choices=COMMANDS, help="Suite to run")
    parser.add_argument("--potential", type=str, default=None, help="Library potential name or 'tabulated'")
    parser.add_argument("--param", action="append", default=None, metavar="K=V", help="Potential parameter (repeatable)")
    parser.add_argument("--dim", type=int, default=None, choices=[1, 2, 3], help="Dimension of the potential")

    grid = parser.add_argument_group("spectral grid")
    grid.add_argument("--z-start", type=float, default=None)
    grid.add_argument("--z-stop", type=float, default=None)
    grid.add_argument("--z-count", type=int, default=None, help="Grid points (instances for wa)")
    grid.add_argument("--z-imag", type=float, default=0.0, help="Imaginary offset added to every z")
    grid.add_argument("--lambda-start", type=float, default=None)
    grid.add_argument("--lambda-stop", type=float, default=None)
    grid.add_argument("--lambda-count", type=int, default=None)
    grid.add_argument("--boundary-eps", type=float, default=None, help="Evaluate lambda +- i eps instead of lambda +- i0")

    disc = parser.add_argument_group("discretization")
    disc.add_argument("--nodes", type=int, default=None)
    disc.add_argument("--panels", type=int, default=None)
    disc.add_argument("--cutoff", type=float, default=None)
    disc.add_argument("--lmax", type=int, default=None)
    disc.add_argument("--mmax", type=int, default=None)
    disc.add_argument("--p", type=int, default=2, help="Regularization order (1 or 2)")

    out = parser.add_argument_group("output")
    out.add_argument("--format", type=str, default="csv", choices=FORMATS)
    out.add_argument("--out", type=str, default=None, help="Output path (default: stdout)")
    out.add_argument("--seed", type=int, default=None)
    out.add_argument("--tol", type=float, default=None, help="Override every tolerance of the suite")
    out.add_argument("--workers", type=int, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        potential=args.potential,
        params=parse_params(args.param),
        dimension=args.dim,
        z_start=args.z_start,
        z_stop=args.z_stop,
        z_count=args.z_count,
        z_imag=args.z_imag,
        lambda_start=args.lambda_start,
        lambda_stop=args.lambda_stop,
        lambda_count=args.lambda_count,
        boundary_eps=args.boundary_eps,
        nodes=args.nodes,
        panels=args.panels,
        cutoff=args.cutoff,
        lmax=args.lmax,
        mmax=args.mmax,
        p=args.p,
        format=args.format,
        out=args.out,
        seed=args.seed,
        tol=args.tol,
        workers=args.workers,
    )


def emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def main():
    """CLI entry point."""
    settings = load_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr)
        ]
    )

    parser = build_parser()
    args = parser.parse_args()

    try:
        config = config_from_args(args)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))

    try:
        final_state = asyncio.run(run_pipeline(config))
        output = final_state.get("formatted_output") or ""
        if final_state.get("pipeline_status") == "error":
            sys.stderr.write(output)
        else:
            emit(output, final_state["config"].out)
        failure = final_state.get("first_failure")
        if failure:
            logger.error(f"First failing row: {failure}")
        sys.exit(final_state.get("exit_code", 1))

    except KeyboardInterrupt:
        logger.warning("\nRun interrupted by user.")
        sys.exit(1)
    except Exception as e:
        logger.error(f"Run failed with error: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()

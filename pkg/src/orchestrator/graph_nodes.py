# ============================================================================
# GRAPH NODES
# File: src/orchestrator/graph_nodes.py
# Purpose: Implement each step of the run graph as a node
# ============================================================================

import asyncio
import logging
from dataclasses import asdict
from typing import Any, List

from src.config import load_settings
from src.numerics.errors import SpectralComputationError, UsageError
from src.orchestrator.commands import (
    COMMAND_SPECS,
    build_context,
    grid_points,
    resolve_defaults,
    tolerances,
)
from src.orchestrator.guardrails import check_guardrails, CONFIG_GUARDRAILS, COMMAND_GUARDRAILS
from src.orchestrator.pipeline_state import RunState

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


async def validate_node(state: RunState) -> RunState:
    """
    NODE 1: Resolve defaults and check configuration guardrails

    Input: config
    Output: config_valid, validation_errors, resolved_config
    """
    config = state["config"]
    logger.info(f"[validate_node] Validating run config for command '{config.command}'")

    try:
        settings = load_settings()
        resolved = resolve_defaults(config, settings)
    except UsageError as e:
        state["config_valid"] = False
        state["validation_errors"] = [f"✗ {e}"]
        return state

    resolved_dict = resolved.to_dict()
    guardrails = CONFIG_GUARDRAILS + COMMAND_GUARDRAILS.get(resolved.command, [])
    all_passed, messages = check_guardrails(guardrails, resolved_dict)

    state["config"] = resolved
    state["config_valid"] = all_passed
    state["validation_errors"] = [msg for msg in messages if msg.startswith("✗")]
    state["resolved_config"] = {**resolved_dict, "settings": asdict(settings)}

    for msg in messages:
        logger.debug(f"  {msg}")
    return state


def _evaluate(spec, point: Any, ctx) -> List[dict]:
    result = spec.point(point, ctx)
    return result if isinstance(result, list) else [result]


async def compute_node(state: RunState) -> RunState:
    """
    NODE 2: Evaluate the command's work units

    Grid points run in worker threads bounded by a semaphore; rows are
    gathered back in input order.

    Input: config
    Output: rows, compute_error
    """
    config = state["config"]
    spec = COMMAND_SPECS[config.command]
    logger.info(f"[compute_node] Running '{config.command}'")

    try:
        ctx = build_context(config, load_settings())
        points = grid_points(config)

        if spec.batch is not None:
            rows = await asyncio.to_thread(spec.batch, points, ctx)
        else:
            semaphore = asyncio.Semaphore(max(1, config.workers))

            async def run_one(point: Any) -> List[dict]:
                async with semaphore:
                    return await asyncio.to_thread(_evaluate, spec, point, ctx)

            chunks = await asyncio.gather(*(run_one(p) for p in points))
            rows = [row for chunk in chunks for row in chunk]

        state["rows"] = rows
        state["compute_error"] = None
        logger.info(f"[compute_node] ✓ {len(rows)} rows")

    except UsageError as e:
        state["compute_error"] = str(e)
        state["exit_code"] = EXIT_USAGE
    except SpectralComputationError as e:
        state["compute_error"] = f"{type(e).__name__}: {e}"
        state["exit_code"] = EXIT_FAILED
        logger.error(f"[compute_node] ✗ {type(e).__name__}: {e}")

    return state


async def check_node(state: RunState) -> RunState:
    """
    NODE 3: Compare deviation columns with their tolerances

    Input: rows, config
    Output: checks_passed, first_failure
    """
    checks = tolerances(state["config"])
    state["checks_passed"] = True
    state["first_failure"] = None

    for index, row in enumerate(state.get("rows", [])):
        for column, tol in checks.items():
            value = row.get(column)
            if value is None or not (value <= tol):
                state["checks_passed"] = False
                state["first_failure"] = {"row": index, "column": column, "value": value, "tol": tol}
                logger.error(f"[check_node] ✗ row {index}: {column}={value} exceeds {tol}")
                return state
            if value > 0.5 * tol:
                logger.warning(f"[check_node] row {index}: {column}={value:.3e} is within 2x of {tol:.1e}")

    logger.info(f"[check_node] ✓ all {len(state.get('rows', []))} rows within tolerance")
    return state


async def format_node(state: RunState) -> RunState:
    """
    NODE 4: Render the output document

    Input: config, resolved_config, rows, checks_passed
    Output: formatted_output, pipeline_status, exit_code
    """
    from src.orchestrator.formatter import Formatter

    config = state["config"]
    try:
        state["formatted_output"] = Formatter().format(
            command=config.command,
            config=state.get("resolved_config") or config.to_dict(),
            rows=state.get("rows", []),
            fmt=config.format,
        )
    except (ValueError, TypeError) as e:
        state["formatted_output"] = None
        state["pipeline_status"] = "error"
        state["exit_code"] = EXIT_FAILED
        state["error_messages"].append(f"Formatting error: {e}")
        logger.error(f"[format_node] ✗ {e}")
        return state

    if state.get("checks_passed"):
        state["pipeline_status"] = "success"
        state["exit_code"] = EXIT_OK
    else:
        state["pipeline_status"] = "failed"
        state["exit_code"] = EXIT_FAILED
    return state


async def error_node(state: RunState) -> RunState:
    """
    NODE 5: Collect errors into a readable report

    Input: error_messages, validation_errors
    Output: formatted_output, pipeline_status, exit_code
    """
    lines = [f"# Error report: {state['config'].command}", ""]
    for i, error in enumerate(state.get("error_messages", []), 1):
        lines.append(f"{i}. {error}")
    if state.get("validation_errors"):
        lines.append("")
        lines.append("Validation issues:")
        lines.extend(f"  {error}" for error in state["validation_errors"])

    state["formatted_output"] = "\n".join(lines) + "\n"
    state["pipeline_status"] = "error"
    if state.get("exit_code", 0) == EXIT_OK:
        state["exit_code"] = EXIT_USAGE if state.get("validation_errors") else EXIT_FAILED
    return state

# ============================================================================
# GRAPH EDGES
# File: src/orchestrator/graph_edges.py
# Purpose: Define routing logic between nodes
# ============================================================================

from src.orchestrator.pipeline_state import RunState


def route_after_validate(state: RunState) -> str:
    """
    After validation, decide next step.

    If config valid → compute
    If invalid → error handler
    """
    if state.get("config_valid"):
        return "compute"
    for error in state.get("validation_errors", []):
        state["error_messages"].append(f"Invalid configuration: {error}")
    return "error"


def route_after_compute(state: RunState) -> str:
    """
    After computing, decide next step.

    If rows were produced → check tolerances
    If a numerical or usage error occurred → error handler
    """
    if state.get("compute_error") is None:
        return "check"
    state["error_messages"].append(f"Computation error: {state['compute_error']}")
    return "error"

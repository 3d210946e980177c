# ============================================================================
# RUN GRAPH
# File: src/orchestrator/pipeline_graph.py
# Purpose: Create and compile the StateGraph
# ============================================================================

import logging

from langgraph.graph import StateGraph, END
from src.orchestrator.pipeline_state import RunConfig, RunState, create_initial_state
from src.orchestrator.graph_nodes import (
    validate_node,
    compute_node,
    check_node,
    format_node,
    error_node,
)
from src.orchestrator.graph_edges import route_after_validate, route_after_compute

logger = logging.getLogger(__name__)


def create_pipeline_graph():
    """
    Create the run pipeline as a LangGraph StateGraph.

    Structure:
    validate → compute → check → format → END
        ↓          ↓
      error ─────────────────────────────→ END

    Returns:
        Compiled StateGraph ready for execution
    """
    graph = StateGraph(RunState)

    # ===== ADD NODES =====
    graph.add_node("validate", validate_node)
    graph.add_node("compute", compute_node)
    graph.add_node("check", check_node)
    graph.add_node("format", format_node)
    graph.add_node("error", error_node)

    # ===== ADD EDGES =====
    graph.add_conditional_edges(
        "validate",
        route_after_validate,
        {
            "compute": "compute",
            "error": "error",
        },
    )
    graph.add_conditional_edges(
        "compute",
        route_after_compute,
        {
            "check": "check",
            "error": "error",
        },
    )
    # check → format (failed tolerances still produce output)
    graph.add_edge("check", "format")
    graph.add_edge("format", END)
    graph.add_edge("error", END)

    # ===== SET ENTRY POINT =====
    graph.set_entry_point("validate")

    compiled_graph = graph.compile()
    logger.debug("[create_pipeline_graph] ✓ Graph compiled")
    return compiled_graph


# ===== SINGLETON PATTERN =====
_graph_instance = None


def get_pipeline_graph():
    """
    Get or create the singleton run graph.

    Returns:
        Compiled StateGraph
    """
    global _graph_instance

    if _graph_instance is None:
        _graph_instance = create_pipeline_graph()

    return _graph_instance


async def run_pipeline(config: RunConfig) -> RunState:
    """
    Run one command end to end.

    Args:
        config: parsed RunConfig

    Returns:
        Final state after pipeline execution
    """
    graph = get_pipeline_graph()
    initial_state = create_initial_state(config)

    logger.info(f"Running command '{config.command}'")
    final_state = await graph.ainvoke(initial_state)
    logger.info(f"Command complete - status: {final_state.get('pipeline_status')}, exit code {final_state.get('exit_code')}")

    return final_state

"""
Orchestrator Module for bsdet-forge

Command-line front end: run configuration, guardrails, the compiled run graph
and table formatting.
"""

from src.orchestrator.pipeline_state import RunConfig, RunState, create_initial_state
from src.orchestrator.pipeline_graph import get_pipeline_graph, run_pipeline

__all__ = [
    "RunConfig",
    "RunState",
    "create_initial_state",
    "get_pipeline_graph",
    "run_pipeline",
]

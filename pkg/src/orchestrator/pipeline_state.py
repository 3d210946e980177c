# ============================================================================
# RUN STATE
# File: src/orchestrator/pipeline_state.py
# Purpose: Define the run configuration and the explicit state that flows
#          through all nodes of the run graph
# ============================================================================

from dataclasses import dataclass, field, asdict
from typing import Optional, List, Dict, Any
from typing_extensions import TypedDict


COMMANDS = ("jost", "det1d", "ratio1d", "wa", "ssf", "sdet", "disk", "sweep")
FORMATS = ("csv", "json")


@dataclass
class RunConfig:
    """
    Fully resolved command-line run.

    None means "use the command's default"; resolve_defaults() fills them in
    before the config is echoed.
    """

    command: str
    potential: Optional[str] = None
    params: Dict[str, str] = field(default_factory=dict)
    dimension: Optional[int] = None

    # ===== SPECTRAL GRID =====
    z_start: Optional[float] = None
    z_stop: Optional[float] = None
    z_count: Optional[int] = None
    z_imag: float = 0.0
    lambda_start: Optional[float] = None
    lambda_stop: Optional[float] = None
    lambda_count: Optional[int] = None
    boundary_eps: Optional[float] = None

    # ===== DISCRETIZATION =====
    nodes: Optional[int] = None
    panels: Optional[int] = None
    cutoff: Optional[float] = None
    lmax: Optional[int] = None
    mmax: Optional[int] = None
    p: int = 2

    # ===== OUTPUT / RUN =====
    format: str = "csv"
    out: Optional[str] = None
    seed: Optional[int] = None
    tol: Optional[float] = None
    workers: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class RunState(TypedDict, total=False):
    """
    Explicit state passed through all nodes of the run graph.

    Every node receives this state, modifies it, and returns it.
    """

    # ===== INPUT =====
    config: RunConfig

    # ===== AFTER VALIDATE NODE =====
    config_valid: bool
    validation_errors: List[str]
    resolved_config: Optional[Dict[str, Any]]  # echoed in the output header

    # ===== AFTER COMPUTE NODE =====
    rows: List[Dict[str, Any]]
    compute_error: Optional[str]

    # ===== AFTER CHECK NODE =====
    checks_passed: bool
    first_failure: Optional[Dict[str, Any]]

    # ===== AFTER FORMAT NODE =====
    formatted_output: Optional[str]

    # ===== STATUS (GLOBAL) =====
    pipeline_status: str  # "running" | "success" | "failed" | "error"
    exit_code: int
    error_messages: List[str]


def create_initial_state(config: RunConfig) -> RunState:
    """
    Create initial state for a new run.

    Args:
        config: parsed RunConfig

    Returns:
        Initialized RunState
    """
    return {
        "config": config,
        "config_valid": False,
        "validation_errors": [],
        "resolved_config": None,
        "rows": [],
        "compute_error": None,
        "checks_passed": False,
        "first_failure": None,
        "formatted_output": None,
        "pipeline_status": "running",
        "exit_code": 0,
        "error_messages": [],
    }

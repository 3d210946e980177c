# ============================================================================
# CONFIG
# File: src/config.py
# Purpose: Environment-backed defaults shared by the library and the CLI
# ============================================================================

import logging
import os
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
DEFAULT_WORKERS = 4
DEFAULT_CONTOUR_NODES = 128
DEFAULT_PANEL_ORDER = 16


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


def _env_float(name: str) -> Optional[float]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"Ignoring non-numeric {name}={raw!r}")
        return None


@dataclass(frozen=True)
class Settings:
    """Resolved process-wide defaults."""

    seed: int = DEFAULT_SEED
    tol: Optional[float] = None  # None: each command uses its own tolerance
    workers: int = DEFAULT_WORKERS
    contour_nodes: int = DEFAULT_CONTOUR_NODES
    panel_order: int = DEFAULT_PANEL_ORDER
    log_level: str = "INFO"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def load_settings() -> Settings:
    """
    Build a Settings snapshot from the environment (.env honored).

    Returns:
        Settings with BSDET_* overrides applied
    """
    return Settings(
        seed=_env_int("BSDET_SEED", DEFAULT_SEED),
        tol=_env_float("BSDET_TOL"),
        workers=max(1, _env_int("BSDET_WORKERS", DEFAULT_WORKERS)),
        contour_nodes=max(16, _env_int("BSDET_CONTOUR_NODES", DEFAULT_CONTOUR_NODES)),
        panel_order=max(2, _env_int("BSDET_PANEL_ORDER", DEFAULT_PANEL_ORDER)),
        log_level=os.getenv("BSDET_LOG_LEVEL", "INFO").upper(),
    )

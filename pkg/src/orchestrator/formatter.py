# ============================================================================
# FORMATTER
# File: src/orchestrator/formatter.py
# Purpose: Format result rows as schema-tagged CSV or JSON
# ============================================================================

import json
import logging
from typing import Any, Dict, List

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "v1"
FLOAT_FORMAT = "%.17g"


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

def split_complex(row: Dict[str, Any]) -> Dict[str, Any]:
    """
    Replace complex entries by <name>_re / <name>_im pairs.

    Args:
        row: one result row

    Returns:
        Row with only real scalars and strings
    """
    flat: Dict[str, Any] = {}
    for key, value in row.items():
        if isinstance(value, (complex, np.complexfloating)):
            flat[f"{key}_re"] = float(np.real(value))
            flat[f"{key}_im"] = float(np.imag(value))
        elif isinstance(value, np.integer):
            flat[key] = int(value)
        elif isinstance(value, np.floating):
            flat[key] = float(value)
        else:
            flat[key] = value
    return flat


def _plain(value: Any) -> Any:
    """JSON-safe scalars; floats keep all 17 significant digits."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return None
        return float(format(value, ".17g"))
    return value


def schema_tag(command: str) -> str:
    return f"{command}/{SCHEMA_VERSION}"


# ============================================================================
# FORMATTER
# ============================================================================

class Formatter:
    """Turns a command's rows and resolved config into the output document."""

    def to_frame(self, rows: List[Dict[str, Any]]) -> pd.DataFrame:
        return pd.DataFrame([split_complex(row) for row in rows])

    def to_csv(self, command: str, config: Dict[str, Any], rows: List[Dict[str, Any]]) -> str:
        header = f"# schema={schema_tag(command)} config={json.dumps(_plain(config), sort_keys=True, separators=(',', ':'))}\n"
        frame = self.to_frame(rows)
        return header + frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    def to_json(self, command: str, config: Dict[str, Any], rows: List[Dict[str, Any]]) -> str:
        document = {
            "schema": schema_tag(command),
            "config": _plain(config),
            "rows": [_plain(split_complex(row)) for row in rows],
        }
        return json.dumps(document, indent=2, sort_keys=False) + "\n"

    def format(self, command: str, config: Dict[str, Any], rows: List[Dict[str, Any]], fmt: str = "csv") -> str:
        """
        Render rows in the requested format.

        Args:
            command: command name (schema tag)
            config: resolved configuration echoed in the header
            rows: result rows in input order
            fmt: "csv" or "json"

        Returns:
            Output document as a string
        """
        logger.debug(f"Formatting {len(rows)} rows as {fmt}")
        if fmt == "json":
            return self.to_json(command, config, rows)
        return self.to_csv(command, config, rows)

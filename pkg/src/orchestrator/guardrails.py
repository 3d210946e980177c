# ============================================================================
# GUARDRAILS
# File: src/orchestrator/guardrails.py
# Purpose: Validation rules for run configurations
# ============================================================================

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

ConfigRule = Callable[[Dict[str, Any]], bool]


@dataclass(frozen=True)
class Guardrail:
    """Named rule over a resolved run configuration (RunConfig.to_dict())."""

    name: str
    description: str
    rule_func: ConfigRule

    def check(self, config: Dict[str, Any]) -> Tuple[bool, str]:
        """
        Returns:
            (passed, message) with a ✓ / ✗ prefix
        """
        try:
            passed = bool(self.rule_func(config))
        except (KeyError, TypeError) as e:
            return False, f"✗ {self.name}: could not evaluate rule ({type(e).__name__}: {e})"
        if passed:
            return True, f"✓ {self.name}"
        return False, f"✗ {self.name}: {self.description}"


def _positive(key: str) -> Callable[[Dict[str, Any]], bool]:
    return lambda c: c.get(key) is None or c[key] > 0


def _ordered(start: str, stop: str, count: str) -> Callable[[Dict[str, Any]], bool]:
    def rule(c: Dict[str, Any]) -> bool:
        if c.get(start) is None or c.get(stop) is None:
            return True
        if c.get(count) == 1:
            return c[start] <= c[stop]
        return c[start] < c[stop]

    return rule


# ============================================================================
# GENERAL GUARDRAILS
# ============================================================================

CONFIG_GUARDRAILS = [
    Guardrail(
        name="Known Output Format",
        description="--format must be csv or json",
        rule_func=lambda c: c["format"] in ("csv", "json"),
    ),
    Guardrail(
        name="Positive Counts",
        description="--z-count and --lambda-count must be positive",
        rule_func=lambda c: _positive("z_count")(c) and _positive("lambda_count")(c),
    ),
    Guardrail(
        name="Ordered z Grid",
        description="--z-start must lie below --z-stop",
        rule_func=_ordered("z_start", "z_stop", "z_count"),
    ),
    Guardrail(
        name="Ordered lambda Grid",
        description="--lambda-start must lie below --lambda-stop",
        rule_func=_ordered("lambda_start", "lambda_stop", "lambda_count"),
    ),
    Guardrail(
        name="Positive Discretization",
        description="--nodes, --panels and --cutoff must be positive",
        rule_func=lambda c: all(_positive(k)(c) for k in ("nodes", "panels", "cutoff")),
    ),
    Guardrail(
        name="Regularization Order",
        description="--p must be 1 or 2",
        rule_func=lambda c: c["p"] in (1, 2),
    ),
    Guardrail(
        name="Nonnegative Truncation",
        description="--lmax and --mmax must be nonnegative",
        rule_func=lambda c: all(c.get(k) is None or c[k] >= 0 for k in ("lmax", "mmax")),
    ),
    Guardrail(
        name="Positive Tolerance",
        description="--tol must be positive",
        rule_func=_positive("tol"),
    ),
]

# ============================================================================
# COMMAND GUARDRAILS
# ============================================================================

COMMAND_GUARDRAILS: Dict[str, List[Guardrail]] = {
    "ssf": [
        Guardrail(
            name="Radial Dimension",
            description="ssf needs --dim 2 or 3",
            rule_func=lambda c: c["dimension"] in (2, 3),
        ),
        Guardrail(
            name="Positive Energies",
            description="ssf compares against phase shifts and needs --lambda-start > 0",
            rule_func=lambda c: c["lambda_start"] > 0,
        ),
    ],
    "sdet": [
        Guardrail(
            name="Radial Dimension",
            description="sdet needs --dim 2 or 3",
            rule_func=lambda c: c["dimension"] in (2, 3),
        ),
        Guardrail(
            name="Positive Energies",
            description="sdet needs --lambda-start > 0",
            rule_func=lambda c: c["lambda_start"] > 0,
        ),
    ],
    "disk": [
        Guardrail(
            name="Planar Potential",
            description="disk needs --dim 2",
            rule_func=lambda c: c["dimension"] == 2,
        ),
        Guardrail(
            name="Off the Free Spectrum",
            description="disk sweeps need a nonzero imaginary offset or a z grid below 0",
            rule_func=lambda c: c["z_imag"] != 0.0 or c["z_stop"] < 0,
        ),
    ],
    "jost": [
        Guardrail(
            name="Half-Line Dimension",
            description="jost needs --dim 1",
            rule_func=lambda c: c["dimension"] == 1,
        ),
    ],
    "det1d": [
        Guardrail(
            name="Half-Line Dimension",
            description="det1d needs --dim 1",
            rule_func=lambda c: c["dimension"] == 1,
        ),
    ],
    "ratio1d": [
        Guardrail(
            name="Half-Line Dimension",
            description="ratio1d needs --dim 1",
            rule_func=lambda c: c["dimension"] == 1,
        ),
    ],
    "sweep": [
        Guardrail(
            name="Half-Line Dimension",
            description="sweep needs --dim 1",
            rule_func=lambda c: c["dimension"] == 1,
        ),
    ],
}


# ============================================================================
# EVALUATION
# ============================================================================

def check_guardrails(guardrails: List[Guardrail], config: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """
    Evaluate every guardrail; failures do not short-circuit so all are reported.

    Args:
        guardrails: rules to evaluate, general ones first
        config: resolved configuration dictionary

    Returns:
        (all_passed, messages in rule order)
    """
    results = [guardrail.check(config) for guardrail in guardrails]
    return all(passed for passed, _ in results), [message for _, message in results]

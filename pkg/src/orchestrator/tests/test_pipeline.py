# ============================================================================
# TESTS FOR RUN PIPELINE
# File: src/orchestrator/tests/test_pipeline.py
# Purpose: Test each node, the routing, the formatter and the full graph
# ============================================================================
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent.parent.parent))

import json

import pytest

from src.config import load_settings
from src.numerics.errors import UsageError
from src.orchestrator.commands import COMMAND_SPECS, grid_points, resolve_defaults, tolerances
from src.orchestrator.formatter import Formatter, split_complex
from src.orchestrator.graph_edges import route_after_compute, route_after_validate
from src.orchestrator.graph_nodes import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    check_node,
    compute_node,
    error_node,
    validate_node,
)
from src.orchestrator.guardrails import COMMAND_GUARDRAILS, CONFIG_GUARDRAILS, check_guardrails
from src.orchestrator.main import build_parser, config_from_args, parse_params
from src.orchestrator.pipeline_graph import get_pipeline_graph, run_pipeline
from src.orchestrator.pipeline_state import RunConfig, create_initial_state


def _zero_ssf() -> RunConfig:
    return RunConfig(
        command="ssf",
        potential="zero",
        lambda_start=0.5,
        lambda_stop=2.0,
        lambda_count=3,
        lmax=4,
        nodes=64,
    )


# ===== TEST: STATE CREATION =====

def test_create_initial_state():
    config = RunConfig(command="wa")
    state = create_initial_state(config)

    assert state["config"] is config
    assert state["config_valid"] is False
    assert state["rows"] == []
    assert state["pipeline_status"] == "running"
    assert state["exit_code"] == EXIT_OK
    assert state["error_messages"] == []

    print("✓ test_create_initial_state passed")


# ===== TEST: CONDITIONAL EDGES =====

def test_route_after_validate():
    state = create_initial_state(RunConfig(command="wa"))
    state["config_valid"] = True
    assert route_after_validate(state) == "compute"

    state = create_initial_state(RunConfig(command="wa"))
    state["validation_errors"] = ["✗ Regularization Order: --p must be 1 or 2"]
    assert route_after_validate(state) == "error"
    assert "Regularization Order" in state["error_messages"][0]

    print("✓ test_route_after_validate passed")


def test_route_after_compute():
    state = create_initial_state(RunConfig(command="wa"))
    assert route_after_compute(state) == "check"

    state["compute_error"] = "ChannelTruncationError: raise l_max"
    assert route_after_compute(state) == "error"
    assert len(state["error_messages"]) == 1

    print("✓ test_route_after_compute passed")


# ===== TEST: DEFAULTS AND GUARDRAILS =====

def test_resolve_defaults():
    settings = load_settings()
    resolved = resolve_defaults(RunConfig(command="disk"), settings)
    assert resolved.potential == "radial_bump"
    assert resolved.dimension == 2
    assert resolved.mmax == 20
    assert resolved.seed == settings.seed

    # explicit values win, and a user potential does not inherit default params
    resolved = resolve_defaults(RunConfig(command="ssf", potential="gaussian", nodes=64), settings)
    assert resolved.nodes == 64
    assert resolved.params == {}

    with pytest.raises(UsageError):
        resolve_defaults(RunConfig(command="eigen"), settings)

    print("✓ test_resolve_defaults passed")


def test_tolerance_override():
    config = resolve_defaults(RunConfig(command="sdet", tol=1e-3), load_settings())
    assert set(tolerances(config)) == set(COMMAND_SPECS["sdet"].checks)
    assert all(tol == 1e-3 for tol in tolerances(config).values())

    print("✓ test_tolerance_override passed")


def test_guardrails():
    settings = load_settings()
    good = resolve_defaults(RunConfig(command="ssf"), settings).to_dict()
    passed, _ = check_guardrails(CONFIG_GUARDRAILS + COMMAND_GUARDRAILS["ssf"], good)
    assert passed

    bad = resolve_defaults(RunConfig(command="ssf", dimension=1, p=3), settings).to_dict()
    passed, messages = check_guardrails(CONFIG_GUARDRAILS + COMMAND_GUARDRAILS["ssf"], bad)
    assert not passed
    failures = [m for m in messages if m.startswith("✗")]
    assert any("Regularization Order" in m for m in failures)
    assert any("Radial Dimension" in m for m in failures)

    reversed_grid = resolve_defaults(RunConfig(command="jost", z_start=-0.1, z_stop=-5.0), settings).to_dict()
    passed, _ = check_guardrails(CONFIG_GUARDRAILS, reversed_grid)
    assert not passed

    print("✓ test_guardrails passed")


def test_grid_points():
    settings = load_settings()
    assert grid_points(resolve_defaults(RunConfig(command="wa", z_count=3), settings)) == [0, 1, 2]
    lams = grid_points(resolve_defaults(_zero_ssf(), settings))
    assert lams == pytest.approx([0.5, 1.25, 2.0])

    print("✓ test_grid_points passed")


# ===== TEST: FORMATTER =====

def test_split_complex():
    row = split_complex({"z": -1.0 + 0.5j, "modes": 3, "kind": "normal"})
    assert row == {"z_re": -1.0, "z_im": 0.5, "modes": 3, "kind": "normal"}

    print("✓ test_split_complex passed")


def test_formatter_csv():
    rows = [{"z": -1.0 + 0.0j, "dev": 1.0 / 3.0}, {"z": -0.5 + 0.0j, "dev": 0.0}]
    text = Formatter().format("det1d", {"nodes": 256}, rows, "csv")
    lines = text.splitlines()
    assert lines[0].startswith("# schema=det1d/v1 config=")
    assert json.loads(lines[0].split("config=", 1)[1]) == {"nodes": 256}
    assert lines[1] == "z_re,z_im,dev"
    # 17 significant digits survive
    assert float(lines[2].split(",")[2]) == 1.0 / 3.0

    print("✓ test_formatter_csv passed")


def test_formatter_json():
    rows = [{"lambda": 1.0, "det_S": 0.6 + 0.8j}]
    document = json.loads(Formatter().format("sdet", {"lmax": 12}, rows, "json"))
    assert document["schema"] == "sdet/v1"
    assert document["config"] == {"lmax": 12}
    assert document["rows"] == [{"lambda": 1.0, "det_S_re": 0.6, "det_S_im": 0.8}]

    print("✓ test_formatter_json passed")


# ===== TEST: NODES =====

@pytest.mark.asyncio
async def test_validate_node():
    state = await validate_node(create_initial_state(_zero_ssf()))
    assert state["config_valid"] is True
    assert state["config"].dimension == 3
    assert "settings" in state["resolved_config"]

    state = await validate_node(create_initial_state(RunConfig(command="disk", dimension=3)))
    assert state["config_valid"] is False
    assert any("Planar Potential" in e for e in state["validation_errors"])

    print("✓ test_validate_node passed")


@pytest.mark.asyncio
async def test_compute_and_check_nodes():
    state = await validate_node(create_initial_state(_zero_ssf()))
    state = await compute_node(state)
    assert state["compute_error"] is None
    assert [row["lambda"] for row in state["rows"]] == pytest.approx([0.5, 1.25, 2.0])
    assert all(abs(row["xi"]) < 1e-12 for row in state["rows"])

    state = await check_node(state)
    assert state["checks_passed"] is True

    state["rows"][1]["dev_xi"] = 1.0
    state = await check_node(state)
    assert state["checks_passed"] is False
    assert state["first_failure"]["row"] == 1
    assert state["first_failure"]["column"] == "dev_xi"

    print("✓ test_compute_and_check_nodes passed")


@pytest.mark.asyncio
async def test_compute_node_usage_error():
    config = RunConfig(command="det1d", potential="harmonic", z_count=2)
    state = await validate_node(create_initial_state(config))
    state = await compute_node(state)
    assert "harmonic" in state["compute_error"]
    assert state["exit_code"] == EXIT_USAGE

    print("✓ test_compute_node_usage_error passed")


@pytest.mark.asyncio
async def test_error_node():
    state = create_initial_state(RunConfig(command="wa"))
    state["error_messages"] = ["Computation error: boom"]
    state = await error_node(state)
    assert state["pipeline_status"] == "error"
    assert state["exit_code"] == EXIT_FAILED
    assert "1. Computation error: boom" in state["formatted_output"]

    print("✓ test_error_node passed")


# ===== TEST: FULL GRAPH =====

def test_graph_singleton():
    assert get_pipeline_graph() is get_pipeline_graph()

    print("✓ test_graph_singleton passed")


@pytest.mark.asyncio
async def test_full_pipeline_ssf_zero_potential():
    """V = 0 has no spectral shift; the run succeeds and echoes its config."""
    final_state = await run_pipeline(_zero_ssf())
    assert final_state["pipeline_status"] == "success"
    assert final_state["exit_code"] == EXIT_OK
    lines = final_state["formatted_output"].splitlines()
    assert lines[0].startswith("# schema=ssf/v1 config=")
    assert len(lines) == 2 + 3

    print("✓ test_full_pipeline_ssf_zero_potential passed")


@pytest.mark.asyncio
async def test_full_pipeline_wa():
    config = RunConfig(command="wa", z_count=2, seed=7, format="json")
    final_state = await run_pipeline(config)
    assert final_state["exit_code"] == EXIT_OK
    document = json.loads(final_state["formatted_output"])
    assert document["schema"] == "wa/v1"
    assert {row["instance"] for row in document["rows"]} == {0, 1}
    assert all(row["mismatch"] == 0 for row in document["rows"])

    print("✓ test_full_pipeline_wa passed")


@pytest.mark.asyncio
async def test_full_pipeline_usage_error():
    final_state = await run_pipeline(RunConfig(command="wa", p=3))
    assert final_state["pipeline_status"] == "error"
    assert final_state["exit_code"] == EXIT_USAGE
    assert "Regularization Order" in final_state["formatted_output"]

    print("✓ test_full_pipeline_usage_error passed")


# ===== TEST: DEFAULT RUN PER COMMAND =====

async def _default_run(command: str) -> dict:
    final_state = await run_pipeline(RunConfig(command=command))
    assert final_state["exit_code"] == EXIT_OK, final_state["formatted_output"]
    assert final_state["pipeline_status"] == "success"
    assert final_state["formatted_output"].startswith(f"# schema={command}/v1")
    return final_state


@pytest.mark.asyncio
async def test_default_run_jost():
    final_state = await _default_run("jost")
    assert len(final_state["rows"]) == 20

    print("✓ test_default_run_jost passed")


@pytest.mark.asyncio
async def test_default_run_det1d():
    final_state = await _default_run("det1d")
    assert all(row["nodes"] == 256 for row in final_state["rows"])

    print("✓ test_default_run_det1d passed")


@pytest.mark.asyncio
async def test_default_run_ratio1d():
    await _default_run("ratio1d")

    print("✓ test_default_run_ratio1d passed")


@pytest.mark.asyncio
async def test_default_run_sweep():
    final_state = await _default_run("sweep")
    assert len(final_state["rows"]) == 50

    print("✓ test_default_run_sweep passed")


@pytest.mark.asyncio
async def test_default_run_wa():
    await _default_run("wa")

    print("✓ test_default_run_wa passed")


@pytest.mark.asyncio
async def test_default_run_ssf():
    final_state = await _default_run("ssf")
    assert len(final_state["rows"]) == 50

    print("✓ test_default_run_ssf passed")


@pytest.mark.asyncio
async def test_default_run_sdet():
    final_state = await _default_run("sdet")
    assert all(row["unitarity_dev"] < 1e-6 for row in final_state["rows"])

    print("✓ test_default_run_sdet passed")


@pytest.mark.asyncio
async def test_default_run_disk():
    final_state = await _default_run("disk")
    assert len(final_state["rows"]) == 5

    print("✓ test_default_run_disk passed")


# ===== TEST: COMMAND LINE =====

def test_parse_params():
    assert parse_params(["depth=2", " radius = 0.5 "]) == {"depth": "2", "radius": "0.5"}
    assert parse_params(None) == {}

    print("✓ test_parse_params passed")


def test_parser_to_config():
    args = build_parser().parse_args(
        ["--command", "ssf", "--potential", "square_well", "--param", "depth=3", "--dim", "3",
         "--lambda-start", "0.5", "--lambda-stop", "4", "--lambda-count", "8", "--format", "json"]
    )
    config = config_from_args(args)
    assert config.command == "ssf"
    assert config.params == {"depth": "3"}
    assert config.dimension == 3
    assert config.lambda_count == 8
    assert config.format == "json"

    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["--command", "eigen"])
    assert exc.value.code == EXIT_USAGE

    print("✓ test_parser_to_config passed")


# ===== RUN ALL TESTS =====

def run_all_tests():
    import asyncio

    print("\n" + "=" * 70)
    print("RUNNING PIPELINE TESTS")
    print("=" * 70 + "\n")

    test_create_initial_state()
    test_route_after_validate()
    test_route_after_compute()
    test_resolve_defaults()
    test_tolerance_override()
    test_guardrails()
    test_grid_points()
    test_split_complex()
    test_formatter_csv()
    test_formatter_json()
    asyncio.run(test_validate_node())
    asyncio.run(test_compute_and_check_nodes())
    asyncio.run(test_compute_node_usage_error())
    asyncio.run(test_error_node())
    test_graph_singleton()
    asyncio.run(test_full_pipeline_ssf_zero_potential())
    asyncio.run(test_full_pipeline_wa())
    asyncio.run(test_full_pipeline_usage_error())
    asyncio.run(test_default_run_jost())
    asyncio.run(test_default_run_det1d())
    asyncio.run(test_default_run_ratio1d())
    asyncio.run(test_default_run_sweep())
    asyncio.run(test_default_run_wa())
    asyncio.run(test_default_run_ssf())
    asyncio.run(test_default_run_sdet())
    asyncio.run(test_default_run_disk())
    test_parse_params()
    test_parser_to_config()

    print("\n" + "=" * 70)
    print("✓ ALL PIPELINE TESTS PASSED")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    run_all_tests()

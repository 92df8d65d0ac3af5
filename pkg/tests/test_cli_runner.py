# tests/test_cli_runner.py

import json

import pytest

from core.errors import ConfigError
from engines.contraction_engine import IterationTrace
from main import main
from runner import (
    EXIT_CERTIFIED, EXIT_NONCONVERGENT, EXIT_REFUSED, EXIT_STRUCTURAL, RunConfig, build_run_config, emit_trace,
    list_scenarios, parse_config_text, parse_start,
)
from scenarios import build_scenario
from utils.file_operations import load_csv, load_json


def _run(tmp_path, *args, name="run"):
    trace = tmp_path / f"{name}.trace"
    report = tmp_path / f"{name}.json"
    status = main(["run", *args, "--out-trace", str(trace), "--out-report", str(report)])
    return status, trace, (load_json(report) if report.exists() else None)


def test_affine_constant_run_is_certified(tmp_path):
    status, trace, report = _run(tmp_path, "--scenario", "affine", "--param", "a=0.5", "--param", "b=const:1",
                                 "--tol", "1e-10")
    assert status == EXIT_CERTIFIED
    assert report["status"] == "certified"
    assert report["limit"][0] == pytest.approx(2.0, abs=1e-10)
    assert report["certificate"]["total"] <= 1e-10
    header, rows = load_csv(trace)
    assert header == ["n", "coord_0", "step_distance", "bound"]
    assert len(rows) == report["n_used"]


def test_remark_run_is_refused(tmp_path):
    status, trace, report = _run(tmp_path, "--scenario", "remark1")
    assert status == EXIT_REFUSED
    assert report["refusal"]["conditions"] == ["condition (1) BaseBounded"]
    assert report["raw_runs"][0]["outcome"] == "diverged"
    assert trace.exists()


def test_cond3_run_exhibits_split_limits(tmp_path):
    status, _, report = _run(tmp_path, "--scenario", "cond3", "--start", "x=1,y=1")
    assert status == EXIT_REFUSED
    assert "condition (3) Equicontinuous" in report["refusal"]["conditions"]
    limits = [run["limit"] for run in report["raw_runs"]]
    assert limits[0][1][0] == pytest.approx(0.25, abs=1e-9)
    assert limits[1][1][0] == pytest.approx(0.0, abs=1e-9)
    assert all(run["label"] == "uncertified" for run in report["raw_runs"])
    assert abs(report["base_certificate"]["limit"][0]) <= 1e-10


def test_cond2_run_is_refused_with_certified_base(tmp_path):
    status, _, report = _run(tmp_path, "--scenario", "cond2")
    assert status == EXIT_REFUSED
    assert "condition (2) FiberBounded" in report["refusal"]["conditions"]
    assert report["raw_runs"][0]["outcome"] == "diverged"
    assert abs(report["base_certificate"]["limit"][0]) <= 1e-10


def test_affine_skew_run_reports_diagnostics(tmp_path):
    status, trace, report = _run(tmp_path, "--scenario", "affine-skew", "--start", "x=3,y=-2",
                                 "--format", "json", "--epsilon", "1e-3")
    assert status == EXIT_CERTIFIED
    assert report["label"] == "certified base / heuristic fiber"
    proof = report["diagnostics"]["proof"]
    assert proof["convergence"]["holds"]
    assert proof["start_independence"]["holds"]
    assert report["diagnostics"]["start_independence"]["agrees"]
    document = load_json(trace)
    assert document["meta"]["seed"] == 0
    assert len(document["rows"]) == report["n_used"]
    assert set(document["rows"][0]) == {"n", "base_0", "fiber_0", "base_bound", "fiber_step"}


def test_nonconvergent_run_exits_3(tmp_path):
    status, trace, report = _run(tmp_path, "--scenario", "affine", "--param", "a=0.9", "--max-n", "10")
    assert status == EXIT_NONCONVERGENT
    assert report["status"] == "nonconvergent"
    _, rows = load_csv(trace)
    assert len(rows) == 10


@pytest.mark.parametrize("name", ["affine", "affine-skew", "smooth-graph", "cocycle"])
def test_convergent_scenarios_exit_0_under_defaults(tmp_path, name):
    status, trace, report = _run(tmp_path, "--scenario", name)
    assert status == EXIT_CERTIFIED
    assert report["status"] == "certified"
    assert trace.exists()


@pytest.mark.parametrize("args", [
    ["--scenario", "nope"],
    ["--scenario", "affine", "--tol", "-1"],
    ["--scenario", "affine", "--param", "b=geom:3"],
    ["--scenario", "affine", "--start", "x=1,y=2"],
    ["--scenario", "smooth-graph", "--param", "grid_size=4"],
    ["--config", "missing.cfg"],
    ["--tol", "1e-3"],
])
def test_structural_errors_exit_1(tmp_path, capsys, args):
    status, _, report = _run(tmp_path, *args)
    assert status == EXIT_STRUCTURAL
    assert report is None
    assert "nscontract: error:" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["--scenario", "affine", "--param", "b=geom:0.5"],
    ["--scenario", "affine-skew"],
    ["--scenario", "cocycle", "--param", "matrices=2,1,1,1;1,1,1,2", "--format", "json"],
])
def test_traces_are_byte_identical(tmp_path, args):
    _, first, _ = _run(tmp_path, *args, name="first")
    _, second, _ = _run(tmp_path, *args, name="second")
    assert first.read_bytes() == second.read_bytes()


def test_config_file_with_overrides(tmp_path):
    config = tmp_path / "affine.cfg"
    config.write_text("# geometric coefficients\nscenario = affine\nparam.b = geom:0.5\ntol = 1e-6\n")
    status, _, report = _run(tmp_path, "--config", str(config), "--tol", "1e-10")
    assert status == EXIT_CERTIFIED
    assert report["meta"]["config_echo"]["policy"]["tol"] == 1e-10
    assert report["meta"]["config_echo"]["params"] == {"b": "geom:0.5"}
    assert report["limit"][0] == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_list_command(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("remark1", "cond2", "cond3", "affine", "affine-skew", "smooth-graph", "cocycle"):
        assert name in out
    assert len(list_scenarios()) == 7


def test_emit_trace_csv_and_json(tmp_path):
    trace = IterationTrace()
    for n in (1, 2, 3):
        trace.append(n, [0.1 * n], 0.5 ** n, 2.0 ** -n)
    csv_path = tmp_path / "t.csv"
    emit_trace(trace, "csv", str(csv_path))
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 4
    assert lines[1] == "1,0.10000000000000001,0.5,0.5"

    empty_path = tmp_path / "empty.csv"
    emit_trace(IterationTrace(), "csv", str(empty_path))
    assert empty_path.read_text().splitlines() == ["n,coord_0,step_distance,bound"]

    json_path = tmp_path / "t.json"
    emit_trace(trace, "json", str(json_path), {"seed": 4})
    document = json.loads(json_path.read_text())
    assert document["meta"] == {"seed": 4}
    assert document["rows"][2] == {"n": 3, "coord_0": pytest.approx(0.3), "step_distance": 0.125, "bound": 0.125}

    with pytest.raises(ConfigError):
        emit_trace(trace, "xml", str(tmp_path / "t.xml"))


def test_parse_start_variants():
    sequence = build_scenario("affine")
    assert parse_start("x=2.5", sequence).tolist() == [2.5]
    assert parse_start(None, sequence) is sequence.start
    skew = build_scenario("affine-skew")
    x, y = parse_start("y=4", skew)
    assert (x.tolist(), y.tolist()) == ([1.0], [4.0])
    graph = build_scenario("smooth-graph", {"grid_size": "16"})
    x, _ = parse_start("x=0.5", graph)
    assert x.tolist() == [0.5] * 16
    with pytest.raises(ConfigError):
        parse_start("z=1", sequence)
    with pytest.raises(ConfigError):
        parse_start("x=1:2", sequence)


def test_run_config_parsing():
    values = parse_config_text("scenario = cocycle\n\n# comment\nparam.matrices = 2,1,1,1\nseed = 3\n")
    config = build_run_config(values)
    assert isinstance(config, RunConfig)
    assert config.params == {"matrices": "2,1,1,1"}
    assert config.policy.seed == 3
    assert config.output.format == "csv"
    with pytest.raises(ConfigError):
        parse_config_text("colour = blue\n")
    with pytest.raises(ConfigError):
        parse_config_text("just a line\n")
    with pytest.raises(ConfigError):
        build_run_config({"scenario": "affine", "max_n": "many"})
    with pytest.raises(ConfigError):
        build_run_config({"scenario": "affine", "stability_window": "1"})

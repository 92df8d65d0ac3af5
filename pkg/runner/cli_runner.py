# runner/cli_runner.py

"""
Runs a configured scenario: probe phase, engine phase, artifacts.

The exit status carries the verdict: 0 certified convergence, 2 refusal
(a hypothesis probe did not pass, or a rate is not below 1), 3 no
certificate within max_n, 1 structural or configuration errors. Refused
systems are still run raw so counterexamples leave an uncertified trace.
"""

import logging

import numpy as np

from core.errors import (
    ConfigError, DomainError, NonConvergenceError, NSContractError, RefusalError, StructuralError,
)
from core.metric_core import distance, validate_point
from engines.contraction_engine import NonstationaryPolicy, iterate_nonstationary, orbit_trace
from engines.fiber_engine import (
    FiberPolicy, build_convergence_plan, certify_skew_system, convergence_diagnostics,
    iterate_fiber_nonstationary, raw_skew_orbit, start_independence_diagnostics,
)
from probes.lipschitz_probe import DIVERGENCE_THRESHOLD
from scenarios import SCENARIOS, SplitLimit, build_scenario
from utils.file_operations import save_csv, save_json
from utils.numeric_helpers import point_to_list

logger = logging.getLogger(__name__)

EXIT_CERTIFIED = 0
EXIT_STRUCTURAL = 1
EXIT_REFUSED = 2
EXIT_NONCONVERGENT = 3
STATUS_NAMES = {
    EXIT_CERTIFIED: "certified",
    EXIT_REFUSED: "refused",
    EXIT_NONCONVERGENT: "nonconvergent",
}
# Extra length of the comparison orbit in proof diagnostics.
DIAGNOSTIC_EXTRA = 10


def list_scenarios():
    """
    Returns one `name  description` line per registered scenario.
    """
    width = max(len(name) for name in SCENARIOS)
    return [f"{name:<{width}}  {entry.description}" for name, entry in sorted(SCENARIOS.items())]


def _coordinates(key, raw, space, default):
    if raw is None:
        return default
    try:
        values = [float(c) for c in raw.split(":")]
    except ValueError as exc:
        raise ConfigError(f"start coordinate {key}={raw!r} is not numeric") from exc
    if len(values) == 1:
        values = values * space.size
    try:
        return validate_point(space, values)
    except StructuralError as exc:
        raise ConfigError(f"start coordinate {key}: {exc}") from exc


def parse_start(text, scenario):
    """
    Parses `x=...,y=...` into a start point or pair.

    Coordinates of a vector are colon-separated; a single value is broadcast
    to every coordinate. Omitted coordinates fall back to the scenario's start.
    """
    if not text:
        return scenario.start
    parts = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in ("x", "y"):
            raise ConfigError(f"start must look like x=...,y=..., got '{text}'")
        parts[key] = value.strip()
    if scenario.is_skew:
        system = scenario.system
        return (
            _coordinates("x", parts.get("x"), system.base_space, scenario.start[0]),
            _coordinates("y", parts.get("y"), system.fiber_space, scenario.start[1]),
        )
    if "y" in parts:
        raise ConfigError(f"scenario '{scenario.name}' has no fiber coordinate; drop y from the start")
    return _coordinates("x", parts.get("x"), scenario.system.space, scenario.start)


def emit_trace(trace, fmt, path, meta=None):
    """
    Writes a trace as CSV (header plus one row per step) or JSON ({meta, rows}).

    Args:
        trace (IterationTrace or FiberTrace): The trace.
        fmt (str): 'csv' or 'json'.
        path (str): Destination path.
        meta (dict, optional): Seed and config echo for JSON output.
    """
    columns = trace.columns()
    if fmt == "csv":
        save_csv(columns, trace.records(), path)
    elif fmt == "json":
        rows = [dict(zip(columns, record)) for record in trace.records()]
        save_json({"meta": meta or {}, "rows": rows}, path)
    else:
        raise ConfigError(f"unknown trace format '{fmt}'")


def _pair_to_list(pair):
    return [point_to_list(pair[0]), point_to_list(pair[1])]


def _sequence_policy(policy, max_n):
    return NonstationaryPolicy(tol=policy.tol, max_n=max_n, probe_horizon=policy.probe_horizon, seed=policy.seed)


def _fiber_policy(policy, max_n):
    return FiberPolicy(tol=policy.tol, max_n=max_n, stability_window=policy.stability_window,
                       probe_horizon=policy.probe_horizon, seed=policy.seed)


def _run_sequence(scenario, start, policy, max_n, report):
    result = iterate_nonstationary(scenario.system, scenario.x0, start, _sequence_policy(policy, max_n))
    report["probes"] = [r.to_dict() for r in result.probes]
    report["certificate"] = result.certificate.to_dict()
    report["limit"] = point_to_list(result.point)
    report["n_used"] = result.n_used
    report["oracle"] = scenario.check_oracle(result.point)
    return result.trace


def _proof_diagnostics(system, start, certification, policy, fiber_policy):
    try:
        plan = build_convergence_plan(system, policy.epsilon, certification, fiber_policy)
    except StructuralError as exc:
        logger.warning("%s: no convergence plan for epsilon=%g: %s", system.name, policy.epsilon, exc)
        return {"error": str(exc)}
    n = plan.N0 + plan.N1 + 1
    table = convergence_diagnostics(system, plan, n + DIAGNOSTIC_EXTRA, n)
    bookkeeping = start_independence_diagnostics(system, start, n, plan.lam, fiber_policy)
    return {"convergence": table.to_dict(), "start_independence": bookkeeping}


def _run_skew(scenario, start, policy, max_n, report):
    system = scenario.system
    fiber_policy = _fiber_policy(policy, max_n)
    certification = certify_skew_system(system, fiber_policy, start)
    report["probes"] = [r.to_dict() for r in certification.reports]
    result = iterate_fiber_nonstationary(system, start, fiber_policy, certification)
    report["certificate"] = result.base_certificate.to_dict()
    report["limit"] = _pair_to_list(result.pair)
    report["n_used"] = result.n_used
    report["label"] = result.label
    report["oracle"] = scenario.check_oracle(result.pair)
    report["diagnostics"] = {
        **result.diagnostics,
        "proof": _proof_diagnostics(system, start, certification, policy, fiber_policy),
    }
    return result.trace


def _raw_starts(scenario, start):
    starts = [start]
    if isinstance(scenario.expected, SplitLimit):
        for candidate in (scenario.expected.start_a, scenario.expected.start_b):
            if not any(np.array_equal(candidate[0], s[0]) and np.array_equal(candidate[1], s[1]) for s in starts):
                starts.append(candidate)
    return starts


def _exhibit_raw(scenario, start, policy, max_n, report):
    """
    Runs refused systems without certification and records the uncertified outcome.
    """
    system = scenario.system
    if not scenario.is_skew:
        trace = orbit_trace(system, start, max_n)
        last = trace.rows[-1].point if trace.rows else start
        reach = distance(system.space, last, start)
        diverged = not np.isfinite(reach) or reach > DIVERGENCE_THRESHOLD
        report["raw_runs"].append({
            "start": point_to_list(start), "limit": point_to_list(last), "n": len(trace),
            "outcome": "diverged" if diverged else "exhausted", "label": "uncertified",
        })
        return trace

    first = None
    for s in _raw_starts(scenario, start):
        trace, pair, outcome = raw_skew_orbit(system, s, max_n, policy.tol, policy.stability_window)
        report["raw_runs"].append({
            "start": _pair_to_list(s), "limit": _pair_to_list(pair), "n": len(trace),
            "outcome": outcome, "label": "uncertified",
        })
        if first is None:
            first = trace

    try:
        base = iterate_nonstationary(system.base, system.x0, start[0], _sequence_policy(policy, max_n))
        report["base_certificate"] = {**base.certificate.to_dict(), "limit": point_to_list(base.point),
                                      "n_used": base.n_used}
    except NSContractError as exc:
        report["base_certificate"] = {"error": str(exc)}
    return first


def run(config):
    """
    Executes one configured run and writes its artifacts.

    Args:
        config (RunConfig): The validated configuration.

    Returns:
        int: The exit status.

    Raises:
        StructuralError: For configuration, scenario and I/O failures (exit status 1).
    """
    scenario = build_scenario(config.scenario, config.params)
    start = parse_start(config.start, scenario)
    policy = config.policy
    max_n = min(policy.max_n, scenario.max_n) if scenario.max_n else policy.max_n
    meta = {"seed": policy.seed, "config_echo": config.echo()}
    report = {
        "meta": meta, "status": None, "scenario": scenario.describe(), "probes": [],
        "certificate": None, "limit": None, "oracle": None, "diagnostics": {}, "raw_runs": [],
    }
    logger.info("running scenario %s (seed %d, tol %g, max_n %d)", scenario.name, policy.seed, policy.tol, max_n)

    try:
        if scenario.is_skew:
            trace = _run_skew(scenario, start, policy, max_n, report)
        else:
            trace = _run_sequence(scenario, start, policy, max_n, report)
        status = EXIT_CERTIFIED
    except RefusalError as exc:
        status = EXIT_REFUSED
        report["refusal"] = {"conditions": exc.conditions, "message": str(exc)}
        report["probes"] = [r.to_dict() for r in exc.reports]
        trace = _exhibit_raw(scenario, start, policy, max_n, report)
    except DomainError as exc:
        status = EXIT_REFUSED
        report["refusal"] = {"conditions": [], "message": str(exc)}
        trace = _exhibit_raw(scenario, start, policy, max_n, report)
    except NonConvergenceError as exc:
        status = EXIT_NONCONVERGENT
        report["error"] = str(exc)
        trace = exc.trace

    report["status"] = STATUS_NAMES[status]
    logger.info("scenario %s finished: %s", scenario.name, report["status"])
    try:
        if config.output.trace_path and trace is not None:
            emit_trace(trace, config.output.format, config.output.trace_path, meta)
        if config.output.report_path:
            save_json(report, config.output.report_path)
    except OSError as exc:
        raise StructuralError(f"cannot write run artifacts: {exc}") from exc
    return status

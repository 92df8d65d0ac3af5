# runner/config.py

"""
Parses flat `key = value` run configurations and merges command-line overrides.

Scenario parameters are namespaced as `param.<name>`; every other key is a
policy or output setting. Values stay strings until build_run_config types
them, so file values and CLI overrides follow the same validation.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

from core.errors import ConfigError

POLICY_KEYS = {
    "tol": float,
    "max_n": int,
    "stability_window": int,
    "probe_horizon": int,
    "seed": int,
    "epsilon": float,
}
OUTPUT_KEYS = ("out_trace", "out_report", "format")
TOP_KEYS = ("scenario", "start")
FORMATS = ("csv", "json")
PARAM_PREFIX = "param."


@dataclass(frozen=True)
class RunPolicy:
    """
    Stopping and probing parameters of one run.

    Attributes:
        tol (float): Certificate target, > 0.
        max_n (int): Largest composition length, >= 1.
        stability_window (int): Fiber stability window, >= 2.
        probe_horizon (int): Horizon of the boundedness probes, >= 1.
        seed (int): Sampling seed, echoed into every artifact.
        epsilon (float): Target accuracy of the convergence plan for skew runs.
    """

    tol: float = 1e-10
    max_n: int = 1000
    stability_window: int = 10
    probe_horizon: int = 200
    seed: int = 0
    epsilon: float = 1e-3

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if self.max_n < 1:
            raise ConfigError(f"max_n must be >= 1, got {self.max_n}")
        if self.stability_window < 2:
            raise ConfigError(f"stability_window must be >= 2, got {self.stability_window}")
        if self.probe_horizon < 1:
            raise ConfigError(f"probe_horizon must be >= 1, got {self.probe_horizon}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class OutputConfig:
    trace_path: Optional[str] = None
    report_path: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got '{self.format}'")


@dataclass(frozen=True)
class RunConfig:
    """
    A validated run: scenario name and parameters, policy, outputs and an optional start.
    """

    scenario: str
    params: Dict[str, str] = field(default_factory=dict)
    policy: RunPolicy = field(default_factory=RunPolicy)
    output: OutputConfig = field(default_factory=OutputConfig)
    start: Optional[str] = None

    def echo(self):
        """
        Returns the configuration as plain data for the `config_echo` block of artifacts.
        """
        return {
            "scenario": self.scenario,
            "params": dict(sorted(self.params.items())),
            "policy": {key: getattr(self.policy, key) for key in POLICY_KEYS},
            "format": self.output.format,
            "start": self.start,
        }


def parse_config_text(text, source="<config>"):
    """
    Parses `key = value` lines; blank lines and lines starting with # are skipped.

    Args:
        text (str): File content.
        source (str): Name used in error messages.

    Returns:
        dict: Raw key -> string value.

    Raises:
        ConfigError: On malformed lines or unknown keys.
    """
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got '{stripped}'")
        if not (key.startswith(PARAM_PREFIX) or key in POLICY_KEYS or key in OUTPUT_KEYS or key in TOP_KEYS):
            raise ConfigError(f"{source}:{number}: unknown key '{key}'")
        values[key] = value.strip()
    return values


def load_config(file_path):
    """
    Reads a configuration file.

    Raises:
        ConfigError: If the file cannot be read or parsed.
    """
    try:
        with open(file_path, 'r') as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{file_path}': {exc}") from exc
    return parse_config_text(text, source=file_path)


def _typed(key, raw, convert):
    try:
        return convert(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from exc


def build_run_config(values):
    """
    Builds a RunConfig from raw string values (file values with CLI overrides applied).

    Args:
        values (dict): Raw key -> value, with scenario parameters under `param.<name>`.

    Returns:
        RunConfig: The validated configuration.
    """
    scenario = values.get("scenario")
    if not scenario:
        raise ConfigError("no scenario given; pass --scenario or set 'scenario' in the config file")
    params = {key[len(PARAM_PREFIX):]: value for key, value in values.items() if key.startswith(PARAM_PREFIX)}
    policy = RunPolicy(**{
        key: _typed(key, values[key], convert) for key, convert in POLICY_KEYS.items() if values.get(key) is not None
    })
    output = OutputConfig(
        trace_path=values.get("out_trace") or None,
        report_path=values.get("out_report") or None,
        format=values.get("format") or "csv",
    )
    return RunConfig(scenario, params, policy, output, values.get("start") or None)

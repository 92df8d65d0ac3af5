# scenarios/__init__.py

"""
Initializes the scenarios package and the name -> builder registry used by the CLI.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict

from core.errors import ConfigError, NSContractError
from .base import Converges, Diverges, Scenario, SplitLimit
from .counterexamples import (
    build_condition2_counterexample, build_condition3_counterexample, build_remark_counterexample,
    remark_partial_sum,
)
from .affine import affine_series_limit, build_affine_scenario, build_affine_skew_demo, parse_b_spec
from .smooth_graph import build_smooth_graph_demo, derivative_mismatch, observed_order
from .cocycle import build_projective_cocycle_demo, product_direction


@dataclass(frozen=True)
class ScenarioEntry:
    """
    A registered builder with the converters for its string parameters.
    """

    builder: Callable[..., Scenario]
    description: str
    params: Dict[str, Callable[[str], object]] = field(default_factory=dict)


SCENARIOS = {
    "remark1": ScenarioEntry(build_remark_counterexample, "f_n(x) = x/2 + 3^n; boundedness of d(f_n(x0), x0) fails"),
    "cond2": ScenarioEntry(build_condition2_counterexample, "fiber images y/2 + 3^n are unbounded"),
    "cond3": ScenarioEntry(build_condition3_counterexample, "fiber maps jump at x = 0; limits split"),
    "affine": ScenarioEntry(build_affine_scenario, "f_n(x) = a x + b_n with series oracle", {"a": float, "b": str}),
    "affine-skew": ScenarioEntry(build_affine_skew_demo, "f_n(x) = x/2, h_n^x(y) = y/2 + x"),
    "smooth-graph": ScenarioEntry(build_smooth_graph_demo, "graph transform whose slope limit is the derivative",
                                  {"grid_size": int, "family": str}),
    "cocycle": ScenarioEntry(build_projective_cocycle_demo, "slopes under positive 2x2 matrix products",
                             {"matrices": str}),
}


def build_scenario(name, params=None):
    """
    Builds a registered scenario from string parameters.

    Args:
        name (str): Registry name.
        params (dict): Parameter name -> string value.

    Returns:
        Scenario: The built scenario.

    Raises:
        ConfigError: For unknown names, unknown parameters, unparsable values or rejected families.
    """
    entry = SCENARIOS.get(name)
    if entry is None:
        raise ConfigError(f"unknown scenario '{name}'; available: {', '.join(sorted(SCENARIOS))}")
    kwargs = {}
    for key, raw in (params or {}).items():
        convert = entry.params.get(key)
        if convert is None:
            raise ConfigError(f"scenario '{name}' takes no parameter '{key}'; accepted: {sorted(entry.params) or 'none'}")
        try:
            kwargs[key] = convert(raw)
        except ValueError as exc:
            raise ConfigError(f"parameter {key}={raw!r} for scenario '{name}': {exc}") from exc
    try:
        return entry.builder(**kwargs)
    except ConfigError:
        raise
    except NSContractError as exc:
        raise ConfigError(f"scenario '{name}' rejected its parameters: {exc}") from exc

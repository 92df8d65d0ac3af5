# runner/__init__.py

"""
Initializes the runner package: run configuration and the scenario runner.
"""

from .config import RunConfig, RunPolicy, OutputConfig, build_run_config, load_config, parse_config_text
from .cli_runner import (
    EXIT_CERTIFIED, EXIT_NONCONVERGENT, EXIT_REFUSED, EXIT_STRUCTURAL, emit_trace, list_scenarios,
    parse_start, run,
)

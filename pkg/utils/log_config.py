# utils/log_config.py

"""
Configures diagnostic logging from the NSCONTRACT_LOG environment variable.
"""

import logging
import os
import sys

LOG_ENV = "NSCONTRACT_LOG"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LEVELS = {
    "silent": logging.CRITICAL + 1,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_handler = None


def configure_logging(environ=None, stream=None):
    """
    Installs one stderr handler on the root logger at the level named by NSCONTRACT_LOG.

    Args:
        environ (Mapping, optional): Environment to read; defaults to os.environ.
        stream (file, optional): Destination; defaults to sys.stderr.

    Returns:
        int: The level that was set.
    """
    global _handler
    environ = os.environ if environ is None else environ
    name = environ.get(LOG_ENV, "info").strip().lower()
    level = LEVELS.get(name)

    root = logging.getLogger()
    if _handler is not None:
        root.removeHandler(_handler)
    _handler = logging.StreamHandler(stream or sys.stderr)
    _handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(_handler)
    root.setLevel(level if level is not None else logging.INFO)

    if level is None:
        logging.getLogger(__name__).warning("unknown %s value '%s'; using info", LOG_ENV, name)
        level = logging.INFO
    return level

# utils/__init__.py

"""
Initializes the Utils package.
"""

from .numeric_helpers import *
from .file_operations import *
from .log_config import configure_logging

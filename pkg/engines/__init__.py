# engines/__init__.py

"""
Initializes the engines package: stationary and non-stationary iteration, plain and fibered.
"""

from .contraction_engine import *
from .fiber_engine import *

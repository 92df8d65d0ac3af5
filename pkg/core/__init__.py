# core/__init__.py

"""
Initializes the core package: metric spaces, map families and errors.
"""

from .errors import *
from .metric_core import (
    MetricSpaceDescriptor, SpaceKind, as_point, validate_point, distance,
    product_distance, pairwise_distances, points_equal, origin, grid_nodes,
    grid_spacing, split, join,
)
from .maps import MapSequence, FiberFamily, SkewSystem

# core/metric_core.py

"""
Defines the metric spaces every probe and engine runs on.

A point is a one-dimensional float64 numpy array whose layout is fixed by the
owning MetricSpaceDescriptor. Descriptors are frozen dataclasses, so they can
be compared, hashed and shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from core.errors import DimensionMismatchError, StructuralError

# Two points closer than this are treated as equal.
POINT_EQUALITY_TOL = 1e-12


class SpaceKind(Enum):
    REAL_LINE = "real_line"
    EUCLIDEAN = "euclidean"
    GRID_FUNCTION = "grid_function"
    SLOPE_INTERVAL = "slope_interval"
    PRODUCT = "product"


@dataclass(frozen=True)
class MetricSpaceDescriptor:
    """
    Describes a complete metric space by its kind and shape parameters.

    Use the classmethod constructors rather than the raw fields.
    """

    kind: SpaceKind
    dim: int = 1
    grid_size: int = 0
    domain: Tuple[float, float] = (0.0, 1.0)
    lo: float = 0.0
    hi: float = 0.0
    left: Optional["MetricSpaceDescriptor"] = None
    right: Optional["MetricSpaceDescriptor"] = None

    @classmethod
    def real_line(cls):
        return cls(SpaceKind.REAL_LINE)

    @classmethod
    def euclidean(cls, dim):
        if dim < 1:
            raise StructuralError(f"euclidean space needs dim >= 1, got {dim}")
        return cls(SpaceKind.EUCLIDEAN, dim=int(dim))

    @classmethod
    def grid_function(cls, grid_size, domain=(0.0, 1.0)):
        if grid_size < 2:
            raise StructuralError(f"grid function space needs grid_size >= 2, got {grid_size}")
        a, b = float(domain[0]), float(domain[1])
        if not b > a:
            raise StructuralError(f"grid domain must satisfy a < b, got ({a}, {b})")
        return cls(SpaceKind.GRID_FUNCTION, grid_size=int(grid_size), domain=(a, b))

    @classmethod
    def slope_interval(cls, lo, hi):
        if not hi > lo:
            raise StructuralError(f"slope interval must satisfy lo < hi, got [{lo}, {hi}]")
        return cls(SpaceKind.SLOPE_INTERVAL, lo=float(lo), hi=float(hi))

    @classmethod
    def product(cls, left, right):
        return cls(SpaceKind.PRODUCT, left=left, right=right)

    @property
    def size(self):
        """
        Returns the number of coordinates of a point of this space.
        """
        if self.kind in (SpaceKind.REAL_LINE, SpaceKind.SLOPE_INTERVAL):
            return 1
        if self.kind is SpaceKind.EUCLIDEAN:
            return self.dim
        if self.kind is SpaceKind.GRID_FUNCTION:
            return self.grid_size
        return self.left.size + self.right.size

    def describe(self):
        """
        Returns a JSON-friendly description of the space.
        """
        if self.kind is SpaceKind.EUCLIDEAN:
            return {"kind": self.kind.value, "dim": self.dim}
        if self.kind is SpaceKind.GRID_FUNCTION:
            return {"kind": self.kind.value, "grid_size": self.grid_size, "domain": list(self.domain)}
        if self.kind is SpaceKind.SLOPE_INTERVAL:
            return {"kind": self.kind.value, "lo": self.lo, "hi": self.hi}
        if self.kind is SpaceKind.PRODUCT:
            return {"kind": self.kind.value, "left": self.left.describe(), "right": self.right.describe()}
        return {"kind": self.kind.value}


def as_point(space, coords):
    """
    Converts coordinates into a point of the space, checking only the coordinate count.

    Scalars are accepted for one-coordinate spaces.

    Args:
        space (MetricSpaceDescriptor): The owning space.
        coords: Scalar, sequence or numpy array.

    Returns:
        numpy.ndarray: A float64 array of length space.size.
    """
    point = np.atleast_1d(np.asarray(coords, dtype=float))
    if point.ndim != 1 or point.shape[0] != space.size:
        raise DimensionMismatchError(space.kind.value, point.ravel().tolist(), space.size)
    return point


def validate_point(space, coords):
    """
    Converts coordinates into a point and checks membership of the space.

    Args:
        space (MetricSpaceDescriptor): The owning space.
        coords: Scalar, sequence or numpy array.

    Returns:
        numpy.ndarray: The validated point.

    Raises:
        StructuralError: If the point has the wrong size or lies outside a slope interval.
    """
    point = as_point(space, coords)
    if space.kind is SpaceKind.SLOPE_INTERVAL:
        slack = POINT_EQUALITY_TOL * max(1.0, abs(space.hi))
        if not space.lo - slack <= point[0] <= space.hi + slack:
            raise StructuralError(
                f"slope {point[0]!r} lies outside [{space.lo}, {space.hi}]"
            )
    return point


def distance(space, p, q):
    """
    Computes the metric of the space between two points.

    RealLine and SlopeInterval use the absolute difference, EuclideanVector the
    Euclidean norm, GridFunction the sup over nodes, Product the max of the
    component distances.

    Args:
        space (MetricSpaceDescriptor): The space.
        p: First point.
        q: Second point.

    Returns:
        float: The nonnegative distance.

    Raises:
        DimensionMismatchError: If either point does not fit the space.
    """
    p = as_point(space, p)
    q = as_point(space, q)
    return _distance(space, p, q)


def _distance(space, p, q):
    kind = space.kind
    if kind in (SpaceKind.REAL_LINE, SpaceKind.SLOPE_INTERVAL):
        return float(abs(p[0] - q[0]))
    if kind is SpaceKind.EUCLIDEAN:
        return float(np.linalg.norm(p - q))
    if kind is SpaceKind.GRID_FUNCTION:
        return float(np.max(np.abs(p - q)))
    k = space.left.size
    return max(_distance(space.left, p[:k], q[:k]), _distance(space.right, p[k:], q[k:]))


def product_distance(space, pq, pq_other):
    """
    Computes the max metric on a product space between two coordinate pairs.

    Args:
        space (MetricSpaceDescriptor): A Product descriptor.
        pq (tuple): (x, y) with x in space.left and y in space.right.
        pq_other (tuple): (x', y').

    Returns:
        float: max(d_X(x, x'), d_Y(y, y')).
    """
    if space.kind is not SpaceKind.PRODUCT:
        raise StructuralError(f"product_distance needs a product space, got '{space.kind.value}'")
    x, y = pq
    x_other, y_other = pq_other
    return max(distance(space.left, x, x_other), distance(space.right, y, y_other))


def pairwise_distances(space, points):
    """
    Computes the matrix of distances between every pair of stacked points.

    Args:
        space (MetricSpaceDescriptor): The space.
        points (numpy.ndarray): Array of shape (k, space.size).

    Returns:
        numpy.ndarray: Symmetric (k, k) distance matrix.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != space.size:
        raise DimensionMismatchError(space.kind.value, list(points.shape), space.size)
    return _pairwise(space, points)


def _pairwise(space, points):
    kind = space.kind
    if kind is SpaceKind.PRODUCT:
        k = space.left.size
        return np.maximum(_pairwise(space.left, points[:, :k]), _pairwise(space.right, points[:, k:]))
    diff = points[:, None, :] - points[None, :, :]
    if kind is SpaceKind.EUCLIDEAN:
        return np.sqrt(np.sum(diff * diff, axis=-1))
    return np.max(np.abs(diff), axis=-1)


def points_equal(space, p, q):
    return distance(space, p, q) < POINT_EQUALITY_TOL


def origin(space):
    """
    Returns the canonical reference point: zeros, or the midpoint of a slope interval.
    """
    if space.kind is SpaceKind.SLOPE_INTERVAL:
        return np.array([0.5 * (space.lo + space.hi)])
    if space.kind is SpaceKind.PRODUCT:
        return join(origin(space.left), origin(space.right))
    return np.zeros(space.size)


def grid_nodes(space):
    """
    Returns the uniformly spaced nodes of a grid-function space, endpoints included.
    """
    if space.kind is not SpaceKind.GRID_FUNCTION:
        raise StructuralError(f"grid nodes requested for '{space.kind.value}' space")
    return np.linspace(space.domain[0], space.domain[1], space.grid_size)


def grid_spacing(space):
    return (space.domain[1] - space.domain[0]) / (space.grid_size - 1)


def split(space, point):
    """
    Splits a product point into its (left, right) components.
    """
    if space.kind is not SpaceKind.PRODUCT:
        raise StructuralError(f"cannot split a point of a '{space.kind.value}' space")
    point = as_point(space, point)
    k = space.left.size
    return point[:k], point[k:]


def join(x, y):
    return np.concatenate([np.atleast_1d(x), np.atleast_1d(y)]).astype(float)


def clip_to_space(space, points):
    """
    Clips stacked points into a slope interval; other spaces are returned unchanged.
    """
    if space.kind is SpaceKind.SLOPE_INTERVAL:
        return np.clip(points, space.lo, space.hi)
    if space.kind is SpaceKind.PRODUCT:
        k = space.left.size
        return np.concatenate(
            [clip_to_space(space.left, points[..., :k]), clip_to_space(space.right, points[..., k:])],
            axis=-1,
        )
    return points

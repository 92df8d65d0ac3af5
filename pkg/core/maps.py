# core/maps.py

"""
Defines the map-family types shared by the probes and the engines.

MapSequence is the base system n -> f_n, FiberFamily the base-parametrized
fiber system (n, x) -> h_n^x, and SkewSystem couples the two into
F_n(x, y) = (f_n(x), h_n^x(y)). Families must be pure: evaluating the same
index on the same point always returns the same value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from core.errors import MapEvaluationError, StructuralError
from core.metric_core import MetricSpaceDescriptor, as_point, validate_point

# Slack allowed when comparing a declared contraction rate to a probed one.
DECLARED_RATE_SLACK = 1e-9


@dataclass(frozen=True)
class MapSequence:
    """
    A lazily evaluated sequence of self-maps f_1, f_2, ... of one space.

    Attributes:
        space (MetricSpaceDescriptor): The space the maps act on.
        family (Callable[[int], Callable]): Returns f_n for n >= 1.
        declared_mu (float, optional): User-asserted sup of Lip(f_n).
        name (str): Label used in logs and reports.
    """

    space: MetricSpaceDescriptor
    family: Callable[[int], Callable]
    declared_mu: Optional[float] = None
    name: str = "sequence"

    def __post_init__(self):
        if self.declared_mu is not None and not 0.0 <= self.declared_mu < 1.0:
            raise StructuralError(f"declared_mu must lie in [0, 1), got {self.declared_mu}")

    @classmethod
    def constant(cls, space, f, declared_mu=None, name="constant"):
        """
        Builds the stationary sequence f_n = f.
        """
        return cls(space, lambda n: f, declared_mu, name)

    def at(self, n):
        if n < 1:
            raise StructuralError(f"map index must be >= 1, got {n}")
        return self.family(n)

    def apply(self, n, x):
        """
        Evaluates f_n(x), wrapping failures with the index.

        Returns:
            numpy.ndarray: The image point.

        Raises:
            MapEvaluationError: If the map raises.
        """
        f = self.at(n)
        try:
            image = f(x)
        except Exception as exc:
            raise MapEvaluationError(n, "base", exc) from exc
        return as_point(self.space, image)

    def shift(self, k):
        """
        Returns the sequence i -> f_{k+i}.
        """
        if k < 0:
            raise StructuralError(f"shift must be >= 0, got {k}")
        family = self.family
        return MapSequence(self.space, lambda i: family(k + i), self.declared_mu, f"{self.name}+{k}")


@dataclass(frozen=True)
class FiberFamily:
    """
    A base-parametrized family of fiber self-maps y -> h_n^x(y).

    Attributes:
        base_space (MetricSpaceDescriptor): Space of the parameter x.
        fiber_space (MetricSpaceDescriptor): Space the maps act on.
        kernel (Callable[[int, ndarray, ndarray], ndarray]): Evaluates h_n^x(y).
        declared_lambda (float, optional): User-asserted sup of Lip(h_n^x).
        name (str): Label used in logs and reports.
    """

    base_space: MetricSpaceDescriptor
    fiber_space: MetricSpaceDescriptor
    kernel: Callable[[int, np.ndarray, np.ndarray], np.ndarray]
    declared_lambda: Optional[float] = None
    name: str = "fiber"

    def __post_init__(self):
        if self.declared_lambda is not None and not 0.0 <= self.declared_lambda < 1.0:
            raise StructuralError(f"declared_lambda must lie in [0, 1), got {self.declared_lambda}")

    def at(self, n, x):
        """
        Returns the fiber map h_n^x as a one-argument callable.
        """
        if n < 1:
            raise StructuralError(f"map index must be >= 1, got {n}")
        kernel = self.kernel
        return lambda y: kernel(n, x, y)

    def apply(self, n, x, y):
        try:
            image = self.kernel(n, x, y)
        except Exception as exc:
            raise MapEvaluationError(n, "fiber", exc) from exc
        return as_point(self.fiber_space, image)

    def shift(self, k):
        kernel = self.kernel
        return FiberFamily(
            self.base_space,
            self.fiber_space,
            lambda i, x, y: kernel(k + i, x, y),
            self.declared_lambda,
            f"{self.name}+{k}",
        )


@dataclass(frozen=True, eq=False)
class SkewSystem:
    """
    The skew product F_n(x, y) = (f_n(x), h_n^x(y)) with reference anchors.

    Attributes:
        base (MapSequence): The base sequence.
        fiber (FiberFamily): The fiber family over base.space.
        x0: Reference base point.
        y0: Reference fiber point.
    """

    base: MapSequence
    fiber: FiberFamily
    x0: np.ndarray
    y0: np.ndarray
    name: str = "skew"

    def __post_init__(self):
        if self.base.space != self.fiber.base_space:
            raise StructuralError(
                f"base space {self.base.space.describe()} differs from the fiber family's "
                f"base space {self.fiber.base_space.describe()}"
            )
        object.__setattr__(self, "x0", validate_point(self.base.space, self.x0))
        object.__setattr__(self, "y0", validate_point(self.fiber.fiber_space, self.y0))

    @property
    def base_space(self):
        return self.base.space

    @property
    def fiber_space(self):
        return self.fiber.fiber_space

    def shift(self, k):
        """
        Returns the system i -> F_{k+i} with the same anchors.
        """
        return SkewSystem(self.base.shift(k), self.fiber.shift(k), self.x0, self.y0, f"{self.name}+{k}")

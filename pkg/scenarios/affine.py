# scenarios/affine.py

"""
Affine sequences f_n(x) = a x + b_n with series oracles, and the affine skew demo.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from core.errors import ConfigError, DomainError
from core.maps import FiberFamily, MapSequence, SkewSystem
from core.metric_core import MetricSpaceDescriptor, distance
from scenarios.base import Converges, Scenario

# Partial summation stops once the tail bound drops below this.
SERIES_TAIL_TOL = 1e-14
MAX_SERIES_TERMS = 100000


@dataclass(frozen=True)
class CoefficientSequence:
    """
    A bounded sequence n -> b_n parsed from a `kind:args` spec.
    """

    spec: str
    term: Callable[[int], float]
    sup: float


def parse_b_spec(spec):
    """
    Parses a coefficient sequence spec.

    Supported kinds: `const:c` (b_n = c), `geom:r` (b_n = r^n, |r| <= 1),
    `periodic:v1,v2,...` (cycles through the values), `sin:amp`
    (b_n = amp sin n) and `harmonic:c` (b_n = c / n).

    Returns:
        CoefficientSequence: The sequence with a bound on |b_n|.

    Raises:
        ConfigError: If the spec cannot be parsed.
        DomainError: If the spec describes an unbounded sequence.
    """
    kind, _, args = spec.partition(":")
    kind = kind.strip()
    try:
        if kind == "periodic":
            values = [float(v) for v in args.split(",") if v.strip()]
            if not values:
                raise ValueError("no values")
        else:
            value = float(args)
    except ValueError as exc:
        raise ConfigError(f"cannot parse coefficient spec '{spec}': {exc}") from exc

    if kind == "const":
        return CoefficientSequence(spec, lambda n: value, abs(value))
    if kind == "geom":
        if abs(value) > 1.0:
            raise DomainError(f"coefficient spec '{spec}' is unbounded: |r| = {abs(value)} > 1")
        return CoefficientSequence(spec, lambda n: value ** n, abs(value))
    if kind == "periodic":
        return CoefficientSequence(spec, lambda n: values[(n - 1) % len(values)], max(abs(v) for v in values))
    if kind == "sin":
        return CoefficientSequence(spec, lambda n: value * np.sin(n), abs(value))
    if kind == "harmonic":
        return CoefficientSequence(spec, lambda n: value / n, abs(value))
    raise ConfigError(f"unknown coefficient kind '{kind}' in '{spec}'; expected const, geom, periodic, sin or harmonic")


def affine_series_limit(a, b):
    """
    Sums sum_{i>=1} a^(i-1) b_i until the tail bound |a|^n sup|b| / (1 - |a|) is below 1e-14.

    Args:
        a (float): Slope with |a| < 1.
        b (CoefficientSequence): The coefficients.

    Returns:
        float: The limit of f_1 o ... o f_n(x).
    """
    total, weight = 0.0, 1.0
    for i in range(1, MAX_SERIES_TERMS + 1):
        total += weight * b.term(i)
        weight *= a
        if abs(weight) * b.sup / (1.0 - abs(a)) < SERIES_TAIL_TOL:
            return total
    return total


def build_affine_scenario(a=0.5, b="const:1"):
    """
    Builds f_n(x) = a x + b_n on the real line with its series oracle.

    Args:
        a (float): Slope, |a| < 1.
        b (str): Coefficient spec, see parse_b_spec.

    Returns:
        Scenario: A Converges scenario whose limit is the series value.
    """
    a = float(a)
    if not abs(a) < 1.0:
        raise DomainError(f"affine slope must satisfy |a| < 1, got a={a}")
    coefficients = parse_b_spec(b)
    space = MetricSpaceDescriptor.real_line()
    seq = MapSequence(
        space,
        lambda n: (lambda x: a * np.asarray(x, dtype=float) + coefficients.term(n)),
        name=f"affine(a={a}, b={coefficients.spec})",
    )
    limit = affine_series_limit(a, coefficients)

    def oracle(value):
        return {"reference": [limit], "error": distance(space, value, limit)}

    return Scenario(
        name="affine",
        system=seq,
        expected=Converges(np.array([limit])),
        start=np.zeros(1),
        x0=np.zeros(1),
        oracle=oracle,
        description="f_n(x) = a x + b_n with the series limit sum a^(i-1) b_i",
        params={"a": a, "b": coefficients.spec},
    )


def build_affine_skew_demo():
    """
    Builds f_n(x) = x/2 with h_n^x(y) = y/2 + x, whose limit from every start is (0, 0).
    """
    space = MetricSpaceDescriptor.real_line()
    base = MapSequence.constant(space, lambda x: 0.5 * np.asarray(x, dtype=float), name="halving")
    fiber = FiberFamily(space, space, lambda n, x, y: 0.5 * np.asarray(y, dtype=float) + x, name="affine-fiber")
    system = SkewSystem(base, fiber, x0=np.ones(1), y0=np.zeros(1), name="affine-skew")

    def oracle(value):
        x, y = value
        return {"reference": [[0.0], [0.0]], "error": max(distance(space, x, 0.0), distance(space, y, 0.0))}

    return Scenario(
        name="affine-skew",
        system=system,
        expected=Converges((np.zeros(1), np.zeros(1))),
        start=(np.ones(1), np.zeros(1)),
        oracle=oracle,
        description="f_n(x) = x/2, h_n^x(y) = y/2 + x: certified fiber contraction to (0, 0)",
    )

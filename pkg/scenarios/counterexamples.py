# scenarios/counterexamples.py

"""
Packages the three systems showing that each hypothesis of the non-stationary
fiber contraction theorem is needed.
"""

import numpy as np

from core.maps import FiberFamily, MapSequence, SkewSystem
from core.metric_core import MetricSpaceDescriptor
from scenarios.base import Converges, Diverges, Scenario, SplitLimit

# 2^-n underflows to zero in double precision past n = 1074; stay well clear.
HALVING_MAX_N = 900


def _power_of_three(n):
    with np.errstate(over="ignore"):
        return np.float64(3.0) ** n


def remark_partial_sum(n):
    """
    Returns f_1 o ... o f_n(0) = sum_{i=1}^n 3^i / 2^(i-1) for f_n(x) = x/2 + 3^n.
    """
    return float(sum(3.0 ** i / 2.0 ** (i - 1) for i in range(1, n + 1)))


def _halving(space):
    return MapSequence.constant(space, lambda x: 0.5 * np.asarray(x, dtype=float), name="halving")


def build_remark_counterexample():
    """
    Builds f_n(x) = x/2 + 3^n: every map contracts by 1/2 but d(f_n(0), 0) is unbounded.
    """
    space = MetricSpaceDescriptor.real_line()
    seq = MapSequence(space, lambda n: (lambda x: 0.5 * np.asarray(x, dtype=float) + _power_of_three(n)),
                      name="remark1")
    return Scenario(
        name="remark1",
        system=seq,
        expected=Diverges(),
        start=np.zeros(1),
        x0=np.zeros(1),
        description="f_n(x) = x/2 + 3^n: contractions whose orbit of 0 is unbounded",
        notes={"partial_sums": [remark_partial_sum(n) for n in (1, 2, 3)]},
    )


def build_condition2_counterexample():
    """
    Builds f_n(x) = x/2 with h_n^x(y) = y/2 + 3^n: the base converges while the fiber diverges.
    """
    space = MetricSpaceDescriptor.real_line()
    fiber = FiberFamily(space, space, lambda n, x, y: 0.5 * np.asarray(y, dtype=float) + _power_of_three(n),
                        name="cond2-fiber")
    system = SkewSystem(_halving(space), fiber, x0=np.ones(1), y0=np.zeros(1), name="cond2")
    return Scenario(
        name="cond2",
        system=system,
        expected=Diverges(),
        start=(np.zeros(1), np.zeros(1)),
        description="h_n^x(y) = y/2 + 3^n over x/2: fiber images of a bounded set are unbounded",
    )


def _jump_kernel(n, x, y):
    y = np.asarray(y, dtype=float)
    if x[0] == 0.0:
        return np.zeros_like(y)
    return 0.5 * (y - 0.25) + 0.25


def build_condition3_counterexample():
    """
    Builds h_n^x(y) = 0 at x = 0 and (y - 1/4)/2 + 1/4 elsewhere, over f_n(x) = x/2.

    The fiber maps jump at x = 0, so runs from x = 0 and from x != 0 settle on
    different fiber limits.
    """
    space = MetricSpaceDescriptor.real_line()
    fiber = FiberFamily(space, space, _jump_kernel, name="cond3-fiber")
    system = SkewSystem(_halving(space), fiber, x0=np.zeros(1), y0=np.zeros(1), name="cond3")
    start_a = (np.zeros(1), np.ones(1))
    start_b = (np.ones(1), np.ones(1))
    return Scenario(
        name="cond3",
        system=system,
        expected=SplitLimit(
            limit_a=(np.zeros(1), np.zeros(1)),
            limit_b=(np.zeros(1), np.array([0.25])),
            start_a=start_a,
            start_b=start_b,
        ),
        start=start_b,
        description="fiber maps jumping at x = 0: limits (0, 0) and (0, 1/4) depend on the start",
        max_n=HALVING_MAX_N,
    )

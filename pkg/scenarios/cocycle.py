# scenarios/cocycle.py

"""
Projective action of positive 2x2 matrix sequences on slopes.

A matrix A = [[a, b], [c, d]] sends the direction (1, s) to (a + b s, c + d s),
so it acts on slopes by the Moebius map s -> (c + d s) / (a + b s). Positive
matrices map the positive cone strictly inside itself, which makes these maps
uniform contractions on a compact slope interval.
"""

import logging

import numpy as np

from core.errors import ConfigError, DomainError
from core.maps import MapSequence
from core.metric_core import MetricSpaceDescriptor, distance
from probes.lipschitz_probe import SamplingPlan, estimate_sequence_lipschitz
from scenarios.base import Converges, Scenario

logger = logging.getLogger(__name__)

CAT_MAP = "2,1,1,1"
SLOPE_CLAMP = (1e-6, 1e6)
ORACLE_LENGTH = 60
RATE_SAMPLES = 64


def parse_matrices(spec):
    """
    Parses `a,b,c,d;a,b,c,d;...` into a list of 2x2 integer matrices, cycled by the scenario.

    Raises:
        ConfigError: If an entry is not an integer or a matrix has the wrong size.
    """
    matrices = []
    for chunk in spec.split(";"):
        entries = [e.strip() for e in chunk.split(",") if e.strip()]
        if len(entries) != 4:
            raise ConfigError(f"matrix '{chunk}' needs 4 entries a,b,c,d, got {len(entries)}")
        try:
            matrices.append(np.array([int(e) for e in entries], dtype=float).reshape(2, 2))
        except ValueError as exc:
            raise ConfigError(f"matrix '{chunk}' has a non-integer entry: {exc}") from exc
    return matrices


def slope_map(matrix):
    a, b = matrix[0]
    c, d = matrix[1]
    return lambda s: (c + d * np.asarray(s, dtype=float)) / (a + b * np.asarray(s, dtype=float))


def invariant_interval(matrices):
    """
    Returns [lo, hi] containing c/a and d/b of every matrix, clamped to [1e-6, 1e6].

    Each Moebius map is monotone on the positive slopes, so it sends (0, inf)
    into the interval between c/a and d/b.
    """
    ends = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for m in matrices:
            ends.extend([m[1, 0] / m[0, 0], m[1, 1] / m[0, 1]])
    ends = [e for e in ends if not np.isnan(e)]
    if not ends:
        raise DomainError("cocycle matrices leave no slope interval invariant")
    lo = float(np.clip(min(ends), *SLOPE_CLAMP))
    hi = float(np.clip(max(ends), *SLOPE_CLAMP))
    if hi - lo < SLOPE_CLAMP[0]:
        # Rank-one cycles collapse the interval; any enclosing interval stays invariant.
        lo, hi = 0.5 * lo, 2.0 * hi
    return lo, hi


def slope_rate_bound(matrices, lo):
    """
    Returns sup over s >= lo of |f'(s)| = |ad - bc| / (a + b s)^2, attained at s = lo.
    """
    return max(abs(np.linalg.det(m)) / (m[0, 0] + m[0, 1] * lo) ** 2 for m in matrices)


def product_direction(matrices, n=ORACLE_LENGTH):
    """
    Returns the slope of A_1 A_2 ... A_n (1, 1), renormalizing after every factor.
    """
    vector = np.ones(2)
    for k in range(n, 0, -1):
        vector = matrices[(k - 1) % len(matrices)] @ vector
        vector /= np.linalg.norm(vector)
    return float(vector[1] / vector[0])


def build_projective_cocycle_demo(matrices=CAT_MAP):
    """
    Builds the slope sequence f_n(s) = (c_n + d_n s) / (a_n + b_n s) for A_n cycling through `matrices`.

    Args:
        matrices (str or list): `a,b,c,d;...` spec or a list of 2x2 arrays.

    Returns:
        Scenario: A Converges scenario on a SlopeInterval with the product-direction oracle.

    Raises:
        DomainError: If an entry is negative, the sampled rate is not below 1, or an entry is zero.
    """
    spec = matrices if isinstance(matrices, str) else ";".join(
        ",".join(str(int(e)) for e in np.ravel(m)) for m in matrices
    )
    cycle = parse_matrices(spec) if isinstance(matrices, str) else [np.asarray(m, dtype=float) for m in matrices]
    if any(np.any(m < 0) for m in cycle):
        raise DomainError(f"cocycle matrices must have nonnegative entries, got '{spec}'")

    lo, hi = invariant_interval(cycle)
    space = MetricSpaceDescriptor.slope_interval(lo, hi)
    maps = [slope_map(m) for m in cycle]

    def family(n):
        return maps[(n - 1) % len(maps)]

    plan = SamplingPlan(count=RATE_SAMPLES, center=[0.5 * (lo + hi)], radius=0.5 * (hi - lo), kind="grid")
    rate = estimate_sequence_lipschitz(MapSequence(space, family), plan, n_probe=len(maps)).inflated
    if rate >= 1.0:
        raise DomainError(f"cocycle '{spec}' does not contract slopes: sampled mu = {rate:.6g}")
    if any(np.any(m == 0) for m in cycle):
        raise DomainError(f"cocycle matrices must have strictly positive entries, got '{spec}'")
    mu = slope_rate_bound(cycle, lo)
    if mu >= 1.0:
        raise DomainError(f"cocycle '{spec}' does not contract slopes on [{lo:.6g}, {hi:.6g}]: mu = {mu:.6g}")
    seq = MapSequence(space, family, declared_mu=mu, name=f"cocycle({spec})")

    limit = product_direction(cycle)
    logger.info("cocycle %s: slope interval [%.6g, %.6g], product slope %.12g", spec, lo, hi, limit)

    def oracle(value):
        return {"reference": [limit], "error": distance(space, value, limit), "product_length": ORACLE_LENGTH}

    midpoint = np.array([0.5 * (lo + hi)])
    return Scenario(
        name="cocycle",
        system=seq,
        expected=Converges(np.array([limit])),
        start=midpoint,
        x0=midpoint,
        oracle=oracle,
        description="slopes under positive 2x2 matrix products converge to the product direction",
        params={"matrices": spec},
        notes={"slope_interval": [lo, hi], "sampled_mu": rate, "mu": mu},
    )

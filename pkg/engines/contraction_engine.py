# engines/contraction_engine.py

"""
Implements stationary and non-stationary contraction iteration.

Stationary runs iterate one map and stop on the a-posteriori bound.
Non-stationary runs evaluate the composed orbit f_1 o ... o f_n(x) and stop
on the a-priori certificate mu^n M / (1 - mu) + mu^n d(x, x0), where M is the
observed bound on d(f_n(x0), x0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from core.errors import DomainError, NonConvergenceError, RefusalError, StructuralError
from core.maps import MapSequence
from core.metric_core import MetricSpaceDescriptor, as_point, distance, validate_point
from probes.lipschitz_probe import (
    DIVERGENCE_THRESHOLD, SamplingPlan, estimate_lipschitz, estimate_sequence_lipschitz,
    probe_base_boundedness,
)
from utils.numeric_helpers import format_point, point_to_list

logger = logging.getLogger(__name__)

__all__ = [
    "MapSequence", "ContractionCertificate", "TraceRow", "IterationTrace", "FixedPointResult",
    "NonstationaryPolicy", "NonstatResult", "iterate_stationary", "compose_eval", "apriori_bound",
    "composed_orbit_bound", "iterate_nonstationary", "estimate_rate", "orbit_trace",
]


@dataclass(frozen=True)
class ContractionCertificate:
    """
    The machine-checkable residue of the non-stationary contraction argument.

    Attributes:
        mu (float): Contraction rate in [0, 1).
        M (float): Empirical bound on d(f_n(x0), x0).
        x0: The reference point.
        n (int): Number of composed maps.
        bound (float): mu^n M / (1 - mu).
        start_term (float): mu^n d(x, x0) for the start actually used.
    """

    mu: float
    M: float
    x0: np.ndarray
    n: int
    bound: float
    start_term: float = 0.0
    empirical_M: bool = True

    @classmethod
    def issue(cls, mu, M, x0, n, start_distance=0.0, empirical_M=True):
        return cls(mu, M, x0, n, apriori_bound(mu, M, n), mu ** n * start_distance, empirical_M)

    @property
    def total(self):
        return self.bound + self.start_term

    def to_dict(self):
        return {
            "mu": self.mu, "M": self.M, "M_kind": "empirical" if self.empirical_M else "declared",
            "x0": point_to_list(self.x0), "n": self.n, "bound": self.bound,
            "start_term": self.start_term, "total": self.total,
        }


@dataclass(frozen=True)
class TraceRow:
    n: int
    point: np.ndarray
    step_distance: float
    bound: Optional[float] = None


@dataclass
class IterationTrace:
    """
    Per-step record of an orbit; every row stores the full point for replay.
    """

    rows: List[TraceRow] = field(default_factory=list)

    def append(self, n, point, step_distance, bound=None):
        if self.rows and n <= self.rows[-1].n:
            raise StructuralError(f"trace rows must increase in n, got {n} after {self.rows[-1].n}")
        self.rows.append(TraceRow(n, np.array(point, dtype=float), float(step_distance), bound))

    def __len__(self):
        return len(self.rows)

    def columns(self):
        width = len(self.rows[0].point) if self.rows else 1
        return ["n"] + [f"coord_{i}" for i in range(width)] + ["step_distance", "bound"]

    def records(self):
        """
        Yields flat rows matching columns(): n, coordinates..., step_distance, bound.
        """
        for row in self.rows:
            yield [row.n, *point_to_list(row.point), row.step_distance, row.bound]


@dataclass
class FixedPointResult:
    point: np.ndarray
    iterations: int
    trace: IterationTrace
    residual: float
    mu_hat: Optional[float] = None


@dataclass(frozen=True)
class NonstationaryPolicy:
    """
    Stopping and probing parameters for iterate_nonstationary.

    Attributes:
        tol (float): Target bound on d(x_n, x*).
        max_n (int): Largest composition length tried.
        probe_horizon (int): Horizon of the boundedness probe.
        n_probe (int): Number of maps probed for mu.
        seed (int): Sampling seed.
        sample_radius (float): Radius of the Lipschitz sampling box around x0.
    """

    tol: float = 1e-10
    max_n: int = 1000
    probe_horizon: int = 200
    n_probe: int = 50
    seed: int = 0
    sample_radius: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise StructuralError(f"tol must be > 0, got {self.tol}")
        if self.max_n < 1:
            raise StructuralError(f"max_n must be >= 1, got {self.max_n}")


@dataclass
class NonstatResult:
    point: np.ndarray
    n_used: int
    certificate: ContractionCertificate
    trace: IterationTrace
    probes: list = field(default_factory=list)


def iterate_stationary(f, x, tol, max_iter, space=None, mu_hat=None, plan=None):
    """
    Iterates a single map until the a-posteriori error bound falls below tol.

    When a sampled rate mu_hat < 1 is available the run stops at the least n
    with d(x_n, x_{n-1}) <= tol (1 - mu_hat) / mu_hat, which guarantees
    d(x_n, x*) <= tol; otherwise it stops once d(x_n, x_{n-1}) <= tol.

    Args:
        f (Callable): The self-map.
        x: Starting point.
        tol (float): Error target, > 0.
        max_iter (int): Iteration budget, >= 1.
        space (MetricSpaceDescriptor): The space; defaults to the real line.
        mu_hat (float, optional): Known rate; sampled around x when omitted.
        plan (SamplingPlan, optional): Plan for sampling mu_hat.

    Returns:
        FixedPointResult: Final point, iteration count, trace and residual d(f(x*), x*).

    Raises:
        NonConvergenceError: If max_iter is reached first.
    """
    space = space or MetricSpaceDescriptor.real_line()
    if not tol > 0:
        raise StructuralError(f"tol must be > 0, got {tol}")
    if max_iter < 1:
        raise StructuralError(f"max_iter must be >= 1, got {max_iter}")
    current = validate_point(space, x)

    if mu_hat is None:
        radius = max(1.0, float(np.max(np.abs(current))))
        plan = plan or SamplingPlan(center=current, radius=radius)
        mu_hat = estimate_lipschitz(f, space, plan).inflated
    if mu_hat < 1.0:
        threshold = np.inf if mu_hat == 0.0 else tol * (1.0 - mu_hat) / mu_hat
    else:
        threshold = tol

    trace = IterationTrace()
    for n in range(1, max_iter + 1):
        following = as_point(space, f(current))
        step = distance(space, following, current)
        bound = mu_hat * step / (1.0 - mu_hat) if mu_hat < 1.0 else None
        trace.append(n, following, step, bound)
        current = following
        if step <= threshold:
            residual = distance(space, as_point(space, f(current)), current)
            logger.info("stationary run converged at n=%d to %s (residual %.3g)", n, format_point(current), residual)
            return FixedPointResult(current, n, trace, residual, mu_hat)

    raise NonConvergenceError(f"stationary iteration did not reach tol={tol} in {max_iter} steps", trace)


def compose_eval(seq, n, x):
    """
    Evaluates f_1 o ... o f_n(x), innermost map first.

    Args:
        seq (MapSequence): The sequence.
        n (int): Number of maps composed, >= 1.
        x: The point.

    Returns:
        numpy.ndarray: The composed image; exactly n map applications.
    """
    if n < 1:
        raise StructuralError(f"composition length must be >= 1, got {n}")
    z = validate_point(seq.space, x)
    for k in range(n, 0, -1):
        z = seq.apply(k, z)
    return z


def apriori_bound(mu, M, n):
    """
    Returns the a-priori tail bound mu^n M / (1 - mu).

    Raises:
        DomainError: If mu lies outside [0, 1).
    """
    if not 0.0 <= mu < 1.0:
        raise DomainError(f"a-priori bound needs 0 <= mu < 1, got mu={mu}")
    if M < 0 or n < 0:
        raise StructuralError(f"a-priori bound needs M >= 0 and n >= 0, got M={M}, n={n}")
    return mu ** n * M / (1.0 - mu)


def composed_orbit_bound(mu, M):
    """
    Bounds d(f_k o ... o f_l(x0), x0) for every k <= l by M / (1 - mu).
    """
    return apriori_bound(mu, M, 0)


def estimate_rate(seq, x0, policy):
    """
    Returns (mu, estimate): the declared rate, or the sampled sup of Lip(f_n) inflated by 1%.
    """
    plan = SamplingPlan(seed=policy.seed, center=x0, radius=policy.sample_radius)
    # Raises StructuralError when a probed map exceeds the declared rate.
    estimate = estimate_sequence_lipschitz(seq, plan, policy.n_probe)
    if seq.declared_mu is not None:
        return seq.declared_mu, estimate
    return estimate.inflated, estimate


def iterate_nonstationary(seq, x0, x, policy=None):
    """
    Runs the certified non-stationary iteration x_n = f_1 o ... o f_n(x).

    The run probes mu and the boundedness of d(f_n(x0), x0), then returns the
    composed orbit at the least n with mu^n M / (1 - mu) + mu^n d(x, x0) <= tol.
    Orbits are recomputed from scratch for every n because the new map enters
    the innermost position.

    Args:
        seq (MapSequence): The base sequence.
        x0: Reference point for the boundedness hypothesis.
        x: Starting point.
        policy (NonstationaryPolicy): Stopping and probing parameters.

    Returns:
        NonstatResult: The certified point, n_used, certificate and trace.

    Raises:
        DomainError: If mu >= 1.
        RefusalError: If the boundedness probe does not pass.
        NonConvergenceError: If the certificate needs more than max_n maps.
    """
    policy = policy or NonstationaryPolicy()
    x0 = validate_point(seq.space, x0)
    x = validate_point(seq.space, x)

    # Boundedness first: rates sampled on a diverging family lose all precision.
    report = probe_base_boundedness(seq, x0, policy.probe_horizon)
    if not report.passed:
        raise RefusalError([report.condition.label], [report])

    mu, _ = estimate_rate(seq, x0, policy)
    if mu >= 1.0:
        raise DomainError(f"{seq.name}: contraction rate mu={mu:.6g} is not below 1")
    M = report.bound
    start_distance = distance(seq.space, x, x0)

    trace = IterationTrace()
    previous = x
    for n in range(1, policy.max_n + 1):
        point = compose_eval(seq, n, x)
        certificate = ContractionCertificate.issue(mu, M, x0, n, start_distance)
        trace.append(n, point, distance(seq.space, point, previous), certificate.total)
        previous = point
        logger.debug("%s: n=%d bound=%.3g point=%s", seq.name, n, certificate.total, format_point(point))
        if certificate.total <= policy.tol:
            logger.info("%s: certified at n=%d (mu=%.4g, M=%.4g, bound=%.3g)", seq.name, n, mu, M, certificate.total)
            return NonstatResult(point, n, certificate, trace, [report])

    raise NonConvergenceError(
        f"{seq.name}: certificate needs more than max_n={policy.max_n} maps (mu={mu:.6g}, M={M:.6g})", trace
    )


def orbit_trace(seq, x, n_max, divergence=DIVERGENCE_THRESHOLD):
    """
    Computes the uncertified composed orbit for n = 1..n_max.

    Stops early once the orbit leaves the ball of radius `divergence` around x.

    Returns:
        IterationTrace: Rows without bounds.
    """
    x = validate_point(seq.space, x)
    trace = IterationTrace()
    previous = x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            point = compose_eval(seq, n, x)
            trace.append(n, point, distance(seq.space, point, previous))
            previous = point
            reach = distance(seq.space, point, x)
            if not np.isfinite(reach) or reach > divergence:
                logger.info("%s: raw orbit diverged at n=%d", seq.name, n)
                break
    return trace

# engines/fiber_engine.py

"""
Implements stationary and non-stationary fiber contraction over skew products.

The base coordinate of a non-stationary run is certified by the contraction
engine's a-priori bound. The fiber coordinate has no explicit rate, so the
run stops once the last `stability_window` fiber values agree within tol and
the result is labeled "certified base / heuristic fiber". The diagnostics
functions recompute the A/B/C quantities of the Cauchy argument on concrete
orbits and check the inequalities that link them.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from core.errors import DomainError, NonConvergenceError, RefusalError, StructuralError
from core.maps import FiberFamily, SkewSystem
from core.metric_core import (
    MetricSpaceDescriptor, as_point, clip_to_space, distance, join, pairwise_distances,
    validate_point,
)
from engines.contraction_engine import (
    ContractionCertificate, IterationTrace, NonstationaryPolicy, apriori_bound, compose_eval,
    composed_orbit_bound, estimate_rate,
)
from probes.lipschitz_probe import (
    DEFAULT_DELTAS, DIVERGENCE_THRESHOLD, Condition, SamplingPlan, build_equicontinuity_pairs,
    estimate_fiber_lipschitz, estimate_lipschitz, estimate_orbit_lipschitz, probe_base_boundedness,
    probe_equicontinuity, probe_fiber_boundedness, sample_region, unit_direction,
)
from utils.numeric_helpers import format_point, point_to_list

logger = logging.getLogger(__name__)

__all__ = [
    "FiberFamily", "SkewSystem", "FiberPolicy", "SkewCertification", "ConvergencePlan", "FiberTrace",
    "FiberResult", "StationaryFiberResult", "DiagnosticTable", "skew_apply", "skew_compose_eval",
    "projected_coordinate", "iterate_fiber_stationary", "certify_skew_system",
    "iterate_fiber_nonstationary", "raw_skew_orbit", "build_convergence_plan",
    "convergence_diagnostics", "start_independence_diagnostics",
]

FIBER_LABEL = "certified base / heuristic fiber"
# Relative slack for comparing quantities that are equal in exact arithmetic.
INEQUALITY_SLACK = 1e-12
MAX_PLAN_INDEX = 100000


@dataclass(frozen=True)
class FiberPolicy:
    """
    Stopping and probing parameters for non-stationary fiber runs.

    Attributes:
        tol (float): Base certificate target and fiber stability tolerance.
        max_n (int): Largest composition length tried.
        stability_window (int): Number of trailing fiber values that must agree.
        probe_horizon (int): Horizon of the boundedness probes.
        n_probe (int): Indices probed for rates and equicontinuity.
        seed (int): Sampling seed.
        sample_count (int): Random points per sampled set.
        fiber_radius (float): Minimum fiber radius of the probed region.
        perturbation (float): Start offset of the verification run, as a fraction of the orbit diameter.
        deltas (tuple): Equicontinuity delta buckets.
    """

    tol: float = 1e-10
    max_n: int = 1000
    stability_window: int = 10
    probe_horizon: int = 200
    n_probe: int = 20
    seed: int = 0
    sample_count: int = 8
    fiber_radius: float = 1.0
    perturbation: float = 0.1
    deltas: tuple = DEFAULT_DELTAS

    def __post_init__(self):
        if not self.tol > 0:
            raise StructuralError(f"tol must be > 0, got {self.tol}")
        if self.max_n < 1:
            raise StructuralError(f"max_n must be >= 1, got {self.max_n}")
        if self.stability_window < 2:
            raise StructuralError(f"stability_window must be >= 2, got {self.stability_window}")

    def base_policy(self):
        return NonstationaryPolicy(
            tol=self.tol, max_n=self.max_n, probe_horizon=self.probe_horizon,
            n_probe=self.n_probe, seed=self.seed,
        )


@dataclass
class SkewCertification:
    """
    The probed constants of a skew system: mu, M, lambda, S and the reports behind them.
    """

    mu: float
    M: float
    lam: float
    S: float
    base_radius: float
    fiber_radius: float
    reports: list = field(default_factory=list)

    def base_bound(self, n, start_distance=0.0):
        return apriori_bound(self.mu, self.M, n) + self.mu ** n * start_distance

    def to_dict(self):
        return {
            "mu": self.mu, "M": self.M, "lambda": self.lam, "S": self.S,
            "base_radius": self.base_radius, "fiber_radius": self.fiber_radius,
            "reports": [r.to_dict() for r in self.reports],
        }


@dataclass(frozen=True)
class ConvergencePlan:
    """
    The proof's existential choices turned into numbers.

    Attributes:
        epsilon (float): Target fiber accuracy.
        N0 (int): Least index with 2 lambda^(N0-1) L < epsilon.
        N1 (int): Least index with mu^N1 M < delta.
        delta (float): Base distance below which fiber maps move less than epsilon.
        L (float): S / (1 - lambda), the radius of the fiber orbits around y0.
        derivation_log (str): How each value was chosen.
        lam, mu, M (float): The rates and composed-orbit bound used.
    """

    epsilon: float
    N0: int
    N1: int
    delta: float
    L: float
    derivation_log: str
    lam: float
    mu: float
    M: float

    def check(self):
        """
        Raises StructuralError when either defining inequality fails.
        """
        if not 2.0 * self.lam ** (self.N0 - 1) * self.L < self.epsilon:
            raise StructuralError(
                f"plan violates 2 lambda^(N0-1) L < epsilon: N0={self.N0}, lambda={self.lam}, L={self.L}"
            )
        if not self.mu ** self.N1 * self.M < self.delta:
            raise StructuralError(
                f"plan violates mu^N1 M < delta: N1={self.N1}, mu={self.mu}, M={self.M}, delta={self.delta}"
            )

    def to_dict(self):
        return {
            "epsilon": self.epsilon, "N0": self.N0, "N1": self.N1, "delta": self.delta, "L": self.L,
            "lambda": self.lam, "mu": self.mu, "M": self.M, "derivation_log": self.derivation_log,
        }


@dataclass(frozen=True)
class FiberTraceRow:
    n: int
    base: np.ndarray
    fiber: np.ndarray
    base_bound: Optional[float]
    fiber_step: float


@dataclass
class FiberTrace:
    """
    Per-step record of a skew orbit: base point, fiber point, base bound, fiber step.
    """

    rows: List[FiberTraceRow] = field(default_factory=list)

    def append(self, n, base, fiber, base_bound, fiber_step):
        self.rows.append(
            FiberTraceRow(n, np.array(base, dtype=float), np.array(fiber, dtype=float), base_bound, float(fiber_step))
        )

    def __len__(self):
        return len(self.rows)

    def columns(self):
        nb = len(self.rows[0].base) if self.rows else 1
        nf = len(self.rows[0].fiber) if self.rows else 1
        return (["n"] + [f"base_{i}" for i in range(nb)] + [f"fiber_{i}" for i in range(nf)]
                + ["base_bound", "fiber_step"])

    def records(self):
        for row in self.rows:
            yield [row.n, *point_to_list(row.base), *point_to_list(row.fiber), row.base_bound, row.fiber_step]


@dataclass
class FiberResult:
    pair: tuple
    n_used: int
    base_certificate: ContractionCertificate
    diagnostics: Dict[str, object]
    trace: FiberTrace
    label: str = FIBER_LABEL


@dataclass
class StationaryFiberResult:
    pair: tuple
    iterations: int
    residual: float
    trace: FiberTrace
    mu_hat: float
    lambda_hat: float


@dataclass
class DiagnosticTable:
    """
    Per-index proof quantities with a pass flag for every inequality.
    """

    rows: List[dict]
    plan: ConvergencePlan
    m: int
    n: int

    @property
    def holds(self):
        return all(all(row["inequalities"].values()) for row in self.rows)

    def failures(self):
        return [(row["j"], name) for row in self.rows for name, ok in row["inequalities"].items() if not ok]

    def to_dict(self):
        return {"m": self.m, "n": self.n, "plan": self.plan.to_dict(), "holds": self.holds, "rows": self.rows}


def skew_apply(system, n, p):
    """
    Applies F_n(x, y) = (f_n(x), h_n^x(y)).

    Args:
        system (SkewSystem): The skew system.
        n (int): Map index, >= 1.
        p (tuple): The pair (x, y).

    Returns:
        tuple: (f_n(x), h_n^x(y)).
    """
    x, y = p
    return system.base.apply(n, x), system.fiber.apply(n, x, y)


def skew_compose_eval(system, n, p):
    """
    Evaluates F_1 o ... o F_n(x, y), innermost map first.
    """
    if n < 1:
        raise StructuralError(f"composition length must be >= 1, got {n}")
    z = (validate_point(system.base_space, p[0]), validate_point(system.fiber_space, p[1]))
    for k in range(n, 0, -1):
        z = skew_apply(system, k, z)
    return z


def _base_tail(system, k, n, x):
    # f_{k+1} o ... o f_n(x); the empty composition is x itself.
    if n <= k:
        return validate_point(system.base_space, x)
    return compose_eval(system.base.shift(k), n - k, x)


def projected_coordinate(system, k, n, x, y):
    """
    Evaluates the nested fiber chain h_k^{f_{k+1}...f_n x} o ... o h_n^x(y).

    Every base parameter is recomputed from x by its own composition, so the
    result does not share an arithmetic path with skew_compose_eval.

    Args:
        system (SkewSystem): The skew system.
        k (int): Outermost index, 1 <= k <= n.
        n (int): Innermost index.
        x, y: The start pair.

    Returns:
        numpy.ndarray: The fiber coordinate of F_k o ... o F_n(x, y).
    """
    if not 1 <= k <= n:
        raise StructuralError(f"projected coordinate needs 1 <= k <= n, got k={k}, n={n}")
    z = validate_point(system.fiber_space, y)
    for i in range(n, k - 1, -1):
        z = system.fiber.apply(i, _base_tail(system, i, n, x), z)
    return z


def iterate_fiber_stationary(f, h, p, tol, max_iter, base_space=None, fiber_space=None,
                             mu_hat=None, lambda_hat=None, seed=0):
    """
    Iterates the single skew map F(x, y) = (f(x), h(x, y)) to its fixed point.

    The fiber rate is sampled along the base orbit, since the stationary
    theorem only needs limsup Lip(h^{f^n(x)}) < 1.

    Args:
        f (Callable): The base map.
        h (Callable[[x, y], y]): The fiber family.
        p (tuple): Start pair (x, y).
        tol (float): Error target.
        max_iter (int): Iteration budget.
        base_space, fiber_space (MetricSpaceDescriptor): Default to the real line.
        mu_hat, lambda_hat (float, optional): Known rates; sampled when omitted.
        seed (int): Sampling seed.

    Returns:
        StationaryFiberResult: The limit pair, iteration count, residual and trace.

    Raises:
        DomainError: If a sampled rate is not below 1.
        NonConvergenceError: If max_iter is exhausted.
    """
    base_space = base_space or MetricSpaceDescriptor.real_line()
    fiber_space = fiber_space or MetricSpaceDescriptor.real_line()
    if not tol > 0:
        raise StructuralError(f"tol must be > 0, got {tol}")
    x = validate_point(base_space, p[0])
    y = validate_point(fiber_space, p[1])

    if mu_hat is None:
        radius = max(1.0, float(np.max(np.abs(x))))
        mu_hat = estimate_lipschitz(f, base_space, SamplingPlan(seed=seed, center=x, radius=radius)).inflated
    if lambda_hat is None:
        radius = max(1.0, float(np.max(np.abs(y))))
        plan = SamplingPlan(seed=seed, center=y, radius=radius)
        lambda_hat = estimate_orbit_lipschitz(f, h, x, base_space, fiber_space, plan).inflated
    if mu_hat >= 1.0 or lambda_hat >= 1.0:
        raise DomainError(f"stationary skew map is not contracting: mu={mu_hat:.6g}, lambda={lambda_hat:.6g}")

    threshold = tol * (1.0 - max(mu_hat, lambda_hat))
    trace = FiberTrace()
    for n in range(1, max_iter + 1):
        next_x = as_point(base_space, f(x))
        next_y = as_point(fiber_space, h(x, y))
        base_step = distance(base_space, next_x, x)
        fiber_step = distance(fiber_space, next_y, y)
        trace.append(n, next_x, next_y, base_step, fiber_step)
        x, y = next_x, next_y
        if base_step <= threshold and fiber_step <= threshold:
            residual = max(
                distance(base_space, as_point(base_space, f(x)), x),
                distance(fiber_space, as_point(fiber_space, h(x, y)), y),
            )
            logger.info("stationary skew run converged at n=%d to (%s, %s)", n, format_point(x), format_point(y))
            return StationaryFiberResult((x, y), n, residual, trace, mu_hat, lambda_hat)

    raise NonConvergenceError(f"stationary skew iteration did not reach tol={tol} in {max_iter} steps", trace)


def _probe_radii(system, certification_mu, M, start):
    x, y = start
    base_radius = distance(system.base_space, x, system.x0)
    if certification_mu is not None and certification_mu < 1.0:
        base_radius = max(base_radius, composed_orbit_bound(certification_mu, M))
    fiber_radius = distance(system.fiber_space, y, system.y0)
    return (base_radius if base_radius > 0 else 1.0), fiber_radius


def certify_skew_system(system, policy=None, start=None):
    """
    Runs every hypothesis probe on a skew system.

    Probes condition (1) with its bound M, the base rate mu, condition (2) with
    its bound S on a region around the anchors and the start, the fiber rate
    lambda and condition (3) with pairs anchored at x0 and at the start.

    Args:
        system (SkewSystem): The skew system.
        policy (FiberPolicy): Probing parameters.
        start (tuple, optional): The start pair of the intended run.

    Returns:
        SkewCertification: The probed constants and reports.

    Raises:
        RefusalError: Naming every condition whose probe did not pass.
        DomainError: If mu or lambda is not below 1.
    """
    policy = policy or FiberPolicy()
    start = start or (system.x0, system.y0)
    start = (validate_point(system.base_space, start[0]), validate_point(system.fiber_space, start[1]))
    reports, violated = [], []

    base_report = probe_base_boundedness(system.base, system.x0, policy.probe_horizon)
    reports.append(base_report)
    mu = M = None
    if base_report.passed:
        M = base_report.bound
        mu, _ = estimate_rate(system.base, system.x0, policy.base_policy())
    else:
        violated.append(base_report.condition.label)

    base_radius, fiber_distance = _probe_radii(system, mu, M or 0.0, start)
    fiber_radius = max(policy.fiber_radius, fiber_distance)
    region = sample_region(system.base_space, system.fiber_space, system.x0, base_radius,
                           system.y0, fiber_radius, policy.sample_count, policy.seed)
    region.append(start)
    fiber_report = probe_fiber_boundedness(system.fiber, region, policy.probe_horizon, system.y0, seed=policy.seed)
    reports.append(fiber_report)
    if not fiber_report.passed:
        violated.append(fiber_report.condition.label)

    base_samples = SamplingPlan(seed=policy.seed, count=policy.sample_count, center=system.x0,
                                radius=base_radius).draw(system.base_space)
    fiber_samples = SamplingPlan(seed=policy.seed + 1, count=policy.sample_count, center=system.y0,
                                 radius=fiber_radius).draw(system.fiber_space)
    centers = [system.x0, start[0], *base_samples[3:6]]
    pairs = build_equicontinuity_pairs(system.base_space, centers, policy.deltas)
    equi_report = probe_equicontinuity(system.fiber, policy.n_probe, list(fiber_samples) + [start[1]], pairs,
                                       seed=policy.seed)
    reports.append(equi_report)
    if not equi_report.passed:
        violated.append(equi_report.condition.label)

    if violated:
        logger.info("%s: refusing certification, %s", system.name, ", ".join(violated))
        raise RefusalError(violated, reports)

    lam_estimate = estimate_fiber_lipschitz(
        system.fiber, [system.x0, start[0], *base_samples[3:7]],
        SamplingPlan(seed=policy.seed, count=policy.sample_count, center=system.y0, radius=fiber_radius),
        policy.n_probe,
    )
    lam = system.fiber.declared_lambda if system.fiber.declared_lambda is not None else lam_estimate.inflated
    if mu >= 1.0 or lam >= 1.0:
        raise DomainError(f"{system.name}: rates not below 1 (mu={mu:.6g}, lambda={lam:.6g})")

    certification = SkewCertification(mu, M, lam, fiber_report.bound, base_radius, fiber_radius, reports)
    logger.info("%s: certified hypotheses (mu=%.4g, M=%.4g, lambda=%.4g, S=%.4g)",
                system.name, mu, M, lam, fiber_report.bound)
    return certification


def _stabilized_run(system, start, certification, policy):
    """
    Recomposes F_1 o ... o F_n(start) for growing n until the base bound and the fiber window are both within tol.
    """
    x, y = start
    start_distance = distance(system.base_space, x, system.x0)
    trace = FiberTrace()
    window = deque(maxlen=policy.stability_window)
    previous = y
    for n in range(1, policy.max_n + 1):
        bx, fy = skew_compose_eval(system, n, (x, y))
        base_bound = certification.base_bound(n, start_distance)
        trace.append(n, bx, fy, base_bound, distance(system.fiber_space, fy, previous))
        previous = fy
        window.append(fy)
        if base_bound <= policy.tol and len(window) == window.maxlen:
            spread = float(pairwise_distances(system.fiber_space, np.stack(window)).max())
            if spread <= policy.tol:
                return (bx, fy), n, trace
    raise NonConvergenceError(
        f"{system.name}: no certified base and stable fiber within max_n={policy.max_n}", trace
    )


def _orbit_diameter(system, start, trace):
    space = MetricSpaceDescriptor.product(system.base_space, system.fiber_space)
    stacked = np.stack([join(*start)] + [join(r.base, r.fiber) for r in trace.rows])
    return float(pairwise_distances(space, stacked).max())


def iterate_fiber_nonstationary(system, p, policy=None, certification=None):
    """
    Runs the certified non-stationary fiber iteration F_1 o ... o F_n(x, y).

    Stops at the least n where the base a-priori bound is within tol and the
    last `stability_window` fiber values agree within tol. A second run from a
    start perturbed by 10% of the orbit diameter checks independence of the
    start.

    Args:
        system (SkewSystem): The skew system.
        p (tuple): Start pair (x, y).
        policy (FiberPolicy): Stopping and probing parameters.
        certification (SkewCertification, optional): Reuse an earlier certification.

    Returns:
        FiberResult: Limit pair, n_used, base certificate, diagnostics and trace.

    Raises:
        RefusalError: If a hypothesis probe does not pass.
        NonConvergenceError: If max_n is exhausted.
    """
    policy = policy or FiberPolicy()
    start = (validate_point(system.base_space, p[0]), validate_point(system.fiber_space, p[1]))
    certification = certification or certify_skew_system(system, policy, start)

    pair, n_used, trace = _stabilized_run(system, start, certification, policy)
    start_distance = distance(system.base_space, start[0], system.x0)
    certificate = ContractionCertificate.issue(certification.mu, certification.M, system.x0, n_used, start_distance)

    offset = policy.perturbation * _orbit_diameter(system, start, trace) or policy.perturbation
    perturbed = (
        clip_to_space(system.base_space, start[0] + offset * unit_direction(system.base_space)),
        clip_to_space(system.fiber_space, start[1] + offset * unit_direction(system.fiber_space)),
    )
    try:
        other, _, _ = _stabilized_run(system, perturbed, certification, policy)
        gap = max(distance(system.base_space, pair[0], other[0]), distance(system.fiber_space, pair[1], other[1]))
    except NonConvergenceError:
        other, gap = None, float("inf")
    agrees = gap <= 5 * policy.tol
    if not agrees:
        logger.warning("%s: perturbed start landed %.3g away from the reference limit", system.name, gap)

    diagnostics = {
        "certification": certification.to_dict(),
        "start_independence": {
            "offset": offset,
            "perturbed_start": [point_to_list(perturbed[0]), point_to_list(perturbed[1])],
            "perturbed_limit": None if other is None else [point_to_list(other[0]), point_to_list(other[1])],
            "distance": gap,
            "agrees": agrees,
        },
    }
    logger.info("%s: converged at n=%d to (%s, %s) [%s]", system.name, n_used,
                format_point(pair[0]), format_point(pair[1]), FIBER_LABEL)
    return FiberResult(pair, n_used, certificate, diagnostics, trace)


def raw_skew_orbit(system, p, max_n, tol=1e-10, window=10, divergence=DIVERGENCE_THRESHOLD):
    """
    Computes the uncertified skew orbit, used to exhibit refused systems.

    Stops when the last `window` pairs agree within tol, when the orbit leaves
    the divergence ball around the start, or at max_n.

    Returns:
        tuple: (FiberTrace, final pair, outcome) with outcome 'stable', 'diverged' or 'exhausted'.
    """
    start = (validate_point(system.base_space, p[0]), validate_point(system.fiber_space, p[1]))
    product = MetricSpaceDescriptor.product(system.base_space, system.fiber_space)
    trace = FiberTrace()
    recent = deque(maxlen=window)
    previous = start[1]
    pair = start
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, max_n + 1):
            pair = skew_compose_eval(system, n, start)
            trace.append(n, pair[0], pair[1], None, distance(system.fiber_space, pair[1], previous))
            previous = pair[1]
            recent.append(join(*pair))
            reach = distance(product, join(*pair), join(*start))
            if not np.isfinite(reach) or reach > divergence:
                return trace, pair, "diverged"
            if len(recent) == recent.maxlen and pairwise_distances(product, np.stack(recent)).max() <= tol:
                return trace, pair, "stable"
    return trace, pair, "exhausted"


def build_convergence_plan(system, epsilon, certification=None, policy=None):
    """
    Derives N0, N1, delta and L for a target epsilon from probed constants.

    L = S / (1 - lambda); N0 is the least index with 2 lambda^(N0-1) L < epsilon;
    delta is the largest bucket of an equicontinuity probe (n <= N0, K in
    B_L(y0), pairs in B_M(x0)) whose sup, and every smaller bucket's sup, is
    below epsilon; N1 is the least index with mu^N1 M < delta, where M bounds
    every composed base orbit from x0.

    Returns:
        ConvergencePlan: The checked plan.
    """
    if not epsilon > 0:
        raise StructuralError(f"epsilon must be > 0, got {epsilon}")
    policy = policy or FiberPolicy()
    certification = certification or certify_skew_system(system, policy)
    lam, mu = certification.lam, certification.mu
    M = composed_orbit_bound(mu, certification.M)
    L = certification.S / (1.0 - lam)
    log = [f"lambda={lam:.6g} mu={mu:.6g} S={certification.S:.6g} M_base={certification.M:.6g}",
           f"L = S / (1 - lambda) = {L:.6g}", f"M = M_base / (1 - mu) = {M:.6g}"]

    N0 = 1
    while not 2.0 * lam ** (N0 - 1) * L < epsilon:
        N0 += 1
        if N0 > MAX_PLAN_INDEX:
            raise StructuralError(f"no N0 below {MAX_PLAN_INDEX} satisfies 2 lambda^(N0-1) L < {epsilon}")
    log.append(f"N0 = {N0}: 2 lambda^(N0-1) L = {2.0 * lam ** (N0 - 1) * L:.6g} < {epsilon}")

    fiber_samples = SamplingPlan(seed=policy.seed + 1, count=policy.sample_count, center=system.y0,
                                 radius=L if L > 0 else 1.0).draw(system.fiber_space)
    centers = SamplingPlan(seed=policy.seed, count=policy.sample_count, center=system.x0,
                           radius=M if M > 0 else 1.0).draw(system.base_space)
    pairs = build_equicontinuity_pairs(system.base_space, list(centers), policy.deltas)
    report = probe_equicontinuity(system.fiber, N0, list(fiber_samples), pairs, seed=policy.seed)

    delta = None
    for bucket, sup in reversed(report.modulus):
        if sup < epsilon:
            delta = bucket
        else:
            break
    if delta is None:
        raise StructuralError(
            f"equicontinuity modulus never drops below epsilon={epsilon}; extend the delta buckets"
        )
    log.append(f"delta = {delta:.3g} from modulus {report.modulus}")

    N1 = 0
    while not mu ** N1 * M < delta:
        N1 += 1
        if N1 > MAX_PLAN_INDEX:
            raise StructuralError(f"no N1 below {MAX_PLAN_INDEX} satisfies mu^N1 M < {delta}")
    log.append(f"N1 = {N1}: mu^N1 M = {mu ** N1 * M:.6g} < {delta:.3g}")

    plan = ConvergencePlan(epsilon, N0, N1, delta, L, "\n".join(log), lam, mu, M)
    plan.check()
    return plan


def _slack(*values):
    return INEQUALITY_SLACK * (1.0 + max(abs(v) for v in values))


def convergence_diagnostics(system, plan, m, n):
    """
    Evaluates the existence argument's A_j, B_j, C_j on the reference orbit from (x0, y0).

    With Y_l(j) = pi_Y F_j o ... o F_l(x0, y0) and b_j = f_{j+1} o ... o f_m(x0):
    A_j = d(Y_m(j), h_j^{b_j}(Y_n(j+1))), B_j = d(h_j^{b_j}(Y_n(j+1)), Y_n(j)),
    C_j = d(Y_m(j), Y_n(j)). Checks C_j <= A_j + B_j, A_j <= lambda C_{j+1},
    B_j < epsilon and C_j <= 2L for j = 1..N0.

    Args:
        system (SkewSystem): The skew system.
        plan (ConvergencePlan): A plan for this system.
        m, n (int): Orbit lengths with m >= n > N0 + N1.

    Returns:
        DiagnosticTable: One row per j.
    """
    plan.check()
    if not m >= n > plan.N0 + plan.N1:
        raise StructuralError(f"diagnostics need m >= n > N0 + N1 = {plan.N0 + plan.N1}, got m={m}, n={n}")
    anchor = (system.x0, system.y0)
    space = system.fiber_space

    def fiber_tail(j, end):
        if end < j:
            return system.y0
        return skew_compose_eval(system.shift(j - 1), end - j + 1, anchor)[1]

    tails_m = {j: fiber_tail(j, m) for j in range(1, plan.N0 + 2)}
    tails_n = {j: fiber_tail(j, n) for j in range(1, plan.N0 + 2)}

    rows = []
    for j in range(1, plan.N0 + 1):
        b_j = _base_tail(system, j, m, system.x0)
        mixed = system.fiber.apply(j, b_j, tails_n[j + 1])
        A = distance(space, tails_m[j], mixed)
        B = distance(space, mixed, tails_n[j])
        C = distance(space, tails_m[j], tails_n[j])
        C_next = distance(space, tails_m[j + 1], tails_n[j + 1])
        rows.append({
            "j": j, "A": A, "B": B, "C": C,
            "inequalities": {
                "CAB": C <= A + B + _slack(C, A, B),
                "AC": A <= plan.lam * C_next + _slack(A, C_next),
                "Beps": B < plan.epsilon,
                "C2L": C <= 2.0 * plan.L + _slack(C, plan.L),
            },
        })
    table = DiagnosticTable(rows, plan, m, n)
    logger.info("%s: proof diagnostics over j=1..%d %s", system.name, plan.N0, "hold" if table.holds else "FAIL")
    return table


def start_independence_diagnostics(system, p, n, lam, policy=None):
    """
    Evaluates the start-independence argument's bookkeeping for a start (x, y).

    With W_{k+1} = pi_Y F_{k+1} o ... o F_n(x0, y), T_k^x the chain
    h_1^{f_2...f_n x} o ... o h_k^{f_{k+1}...f_n x} and Z_k = T_k^x(W_{k+1}):
    A_k = d(Z_k, Z_{k-1}), B_k = d(h_k^{b_k(x)}(W_{k+1}), h_k^{b_k(x0)}(W_{k+1})),
    C_k = d(Z_k, pi_Y F_1 o ... o F_n(x0, y0)). Checks A_k <= lambda^(k-1) B_k,
    C_k <= A_k + C_{k-1}, B_k <= S' and the telescoped bound
    C_n <= sum lambda^(k-1) B_k + lambda^n d(y, y0). S' is the sup of
    d(h_k^{x'}(w), h_k^{x''}(w)) over pairs with d(x', x'') <= d(x, x0): the
    orbit pairs plus sampled pairs around x0.

    Returns:
        dict: {rows, S_prime, telescoped_bound, C_n, holds}.
    """
    policy = policy or FiberPolicy()
    x = validate_point(system.base_space, p[0])
    y = validate_point(system.fiber_space, p[1])
    fiber, space = system.fiber, system.fiber_space
    base_x = {k: _base_tail(system, k, n, x) for k in range(1, n + 1)}
    base_x0 = {k: _base_tail(system, k, n, system.x0) for k in range(1, n + 1)}

    W = {n + 1: y}
    for k in range(n, 0, -1):
        W[k] = fiber.apply(k, base_x0[k], W[k + 1])

    def chain(k, z):
        for i in range(k, 0, -1):
            z = fiber.apply(i, base_x[i], z)
        return z

    reference = skew_compose_eval(system, n, (system.x0, system.y0))[1]
    Z = {k: chain(k, W[k + 1]) for k in range(0, n + 1)}

    # S' over pairs within d(x, x0): orbit pairs plus sampled pairs.
    spread = distance(system.base_space, x, system.x0)
    s_prime = 0.0
    for k in range(1, n + 1):
        s_prime = max(s_prime, distance(space, fiber.apply(k, base_x[k], W[k + 1]), fiber.apply(k, base_x0[k], W[k + 1])))
    if spread > 0:
        centers = SamplingPlan(seed=policy.seed, count=policy.sample_count, center=system.x0,
                               radius=spread).draw(system.base_space)
        for x_a, x_b, _ in build_equicontinuity_pairs(system.base_space, list(centers), (spread,)):
            for k in range(1, n + 1):
                s_prime = max(s_prime, distance(space, fiber.apply(k, x_a, W[k + 1]), fiber.apply(k, x_b, W[k + 1])))

    rows = []
    C_prev = distance(space, Z[0], reference)
    weighted = 0.0
    for k in range(1, n + 1):
        B = distance(space, fiber.apply(k, base_x[k], W[k + 1]), fiber.apply(k, base_x0[k], W[k + 1]))
        A = distance(space, Z[k], Z[k - 1])
        C = distance(space, Z[k], reference)
        weighted += lam ** (k - 1) * B
        rows.append({
            "k": k, "A": A, "B": B, "C": C,
            "inequalities": {
                "AB": A <= lam ** (k - 1) * B + _slack(A, B),
                "CAC": C <= A + C_prev + _slack(C, A, C_prev),
                "BS": B <= s_prime + _slack(B, s_prime),
            },
        })
        C_prev = C

    telescoped = weighted + lam ** n * distance(space, y, system.y0)
    C_n = rows[-1]["C"] if rows else distance(space, Z[0], reference)
    holds = all(all(r["inequalities"].values()) for r in rows) and C_n <= telescoped + _slack(C_n, telescoped)
    return {"rows": rows, "S_prime": s_prime, "telescoped_bound": telescoped, "C_n": C_n, "holds": holds}

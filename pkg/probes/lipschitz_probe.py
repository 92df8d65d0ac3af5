# probes/lipschitz_probe.py

"""
Numerically estimates Lipschitz constants and tests the hypotheses of the
non-stationary fiber contraction theorem on concrete map families.

Every probe is a falsifier, not a proof: a Pass verdict means no violation
was observed at the sampled resolution. Sampling is seeded and the seed is
recorded in every report so verdicts can be reproduced.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import DegenerateSamplingError, MapEvaluationError, StructuralError
from core.metric_core import (
    SpaceKind, as_point, clip_to_space, distance, origin, pairwise_distances, validate_point,
)
from core.maps import DECLARED_RATE_SLACK
from utils.numeric_helpers import point_to_list

logger = logging.getLogger(__name__)

__all__ = [
    "Condition", "Verdict", "SamplingPlan", "LipEstimate", "ProbeReport", "estimate_lipschitz",
    "estimate_sequence_lipschitz", "estimate_fiber_lipschitz", "estimate_orbit_lipschitz",
    "probe_base_boundedness", "sample_region", "probe_fiber_boundedness", "unit_direction",
    "build_equicontinuity_pairs", "probe_equicontinuity", "DEFAULT_DELTAS", "DIVERGENCE_THRESHOLD",
]

# Pairs closer than this are excluded from Lipschitz ratios.
DEGENERATE_PAIR_TOL = 1e-9
DIVERGENCE_THRESHOLD = 1e12
STABILIZATION_WINDOW = 0.2
EQUICONTINUITY_PASS = 1e-4
EQUICONTINUITY_FLOOR = 1e-2
# Sampled suprema underestimate, so estimated rates are inflated by 1%.
RATE_INFLATION = 1.01
DEFAULT_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


class Condition(Enum):
    BASE_BOUNDED = "BaseBounded"
    FIBER_BOUNDED = "FiberBounded"
    EQUICONTINUOUS = "Equicontinuous"

    @property
    def label(self):
        number = {"BaseBounded": 1, "FiberBounded": 2, "Equicontinuous": 3}[self.value]
        return f"condition ({number}) {self.value}"


class Verdict(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SamplingPlan:
    """
    A seeded recipe for drawing sample points from a space.

    Random plans draw uniformly from the box centre +- radius and always add
    the centre and both box corners. Grid plans space `count` points evenly
    (one-coordinate spaces only). Explicit `points` override both.
    """

    seed: int = 0
    count: int = 32
    center: Optional[Sequence[float]] = None
    radius: float = 1.0
    kind: str = "random"
    points: Optional[Sequence] = None

    def draw(self, space):
        """
        Draws the sample points.

        Args:
            space (MetricSpaceDescriptor): The space to sample.

        Returns:
            numpy.ndarray: Array of shape (k, space.size).
        """
        if self.points is not None:
            return np.stack([validate_point(space, p) for p in self.points])
        center = origin(space) if self.center is None else as_point(space, self.center)
        if self.kind == "grid":
            if space.size != 1:
                raise StructuralError("grid sampling plans need a one-coordinate space")
            nodes = np.linspace(center[0] - self.radius, center[0] + self.radius, self.count)
            return clip_to_space(space, nodes[:, None])
        if self.kind != "random":
            raise StructuralError(f"unknown sampling plan kind '{self.kind}'")
        rng = np.random.default_rng(self.seed)
        anchors = np.stack([center, center - self.radius, center + self.radius])
        cloud = rng.uniform(center - self.radius, center + self.radius, size=(self.count, space.size))
        return clip_to_space(space, np.concatenate([anchors, cloud]))

    def to_dict(self):
        return {"seed": self.seed, "count": self.count, "radius": self.radius, "kind": self.kind}


@dataclass(frozen=True)
class LipEstimate:
    """
    A sampled lower bound on a Lipschitz constant.

    Attributes:
        value (float): Max ratio d(f(p), f(q)) / d(p, q) over sampled pairs.
        witness_pair (tuple): The pair (p, q) achieving the max.
        sample_count (int): Number of sample points.
        seed (int): Seed of the sampling plan.
        index (int, optional): Map index achieving the max, for families.
    """

    value: float
    witness_pair: Tuple[np.ndarray, np.ndarray]
    sample_count: int
    seed: int = 0
    index: Optional[int] = None

    @property
    def inflated(self):
        return self.value * RATE_INFLATION

    def to_dict(self):
        return {
            "value": self.value,
            "witness_pair": [point_to_list(self.witness_pair[0]), point_to_list(self.witness_pair[1])],
            "sample_count": self.sample_count,
            "seed": self.seed,
            "index": self.index,
        }


@dataclass
class ProbeReport:
    """
    The verdict of one hypothesis probe together with the evidence behind it.
    """

    condition: Condition
    verdict: Verdict
    bound: Optional[float] = None
    modulus: Optional[List[Tuple[float, float]]] = None
    witnesses: List[dict] = field(default_factory=list)
    seed: Optional[int] = None
    horizon: Optional[int] = None

    @property
    def passed(self):
        return self.verdict is Verdict.PASS

    def to_dict(self):
        return {
            "condition": self.condition.value,
            "verdict": self.verdict.value,
            "bound": self.bound,
            "modulus": None if self.modulus is None else [[d, e] for d, e in self.modulus],
            "witnesses": self.witnesses,
            "seed": self.seed,
            "horizon": self.horizon,
        }


def _images(f, points, space):
    try:
        return np.stack([as_point(space, f(p)) for p in points])
    except MapEvaluationError:
        raise
    except Exception as exc:
        raise MapEvaluationError(0, "sampled", exc) from exc


def estimate_lipschitz(f, space, plan=None):
    """
    Estimates Lip(f) as the max distance ratio over all sampled pairs.

    Args:
        f (Callable): A self-map of the space.
        space (MetricSpaceDescriptor): The space.
        plan (SamplingPlan): The sampling plan; defaults to SamplingPlan().

    Returns:
        LipEstimate: The estimate with its witness pair.

    Raises:
        DegenerateSamplingError: If every sampled pair is within 1e-9.
    """
    plan = plan or SamplingPlan()
    points = plan.draw(space)
    images = _images(f, points, space)
    pre = pairwise_distances(space, points)
    post = pairwise_distances(space, images)

    mask = np.triu(pre > DEGENERATE_PAIR_TOL, k=1)
    if not mask.any():
        raise DegenerateSamplingError(
            f"all {len(points)} sampled points are within {DEGENERATE_PAIR_TOL} of each other; "
            "widen the sampling plan radius"
        )
    rows, cols = np.nonzero(mask)
    ratios = post[rows, cols] / pre[rows, cols]
    best = int(np.argmax(ratios))
    return LipEstimate(
        value=float(ratios[best]),
        witness_pair=(points[rows[best]], points[cols[best]]),
        sample_count=len(points),
        seed=plan.seed,
    )


def estimate_sequence_lipschitz(seq, plan=None, n_probe=50):
    """
    Estimates mu = sup_n Lip(f_n) over n = 1..n_probe.

    A declared rate on the sequence is checked against each probed map.

    Returns:
        LipEstimate: The largest per-map estimate, with `index` set to its n.
    """
    best = None
    for n in range(1, n_probe + 1):
        estimate = estimate_lipschitz(seq.at(n), seq.space, plan)
        if seq.declared_mu is not None and estimate.value > seq.declared_mu + DECLARED_RATE_SLACK:
            raise StructuralError(
                f"{seq.name}: probed Lip(f_{n}) = {estimate.value:.6g} exceeds declared mu {seq.declared_mu}"
            )
        if best is None or estimate.value > best.value:
            best = LipEstimate(estimate.value, estimate.witness_pair, estimate.sample_count, estimate.seed, n)
    logger.debug("%s: sampled mu = %.6g at n=%s", seq.name, best.value, best.index)
    return best


def estimate_fiber_lipschitz(family, base_points, plan=None, n_probe=20):
    """
    Estimates lambda = sup_n sup_x Lip(h_n^x) over n = 1..n_probe and the given base points.

    Args:
        family (FiberFamily): The fiber family.
        base_points (list): Base points x at which to probe.
        plan (SamplingPlan): Sampling plan over the fiber space.
        n_probe (int): Number of indices probed.

    Returns:
        LipEstimate: The largest estimate found.
    """
    best = None
    for n in range(1, n_probe + 1):
        for x in base_points:
            estimate = estimate_lipschitz(family.at(n, x), family.fiber_space, plan)
            if family.declared_lambda is not None and estimate.value > family.declared_lambda + DECLARED_RATE_SLACK:
                raise StructuralError(
                    f"{family.name}: probed Lip(h_{n}^x) = {estimate.value:.6g} exceeds "
                    f"declared lambda {family.declared_lambda}"
                )
            if best is None or estimate.value > best.value:
                best = LipEstimate(estimate.value, estimate.witness_pair, estimate.sample_count, estimate.seed, n)
    logger.debug("%s: sampled lambda = %.6g at n=%s", family.name, best.value, best.index)
    return best


def estimate_orbit_lipschitz(f, h, x, base_space, fiber_space, plan=None, orbit_length=20):
    """
    Estimates limsup_k Lip(h^{f^k(x)}) from the second half of the first orbit points.

    The stationary fiber theorem only asks the fiber maps to contract along
    base orbits, not uniformly in x.

    Args:
        f (Callable): The base map.
        h (Callable[[x, y], y]): The fiber family.
        x: Base starting point.
        base_space, fiber_space (MetricSpaceDescriptor): The two spaces.
        plan (SamplingPlan): Sampling plan over the fiber space.
        orbit_length (int): Number of orbit points generated.

    Returns:
        LipEstimate: The largest estimate over the orbit tail.
    """
    point = as_point(base_space, x)
    orbit = [point]
    for _ in range(orbit_length):
        point = as_point(base_space, f(point))
        orbit.append(point)
    best = None
    for k, xk in enumerate(orbit[len(orbit) // 2:], start=len(orbit) // 2):
        estimate = estimate_lipschitz(lambda y, xk=xk: h(xk, y), fiber_space, plan)
        if best is None or estimate.value > best.value:
            best = LipEstimate(estimate.value, estimate.witness_pair, estimate.sample_count, estimate.seed, k)
    return best


def _stabilization_verdict(values, window_fraction):
    """
    Applies the running-max stabilization rule to a sequence of observed distances.

    Pass when the final window adds no new maximum; Fail when the final window
    grows strictly; Inconclusive otherwise.
    """
    values = np.asarray(values, dtype=float)
    total = len(values)
    window = max(1, int(np.ceil(window_fraction * total)))
    if total <= window:
        return Verdict.INCONCLUSIVE
    head_max = values[:total - window].max()
    tail = values[total - window:]
    if tail.max() <= head_max:
        return Verdict.PASS
    increments = np.diff(values[total - window - 1:])
    if np.all(increments > 0):
        return Verdict.FAIL
    return Verdict.INCONCLUSIVE


def probe_base_boundedness(seq, x0, horizon, threshold=DIVERGENCE_THRESHOLD, window=STABILIZATION_WINDOW):
    """
    Tests condition (1): the distances d(f_n(x0), x0) stay bounded.

    Args:
        seq (MapSequence): The base sequence.
        x0: The reference point.
        horizon (int): Number of indices probed.
        threshold (float): Distances above this count as divergence.
        window (float): Fraction of the horizon used as stabilization window.

    Returns:
        ProbeReport: BaseBounded report; on Pass, bound is the observed max M.
    """
    if horizon < 1:
        raise StructuralError(f"probe horizon must be >= 1, got {horizon}")
    x0 = validate_point(seq.space, x0)
    values = []
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, horizon + 1):
            d = distance(seq.space, seq.apply(n, x0), x0)
            values.append(d)
            if not np.isfinite(d) or d > threshold:
                logger.info("%s: d(f_%d(x0), x0) = %.6g crossed divergence threshold", seq.name, n, d)
                return ProbeReport(
                    Condition.BASE_BOUNDED, Verdict.FAIL,
                    witnesses=[{"n": n, "distance": d}], horizon=horizon,
                )

    verdict = _stabilization_verdict(values, window)
    argmax = int(np.argmax(values))
    report = ProbeReport(
        Condition.BASE_BOUNDED,
        verdict,
        bound=float(values[argmax]) if verdict is Verdict.PASS else None,
        witnesses=[{"n": argmax + 1, "distance": float(values[argmax])}, {"n": horizon, "distance": float(values[-1])}],
        horizon=horizon,
    )
    logger.info("%s: %s %s (max distance %.6g)", seq.name, report.condition.label, verdict.value, values[argmax])
    return report


def sample_region(base_space, fiber_space, x_center, x_radius, y_center, y_radius, count=8, seed=0):
    """
    Samples a bounded region of the product space as a list of (x, y) pairs.

    Returns:
        list: count_x * count_y pairs built from independent base and fiber samples.
    """
    xs = SamplingPlan(seed=seed, count=count, center=x_center, radius=x_radius).draw(base_space)
    ys = SamplingPlan(seed=seed + 1, count=count, center=y_center, radius=y_radius).draw(fiber_space)
    return [(x, y) for x in xs for y in ys]


def probe_fiber_boundedness(family, region, horizon, y0=None, threshold=DIVERGENCE_THRESHOLD,
                            window=STABILIZATION_WINDOW, seed=None):
    """
    Tests condition (2): the fiber images of a bounded region stay bounded.

    Args:
        family (FiberFamily): The fiber family.
        region (list): Sampled (x, y) pairs of a bounded region.
        horizon (int): Number of indices probed.
        y0: Fiber reference point; defaults to the fiber space origin.
        threshold (float): Divergence threshold.
        window (float): Stabilization window fraction.
        seed (int, optional): Seed used to draw the region, recorded in the report.

    Returns:
        ProbeReport: FiberBounded report; on Pass, bound is S.
    """
    if not region:
        raise StructuralError("fiber boundedness probe needs a nonempty region")
    if horizon < 1:
        raise StructuralError(f"probe horizon must be >= 1, got {horizon}")
    space = family.fiber_space
    y0 = origin(space) if y0 is None else validate_point(space, y0)

    values = []
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, horizon + 1):
            worst, worst_pair = -1.0, None
            for x, y in region:
                d = distance(space, family.apply(n, x, y), y0)
                if not d <= worst:
                    worst, worst_pair = d, (x, y)
            values.append(worst)
            if not np.isfinite(worst) or worst > threshold:
                logger.info("%s: fiber images reached %.6g at n=%d", family.name, worst, n)
                return ProbeReport(
                    Condition.FIBER_BOUNDED, Verdict.FAIL,
                    witnesses=[{"n": n, "distance": worst, "x": point_to_list(worst_pair[0]),
                                "y": point_to_list(worst_pair[1])}],
                    seed=seed, horizon=horizon,
                )

    verdict = _stabilization_verdict(values, window)
    argmax = int(np.argmax(values))
    logger.info("%s: %s %s (max distance %.6g)", family.name, Condition.FIBER_BOUNDED.label,
                verdict.value, values[argmax])
    return ProbeReport(
        Condition.FIBER_BOUNDED,
        verdict,
        bound=float(values[argmax]) if verdict is Verdict.PASS else None,
        witnesses=[{"n": argmax + 1, "distance": float(values[argmax])}],
        seed=seed,
        horizon=horizon,
    )


def unit_direction(space):
    """
    Returns a direction e with distance(p, p + t*e) = t for every point p and t >= 0.
    """
    if space.kind is SpaceKind.EUCLIDEAN:
        return np.full(space.dim, 1.0 / np.sqrt(space.dim))
    if space.kind is SpaceKind.PRODUCT:
        return np.concatenate([unit_direction(space.left), unit_direction(space.right)])
    return np.ones(space.size)


def build_equicontinuity_pairs(space, centers, deltas=DEFAULT_DELTAS):
    """
    Builds anchored base pairs (x, x', delta) with d_X(x, x') = delta, in decreasing delta order.

    Args:
        space (MetricSpaceDescriptor): The base space.
        centers (list): Anchor points x.
        deltas (Sequence[float]): Pair distances.

    Returns:
        list: Tuples (x, x', delta).
    """
    direction = unit_direction(space)
    pairs = []
    for delta in sorted(deltas, reverse=True):
        for center in centers:
            x = validate_point(space, center)
            other = x + delta * direction
            if space.kind is SpaceKind.SLOPE_INTERVAL and other[0] > space.hi:
                other = x - delta * direction
            pairs.append((x, other, float(delta)))
    return pairs


def probe_equicontinuity(family, n_max, fiber_samples, base_pairs,
                         eps_pass=EQUICONTINUITY_PASS, floor=EQUICONTINUITY_FLOOR, seed=None):
    """
    Tests condition (3): h_n^x(y) depends continuously on x, uniformly in y in K.

    For every delta bucket the probe records the sup over n <= n_max, y in K and
    the bucket's pairs of d_Y(h_n^x(y), h_n^{x'}(y)).

    Args:
        family (FiberFamily): The fiber family.
        n_max (int): Largest index probed.
        fiber_samples (list): The bounded set K of fiber points.
        base_pairs (list): (x, x', delta) tuples sorted by decreasing delta.
        eps_pass (float): Final-bucket sup below which the probe passes outright.
        floor (float): Sup level that marks a persistent jump.
        seed (int, optional): Seed used to draw K, recorded in the report.

    Returns:
        ProbeReport: Equicontinuous report with the modulus table.
    """
    if n_max < 1:
        raise StructuralError(f"n_max must be >= 1, got {n_max}")
    if len(fiber_samples) == 0:
        raise StructuralError("equicontinuity probe needs a nonempty fiber sample set K")
    if not base_pairs:
        raise StructuralError("equicontinuity probe needs at least one base pair")
    deltas = [delta for _, _, delta in base_pairs]
    if any(b > a for a, b in zip(deltas, deltas[1:])):
        raise StructuralError("base pairs must be sorted by decreasing delta")

    space = family.fiber_space
    buckets = {}
    witnesses = {}
    for x, x_other, delta in base_pairs:
        sup = buckets.get(delta, 0.0)
        for n in range(1, n_max + 1):
            for y in fiber_samples:
                gap = distance(space, family.apply(n, x, y), family.apply(n, x_other, y))
                if gap > sup:
                    sup = gap
                    witnesses[delta] = {"delta": delta, "n": n, "gap": gap, "x": point_to_list(x),
                                        "x_other": point_to_list(x_other), "y": point_to_list(y)}
        buckets[delta] = sup

    modulus = [(delta, buckets[delta]) for delta in sorted(buckets, reverse=True)]
    sups = [sup for _, sup in modulus]
    monotone = all(b <= a for a, b in zip(sups, sups[1:]))
    final = sups[-1]

    if all(sup >= floor for sup in sups[-2:]):
        verdict = Verdict.FAIL
    elif monotone and final < eps_pass:
        verdict = Verdict.PASS
    else:
        verdict = Verdict.INCONCLUSIVE

    logger.info("%s: %s %s (final bucket delta=%.3g sup=%.6g)", family.name,
                Condition.EQUICONTINUOUS.label, verdict.value, modulus[-1][0], final)
    return ProbeReport(
        Condition.EQUICONTINUOUS,
        verdict,
        modulus=modulus,
        witnesses=[witnesses[d] for d, _ in modulus if d in witnesses],
        seed=seed,
        horizon=n_max,
    )

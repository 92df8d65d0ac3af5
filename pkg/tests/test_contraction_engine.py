# tests/test_contraction_engine.py

import time

import numpy as np
import pytest
from scipy.optimize import bisect

from core.errors import DomainError, NonConvergenceError, RefusalError, StructuralError
from core.maps import MapSequence
from core.metric_core import MetricSpaceDescriptor, distance
from engines.contraction_engine import (
    ContractionCertificate, IterationTrace, NonstationaryPolicy, apriori_bound, compose_eval,
    composed_orbit_bound, estimate_rate, iterate_nonstationary, iterate_stationary, orbit_trace,
)
from scenarios import build_affine_scenario, build_projective_cocycle_demo, build_remark_counterexample, remark_partial_sum


def test_cosine_fixed_point_matches_bisection():
    dottie = bisect(lambda x: np.cos(x) - x, 0.0, 1.0, xtol=1e-15)
    started = time.perf_counter()
    result = iterate_stationary(np.cos, 0.0, 1e-12, 1000)
    assert time.perf_counter() - started < 1.0
    assert result.point[0] == pytest.approx(dottie, abs=1e-12)
    assert result.residual < 1e-11
    assert result.mu_hat < 1.0
    assert len(result.trace) == result.iterations


def test_stationary_budget_exhaustion_carries_trace():
    with pytest.raises(NonConvergenceError) as info:
        iterate_stationary(np.cos, 0.0, 1e-12, 5)
    assert len(info.value.trace) == 5


def test_stationary_rejects_bad_arguments():
    with pytest.raises(StructuralError):
        iterate_stationary(np.cos, 0.0, 0.0, 10)
    with pytest.raises(StructuralError):
        iterate_stationary(np.cos, 0.0, 1e-6, 0)


def test_compose_eval_applies_innermost_first(real_line):
    seq = MapSequence(real_line, lambda n: (lambda x: x + 10.0 ** n))
    assert compose_eval(seq, 1, 0.0).tolist() == [10.0]
    seq = MapSequence(real_line, lambda n: (lambda x: n * x + 1.0))
    # f_1(f_2(f_3(0))) = 1 * (2 * (3 * 0 + 1) + 1) + 1
    assert compose_eval(seq, 3, 0.0).tolist() == [4.0]
    with pytest.raises(StructuralError):
        compose_eval(seq, 0, 0.0)


def test_apriori_bound_and_orbit_bound():
    assert apriori_bound(0.5, 1.0, 3) == pytest.approx(0.25)
    assert composed_orbit_bound(0.5, 2.0) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        apriori_bound(1.0, 1.0, 3)
    certificate = ContractionCertificate.issue(0.5, 1.0, np.zeros(1), 2, start_distance=4.0)
    assert certificate.total == pytest.approx(0.5 + 1.0)
    assert certificate.to_dict()["M_kind"] == "empirical"


def test_affine_geometric_limit_and_start_independence():
    scenario = build_affine_scenario(0.5, "geom:0.5")
    tol = 1e-10
    policy = NonstationaryPolicy(tol=tol)
    started = time.perf_counter()
    result = iterate_nonstationary(scenario.system, scenario.x0, scenario.start, policy)
    assert time.perf_counter() - started < 1.0
    assert result.point[0] == pytest.approx(2.0 / 3.0, abs=1e-10)
    assert scenario.check_oracle(result.point)["error"] <= tol
    assert result.certificate.total <= tol

    rng = np.random.default_rng(7)
    for x in rng.uniform(-10.0, 10.0, size=10):
        other = iterate_nonstationary(scenario.system, scenario.x0, [x], policy)
        assert distance(scenario.system.space, other.point, result.point) <= 2 * tol


@pytest.mark.parametrize("builder, kwargs", [
    (build_affine_scenario, {"a": 0.5, "b": "const:1"}),
    (build_affine_scenario, {"a": -0.7, "b": "sin:2"}),
    (build_affine_scenario, {"a": 0.9, "b": "periodic:1,-1,3"}),
    (build_projective_cocycle_demo, {}),
    (build_projective_cocycle_demo, {"matrices": "2,1,1,1;1,1,1,2"}),
])
def test_certified_bound_holds_against_longer_run(builder, kwargs):
    scenario = builder(**kwargs)
    policy = NonstationaryPolicy(tol=1e-6)
    result = iterate_nonstationary(scenario.system, scenario.x0, scenario.start, policy)
    reference = compose_eval(scenario.system, 10 * result.n_used, scenario.start)
    assert distance(scenario.system.space, result.point, reference) <= result.certificate.total + 1e-12


def test_certificate_decreases_along_the_trace():
    scenario = build_affine_scenario(0.5, "const:1")
    result = iterate_nonstationary(scenario.system, scenario.x0, [3.0], NonstationaryPolicy(tol=1e-8))
    bounds = [row.bound for row in result.trace.rows]
    assert all(b < a for a, b in zip(bounds, bounds[1:]))
    assert [row.n for row in result.trace.rows] == list(range(1, result.n_used + 1))


def test_remark_sequence_is_refused():
    scenario = build_remark_counterexample()
    assert [remark_partial_sum(n) for n in (1, 2, 3)] == [3.0, 7.5, 14.25]
    for n in (1, 2, 3):
        assert compose_eval(scenario.system, n, scenario.x0)[0] == pytest.approx(remark_partial_sum(n))
    with pytest.raises(RefusalError) as info:
        iterate_nonstationary(scenario.system, scenario.x0, scenario.start, NonstationaryPolicy(probe_horizon=40))
    assert info.value.conditions == ["condition (1) BaseBounded"]


def test_expanding_sequence_is_a_domain_error(real_line):
    seq = MapSequence(real_line, lambda n: (lambda x: 1.5 * x))
    with pytest.raises(DomainError):
        iterate_nonstationary(seq, 0.0, 1.0)


def test_slow_sequence_runs_out_of_budget(real_line):
    seq = MapSequence.constant(real_line, lambda x: 0.99 * x + 1.0)
    with pytest.raises(NonConvergenceError) as info:
        iterate_nonstationary(seq, 0.0, 0.0, NonstationaryPolicy(tol=1e-12, max_n=20))
    assert len(info.value.trace) == 20


def test_orbit_trace_stops_on_divergence():
    scenario = build_remark_counterexample()
    trace = orbit_trace(scenario.system, scenario.start, 200)
    assert len(trace) < 200
    assert abs(trace.rows[-1].point[0]) > 1e12


def test_trace_rows_must_increase():
    trace = IterationTrace()
    trace.append(1, [0.0], 0.0)
    with pytest.raises(StructuralError):
        trace.append(1, [1.0], 1.0)
    assert trace.columns() == ["n", "coord_0", "step_distance", "bound"]


def test_euclidean_rotation_contraction():
    space = MetricSpaceDescriptor.euclidean(2)
    theta = 0.3
    rotation = 0.6 * np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    seq = MapSequence(space, lambda n: (lambda x: rotation @ x + np.array([1.0, 1.0 / n])))
    result = iterate_nonstationary(seq, np.zeros(2), np.array([2.0, -1.0]), NonstationaryPolicy(tol=1e-9))
    reference = compose_eval(seq, 10 * result.n_used, np.array([2.0, -1.0]))
    assert distance(space, result.point, reference) <= result.certificate.total + 1e-12


def test_stationary_affine_fixed_point():
    result = iterate_stationary(lambda x: x / 2 + 1, 0.0, 1e-10, 200)
    assert result.point[0] == pytest.approx(2.0, abs=1e-9)


def test_declared_rate_below_the_sampled_rate_is_rejected(real_line):
    seq = MapSequence.constant(real_line, lambda x: 0.9 * np.asarray(x) + 1.0, declared_mu=0.1)
    with pytest.raises(StructuralError):
        iterate_nonstationary(seq, 0.0, 0.0, NonstationaryPolicy(tol=1e-10))


def test_truthful_declared_rate_is_used(real_line):
    seq = MapSequence.constant(real_line, lambda x: 0.5 * np.asarray(x) + 1.0, declared_mu=0.6)
    mu, estimate = estimate_rate(seq, np.zeros(1), NonstationaryPolicy())
    assert mu == 0.6
    assert estimate.value == pytest.approx(0.5)


def test_composition_telescopes_through_shift(real_line):
    seq = MapSequence(real_line, lambda n: (lambda x: np.cos(n) * 0.5 * np.asarray(x) + np.sin(n)))
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.integers(2, 21))
        k = int(rng.integers(1, n))
        x = rng.uniform(-5.0, 5.0)
        inner = compose_eval(seq.shift(k), n - k, x)
        assert compose_eval(seq, n, x)[0] == pytest.approx(compose_eval(seq, k, inner)[0], rel=1e-12, abs=1e-12)
    assert seq.shift(3).at(2)(1.0) == seq.at(5)(1.0)
    with pytest.raises(StructuralError):
        seq.shift(-1)

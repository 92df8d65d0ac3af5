# tests/test_fiber_engine.py

import time

import numpy as np
import pytest

from core.errors import DomainError, NonConvergenceError, RefusalError, StructuralError
from core.maps import FiberFamily, MapSequence, SkewSystem
from core.metric_core import MetricSpaceDescriptor, distance
from engines.contraction_engine import NonstationaryPolicy, compose_eval, iterate_nonstationary
from engines.fiber_engine import (
    FIBER_LABEL, FiberPolicy, build_convergence_plan, certify_skew_system, convergence_diagnostics,
    iterate_fiber_nonstationary, iterate_fiber_stationary, projected_coordinate, raw_skew_orbit, skew_apply,
    skew_compose_eval, start_independence_diagnostics,
)
from scenarios import (
    build_affine_skew_demo, build_condition2_counterexample, build_condition3_counterexample,
    build_smooth_graph_demo, derivative_mismatch, observed_order,
)


@pytest.fixture(scope="module")
def affine_skew():
    return build_affine_skew_demo()


def test_skew_apply_and_compose(affine_skew):
    system = affine_skew.system
    x, y = skew_apply(system, 1, (np.ones(1), np.zeros(1)))
    assert (x.tolist(), y.tolist()) == ([0.5], [1.0])
    x, y = skew_compose_eval(system, 3, (1.0, 0.0))
    assert x[0] == pytest.approx(0.125)
    assert y[0] == pytest.approx(0.75)
    with pytest.raises(StructuralError):
        skew_compose_eval(system, 0, (1.0, 0.0))


def test_condition3_kernel_at_the_jump():
    system = build_condition3_counterexample().system
    x, y = skew_apply(system, 1, (np.zeros(1), np.ones(1)))
    assert (x.tolist(), y.tolist()) == ([0.0], [0.0])


def test_projected_coordinate_identity(affine_skew):
    system = affine_skew.system
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 13))
        x, y = rng.uniform(-5.0, 5.0, size=2)
        composed = skew_compose_eval(system, n, (x, y))[1][0]
        assert projected_coordinate(system, 1, n, x, y)[0] == pytest.approx(composed, rel=1e-12, abs=1e-12)
    with pytest.raises(StructuralError):
        projected_coordinate(system, 3, 2, 0.0, 0.0)


def test_stationary_skew_fixed_point():
    result = iterate_fiber_stationary(lambda x: 0.5 * x + 1.0, lambda x, y: 0.5 * y + x, (0.0, 0.0), 1e-10, 500)
    x, y = result.pair
    assert x[0] == pytest.approx(2.0, abs=1e-8)
    assert y[0] == pytest.approx(4.0, abs=1e-8)
    assert result.residual < 1e-9
    assert result.lambda_hat < 1.0


def test_stationary_skew_rejects_expanding_fiber():
    with pytest.raises(DomainError):
        iterate_fiber_stationary(lambda x: 0.5 * x, lambda x, y: 2.0 * y, (1.0, 1.0), 1e-10, 100)


def test_nonstationary_run_reduces_to_stationary(affine_skew):
    system = affine_skew.system
    tol = 1e-10
    policy = FiberPolicy(tol=tol)
    result = iterate_fiber_nonstationary(system, (np.ones(1), np.ones(1)), policy)
    stationary = iterate_fiber_stationary(
        lambda x: 0.5 * x, lambda x, y: 0.5 * y + x, (1.0, 1.0), tol, 1000,
    )
    assert distance(system.base_space, result.pair[0], stationary.pair[0]) <= 2 * tol
    assert distance(system.fiber_space, result.pair[1], stationary.pair[1]) <= 2 * tol
    assert result.label == FIBER_LABEL


def test_affine_skew_limit_is_start_independent(affine_skew):
    system = affine_skew.system
    reference = skew_compose_eval(system, 200, (np.ones(1), np.zeros(1)))
    rng = np.random.default_rng(5)
    for x, y in rng.uniform(-5.0, 5.0, size=(5, 2)):
        result = iterate_fiber_nonstationary(system, (x, y), FiberPolicy(tol=1e-10))
        assert distance(system.base_space, result.pair[0], reference[0]) <= 1e-8
        assert distance(system.fiber_space, result.pair[1], reference[1]) <= 1e-8
        assert result.diagnostics["start_independence"]["agrees"]


def test_affine_skew_base_certificate_is_sound(affine_skew):
    system = affine_skew.system
    result = iterate_fiber_nonstationary(system, (np.array([3.0]), np.array([-2.0])), FiberPolicy(tol=1e-8))
    reference = compose_eval(system.base, 10 * result.n_used, [3.0])
    assert distance(system.base_space, result.pair[0], reference) <= result.base_certificate.total + 1e-12


def test_certification_constants_bound_the_fiber_maps(affine_skew):
    system = affine_skew.system
    certification = certify_skew_system(system, FiberPolicy())
    assert 0.5 <= certification.lam < 1.0
    assert 0.5 <= certification.mu < 1.0
    rng = np.random.default_rng(2)
    for n, x, y, y_other in zip(range(1, 30), *rng.uniform(-3.0, 3.0, size=(3, 29))):
        gap = distance(system.fiber_space, system.fiber.apply(n, [x], [y]), system.fiber.apply(n, [x], [y_other]))
        assert gap <= certification.lam * abs(y - y_other) + 1e-9


def test_condition2_fiber_refusal_with_certified_base():
    system = build_condition2_counterexample().system
    with pytest.raises(RefusalError) as info:
        certify_skew_system(system, FiberPolicy(), (np.zeros(1), np.zeros(1)))
    assert "condition (2) FiberBounded" in info.value.conditions
    base = iterate_nonstationary(system.base, system.x0, np.zeros(1), NonstationaryPolicy(tol=1e-10))
    assert abs(base.point[0]) <= 1e-10


def test_condition3_refusal_and_split_raw_limits():
    scenario = build_condition3_counterexample()
    system = scenario.system
    with pytest.raises(RefusalError) as info:
        iterate_fiber_nonstationary(system, scenario.start, FiberPolicy(max_n=scenario.max_n))
    assert "condition (3) Equicontinuous" in info.value.conditions

    _, pair_a, outcome_a = raw_skew_orbit(system, scenario.expected.start_a, scenario.max_n)
    _, pair_b, outcome_b = raw_skew_orbit(system, scenario.expected.start_b, scenario.max_n)
    assert outcome_a == outcome_b == "stable"
    assert pair_a[0][0] == pytest.approx(0.0, abs=1e-9)
    assert pair_a[1][0] == pytest.approx(0.0, abs=1e-9)
    assert pair_b[0][0] == pytest.approx(0.0, abs=1e-9)
    assert pair_b[1][0] == pytest.approx(0.25, abs=1e-9)


def test_raw_orbit_reports_divergence():
    system = build_condition2_counterexample().system
    trace, _, outcome = raw_skew_orbit(system, (np.zeros(1), np.zeros(1)), 200)
    assert outcome == "diverged"
    assert len(trace) < 200


def test_fiber_run_budget_exhaustion(affine_skew):
    with pytest.raises(NonConvergenceError) as info:
        iterate_fiber_nonstationary(affine_skew.system, (np.ones(1), np.ones(1)), FiberPolicy(max_n=15))
    assert len(info.value.trace) == 15


def test_convergence_plan_and_diagnostics_hold(affine_skew):
    system = affine_skew.system
    policy = FiberPolicy()
    plan = build_convergence_plan(system, 1e-3, policy=policy)
    assert 2.0 * plan.lam ** (plan.N0 - 1) * plan.L < 1e-3
    assert plan.mu ** plan.N1 * plan.M < plan.delta
    assert plan.N0 >= 1 and plan.N1 >= 0
    n = plan.N0 + plan.N1 + 1
    table = convergence_diagnostics(system, plan, n + 10, n)
    assert table.holds, table.failures()
    assert len(table.rows) == plan.N0
    with pytest.raises(StructuralError):
        convergence_diagnostics(system, plan, n, n - 1 - plan.N1)


def test_diagnostics_with_equal_orbit_lengths(affine_skew):
    plan = build_convergence_plan(affine_skew.system, 1e-3)
    n = plan.N0 + plan.N1 + 1
    table = convergence_diagnostics(affine_skew.system, plan, n, n)
    assert all(row["C"] == 0.0 for row in table.rows)


def test_plan_for_forgetful_fiber(lambda_zero_system):
    plan = build_convergence_plan(lambda_zero_system, 1e-3)
    assert plan.lam == 0.0
    assert plan.N0 == 2
    n = plan.N0 + plan.N1 + 1
    table = convergence_diagnostics(lambda_zero_system, plan, n + 5, n)
    assert all(row["A"] == 0.0 for row in table.rows)
    assert table.holds


def test_start_independence_bookkeeping(affine_skew):
    system = affine_skew.system
    certification = certify_skew_system(system, FiberPolicy(), (np.array([2.0]), np.array([3.0])))
    bookkeeping = start_independence_diagnostics(system, (np.array([2.0]), np.array([3.0])), 25, certification.lam)
    assert bookkeeping["holds"]
    assert len(bookkeeping["rows"]) == 25
    assert bookkeeping["C_n"] <= bookkeeping["telescoped_bound"] + 1e-12
    assert all(row["B"] <= bookkeeping["S_prime"] + 1e-12 for row in bookkeeping["rows"])


def test_start_independence_from_the_anchor_is_trivial(affine_skew):
    system = affine_skew.system
    bookkeeping = start_independence_diagnostics(system, (system.x0, system.y0), 12, 0.5)
    assert bookkeeping["C_n"] == 0.0
    assert bookkeeping["telescoped_bound"] == 0.0


def test_mismatched_base_spaces_are_rejected(real_line, halving):
    plane = MetricSpaceDescriptor.euclidean(2)
    fiber = FiberFamily(plane, real_line, lambda n, x, y: y)
    with pytest.raises(StructuralError):
        SkewSystem(halving, fiber, x0=np.zeros(1), y0=np.zeros(1))


def test_smooth_graph_slope_is_derivative_of_graph():
    started = time.perf_counter()
    errors = {}
    for grid_size in (32, 128):
        scenario = build_smooth_graph_demo(grid_size)
        result = iterate_fiber_nonstationary(scenario.system, scenario.start, FiberPolicy(tol=1e-10))
        u, v = result.pair
        errors[grid_size] = derivative_mismatch(scenario.system.base_space, u, v)
        assert scenario.check_oracle(result.pair)["error"] == errors[grid_size]
        reference = compose_eval(scenario.system.base, 10 * result.n_used, scenario.start[0])
        assert distance(scenario.system.base_space, u, reference) <= result.base_certificate.total + 1e-12
    assert errors[128] <= 1e-3
    assert errors[128] < errors[32]
    order = observed_order(sorted(errors.items()))[0]
    assert order > 1.0
    assert time.perf_counter() - started < 30.0


def test_rate_above_one_is_a_domain_error(real_line, halving):
    fiber = FiberFamily(real_line, real_line, lambda n, x, y: np.tanh(1.5 * np.asarray(y)) + x)
    system = SkewSystem(halving, fiber, x0=np.zeros(1), y0=np.zeros(1))
    with pytest.raises(DomainError):
        certify_skew_system(system, FiberPolicy())


def test_declared_fiber_rate_is_used(real_line):
    base = MapSequence.constant(real_line, lambda x: 0.25 * np.asarray(x), declared_mu=0.25)
    fiber = FiberFamily(real_line, real_line, lambda n, x, y: 0.5 * np.asarray(y) + x, declared_lambda=0.6)
    system = SkewSystem(base, fiber, x0=np.zeros(1), y0=np.zeros(1))
    certification = certify_skew_system(system, FiberPolicy())
    assert certification.mu == 0.25
    assert certification.lam == 0.6


def test_small_fiber_jump_is_refused(real_line, halving):
    fiber = FiberFamily(real_line, real_line, lambda n, x, y: 0.5 * np.asarray(y) + x + 0.005 * (np.abs(x) > 0))
    system = SkewSystem(halving, fiber, x0=np.zeros(1), y0=np.zeros(1), name="small-jump")
    with pytest.raises(RefusalError) as info:
        iterate_fiber_nonstationary(system, (np.ones(1), np.ones(1)), FiberPolicy(tol=1e-10))
    assert info.value.conditions == ["condition (3) Equicontinuous"]


def test_fiber_run_base_coordinate_is_the_composed_base(affine_skew):
    system = affine_skew.system
    for start in [(np.ones(1), np.zeros(1)), (np.array([3.0]), np.array([-2.0]))]:
        result = iterate_fiber_nonstationary(system, start, FiberPolicy(tol=1e-10))
        assert np.array_equal(result.pair[0], compose_eval(system.base, result.n_used, start[0]))
        for row in result.trace.rows[:5]:
            assert np.array_equal(row.base, compose_eval(system.base, row.n, start[0]))

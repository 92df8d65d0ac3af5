# scenarios/smooth_graph.py

"""
Desk-scale invariant-graph demo: the fiber contraction forces the limit slope
field to be the derivative of the limit graph.

The base space holds grid samples of a graph u(theta) updated by
u <- T_n(theta, u(theta)); the fiber holds a candidate derivative v updated by
the formally differentiated map v <- dT_n/dtheta + dT_n/dv * v. Partial
derivatives come from sympy in closed form.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from core.errors import ConfigError, DomainError
from core.maps import FiberFamily, MapSequence, SkewSystem
from core.metric_core import MetricSpaceDescriptor, grid_nodes, grid_spacing
from probes.lipschitz_probe import RATE_INFLATION
from scenarios.base import Converges, Scenario

logger = logging.getLogger(__name__)

THETA, V, N = sp.symbols("theta v n")

FAMILIES = {
    "default": "cos(v + theta)/2 + 1 + 1/n",
    "theta-free": "cos(v)/2 + 1 + 1/n",
    "stationary": "cos(v + theta)/2 + 3/2",
}
MIN_GRID_SIZE = 16
GRAPH_DOMAIN = (0.0, 1.0)
# Sample grid for bounding |dT/dv|.
RATE_SAMPLE_V = np.linspace(-10.0, 10.0, 401)
RATE_SAMPLE_N = 20


@dataclass(frozen=True)
class GraphFamily:
    """
    A family T_n(theta, v) with its two partial derivatives, vectorised over grid nodes.
    """

    expression: sp.Expr
    value: Callable
    d_theta: Callable
    d_v: Callable

    @classmethod
    def from_expression(cls, text):
        """
        Parses T_n(theta, v) from a sympy expression in the symbols theta, v and n.

        Raises:
            ConfigError: If the text does not parse or uses other symbols.
        """
        try:
            expression = sp.sympify(text, locals={"theta": THETA, "v": V, "n": N})
        except (sp.SympifyError, TypeError) as exc:
            raise ConfigError(f"cannot parse graph family '{text}': {exc}") from exc
        extra = expression.free_symbols - {THETA, V, N}
        if extra:
            raise ConfigError(f"graph family '{text}' uses unknown symbols {sorted(map(str, extra))}")
        args = (N, THETA, V)
        return cls(
            expression,
            sp.lambdify(args, expression, modules="numpy"),
            sp.lambdify(args, sp.diff(expression, THETA), modules="numpy"),
            sp.lambdify(args, sp.diff(expression, V), modules="numpy"),
        )

    @staticmethod
    def evaluate(fn, n, theta, v):
        # Constant partials come back as scalars.
        return np.array(np.broadcast_to(np.asarray(fn(n, theta, v), dtype=float), np.shape(theta)))

    def describe(self):
        return {
            "T": str(self.expression),
            "dT/dtheta": str(sp.diff(self.expression, THETA)),
            "dT/dv": str(sp.diff(self.expression, V)),
        }


def fiber_rate_bound(family, nodes):
    """
    Returns the sampled sup of |dT_n/dv| over n <= 20, the grid nodes and v in [-10, 10].
    """
    theta, v = np.meshgrid(nodes, RATE_SAMPLE_V)
    return max(
        float(np.max(np.abs(GraphFamily.evaluate(family.d_v, n, theta, v))))
        for n in range(1, RATE_SAMPLE_N + 1)
    )


def derivative_mismatch(space, u, v):
    """
    Returns max over nodes of |v - du/dtheta| with du/dtheta from second-order finite differences.
    """
    derivative = np.gradient(np.asarray(u, dtype=float), grid_nodes(space), edge_order=2)
    return float(np.max(np.abs(np.asarray(v, dtype=float) - derivative)))


def build_smooth_graph_demo(grid_size=128, family="default"):
    """
    Builds the invariant-graph skew system on GridFunction(grid_size).

    Args:
        grid_size (int): Number of grid nodes, >= 16.
        family (str): A name from FAMILIES or a sympy expression in theta, v and n.

    Returns:
        Scenario: A Converges scenario whose oracle is the finite-difference derivative check.

    Raises:
        ConfigError: If grid_size is too small or the family does not parse.
        DomainError: If the sampled |dT/dv| is not below 1.
    """
    grid_size = int(grid_size)
    if grid_size < MIN_GRID_SIZE:
        raise ConfigError(f"smooth-graph demo needs grid_size >= {MIN_GRID_SIZE}, got {grid_size}")
    graph = GraphFamily.from_expression(FAMILIES.get(family, family))
    space = MetricSpaceDescriptor.grid_function(grid_size, GRAPH_DOMAIN)
    nodes = grid_nodes(space)

    # Nodewise mean value theorem: Lip(f_n) and Lip(h_n^u) in the sup metric are both sup |dT/dv|.
    lam = fiber_rate_bound(graph, nodes) * RATE_INFLATION
    if lam >= 1.0:
        raise DomainError(f"graph family '{graph.expression}' has sup |dT/dv| = {lam:.6g} >= 1")

    base = MapSequence(
        space,
        lambda n: (lambda u: GraphFamily.evaluate(graph.value, n, nodes, u)),
        declared_mu=lam,
        name="graph-transform",
    )
    fiber = FiberFamily(
        space,
        space,
        lambda n, u, v: (GraphFamily.evaluate(graph.d_theta, n, nodes, u)
                         + GraphFamily.evaluate(graph.d_v, n, nodes, u) * np.asarray(v, dtype=float)),
        declared_lambda=lam,
        name="slope-transform",
    )
    system = SkewSystem(base, fiber, x0=np.zeros(grid_size), y0=np.zeros(grid_size), name="smooth-graph")
    spacing = grid_spacing(space)

    def oracle(value):
        u, v = value
        error = derivative_mismatch(space, u, v)
        return {"reference": None, "error": error, "grid_spacing": spacing,
                "observed_constant": error / spacing ** 2}

    return Scenario(
        name="smooth-graph",
        system=system,
        expected=Converges(),
        start=(np.zeros(grid_size), np.zeros(grid_size)),
        oracle=oracle,
        description="graph transform on a grid: the limit slope field is the derivative of the limit graph",
        params={"grid_size": grid_size, "family": family},
        notes={**graph.describe(), "lambda_bound": lam, "domain": list(GRAPH_DOMAIN)},
    )


def observed_order(errors):
    """
    Estimates the order of accuracy from (grid_size, error) pairs under refinement.

    Returns:
        list: One order estimate per consecutive pair of grids.
    """
    orders = []
    for (size_a, err_a), (size_b, err_b) in zip(errors, errors[1:]):
        ratio = (size_b - 1) / (size_a - 1)
        orders.append(float(np.log(err_a / err_b) / np.log(ratio)) if err_a > 0 and err_b > 0 else float("nan"))
    logger.info("smooth-graph refinement %s, observed order %s", errors, orders)
    return orders

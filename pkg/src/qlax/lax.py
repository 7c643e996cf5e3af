"""Lax flows driven by scaled operator paths.

The flow ``d/dt L = [q P(q0 t), L]`` with ``L(0) = L0`` is solved two ways:

* conjugation: ``L(t) = g(t) L0 g(t)^(-1)`` with ``g`` the time-ordered
  exponential of the scaled path (the default solver), and
* direct grade-by-grade integration of the bracket system
  ``L_0 = L0``, ``L_i' = [P(q0 t), L_{i-1}]`` (an independent second route).

Diagnostics: a centred-difference residual of the flow equation, conserved
traces of powers (conjugation invariance), and a plain RK4 oracle for the
evaluated series, whose error must shrink like ``q0^(order+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qlax.algebra import (
    MATRIX,
    AlgebraElement,
    CapabilityError,
    DomainError,
    ShapeMismatchError,
    commutator,
    matrix_element,
)
from qlax.series import GradedSeries
from qlax.timeorder import (
    FlowSample,
    GroupSeriesPath,
    OperatorPath,
    _check_scaling,
    _expand_grid,
    _integrate_chain,
    time_ordered_exp,
)

DEFAULT_ORDER = 8
DEFAULT_GRID = (1e-3, 1.0)
DEFAULT_SCALING = 0.5


@dataclass(frozen=True)
class LaxProblem:
    """A Lax flow instance: initial element, driving path, scaling, truncation, grid."""

    initial: AlgebraElement
    path: OperatorPath
    q0: float = DEFAULT_SCALING
    order: int = DEFAULT_ORDER
    grid: tuple[float, float] = DEFAULT_GRID

    def __post_init__(self) -> None:
        if self.initial.descriptor != self.path.descriptor:
            raise ShapeMismatchError("initial element and path live in different algebras")
        _check_scaling(self.q0)
        if self.order < 1:
            raise DomainError("truncation order must be >= 1")
        _expand_grid(self.grid)


@dataclass(frozen=True, eq=False)
class LaxFlowResult:
    """Solver output: the group path ``g`` and the conjugated flow ``L``."""

    problem: LaxProblem
    group: GroupSeriesPath
    flow: FlowSample


def solve_lax(problem: LaxProblem) -> LaxFlowResult:
    """Conjugation solver: ``L(t) = g(t) L0 g(t)^(-1)`` node by node."""
    group = time_ordered_exp(problem.path, problem.q0, problem.order, problem.grid)
    initial_series = GradedSeries.single(
        problem.initial.descriptor, problem.order, 0, problem.initial)
    nodes = []
    for g in group.series:
        nodes.append((g * initial_series) * g.inverse())
    flow = FlowSample(times=group.times, series=tuple(nodes), step=group.step,
                      order=problem.order, q0=problem.q0)
    return LaxFlowResult(problem=problem, group=group, flow=flow)


def integrate_directly(problem: LaxProblem) -> FlowSample:
    """Second route: RK4 on the triangular bracket system, no conjugation."""
    times, nodes = _integrate_chain(commutator, problem.path, problem.q0,
                                    problem.initial, problem.order, problem.grid)
    return FlowSample(times=times, series=nodes, step=float(problem.grid[0]),
                      order=problem.order, q0=problem.q0)


def flow_difference(a: FlowSample, b: FlowSample) -> np.ndarray:
    """Per-grade max norm of the difference of two sampled flows."""
    if len(a) != len(b) or a.order != b.order:
        raise ShapeMismatchError("flow samples have different shapes")
    worst = np.zeros(a.order + 1)
    for sa, sb in zip(a.series, b.series):
        for n, (ca, cb) in enumerate(zip(sa.coeffs, sb.coeffs)):
            value = (ca - cb).norm()
            if value > worst[n]:
                worst[n] = value
    return worst


def lax_residual(result: LaxFlowResult) -> np.ndarray:
    """Per-grade residual of ``d/dt L = [q P(q0 t), L]`` by centred differences."""
    flow = result.flow
    if len(flow) < 3:
        raise DomainError("need at least three nodes for centred differences")
    path = result.problem.path
    q0 = result.problem.q0
    order = flow.order
    inv_two_step = 1.0 / (2.0 * flow.step)
    worst = np.zeros(order + 1)
    zero = AlgebraElement.zero(flow.descriptor)
    for k in range(1, len(flow) - 1):
        derivative = (flow.series[k + 1] - flow.series[k - 1]) * inv_two_step
        p = path.at(q0 * flow.times[k])
        node = flow.series[k]
        bracket = [zero]
        for n in range(1, order + 1):
            bracket.append(commutator(p, node.coeffs[n - 1]))
        for n in range(order + 1):
            value = (derivative.coeffs[n] - bracket[n]).norm()
            if value > worst[n]:
                worst[n] = value
    return worst


@dataclass(frozen=True, eq=False)
class TraceDriftTable:
    """Per-node grade coefficients of ``trace(L^power)`` and their drift from t=0."""

    power: int
    times: np.ndarray
    values: np.ndarray  # shape (nodes, order + 1)
    drift: np.ndarray   # shape (order + 1,)


def conserved_trace_tables(result: LaxFlowResult, max_power: int) -> dict[int, TraceDriftTable]:
    """Trace-of-power tables for every ``k <= max_power`` in one pass."""
    if result.flow.descriptor.backend != MATRIX:
        raise CapabilityError("trace diagnostics need the matrix backend")
    if not 1 <= max_power <= 4:
        raise DomainError("trace powers are supported for 1 <= k <= 4")
    flow = result.flow
    order = flow.order
    node_count = len(flow)
    dtype = np.complex128 if flow.descriptor.field == "complex" else np.float64
    values = {k: np.zeros((node_count, order + 1), dtype=dtype) for k in range(1, max_power + 1)}
    for node_index, node in enumerate(flow.series):
        power_series = node
        for k in range(1, max_power + 1):
            if k > 1:
                power_series = power_series * node
            values[k][node_index] = [c.trace() for c in power_series.coeffs]
    tables = {}
    for k in range(1, max_power + 1):
        drift = np.abs(values[k] - values[k][0]).max(axis=0)
        tables[k] = TraceDriftTable(power=k, times=flow.times, values=values[k], drift=drift)
    return tables


def conserved_traces(result: LaxFlowResult, power: int) -> TraceDriftTable:
    """Grade-wise trace of ``L^power`` per node, with max drift against t = 0."""
    return conserved_trace_tables(result, power)[power]


@dataclass(frozen=True, eq=False)
class OracleComparison:
    """Evaluated-series error against a plain RK4 integration, at q0 and q0/2."""

    q0: float
    error: float
    error_half: float
    log2_ratio: float
    expected_order: int


def _rk4_evolution(problem: LaxProblem, q0: float) -> list[AlgebraElement]:
    """Plain RK4 for ``y' = [q0 P(q0 t), y]`` (no grading)."""
    scaled = problem.path.scaled(q0)
    step, _horizon, steps = _expand_grid(problem.grid)
    half = 0.5 * step
    sixth = step / 6.0
    y = problem.initial
    nodes = [y]
    t = 0.0
    for _ in range(steps):
        k1 = commutator(scaled.at(t), y)
        k2 = commutator(scaled.at(t + half), y + half * k1)
        k3 = commutator(scaled.at(t + half), y + half * k2)
        k4 = commutator(scaled.at(t + step), y + step * k3)
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        nodes.append(y)
        t += step
    return nodes


def _oracle_error(problem: LaxProblem, q0: float) -> float:
    series_nodes = solve_lax(
        LaxProblem(problem.initial, problem.path, q0, problem.order, problem.grid)
    ).flow.series
    oracle_nodes = _rk4_evolution(problem, q0)
    worst = 0.0
    for series_node, oracle_node in zip(series_nodes, oracle_nodes):
        value = (series_node.evaluate(q0) - oracle_node).norm()
        if value > worst:
            worst = value
    return worst


def oracle_integrate(problem: LaxProblem) -> OracleComparison:
    """Compare the evaluated series against direct integration at q0 and q0/2.

    The truncation error scales like ``q0^(order+1)``, so halving the scaling
    should divide the error by about ``2^(order+1)``.
    """
    if problem.initial.descriptor.backend != MATRIX:
        raise CapabilityError("the evaluation oracle needs the matrix backend")
    error = _oracle_error(problem, problem.q0)
    error_half = _oracle_error(problem, problem.q0 / 2.0)
    if error > 0.0 and error_half > 0.0:
        ratio = math.log2(error / error_half)
    else:
        ratio = math.inf if error > error_half else 0.0
    return OracleComparison(q0=problem.q0, error=error, error_half=error_half,
                            log2_ratio=ratio, expected_order=problem.order + 1)


# -- presets ----------------------------------------------------------------

def _preset_sl2_nilpotent() -> tuple[AlgebraElement, OperatorPath]:
    initial = matrix_element([[0.0, 0.0], [1.0, 0.0]])
    raising = matrix_element([[0.0, 1.0], [0.0, 0.0]])
    return initial, OperatorPath.constant(raising, name="sl2-nilpotent")


def _preset_toda_3() -> tuple[AlgebraElement, OperatorPath]:
    # Symmetric tridiagonal initial element with its antisymmetric part as the path.
    off = 0.4
    diagonal = (0.5, 0.0, -0.5)
    initial = matrix_element([
        [diagonal[0], off, 0.0],
        [off, diagonal[1], off],
        [0.0, off, diagonal[2]],
    ])
    antisymmetric = matrix_element([
        [0.0, off, 0.0],
        [-off, 0.0, off],
        [0.0, -off, 0.0],
    ])
    return initial, OperatorPath.constant(antisymmetric, name="toda-3")


def _preset_rotation_2() -> tuple[AlgebraElement, OperatorPath]:
    initial = matrix_element([[1.0, 0.0], [0.0, -1.0]])
    generator = matrix_element([[0.0, -0.4], [0.4, 0.0]])
    return initial, OperatorPath.constant(generator, name="rotation-2")


_PRESETS = {
    "sl2-nilpotent": _preset_sl2_nilpotent,
    "toda-3": _preset_toda_3,
    "rotation-2": _preset_rotation_2,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_problem(name: str, *, q0: float = DEFAULT_SCALING, order: int = DEFAULT_ORDER,
                   grid: tuple[float, float] = DEFAULT_GRID) -> LaxProblem:
    """A named desk-scale problem; see :data:`PRESET_NAMES`."""
    try:
        build = _PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}")
    initial, path = build()
    return LaxProblem(initial=initial, path=path, q0=q0, order=order, grid=grid)

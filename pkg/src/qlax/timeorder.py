"""Time-ordered exponentials of scaled operator paths.

For a smooth path ``t -> P(t)`` and a scaling parameter ``q0 in (0, 1]``, the
scaled path ``t -> q P(q t)`` has a time-ordered exponential whose grade-``i``
coefficient is the iterated simplex integral of ``i`` path factors.  Those
coefficients solve the triangular linear system

    A_0(t) = 1,    A_i'(t) = P(q0 t) A_{i-1}(t),    A_i(0) = 0  (i >= 1),

which this module integrates with the classical fixed-step RK4 scheme.  The
grade marker stays formal: coefficients carry the numeric parameter ``q0``
only inside the integrand ``P(q0 s)``, and each grade-``i`` coefficient is the
weight of ``q^i`` in the group series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qlax.algebra import AlgebraDescriptor, AlgebraElement, DomainError, ShapeMismatchError
from qlax.series import GradedSeries

MAX_PATH_DEGREE = 8


@dataclass(frozen=True)
class OperatorPath:
    """A polynomial path ``P(t) = sum_d coeffs[d] t^d`` in one coefficient algebra.

    ``q0`` records the scaling parameter bundled with the path by problem
    builders; integration routines take the parameter explicitly and use the
    bundled value only as a default.
    """

    coeffs: tuple[AlgebraElement, ...]
    q0: float = 1.0
    name: str | None = None

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise DomainError("a path needs at least one coefficient")
        if len(self.coeffs) - 1 > MAX_PATH_DEGREE:
            raise DomainError(f"path degree is capped at {MAX_PATH_DEGREE}")
        descriptor = self.coeffs[0].descriptor
        for c in self.coeffs[1:]:
            if c.descriptor != descriptor:
                raise ShapeMismatchError("path coefficients live in different algebras")
        _check_scaling(self.q0)

    @classmethod
    def constant(cls, element: AlgebraElement, q0: float = 1.0,
                 name: str | None = None) -> "OperatorPath":
        return cls((element,), q0, name)

    @classmethod
    def polynomial(cls, coeffs, q0: float = 1.0, name: str | None = None) -> "OperatorPath":
        return cls(tuple(coeffs), q0, name)

    @classmethod
    def zero(cls, descriptor: AlgebraDescriptor, q0: float = 1.0) -> "OperatorPath":
        return cls((AlgebraElement.zero(descriptor),), q0)

    @property
    def descriptor(self) -> AlgebraDescriptor:
        return self.coeffs[0].descriptor

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def at(self, t: float) -> AlgebraElement:
        """Evaluate the polynomial path (Horner form)."""
        acc = self.coeffs[-1]
        for d in range(self.degree - 1, -1, -1):
            acc = self.coeffs[d] + t * acc
        return acc

    def scaled(self, q0: float) -> "OperatorPath":
        """The path ``t -> q0 * P(q0 t)``: coefficient ``d`` picks up ``q0^(d+1)``."""
        _check_scaling(q0)
        factors = [q0 ** (d + 1) for d in range(self.degree + 1)]
        return OperatorPath(tuple(f * c for f, c in zip(factors, self.coeffs)), q0, self.name)


def scaling_transform(path: OperatorPath, q0: float) -> OperatorPath:
    """Materialise the scaled path ``t -> q0 * P(q0 t)`` as a new polynomial path."""
    return path.scaled(q0)


@dataclass(frozen=True, eq=False)
class FlowSample:
    """A series-valued path sampled on a uniform time grid."""

    times: np.ndarray
    series: tuple[GradedSeries, ...]
    step: float
    order: int
    q0: float

    @property
    def descriptor(self) -> AlgebraDescriptor:
        return self.series[0].descriptor

    def __len__(self) -> int:
        return len(self.series)


class GroupSeriesPath(FlowSample):
    """A flow sample whose nodes are group series (unit grade-0 coefficient)."""


def _check_scaling(q0: float) -> None:
    if not 0.0 < q0 <= 1.0:
        raise DomainError(f"scaling parameter must lie in (0, 1], got {q0}")


def _expand_grid(grid) -> tuple[float, float, int]:
    step, horizon = grid
    step = float(step)
    horizon = float(horizon)
    if step <= 0.0:
        raise DomainError("grid step must be positive")
    if horizon < step:
        raise DomainError("grid horizon must cover at least one step")
    count = horizon / step
    steps = round(count)
    if abs(count - steps) > 1e-9 * max(1.0, steps):
        raise DomainError("grid horizon must be a whole number of steps")
    return step, horizon, int(steps)


def _axpy(stack, factor, slopes):
    return [x + factor * k for x, k in zip(stack, slopes)]


def _integrate_chain(produce, path: OperatorPath, q0: float, base: AlgebraElement,
                     order: int, grid) -> tuple[np.ndarray, tuple[GradedSeries, ...]]:
    """RK4 for the triangular system ``X_i' = produce(P(q0 t), X_{i-1})``.

    ``X_0 = base`` is constant and ``X_i(0) = 0`` for ``i >= 1``.  Returns the
    node times and, per node, the graded series ``(base, X_1, ..., X_order)``.
    """
    if order < 1:
        raise DomainError("truncation order must be >= 1")
    _check_scaling(q0)
    if path.descriptor != base.descriptor:
        raise ShapeMismatchError("path and base element live in different algebras")
    step, horizon, steps = _expand_grid(grid)
    zero = AlgebraElement.zero(base.descriptor)
    times = np.linspace(0.0, horizon, steps + 1)
    half = 0.5 * step
    sixth = step / 6.0
    constant_path = path.degree == 0

    def slopes(t, stack):
        p = path.coeffs[0] if constant_path else path.at(q0 * t)
        out = [produce(p, base)]
        for x in stack[:-1]:
            out.append(produce(p, x))
        return out

    stack = [zero] * order
    nodes = [GradedSeries([base, *stack])]
    for k in range(steps):
        t = times[k]
        k1 = slopes(t, stack)
        k2 = slopes(t + half, _axpy(stack, half, k1))
        k3 = slopes(t + half, _axpy(stack, half, k2))
        k4 = slopes(t + step, _axpy(stack, step, k3))
        stack = [
            x + sixth * (a + 2.0 * b + 2.0 * c + d)
            for x, a, b, c, d in zip(stack, k1, k2, k3, k4)
        ]
        nodes.append(GradedSeries([base, *stack]))
    return times, tuple(nodes)


def time_ordered_exp(path: OperatorPath, q0: float, order: int, grid) -> GroupSeriesPath:
    """Grade-by-grade time-ordered exponential of the scaled path.

    Computing with a larger truncation order never changes the shared lower
    grades: grade ``i`` only ever reads grades below it.
    """
    base = AlgebraElement.one(path.descriptor)
    times, nodes = _integrate_chain(lambda p, x: p * x, path, q0, base, order, grid)
    return GroupSeriesPath(times=times, series=nodes, step=float(grid[0]),
                           order=order, q0=q0)


def left_log_derivative_residual(group: GroupSeriesPath, path: OperatorPath,
                                 q0: float) -> np.ndarray:
    """Per-grade residual of ``(d/dt g) g^(-1) = q P(q0 t)`` on interior nodes.

    The time derivative uses centred differences with the grid step, so the
    profile mixes the integration error with an O(step^2) differencing floor.
    """
    if len(group) < 3:
        raise DomainError("need at least three nodes for centred differences")
    order = group.order
    descriptor = group.descriptor
    inv_two_step = 1.0 / (2.0 * group.step)
    worst = np.zeros(order + 1)
    for k in range(1, len(group) - 1):
        derivative = (group.series[k + 1] - group.series[k - 1]) * inv_two_step
        target = GradedSeries.single(descriptor, order, 1, path.at(q0 * group.times[k]))
        residual = derivative * group.series[k].inverse() - target
        for n, c in enumerate(residual.coeffs):
            value = c.norm()
            if value > worst[n]:
                worst[n] = value
    return worst

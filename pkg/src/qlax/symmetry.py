"""Flows of linear operators on the coefficient algebra.

A matrix algebra of size ``n`` carries the operator algebra of linear maps on
it, realised densely as ``n^2 x n^2`` matrices acting on row-major flattened
elements.  The bracket generator ``ad_P : X -> P X - X P`` lives there, and an
operator path ``t -> ad_{P(t)}`` drives an operator-level Lax flow

    d/dt S = [ad_{q P(q0 t)}, S],

solved by reusing the element-level machinery inside the operator algebra.
Conjugating an element by the group series of ``P`` agrees grade by grade
with applying the operator exponential of the ``ad`` path; that identity is a
built-in cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qlax.algebra import (
    MATRIX,
    AlgebraDescriptor,
    AlgebraElement,
    CapabilityError,
    ShapeMismatchError,
    commutator,
    matrix_descriptor,
)
from qlax.series import GradedSeries
from qlax.lax import LaxFlowResult, LaxProblem, lax_residual, solve_lax
from qlax.timeorder import FlowSample, GroupSeriesPath, OperatorPath, time_ordered_exp

DENSE_OPERATOR_LIMIT = 8


def operator_descriptor(base: AlgebraDescriptor) -> AlgebraDescriptor:
    """Descriptor of the dense operator algebra over a matrix algebra."""
    if base.backend != MATRIX:
        raise CapabilityError("operator flows are available over the matrix backend only")
    if base.n > DENSE_OPERATOR_LIMIT:
        raise CapabilityError(
            f"dense operator algebra is capped at n <= {DENSE_OPERATOR_LIMIT}")
    return matrix_descriptor(base.n * base.n, base.field)


@dataclass(frozen=True)
class AdOperator:
    """The bracket generator ``X -> P X - X P`` with its dense realisation."""

    generator: AlgebraElement
    matrix: AlgebraElement

    def apply(self, element: AlgebraElement) -> AlgebraElement:
        return commutator(self.generator, element)


def ad_operator(generator: AlgebraElement) -> AdOperator:
    """Build ``ad_P``; the dense payload is ``P (x) I - I (x) P^T`` (row-major)."""
    target = operator_descriptor(generator.descriptor)
    eye = np.eye(generator.descriptor.n, dtype=generator.data.dtype)
    dense = np.kron(generator.data, eye) - np.kron(eye, generator.data.T)
    return AdOperator(generator=generator, matrix=AlgebraElement(target, dense))


def ad_path(path: OperatorPath) -> OperatorPath:
    """Push a polynomial path through ``ad``: coefficients map termwise."""
    coeffs = tuple(ad_operator(c).matrix for c in path.coeffs)
    return OperatorPath(coeffs, path.q0, path.name)


def identity_operator(base: AlgebraDescriptor) -> AlgebraElement:
    return AlgebraElement.one(operator_descriptor(base))


def apply_operator(operator: AlgebraElement, element: AlgebraElement) -> AlgebraElement:
    """Apply a dense operator to an element via row-major flattening."""
    n = element.descriptor.n
    if operator.descriptor.n != n * n:
        raise ShapeMismatchError("operator size does not match the element algebra")
    flat = operator.data @ element.data.reshape(n * n)
    return AlgebraElement(element.descriptor, flat.reshape(n, n))


def apply_operator_series(operators: GradedSeries, elements: GradedSeries) -> GradedSeries:
    """Graded application ``(Phi . L)_n = sum_{i+j=n} Phi_i(L_j)``."""
    if operators.order != elements.order:
        raise ShapeMismatchError("series truncation orders differ")
    order = operators.order
    out: list[AlgebraElement | None] = [None] * (order + 1)
    for i, op in enumerate(operators.coeffs):
        if op.is_zero:
            continue
        for j in range(order + 1 - i):
            if elements.coeffs[j].is_zero:
                continue
            term = apply_operator(op, elements.coeffs[j])
            out[i + j] = term if out[i + j] is None else out[i + j] + term
    zero = AlgebraElement.zero(elements.descriptor)
    return GradedSeries([c if c is not None else zero for c in out])


@dataclass(frozen=True, eq=False)
class SymmetryFlowResult:
    """Operator-level flow: an element-level result inside the operator algebra."""

    result: LaxFlowResult

    @property
    def problem(self) -> LaxProblem:
        return self.result.problem

    @property
    def group(self) -> GroupSeriesPath:
        return self.result.group

    @property
    def flow(self) -> FlowSample:
        return self.result.flow


def solve_symmetry(initial_operator, path: OperatorPath, q0: float, order: int,
                   grid) -> SymmetryFlowResult:
    """Solve the operator-level flow started from ``initial_operator``.

    The initial value may be an :class:`AdOperator` or a dense operator-algebra
    element; the driving path is the element-level path, pushed through ``ad``.
    """
    if isinstance(initial_operator, AdOperator):
        initial_operator = initial_operator.matrix
    operator_path = ad_path(path)
    if initial_operator.descriptor != operator_path.descriptor:
        raise ShapeMismatchError("initial operator does not match the operator algebra")
    problem = LaxProblem(initial=initial_operator, path=operator_path,
                         q0=q0, order=order, grid=grid)
    return SymmetryFlowResult(result=solve_lax(problem))


def symmetry_residual(sym: SymmetryFlowResult) -> np.ndarray:
    """Per-grade residual of the operator-level flow equation itself."""
    return lax_residual(sym.result)


def symmetry_residual_full(sym: SymmetryFlowResult, lax: LaxFlowResult) -> np.ndarray:
    """Per-grade residual of ``(d/dt S).L - [ad_{q P(q0 t)}, S].L`` on a flow.

    ``S`` is the sampled operator series, ``L`` the sampled element series;
    both must share the time grid.  The time derivative uses centred
    differences with the grid step.
    """
    s_flow = sym.flow
    l_flow = lax.flow
    if len(s_flow) != len(l_flow) or s_flow.step != l_flow.step:
        raise ShapeMismatchError("operator and element flows use different grids")
    if s_flow.order != l_flow.order:
        raise ShapeMismatchError("operator and element flows use different orders")
    base_n = l_flow.descriptor.n
    if s_flow.descriptor.n != base_n * base_n:
        raise ShapeMismatchError("operator flow does not match the element algebra")
    order = s_flow.order
    q0 = sym.problem.q0
    element_path = _element_path(sym, lax)
    inv_two_step = 1.0 / (2.0 * s_flow.step)
    zero_op = AlgebraElement.zero(s_flow.descriptor)
    worst = np.zeros(order + 1)
    for k in range(1, len(s_flow) - 1):
        derivative = (s_flow.series[k + 1] - s_flow.series[k - 1]) * inv_two_step
        ad_p = ad_operator(element_path.at(q0 * s_flow.times[k])).matrix
        node = s_flow.series[k]
        bracket = [zero_op]
        for n in range(1, order + 1):
            bracket.append(commutator(ad_p, node.coeffs[n - 1]))
        residual_ops = GradedSeries(
            [derivative.coeffs[n] - bracket[n] for n in range(order + 1)])
        applied = apply_operator_series(residual_ops, l_flow.series[k])
        for n, c in enumerate(applied.coeffs):
            value = c.norm()
            if value > worst[n]:
                worst[n] = value
    return worst


def _element_path(sym: SymmetryFlowResult, lax: LaxFlowResult) -> OperatorPath:
    if lax.problem.q0 != sym.problem.q0:
        raise ShapeMismatchError("operator and element flows use different scalings")
    return lax.problem.path


def check_ad_exp_ad(path: OperatorPath, q0: float, order: int, grid,
                    seed: int = 0) -> np.ndarray:
    """Grade-wise gap between conjugation by ``Exp(P)`` and the exponential of ``ad_P``.

    A pseudo-random probe element is conjugated through the element-level
    solver, then compared against applying the operator-level group series.
    """
    descriptor = path.descriptor
    if descriptor.backend != MATRIX:
        raise CapabilityError("the dense cross-check needs the matrix backend")
    rng = np.random.default_rng(seed)
    probe_data = rng.standard_normal((descriptor.n, descriptor.n))
    if descriptor.field == "complex":
        probe_data = probe_data + 1j * rng.standard_normal((descriptor.n, descriptor.n))
    probe = AlgebraElement(descriptor, probe_data)

    conjugated = solve_lax(LaxProblem(initial=probe, path=path, q0=q0,
                                      order=order, grid=grid)).flow
    operator_group = time_ordered_exp_of_ad(path, q0, order, grid)
    worst = np.zeros(order + 1)
    for node_index in range(len(conjugated)):
        op_node = operator_group.series[node_index]
        for n in range(order + 1):
            applied = apply_operator(op_node.coeffs[n], probe)
            value = (conjugated.series[node_index].coeffs[n] - applied).norm()
            if value > worst[n]:
                worst[n] = value
    return worst


def time_ordered_exp_of_ad(path: OperatorPath, q0: float, order: int, grid) -> GroupSeriesPath:
    """The operator-level group series of the ``ad`` path."""
    return time_ordered_exp(ad_path(path), q0, order, grid)

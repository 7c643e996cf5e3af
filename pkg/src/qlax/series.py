"""Truncated formal series ``sum_n q^n a_n`` with noncommutative coefficients.

A :class:`GradedSeries` of order ``N`` keeps coefficients for grades
``0..N``; every operation works modulo ``q^(N+1)``.  The grade marker ``q``
is formal: coefficients may themselves depend on a numeric scaling parameter,
and :meth:`GradedSeries.evaluate` substitutes a number for the marker.

On series with invertible structure the usual group maps are exact finite
sums here:

* ``exp(S) = sum_{k<=N} S^k / k!`` for valuation >= 1,
* ``log(U) = sum_{k<=N} (-1)^(k+1) (U-1)^k / k`` for unit grade-0,
* ``U^(-1) = sum_{k<=N} (-1)^k (U-1)^k`` (Neumann) for unit grade-0,
* ``unit_inverse`` extends inversion to any invertible grade-0 coefficient
  on the matrix backend via ``U = a_0 (1 + a_0^(-1) S)``.
"""

from __future__ import annotations

import math
import numbers

import numpy as np

from qlax.algebra import (
    MATRIX,
    AlgebraDescriptor,
    AlgebraElement,
    CapabilityError,
    DomainError,
    ShapeMismatchError,
)


class GradedSeries:
    """Immutable truncated series; ``coeffs[n]`` is the grade-``n`` coefficient."""

    __slots__ = ("descriptor", "coeffs")

    def __init__(self, coeffs):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ShapeMismatchError("a graded series needs at least the grade-0 coefficient")
        descriptor = coeffs[0].descriptor
        for c in coeffs[1:]:
            if c.descriptor != descriptor:
                raise ShapeMismatchError("series coefficients live in different algebras")
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("GradedSeries is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, descriptor: AlgebraDescriptor, order: int) -> "GradedSeries":
        z = AlgebraElement.zero(descriptor)
        return cls([z] * (order + 1))

    @classmethod
    def unit(cls, descriptor: AlgebraDescriptor, order: int) -> "GradedSeries":
        z = AlgebraElement.zero(descriptor)
        return cls([AlgebraElement.one(descriptor)] + [z] * order)

    @classmethod
    def single(cls, descriptor: AlgebraDescriptor, order: int, grade: int,
               element: AlgebraElement) -> "GradedSeries":
        """The series ``q^grade * element`` truncated at ``order``."""
        if not 0 <= grade <= order:
            raise DomainError(f"grade {grade} outside 0..{order}")
        if element.descriptor != descriptor:
            raise ShapeMismatchError("element does not match the series descriptor")
        z = AlgebraElement.zero(descriptor)
        coeffs = [z] * (order + 1)
        coeffs[grade] = element
        return cls(coeffs)

    # -- structure ---------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def valuation(self):
        """Least grade with a nonzero coefficient; ``math.inf`` for the zero series."""
        for n, c in enumerate(self.coeffs):
            if not c.is_zero:
                return n
        return math.inf

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self.order == other.order and all(
            a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self) -> str:
        return f"<GradedSeries order={self.order} valuation={self.valuation()}>"

    def _check_compatible(self, other: "GradedSeries") -> None:
        if self.descriptor != other.descriptor:
            raise ShapeMismatchError("series live in different algebras")
        if self.order != other.order:
            raise ShapeMismatchError(
                f"truncation orders differ: {self.order} vs {other.order}")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        self._check_compatible(other)
        return GradedSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        self._check_compatible(other)
        return GradedSeries([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return GradedSeries([-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, GradedSeries):
            self._check_compatible(other)
            return self._cauchy(other)
        if isinstance(other, numbers.Number):
            return GradedSeries([c * other for c in self.coeffs])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return GradedSeries([c * other for c in self.coeffs])
        return NotImplemented

    def _cauchy(self, other: "GradedSeries") -> "GradedSeries":
        order = self.order
        out: list[AlgebraElement | None] = [None] * (order + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            for j in range(order + 1 - i):
                b = other.coeffs[j]
                if b.is_zero:
                    continue
                term = a * b
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        zero = AlgebraElement.zero(self.descriptor)
        return GradedSeries([c if c is not None else zero for c in out])

    # -- group maps --------------------------------------------------------

    def exp(self) -> "GradedSeries":
        """``sum_{k<=N} S^k / k!``; requires valuation >= 1 so the sum is finite."""
        if not self.coeffs[0].is_zero:
            raise DomainError("exp needs valuation >= 1 (zero grade-0 coefficient)")
        acc = GradedSeries.unit(self.descriptor, self.order)
        term = acc
        for k in range(1, self.order + 1):
            term = (term * self) * (1.0 / k)
            acc = acc + term
        return acc

    def _unit_offset(self) -> "GradedSeries":
        one = AlgebraElement.one(self.descriptor)
        if self.coeffs[0] != one:
            raise DomainError("grade-0 coefficient must equal the unit")
        return self - GradedSeries.unit(self.descriptor, self.order)

    def log(self) -> "GradedSeries":
        """``sum_{k<=N} (-1)^(k+1) (U-1)^k / k``; requires unit grade-0 coefficient."""
        offset = self._unit_offset()
        acc = GradedSeries.zero(self.descriptor, self.order)
        power = GradedSeries.unit(self.descriptor, self.order)
        for k in range(1, self.order + 1):
            power = power * offset
            acc = acc + power * ((-1.0) ** (k + 1) / k)
        return acc

    def inverse(self) -> "GradedSeries":
        """Neumann inverse ``sum_{k<=N} (-1)^k (U-1)^k``; requires unit grade-0."""
        offset = self._unit_offset()
        acc = GradedSeries.unit(self.descriptor, self.order)
        power = acc
        for k in range(1, self.order + 1):
            power = power * offset
            acc = acc + power * ((-1.0) ** k)
        return acc

    def unit_inverse(self) -> "GradedSeries":
        """Inverse for an invertible grade-0 coefficient (matrix backend).

        Writes ``U = a_0 (1 + a_0^(-1) S)`` and inverts the unit-headed factor
        with the Neumann sum; a singular ``a_0`` is a domain error.
        """
        if self.descriptor.backend != MATRIX:
            raise CapabilityError("unit_inverse needs the matrix backend (dense solve)")
        a0 = self.coeffs[0]
        eye = np.eye(self.descriptor.n, dtype=self.descriptor.dtype)
        try:
            a0_inv_data = np.linalg.solve(a0.data, eye)
        except np.linalg.LinAlgError as exc:
            raise DomainError("grade-0 coefficient is singular") from exc
        a0_inv = AlgebraElement(self.descriptor, a0_inv_data)
        unit = AlgebraElement.one(self.descriptor)
        headed = GradedSeries([unit] + [a0_inv * c for c in self.coeffs[1:]])
        return GradedSeries([c * a0_inv for c in headed.inverse().coeffs])

    # -- evaluation --------------------------------------------------------

    def evaluate(self, q0: float) -> AlgebraElement:
        """Substitute the number ``q0`` for the grade marker (Horner form)."""
        acc = self.coeffs[-1]
        for n in range(self.order - 1, -1, -1):
            acc = self.coeffs[n] + q0 * acc
        return acc

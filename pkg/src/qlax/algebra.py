"""Coefficient algebras: dense matrices and differential operators on the circle.

Two exact backends share one element contract:

* ``matrix`` -- dense square matrices over real or complex floats.
* ``circle-diffop`` -- operators ``sum_j a_j(x) D^j`` on the unit circle,
  ``D = d/dx``, whose coefficients are trigonometric polynomials stored by
  Fourier mode on the window ``|m| <= M``.  Composition uses the Leibniz rule

      (a D^j)(b D^k) = sum_{d<=j} C(j,d) * (a * d^d b/dx^d) D^(j+k-d)

  and is exact: a product whose result would need orders beyond ``J`` or
  modes beyond ``M`` raises :class:`WindowOverflowError` instead of being
  truncated.

Elements are immutable; every operation returns a new element.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from math import comb

import numpy as np

MATRIX = "matrix"
CIRCLE_DIFFOP = "circle-diffop"

REAL = "real"
COMPLEX = "complex"


class AlgebraError(Exception):
    """Base class for algebra-level failures."""


class ShapeMismatchError(AlgebraError):
    """Operands live in different algebras (backend, size or field differ)."""


class WindowOverflowError(AlgebraError):
    """An exact diffop product needs orders or modes beyond the descriptor caps."""


class CapabilityError(AlgebraError):
    """The requested operation is not available on this backend."""


class DomainError(AlgebraError):
    """An input violates a mathematical precondition."""


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Identifies one concrete coefficient algebra.

    ``matrix`` uses ``n``; ``circle-diffop`` uses the caps ``max_order`` (J,
    highest derivative order) and ``max_mode`` (M, Fourier window half-width).
    """

    backend: str
    n: int | None = None
    max_order: int | None = None
    max_mode: int | None = None
    field: str = REAL

    def __post_init__(self) -> None:
        if self.backend not in (MATRIX, CIRCLE_DIFFOP):
            raise ShapeMismatchError(f"unknown backend {self.backend!r}")
        if self.field not in (REAL, COMPLEX):
            raise ShapeMismatchError(f"unknown scalar field {self.field!r}")
        if self.backend == MATRIX:
            if self.n is None or self.n < 1:
                raise ShapeMismatchError("matrix backend needs n >= 1")
            if self.max_order is not None or self.max_mode is not None:
                raise ShapeMismatchError("matrix backend takes no diffop windows")
        else:
            if self.max_order is None or self.max_order < 0:
                raise ShapeMismatchError("diffop backend needs max_order >= 0")
            if self.max_mode is None or self.max_mode < 1:
                raise ShapeMismatchError("diffop backend needs max_mode >= 1")
            if self.n is not None:
                raise ShapeMismatchError("diffop backend takes no matrix size")

    @property
    def dtype(self) -> np.dtype:
        if self.backend == CIRCLE_DIFFOP:
            return np.dtype(np.complex128)
        return np.dtype(np.complex128 if self.field == COMPLEX else np.float64)

    @property
    def width(self) -> int:
        """Number of stored Fourier modes (diffop backend only)."""
        if self.backend != CIRCLE_DIFFOP:
            raise CapabilityError("mode window is a diffop notion")
        return 2 * self.max_mode + 1


def matrix_descriptor(n: int, field: str = REAL) -> AlgebraDescriptor:
    return AlgebraDescriptor(backend=MATRIX, n=n, field=field)


def diffop_descriptor(max_order: int, max_mode: int, field: str = COMPLEX) -> AlgebraDescriptor:
    return AlgebraDescriptor(backend=CIRCLE_DIFFOP, max_order=max_order, max_mode=max_mode, field=field)


def _check_same(a: AlgebraDescriptor, b: AlgebraDescriptor) -> None:
    if a != b:
        raise ShapeMismatchError(f"descriptor mismatch: {a} vs {b}")


class AlgebraElement:
    """One element of a coefficient algebra, tied to its descriptor.

    ``data`` is a read-only ndarray: ``(n, n)`` for matrices, ``(J+1, 2M+1)``
    for circle diffops (row ``j`` holds the Fourier coefficients of ``a_j`` on
    modes ``-M..M``).
    """

    __slots__ = ("descriptor", "data", "_zero_flag")

    def __init__(self, descriptor: AlgebraDescriptor, data: np.ndarray):
        array = np.array(data, dtype=descriptor.dtype)
        if descriptor.backend == MATRIX:
            if array.shape != (descriptor.n, descriptor.n):
                raise ShapeMismatchError(
                    f"matrix payload must be {descriptor.n}x{descriptor.n}, got {array.shape}")
        else:
            expected = (descriptor.max_order + 1, descriptor.width)
            if array.shape != expected:
                raise ShapeMismatchError(
                    f"diffop payload must have shape {expected}, got {array.shape}")
        array.setflags(write=False)
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "data", array)
        object.__setattr__(self, "_zero_flag", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("AlgebraElement is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        if descriptor.backend == MATRIX:
            shape = (descriptor.n, descriptor.n)
        else:
            shape = (descriptor.max_order + 1, descriptor.width)
        return cls(descriptor, np.zeros(shape, dtype=descriptor.dtype))

    @classmethod
    def one(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        if descriptor.backend == MATRIX:
            return cls(descriptor, np.eye(descriptor.n, dtype=descriptor.dtype))
        data = np.zeros((descriptor.max_order + 1, descriptor.width), dtype=descriptor.dtype)
        data[0, descriptor.max_mode] = 1.0
        return cls(descriptor, data)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        flag = self._zero_flag
        if flag is None:
            flag = not self.data.any()
            object.__setattr__(self, "_zero_flag", flag)
        return flag

    def order(self) -> int | None:
        """Highest derivative order with a nonzero coefficient (diffop only)."""
        if self.descriptor.backend != CIRCLE_DIFFOP:
            raise CapabilityError("order is defined for circle-diffop elements")
        rows = np.flatnonzero(self.data.any(axis=1))
        return int(rows[-1]) if rows.size else None

    def norm(self) -> float:
        """Frobenius norm for matrices; max over orders of the Fourier 2-norm for diffops."""
        if self.descriptor.backend == MATRIX:
            return float(np.linalg.norm(self.data))
        row_norms = np.sqrt((np.abs(self.data) ** 2).sum(axis=1))
        return float(row_norms.max())

    def trace(self):
        if self.descriptor.backend != MATRIX:
            raise CapabilityError("trace is available on the matrix backend only")
        value = self.data.trace()
        return complex(value) if self.descriptor.field == COMPLEX else float(value)

    # -- arithmetic --------------------------------------------------------

    def _coerce_scalar(self, scalar):
        if self.descriptor.dtype == np.float64:
            if isinstance(scalar, numbers.Real):
                return float(scalar)
            value = complex(scalar)
            if value.imag == 0.0:
                return value.real
            raise DomainError("complex scalar applied to a real-field element")
        return complex(scalar)

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        _check_same(self.descriptor, other.descriptor)
        return AlgebraElement(self.descriptor, self.data + other.data)

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        _check_same(self.descriptor, other.descriptor)
        return AlgebraElement(self.descriptor, self.data - other.data)

    def __neg__(self):
        return AlgebraElement(self.descriptor, -self.data)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            _check_same(self.descriptor, other.descriptor)
            if self.descriptor.backend == MATRIX:
                return AlgebraElement(self.descriptor, self.data @ other.data)
            return AlgebraElement(self.descriptor, _diffop_product(self.descriptor, self.data, other.data))
        if isinstance(other, numbers.Number):
            return AlgebraElement(self.descriptor, self.data * self._coerce_scalar(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return AlgebraElement(self.descriptor, self.data * self._coerce_scalar(other))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.descriptor == other.descriptor and np.array_equal(self.data, other.data)

    __hash__ = None

    def __repr__(self) -> str:
        kind = "matrix" if self.descriptor.backend == MATRIX else "diffop"
        return f"<AlgebraElement {kind} norm={self.norm():.6g}>"


def matrix_element(values, field: str | None = None) -> AlgebraElement:
    """Build a matrix-backend element, inferring the field from the payload."""
    array = np.asarray(values)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ShapeMismatchError(f"matrix payload must be square, got shape {array.shape}")
    if field is None:
        field = COMPLEX if np.iscomplexobj(array) else REAL
    return AlgebraElement(matrix_descriptor(array.shape[0], field), array)


def diffop_element(descriptor: AlgebraDescriptor, coefficients) -> AlgebraElement:
    """Build a circle-diffop element.

    ``coefficients`` is either a full ``(J+1, 2M+1)`` array or a mapping
    ``{order: {mode: value}}`` with ``0 <= order <= J`` and ``|mode| <= M``.
    """
    if descriptor.backend != CIRCLE_DIFFOP:
        raise ShapeMismatchError("diffop_element needs a circle-diffop descriptor")
    if isinstance(coefficients, dict):
        data = np.zeros((descriptor.max_order + 1, descriptor.width), dtype=np.complex128)
        for order, modes in coefficients.items():
            if not 0 <= order <= descriptor.max_order:
                raise WindowOverflowError(f"order {order} outside 0..{descriptor.max_order}")
            for mode, value in modes.items():
                if abs(mode) > descriptor.max_mode:
                    raise WindowOverflowError(f"mode {mode} outside |m| <= {descriptor.max_mode}")
                data[order, mode + descriptor.max_mode] = value
        return AlgebraElement(descriptor, data)
    return AlgebraElement(descriptor, coefficients)


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """The bracket [a, b] = a*b - b*a."""
    return a * b - b * a


def _diffop_product(descriptor: AlgebraDescriptor, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact Leibniz composition of two diffop payloads, with overflow checks."""
    max_order = descriptor.max_order
    max_mode = descriptor.max_mode
    modes = np.arange(-max_mode, max_mode + 1)
    scratch = np.zeros((2 * max_order + 1, 2 * descriptor.width - 1), dtype=np.complex128)

    a_rows = [j for j in range(max_order + 1) if a[j].any()]
    b_rows = [k for k in range(max_order + 1) if b[k].any()]
    if not a_rows or not b_rows:
        return np.zeros_like(a)

    # d-th x-derivative of each needed b row: multiply mode m by (i m)^d.
    top = max(a_rows)
    derivative_factor = 1j * modes
    for k in b_rows:
        derived = b[k]
        for d in range(top + 1):
            if d > 0:
                derived = derived * derivative_factor
            for j in a_rows:
                if j < d:
                    continue
                scratch[j + k - d] += comb(j, d) * np.convolve(a[j], derived)

    if scratch[max_order + 1 :].any():
        raise WindowOverflowError(
            f"product order exceeds the cap J={max_order}; enlarge the descriptor window")
    centre = scratch[: max_order + 1, max_mode : 3 * max_mode + 1]
    outside = np.concatenate(
        [scratch[: max_order + 1, :max_mode], scratch[: max_order + 1, 3 * max_mode + 1 :]], axis=1)
    if outside.any():
        raise WindowOverflowError(
            f"product modes exceed the cap M={max_mode}; enlarge the descriptor window")
    return centre.copy()

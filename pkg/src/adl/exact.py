"""Exact complex-rational arithmetic.

Coefficients in the calculus are either floats/complex (numeric mode) or
exact rationals (symbolic mode).  ``ExactComplex`` stores real and imaginary
parts as ``fractions.Fraction`` and supports mixed arithmetic with ints and
Fractions without losing exactness; mixing with floats degrades to ``complex``
explicitly via :func:`to_complex`.

Identities such as the double dual use these to assert equality on the nose,
not up to rounding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction, float, complex, "ExactComplex"]


class ExactComplex:
    """Complex number with Fraction real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_complex(cls, z: complex) -> "ExactComplex":
        """Exact lift of a float complex (binary floats are rationals)."""
        return cls(Fraction(float(z.real)), Fraction(float(z.imag)))

    @classmethod
    def i(cls) -> "ExactComplex":
        return cls(0, 1)

    # -- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    # -- arithmetic ---------------------------------------------------

    @staticmethod
    def _coerce(x) -> "ExactComplex | None":
        if isinstance(x, ExactComplex):
            return x
        if isinstance(x, (int, Fraction)):
            return ExactComplex(x, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) + other
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) - other
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) * other
        return ExactComplex(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) / other
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        return ExactComplex((self.re * o.re + self.im * o.im) / d,
                            (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / complex(self)
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exact powers take non-negative integer exponents")
        out = ExactComplex(1, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return ExactComplex(self.re, -self.im)

    # -- comparisons / conversions ------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) == other
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"


def is_exact(x) -> bool:
    """True when x participates in exact arithmetic."""
    return isinstance(x, (int, Fraction, ExactComplex))


def to_complex(x) -> complex:
    """Numeric value of an exact or floating scalar."""
    if isinstance(x, ExactComplex):
        return complex(x)
    return complex(x)


def exact_lift(x) -> Scalar:
    """Lift a scalar into exact form; floats lift via their binary value."""
    if isinstance(x, (int, Fraction, ExactComplex)):
        return x
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, complex):
        return ExactComplex.from_complex(x)
    raise TypeError(f"cannot lift {type(x).__name__} to exact arithmetic")


def scalar_is_zero(x, tol: float = 0.0) -> bool:
    """Zero test honouring exactness: exact scalars compare to 0 exactly."""
    if isinstance(x, (int, Fraction)):
        return x == 0
    if isinstance(x, ExactComplex):
        return x.is_zero()
    return abs(x) <= tol


def exact_to_strings(x) -> dict:
    """Lossless string record {"im": "n/d", "re": "n/d"} of an exact scalar.

    Floating values round when a rational needs more than 53 mantissa bits,
    so serialising exact scalars through floats would break the invert-
    ability of file round trips; the string record keeps full precision.
    """
    if isinstance(x, ExactComplex):
        return {"im": str(x.im), "re": str(x.re)}
    return {"im": "0", "re": str(Fraction(x))}


def strings_to_exact(record: dict):
    """Inverse of exact_to_strings."""
    re = Fraction(record["re"])
    im = Fraction(record.get("im", "0"))
    if im == 0:
        return re
    return ExactComplex(re, im)

"""Finite Laurent polynomials and 2x2 Laurent matrices.

A polynomial is stored as ``(low, coeffs)`` meaning ``sum_i coeffs[i] x^(low+i)``.
Coefficients are a numpy array, either complex (floating arithmetic) or of
object dtype holding ``fractions.Fraction`` / ``int`` (exact arithmetic).
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = ["LaurentPoly", "LaurentMatrix"]


def _as_fraction(c):
    # Fraction keeps numpy integer types as numerator, which overflows at 64 bits
    if isinstance(c, Fraction):
        return Fraction(int(c.numerator), int(c.denominator))
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    return Fraction(c)


def _conv(a, b):
    if a.dtype == object or b.dtype == object:
        out = np.zeros(len(a) + len(b) - 1, dtype=object)
        out[:] = 0
        for i, ai in enumerate(a):
            if ai != 0:
                out[i:i + len(b)] += ai * b
        return out
    return np.convolve(a, b)


class LaurentPoly:
    """``sum_i c_i x^(low+i)`` normalized so the extreme coefficients are nonzero."""

    __slots__ = ("low", "coeffs")

    def __init__(self, low, coeffs, exact=None):
        arr = np.asarray(coeffs)
        if exact or arr.dtype == object:
            arr = np.array([_as_fraction(c) for c in np.ravel(arr)], dtype=object)
        else:
            arr = np.array(arr, dtype=complex).ravel()
        nz = np.flatnonzero(arr != 0)
        if nz.size == 0:
            self.low, self.coeffs = 0, arr[:0]
        else:
            self.low = int(low) + int(nz[0])
            self.coeffs = arr[nz[0]:nz[-1] + 1]

    @classmethod
    def monomial(cls, power, c=1, exact=False):
        return cls(power, [c], exact=exact)

    @classmethod
    def zero(cls, exact=False):
        return cls(0, [0], exact=exact)

    @property
    def exact(self):
        return self.coeffs.dtype == object

    @property
    def is_zero(self):
        return self.coeffs.size == 0

    @property
    def high(self):
        """Largest exponent with nonzero coefficient."""
        return self.low + len(self.coeffs) - 1

    @property
    def span(self):
        """``high - low``: the degree once the lowest power is factored out."""
        return len(self.coeffs) - 1

    def coefficient(self, power):
        i = power - self.low
        if self.is_zero or i < 0 or i >= len(self.coeffs):
            return Fraction(0) if self.exact else 0j
        return self.coeffs[i]

    def __call__(self, x):
        if self.is_zero:
            return 0j * np.asarray(x)
        x = np.asarray(x, dtype=complex)
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = acc * x + complex(c)
        return acc * x ** self.low

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly(0, [other], exact=self.exact and not isinstance(other, complex))

    def __add__(self, other):
        other = self._coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        low = min(self.low, other.low)
        high = max(self.high, other.high)
        dtype = object if (self.exact and other.exact) else complex
        out = np.zeros(high - low + 1, dtype=dtype)
        if dtype == object:
            out[:] = Fraction(0)
        out[self.low - low:self.low - low + len(self.coeffs)] += self.coeffs
        out[other.low - low:other.low - low + len(other.coeffs)] += other.coeffs
        return LaurentPoly(low, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.low, -self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return LaurentPoly(self.low, self.coeffs * other)
        if self.is_zero or other.is_zero:
            return LaurentPoly.zero(self.exact and other.exact)
        a, b = self.coeffs, other.coeffs
        if a.dtype != b.dtype:
            a, b = a.astype(complex), b.astype(complex)
        return LaurentPoly(self.low + other.low, _conv(a, b))

    __rmul__ = __mul__

    def __pow__(self, n):
        out = LaurentPoly(0, [1], exact=self.exact)
        for _ in range(int(n)):
            out = out * self
        return out

    def shift(self, k):
        """Multiply by ``x^k``."""
        return LaurentPoly(self.low + k, self.coeffs)

    def conj_coeffs(self):
        return LaurentPoly(self.low, np.conj(self.coeffs) if not self.exact else self.coeffs)

    def reflect(self):
        """``p(1/x)``."""
        return LaurentPoly(-self.high, self.coeffs[::-1])

    def to_complex(self):
        return LaurentPoly(self.low, self.coeffs.astype(complex))

    def as_dict(self):
        return {self.low + i: c for i, c in enumerate(self.coeffs) if c != 0}

    def allclose(self, other, atol=1e-12):
        d = self - other
        return d.is_zero or float(np.max(np.abs(d.coeffs.astype(complex)))) <= atol

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            other = self._coerce(other)
        return (self.low == other.low or (self.is_zero and other.is_zero)) and \
            len(self.coeffs) == len(other.coeffs) and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash((self.low, tuple(self.coeffs)))

    def __repr__(self):
        if self.is_zero:
            return "LaurentPoly(0)"
        terms = [f"({c})x^{self.low + i}" for i, c in enumerate(self.coeffs) if c != 0]
        return "LaurentPoly(" + " + ".join(terms) + ")"


class LaurentMatrix:
    """Matrix-valued Laurent polynomial ``sum_i C_i z^(low+i)`` with ``C_i`` of shape (m, n).

    Stored as a complex array of shape ``(n_terms, m, n)``; used to form
    products of transfer matrices exactly (no truncation of powers).
    """

    __slots__ = ("low", "coeffs")

    def __init__(self, low, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim != 3:
            raise ValueError("coefficients must have shape (n_terms, m, n)")
        self.low, self.coeffs = int(low), c

    @classmethod
    def identity(cls, n=2):
        return cls(0, np.eye(n, dtype=complex)[None])

    @property
    def high(self):
        return self.low + self.coeffs.shape[0] - 1

    def __matmul__(self, other):
        a, b = self.coeffs, other.coeffs
        na, nb = a.shape[0], b.shape[0]
        out = np.zeros((na + nb - 1, a.shape[1], b.shape[2]), dtype=complex)
        for i in range(na):
            out[i:i + nb] += a[i] @ b
        return LaurentMatrix(self.low + other.low, out)

    def __call__(self, z):
        acc = np.zeros(self.coeffs.shape[1:], dtype=complex)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc * z ** self.low

    def entry(self, i, j):
        return LaurentPoly(self.low, self.coeffs[:, i, j])

    def to_poly(self):
        """Collapse a 1x1 matrix to a :class:`LaurentPoly`."""
        if self.coeffs.shape[1:] != (1, 1):
            raise ValueError("only 1x1 Laurent matrices collapse to polynomials")
        return self.entry(0, 0)

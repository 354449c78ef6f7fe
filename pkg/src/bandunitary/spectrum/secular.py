"""Eigenvalues of truncated blocks as roots of a secular polynomial.

For the block on ``M+1..N`` the eigenvalue equation reduces to

    <a_j(z) | Phi(z) b_k(z)> = 0,   Phi(z) = T(n0-1) ... T(m0+2)

with ``k`` fixed by the parity of ``M`` and ``j`` by the parity of ``N``.
Every factor is a Laurent polynomial in ``z``, so after removing the lowest
power the left side is a genuine polynomial of degree ``N - M``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import NumericError, UsageError
from ..laurent import LaurentMatrix, LaurentPoly
from ..transfer import transfer_batch, transfer_laurent
from .measure import SpectralMeasure
from .truncation import _window_eta

__all__ = [
    "BoundaryVectors",
    "boundary_vectors",
    "SecularPolynomial",
    "secular_polynomial",
    "secular_roots",
    "match_phases",
]

OFF_CIRCLE_TOL = 1e-6
MINUS_ONE_TOL = 1e-4


@dataclass(frozen=True)
class BoundaryVectors:
    """Boundary vectors as ``(low power, coefficient rows)``.

    ``b[j]`` has shape ``(n_powers, 2)``; row ``p`` multiplies ``z^(low+p)``.
    ``a[j]`` is the adjoint choice ``a_j(z) = b_j(1/z)``; on the circle,
    ``<a_j(z)| v> = sum_p conj(a_j coefficient row p) . v  z^(low+p)``, and
    ``a_tilde[j]`` holds those conjugated rows, so it continues analytically
    off the circle.
    """

    b: dict
    a: dict
    a_tilde: dict

    def evaluate_b(self, j, z):
        low, c = self.b[j]
        return sum(c[p] * z ** (low + p) for p in range(len(c)))

    def evaluate_a(self, j, z):
        low, c = self.a[j]
        return sum(c[p] * z ** (low + p) for p in range(len(c)))

    def pairing(self, j, z, v):
        """``<a_j(z)|v>`` continued off the unit circle."""
        low, c = self.a_tilde[j]
        return sum((c[p] @ v) * z ** (low + p) for p in range(len(c)))


def boundary_vectors(params):
    r, t = params.r, params.t
    it = 1j * t
    b = {
        1: (-1, np.array([[it, -r], [-it * r, r + r * r], [0, -1]]) / t ** 2),
        2: (0, np.array([[1, -r / it], [0, 1 / it]])),
        3: (-1, np.array([[-r, it], [r + r * r, -it * r], [-1, 0]]) / t ** 2),
        4: (0, np.array([[-r / it, 1], [1 / it, 0]])),
    }

    def reflect(lc):
        low, c = lc
        return (-(low + len(c) - 1), c[::-1].copy())

    a = {j: reflect(b[j]) for j in (1, 2)}
    # a_j(z) = b_j(1/z); pairing conjugates the coefficients and z -> 1/z on the circle
    a_tilde = {j: (b[j][0], np.conj(b[j][1])) for j in (1, 2)}
    return BoundaryVectors(b, a, a_tilde)


def _parity_indices(M, N):
    k = 1 if M % 2 == 0 else 2
    j = 1 if N % 2 == 0 else 2
    m0 = M // 2 if M % 2 == 0 else (M - 1) // 2
    n0 = N // 2 if N % 2 == 0 else (N + 1) // 2
    return j, k, m0, n0


@dataclass(frozen=True)
class SecularPolynomial:
    poly: LaurentPoly        # normalized so that the lowest power is z^0
    raw_low: int             # lowest power before normalization
    j: int
    k: int
    m0: int
    n0: int

    @property
    def degree(self):
        return self.poly.span

    @property
    def expected_degree(self):
        return 2 * (self.n0 - self.m0) + 2 - (self.k + self.j)

    @property
    def leading(self):
        return complex(self.poly.coeffs[-1])

    @property
    def growth_rate(self):
        """``ln|leading coefficient| / (n0 - m0)``."""
        return float(np.log(abs(self.leading)) / (self.n0 - self.m0))


def _eta_lookup(phases, params, M, N):
    if N - M <= 4:
        raise UsageError("secular route needs N - M > 4")
    eta = _window_eta(phases, M, N)
    return lambda k: float(eta.eta[k - M])


def secular_polynomial(phases, params, M, N):
    """``<a_j | Phi b_k>`` as an exact product of Laurent matrices."""
    e = _eta_lookup(phases, params, M, N)
    j, k, m0, n0 = _parity_indices(M, N)
    bv = boundary_vectors(params)
    low_b, cb = bv.b[k]
    acc = LaurentMatrix(low_b, cb[:, :, None])
    for q in range(m0 + 2, n0):
        acc = transfer_laurent(e(2 * q), e(2 * q - 1), params) @ acc
    low_a, ca = bv.a_tilde[j]
    acc = LaurentMatrix(low_a, ca[:, None, :]) @ acc
    raw = acc.to_poly()
    return SecularPolynomial(raw.shift(-raw.low), raw.low, j, k, m0, n0)


def _secular_value(e, params, bv, j, k, m0, n0, z):
    """``(f(z), f'(z))`` for the un-normalized pairing, by direct propagation."""
    z = np.asarray(z, dtype=complex)
    low, c = bv.b[k]
    v = sum(c[p][None, :] * z[:, None] ** (low + p) for p in range(len(c)))
    dv = sum(c[p][None, :] * (low + p) * z[:, None] ** (low + p - 1) for p in range(len(c)))
    for q in range(m0 + 2, n0):
        T = transfer_batch(e(2 * q), e(2 * q - 1), z, params)
        # dT/dz = -C/z^2 + A
        L = transfer_laurent(e(2 * q), e(2 * q - 1), params).coeffs
        dT = -L[0][None] / z[:, None, None] ** 2 + L[2][None]
        v, dv = np.einsum("nij,nj->ni", T, v), \
            np.einsum("nij,nj->ni", dT, v) + np.einsum("nij,nj->ni", T, dv)
        s = np.maximum(np.abs(v).max(axis=1), 1e-300)
        v, dv = v / s[:, None], dv / s[:, None]
    low, c = bv.a_tilde[j]
    a = sum(c[p][None, :] * z[:, None] ** (low + p) for p in range(len(c)))
    da = sum(c[p][None, :] * (low + p) * z[:, None] ** (low + p - 1) for p in range(len(c)))
    f = np.sum(a * v, axis=1)
    df = np.sum(da * v + a * dv, axis=1)
    return f, df


@dataclass(frozen=True)
class SecularRoots:
    roots: np.ndarray
    raw_roots: np.ndarray
    measure: SpectralMeasure
    polynomial: SecularPolynomial
    near_minus_one: np.ndarray    # indices of roots to confirm by the dense route


def secular_roots(phases, params, M, N, polish_steps=3):
    """Roots of the secular polynomial, polished by Newton steps on the unit circle.

    Companion-matrix roots are refined with Newton's method on the pairing
    evaluated by direct transfer-matrix propagation (accepting only small
    steps) and then projected onto the circle.
    """
    sp = secular_polynomial(phases, params, M, N)
    coeffs = sp.poly.coeffs.astype(complex)
    raw = np.roots(coeffs[::-1])
    if len(raw) != sp.expected_degree:
        raise NumericError("secular polynomial has unexpected degree", degree=len(raw),
                           expected=sp.expected_degree)
    e = _eta_lookup(phases, params, M, N)
    bv = boundary_vectors(params)
    z = raw.copy()
    for _ in range(polish_steps):
        f, df = _secular_value(e, params, bv, sp.j, sp.k, sp.m0, sp.n0, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / df
        ok = np.isfinite(step) & (np.abs(step) < 1e-5)
        z = np.where(ok, z - step, z)
    off = np.abs(np.abs(z) - 1.0)
    if off.max() > OFF_CIRCLE_TOL:
        raise NumericError("secular root off the unit circle", max_off=float(off.max()),
                           M=M, N=N)
    z = z / np.abs(z)
    near = np.flatnonzero(np.abs(z + 1.0) < MINUS_ONE_TOL)
    meas = SpectralMeasure(np.angle(z), np.full(len(z), 1.0 / len(z)), float(off.max()),
                           meta={"M": M, "N": N, "route": "secular"})
    return SecularRoots(z, raw, meas, sp, near)


def match_phases(a, b):
    """Largest distance between two eigenvalue sets after optimal pairing."""
    za = np.exp(1j * np.asarray(a)) if np.isrealobj(a) else np.asarray(a)
    zb = np.exp(1j * np.asarray(b)) if np.isrealobj(b) else np.asarray(b)
    if len(za) != len(zb):
        raise UsageError("sets differ in size")
    d = np.abs(za[:, None] - zb[None, :])
    ri, ci = linear_sum_assignment(d)
    return float(d[ri, ci].max())

"""Weighted lattice paths of the free operator and their generating functions.

A path ``0 = k_0 -> k_1 -> ... -> k_n`` moves by steps in ``{0, +1, -1, +2}``
from odd sites and ``{0, +1, -1, -2}`` from even sites; its weight is the
product of the moduli ``|U_0[k_m, k_m+1]|``, i.e. ``r^2`` for a step 0,
``rt`` for a step +-1 and ``t^2`` for a step +-2. ``S(n, j)`` denotes the
total weight of the n-step paths ending at ``j`` (written ``S_{n-1}(j)`` in
the literature on these operators).

The even- and odd-indexed parts of ``sum_j S(n, j) x^j`` obey

    (P+_n, P-_n) = T(x) (P+_{n-1}, P-_{n-1}),   (P+_0, P-_0) = (1, 0),
    T(x) = [[r^2 + t^2 x^-2, rt (x + 1/x)], [rt (x + 1/x), r^2 + t^2 x^2]].
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import DomainError, UsageError
from .laurent import LaurentPoly
from .model import build_free

__all__ = [
    "STEPS_FROM_EVEN",
    "STEPS_FROM_ODD",
    "path_sum_bruteforce",
    "gen_poly",
    "gen_poly_sequence",
    "s_center",
    "s_center_scaled",
    "s_exact_balanced",
    "BalancedValue",
    "gen_eigs",
    "GenEigs",
    "critical_angle",
    "AnalyticityVerdict",
    "analyticity_margin",
    "moment_bound",
    "paths_table_csv",
    "convergence_table_csv",
]

STEPS_FROM_EVEN = (0, 1, -1, -2)
STEPS_FROM_ODD = (0, 1, -1, 2)
MAX_BRUTE_N = 12
_CHUNK = 1 << 16


def _entry_moduli(params):
    """Step -> |U_0[k, k + step]| for even and odd ``k``, read off the matrix."""
    U0 = build_free(params, (-4, 5))
    out = {}
    for k in (0, 1):
        steps = STEPS_FROM_EVEN if k % 2 == 0 else STEPS_FROM_ODD
        out[k] = np.array([abs(U0.entry(k, k + s)) for s in steps])
    return out


def _extend(pos, w, steps_left, j, moduli):
    if steps_left == 0:
        return float(w[pos == j].sum())
    if len(pos) > _CHUNK:
        half = len(pos) // 2
        return (_extend(pos[:half], w[:half], steps_left, j, moduli)
                + _extend(pos[half:], w[half:], steps_left, j, moduli))
    odd = (pos % 2).astype(bool)
    new_pos, new_w = [], []
    for i in range(4):
        step = np.where(odd, STEPS_FROM_ODD[i], STEPS_FROM_EVEN[i])
        mod = np.where(odd, moduli[1][i], moduli[0][i])
        new_pos.append(pos + step)
        new_w.append(w * mod)
    return _extend(np.concatenate(new_pos), np.concatenate(new_w), steps_left - 1, j, moduli)


def path_sum_bruteforce(n, j, params):
    """Sum of path weights over all ``4^n`` step sequences from 0 ending at ``j``."""
    n = int(n)
    if n < 0:
        raise UsageError("n must be nonnegative")
    if n > MAX_BRUTE_N:
        raise UsageError(f"brute force enumeration is limited to n <= {MAX_BRUTE_N}")
    moduli = _entry_moduli(params)
    return _extend(np.zeros(1, dtype=np.int64), np.ones(1), n, int(j), moduli)


def _weights(params, exact):
    if exact:
        r, t = params.r, params.t
        if abs(r - t) > 1e-15:
            raise UsageError("exact arithmetic is available for r = t only")
        h = Fraction(1, 2)
        return h, h, h
    return params.r ** 2, params.r * params.t, params.t ** 2


def gen_poly_sequence(n, params, exact=False):
    """Yield ``(P+_k, P-_k)`` for ``k = 1..n`` from one pass of the recursion."""
    r2, rt, t2 = _weights(params, exact)
    diag_p = LaurentPoly(-2, [t2, 0, r2], exact=exact)
    diag_m = LaurentPoly(0, [r2, 0, t2], exact=exact)
    off = LaurentPoly(-1, [rt, 0, rt], exact=exact)
    plus = LaurentPoly(0, [1], exact=exact)
    minus = LaurentPoly.zero(exact)
    for _ in range(int(n)):
        plus, minus = diag_p * plus + off * minus, off * plus + diag_m * minus
        yield plus, minus


def gen_poly(n, params, exact=False):
    """``(P+_n, P-_n)``; the coefficient of ``x^j`` is ``S(n, j)``."""
    if n < 0:
        raise UsageError("n must be nonnegative")
    if n == 0:
        _weights(params, exact)
        return LaurentPoly(0, [1], exact=exact), LaurentPoly.zero(exact)
    for plus, minus in gen_poly_sequence(n, params, exact):
        pass
    return plus, minus


def _step_on_circle(v, x, r2, rt, t2):
    p, m = v
    c = rt * (x + 1.0 / x)
    return (r2 + t2 / (x * x)) * p + c * m, c * p + (r2 + t2 * x * x) * m


def s_center_scaled(n, params):
    """``S(n, 0) / (r + t)^(2n)`` by the trapezoid rule on the unit circle.

    ``P+_n(exp(i theta))`` is a trigonometric polynomial of degree ``2n``,
    so the mean over ``8n`` equispaced nodes returns its constant term
    exactly; each step is divided by ``(r + t)^2`` to stay in range.
    """
    n = int(n)
    if n < 1:
        raise UsageError("n must be at least 1")
    r2, rt, t2 = _weights(params, False)
    scale = (params.r + params.t) ** 2
    nodes = np.exp(2j * np.pi * np.arange(8 * n) / (8 * n))
    v = (np.ones_like(nodes), np.zeros_like(nodes))
    for _ in range(n):
        p, m = _step_on_circle(v, nodes, r2, rt, t2)
        v = (p / scale, m / scale)
    return float(np.mean(v[0]).real)


def s_center(n, params, method="auto"):
    """``S(n, 0)``, the constant term of ``P+_n``.

    ``method`` is ``"coeff"`` (coefficient extraction from the generating
    polynomial), ``"quad"`` (trapezoid rule on the circle) or ``"auto"``
    (coefficients up to n = 200).
    """
    n = int(n)
    if n < 1:
        raise UsageError("n must be at least 1")
    if method == "auto":
        method = "coeff" if n <= 200 else "quad"
    if method == "coeff":
        return float(gen_poly(n, params)[0].coefficient(0).real)
    if method == "quad":
        return s_center_scaled(n, params) * (params.r + params.t) ** (2 * n)
    raise UsageError(f"unknown method {method!r}")


@dataclass(frozen=True)
class BalancedValue:
    value: Fraction
    in_range: bool


def s_exact_balanced(n, j):
    """``S(n, j)`` at ``r = t`` as an exact rational.

    Even ``j``: ``C(2n-1, j/2 + n) / 2^n``; odd ``j``: ``C(2n-1, (j-1)/2 + n) / 2^n``.
    Outside the admissible range the value is 0 and ``in_range`` is False.
    """
    n, j = int(n), int(j)
    if n < 1:
        raise UsageError("n must be at least 1")
    m = j // 2 + n if j % 2 == 0 else (j - 1) // 2 + n
    if not 0 <= m <= 2 * n - 1:
        return BalancedValue(Fraction(0), False)
    return BalancedValue(Fraction(comb(2 * n - 1, m), 2 ** n), True)


@dataclass(frozen=True)
class GenEigs:
    lam_plus: complex
    lam_minus: complex
    discriminant: float
    kind: str          # "real", "complex" or "degenerate"


def gen_eigs(x, params, tol=1e-12):
    """Eigenvalues ``r^2 lambda_+-`` of ``T(x)`` for ``x = exp(i theta)``.

    ``lambda_+- = 1 + tau^2 cos 2theta +- sqrt((1 + tau^2 cos 2theta)^2 - (1 - tau^2)^2)``
    """
    x = complex(x)
    theta = np.angle(x)
    tau2 = params.tau ** 2
    b = 1.0 + tau2 * math.cos(2 * theta)
    disc = b * b - (1.0 - tau2) ** 2
    root = np.sqrt(complex(disc))
    r2 = params.r ** 2
    if abs(disc) <= tol:
        kind = "degenerate"
    else:
        kind = "real" if disc > 0 else "complex"
    return GenEigs(r2 * (b + root), r2 * (b - root), disc, kind)


def critical_angle(params):
    """Angle in ``(0, pi/2)`` where the discriminant vanishes when ``tau > 1``; else None."""
    tau2 = params.tau ** 2
    if tau2 <= 1.0:
        return None
    return 0.5 * math.acos((tau2 - 2.0) / tau2)


@dataclass(frozen=True)
class AnalyticityVerdict:
    margin: float
    analytic: bool
    all_r: bool
    r_minus: float | None
    r_plus: float | None

    @property
    def verdict(self):
        return "analytic" if self.analytic else "inconclusive"


def analyticity_margin(A, B, params):
    """Sufficient condition ``B > ln(1 + 2rt) + ln A`` for an analytic density of states.

    Also returns the ``r`` thresholds: when ``B > ln A`` the condition holds
    for ``r < r_minus`` or ``r > r_plus``; when ``B > ln 2A`` it holds for
    every ``r``.
    """
    if A < 1:
        raise DomainError("A must be at least 1")
    if B <= 0:
        raise DomainError("B must be positive")
    margin = B - math.log(1.0 + 2.0 * params.r * params.t) - math.log(A)
    q = math.exp(B - math.log(A)) - 1.0
    r_minus = r_plus = None
    all_r = q > 1.0
    if 0.0 < q <= 1.0:
        s = math.sqrt(1.0 - q * q)
        r_minus = math.sqrt((1.0 - s) / 2.0)
        r_plus = math.sqrt((1.0 + s) / 2.0)
    return AnalyticityVerdict(margin, margin > 0, all_r, r_minus, r_plus)


def moment_bound(n, A, B, params):
    """``A^n exp(-B n) S(n, 0)``, the bound on ``|E <phi_j|U^n phi_j>|``."""
    return A ** n * math.exp(-B * n) * s_center(n, params)


def paths_table_csv(n_max, params, exact=False, header=None):
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    buf.write("n,j,S\n")
    for n, (plus, minus) in enumerate(gen_poly_sequence(n_max, params, exact), start=1):
        coeffs = {**plus.as_dict(), **minus.as_dict()}
        for j in sorted(coeffs):
            c = coeffs[j]
            val = str(c) if exact else f"{c.real:.17g}"
            buf.write(f"{n},{j},{val}\n")
    return buf.getvalue()


def convergence_table_csv(ns, params, header=None):
    """Rows ``(n, S(n,0) sqrt(n) / (r+t)^(2n))``."""
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    buf.write("n,ratio\n")
    for n in ns:
        buf.write(f"{n},{s_center_scaled(n, params) * math.sqrt(n):.17g}\n")
    return buf.getvalue()

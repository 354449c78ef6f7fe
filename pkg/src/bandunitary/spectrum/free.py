"""Closed forms for the free operator (all phases zero).

The free operator is unitarily equivalent to multiplication by the 2x2
symbol ``V(x)`` on ``L^2(T; C^2)``, whose eigenvalues ``exp(+-i alpha(x))``
with ``alpha(x) = arccos(r^2 - t^2 cos 2x)`` are the band functions. Its
spectrum is the arc ``|lambda| <= arccos(r^2 - t^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .._torus import TWO_PI

__all__ = [
    "band_edge",
    "band_functions",
    "free_symbol",
    "free_dos",
    "free_moment",
    "FreeMeasure",
]


def band_edge(params):
    return params.band_edge


def alpha(x, params):
    return np.arccos(np.clip(params.r ** 2 - params.t ** 2 * np.cos(2 * np.asarray(x)), -1, 1))


def free_symbol(x, params):
    """``V(x)`` with ``det V = 1`` and ``V(x) = J V(-x) J``."""
    r, t = params.r, params.t
    x = np.asarray(x, dtype=float)
    v = np.empty(x.shape + (2, 2), dtype=complex)
    v[..., 0, 0] = r * r - t * t * np.exp(2j * x)
    v[..., 0, 1] = v[..., 1, 0] = 2j * t * r * np.cos(x)
    v[..., 1, 1] = r * r - t * t * np.exp(-2j * x)
    return v


def band_functions(x, params):
    """``(exp(i alpha(x)), exp(-i alpha(x)), V(x))``."""
    a = alpha(x, params)
    return np.exp(1j * a), np.exp(-1j * a), free_symbol(x, params)


def free_dos(lam, params):
    """``(density, integrated)`` of the free density of states at ``lam``.

    The density is with respect to ``d lambda``; the integrated density
    counts mass on ``(-pi, lam]``.
    """
    r, t = params.r, params.t
    lam = np.asarray(lam, dtype=float)
    a = params.band_edge
    y = (r * r - np.cos(lam)) / (t * t)
    inside = np.abs(lam) < a
    with np.errstate(invalid="ignore", divide="ignore"):
        rad = np.sqrt(np.maximum(t ** 4 - (r * r - np.cos(lam)) ** 2, 0.0))
        dens = np.where(inside, np.abs(np.sin(lam)) / (TWO_PI * rad), 0.0)
    # removable 0/0 at lambda = 0: the limit is 1/(2 pi t)
    dens = np.where(np.abs(lam) < 1e-12, 1.0 / (TWO_PI * t), dens)
    ac = np.arccos(np.clip(y, -1.0, 1.0)) / TWO_PI
    integ = np.where(lam <= 0, ac, 1.0 - ac)
    integ = np.where(lam < -a, 0.0, np.where(lam > a, 1.0, integ))
    if lam.ndim == 0:
        return float(dens), float(integ)
    return dens, integ


def _nodes(n):
    return -np.pi + TWO_PI * (np.arange(n) + 0.5) / n


def free_moment(s, params, n_nodes=None):
    """``(1/2 pi) int cos(s alpha(x)) dx`` by the trapezoid rule in ``x``."""
    n = n_nodes or max(256, 16 * abs(int(s)))
    return float(np.mean(np.cos(s * alpha(_nodes(n), params))))


@dataclass(frozen=True)
class FreeMeasure:
    """The free density of states as a continuous measure."""

    params: object

    @property
    def edge(self):
        return self.params.band_edge

    def density(self, lam):
        return free_dos(lam, self.params)[0]

    def cdf(self, lam):
        return free_dos(lam, self.params)[1]

    def moment(self, s):
        return free_moment(s, self.params)

    def integrate(self, f, n_nodes=4096):
        """``int f(lambda) dk_0(lambda)`` through the band-function representation."""
        a = alpha(_nodes(n_nodes), self.params)
        return 0.5 * float(np.mean(f(a) + f(-a)))

    def integrate_x(self, f, singular_at=None, tol=1e-10):
        """Band-function integral by adaptive quadrature over ``x in [0, pi/2]``.

        ``alpha`` is even and pi-periodic, so a quarter period suffices.
        ``singular_at`` is a phase where ``f`` may have an integrable
        singularity; the matching ``x`` becomes a breakpoint.
        """
        r, t = self.params.r, self.params.t
        g = lambda x: 0.5 * (f(alpha(x, self.params)) + f(-alpha(x, self.params)))
        points = None
        if singular_at is not None and abs(singular_at) <= self.edge:
            y = (r * r - np.cos(singular_at)) / (t * t)
            xs = 0.5 * np.arccos(np.clip(y, -1.0, 1.0))
            if 0.0 < xs < np.pi / 2:
                points = [xs]
        val, _ = integrate.quad(g, 0.0, np.pi / 2, points=points, epsabs=tol, epsrel=tol,
                                limit=400)
        return val * 2.0 / np.pi

    def integrate_adaptive(self, f, tol=1e-8):
        """Same integral by adaptive quadrature of the density, split at 0.

        The inverse square-root singularity at each band edge is removed by
        ``lambda = +-a (1 - w^2)``.
        """
        a = self.edge
        total = 0.0
        for sign in (1.0, -1.0):
            def g(w, sign=sign):
                lam = sign * a * (1.0 - w * w)
                return f(lam) * self.density(lam) * 2.0 * a * w
            val, _ = integrate.quad(g, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
            total += val
        return total

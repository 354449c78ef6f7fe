"""Thouless formula, Poisson transforms and recovery of the a.c. density.

The Lyapunov exponent and the density of states ``dk`` are linked by

    gamma(z) = 2 int ln|z - exp(i lambda)| dk(lambda) + ln(1/t^2) - ln|z|.

Empirical measures enter as finite sums over eigenphase atoms; the free
density of states is integrated through its band-function representation.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError, UsageError
from .spectrum.free import FreeMeasure
from .spectrum.measure import SpectralMeasure, pooled_measure
from .transfer import lyapunov_estimate

__all__ = [
    "thouless_rhs",
    "gamma_uniform",
    "poisson_kernel",
    "poisson_transform",
    "ACDensity",
    "ac_density",
    "ThoulessReport",
    "thouless_scan",
]

CIRCLE_TOL = 1e-12
EXCLUSION = 1e-9


def _integrate(measure, f, singular_at=None):
    if isinstance(measure, FreeMeasure):
        return measure.integrate_x(f, singular_at=singular_at)
    if isinstance(measure, SpectralMeasure):
        return float(np.sum(measure.weights * f(measure.phases)))
    raise UsageError("measure must be a SpectralMeasure or FreeMeasure")


def thouless_rhs(z, measure, params, exclusion=EXCLUSION):
    """Right-hand side of the Thouless formula at ``z != 0``.

    On the unit circle the equivalent form
    ``int ln sin^2((lambda - lambda')/2) dk + ln(4/t^2)`` is used; atoms of
    an empirical measure closer than ``exclusion`` to ``lambda`` are dropped
    and the remaining weights renormalized.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("z must be nonzero")
    lt = np.log(1.0 / params.t ** 2)
    if abs(abs(z) - 1.0) > CIRCLE_TOL:
        f = lambda lam: np.log(np.abs(z - np.exp(1j * lam)))
        return 2.0 * _integrate(measure, f) + lt - np.log(abs(z))
    lam0 = np.angle(z)
    f = lambda lam: np.log(np.sin(0.5 * (lam - lam0)) ** 2)
    if isinstance(measure, SpectralMeasure):
        d = np.abs(np.angle(np.exp(1j * (measure.phases - lam0))))
        keep = d > exclusion
        if not keep.any():
            raise UsageError("every atom lies within the exclusion radius")
        w = measure.weights[keep]
        val = float(np.sum(w * f(measure.phases[keep])) / w.sum())
    else:
        val = _integrate(measure, f, singular_at=lam0)
    return val + np.log(4.0) + lt


def gamma_uniform(z, params):
    """Closed form ``ln(1/t^2) + |ln|z||`` for uniformly distributed phases."""
    z = np.asarray(z, dtype=complex)
    return np.log(1.0 / params.t ** 2) + np.abs(np.log(np.abs(z)))


def poisson_kernel(lam, lam_prime, eps):
    q = np.exp(-eps)
    return (1.0 - q * q) / (1.0 + q * q - 2.0 * q * np.cos(np.asarray(lam) - lam_prime))


def poisson_transform(measure, lam_prime, eps):
    """Poisson integral of ``dk`` at ``exp(i lam_prime - eps)``; equals d gamma / d eps."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return _integrate(measure, lambda lam: poisson_kernel(lam, lam_prime, eps),
                      singular_at=None)


@dataclass(frozen=True)
class ACDensity:
    """Density w.r.t. ``d lambda / 2 pi`` extrapolated to ``eps = 0``."""

    estimate: float
    eps: np.ndarray
    values: np.ndarray
    slope: float
    fit_residual: float


def ac_density(measure, lam_prime, eps_schedule):
    """Poisson transforms along a decreasing schedule, linearly extrapolated to 0.

    The fit uses the last three schedule points.
    """
    eps = np.asarray(eps_schedule, dtype=float)
    if eps.ndim != 1 or len(eps) < 2:
        raise UsageError("schedule needs at least two values")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise UsageError("schedule must be positive and strictly decreasing")
    vals = np.array([poisson_transform(measure, lam_prime, e) for e in eps])
    x, y = eps[-3:], vals[-3:]
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(np.polyval([slope, intercept], x) - y)))
    return ACDensity(float(intercept), eps, vals, float(slope), resid)


@dataclass(frozen=True)
class ThoulessReport:
    z: np.ndarray
    gamma_cocycle: np.ndarray
    stderr: np.ndarray
    gamma_thouless: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def gap(self):
        return self.gamma_cocycle - self.gamma_thouless

    @property
    def max_abs_gap(self):
        return float(np.max(np.abs(self.gap)))

    def to_csv(self, header=None):
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        buf.write("z_re,z_im,gamma_cocycle,stderr,gamma_thouless,gap\n")
        for z, g, s, h, d in zip(self.z, self.gamma_cocycle, self.stderr,
                                 self.gamma_thouless, self.gap):
            buf.write(f"{z.real:.17g},{z.imag:.17g},{g:.17g},{s:.17g},{h:.17g},{d:.17g}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps({
            "z": [[z.real, z.imag] for z in self.z],
            "gamma_cocycle": self.gamma_cocycle.tolist(),
            "stderr": self.stderr.tolist(),
            "gamma_thouless": self.gamma_thouless.tolist(),
            "max_abs_gap": self.max_abs_gap,
            "meta": self.meta,
        }, indent=2)


def thouless_scan(z_grid, model, params, n_steps=20000, n_lyap_realizations=8,
                  size=500, n_dos_realizations=20, seed=0, measure=None, workers=None):
    """Compare cocycle Lyapunov estimates with the Thouless right-hand side on a grid.

    The two sides are computed independently: ``gamma`` from transfer-matrix
    products, the right side from the pooled eigenphases of truncations (or
    from ``measure`` when given).
    """
    z = np.atleast_1d(np.asarray(z_grid, dtype=complex))
    if np.any(z == 0):
        raise DomainError("grid must avoid z = 0")
    if measure is None:
        n_dos = 1 if model.is_free else n_dos_realizations
        measure = pooled_measure(model, params, size, n_dos, seed, workers=workers)
    est = lyapunov_estimate(z, model, params, n_steps, n_lyap_realizations, seed,
                            workers=workers)
    rhs = np.array(ordered_map(_rhs_task, [(zz, measure, params) for zz in z], workers))
    stderr = np.nan_to_num(np.asarray(est.stderr, dtype=float), nan=0.0)
    return ThoulessReport(z, np.asarray(est.gamma, dtype=float), stderr, rhs,
                          meta={"n_steps": n_steps, "n_lyap_realizations": n_lyap_realizations,
                                "size": size, "seed": seed})


def _rhs_task(task):
    z, measure, params = task
    return thouless_rhs(z, measure, params)

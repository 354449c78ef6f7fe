"""Transfer matrices, cocycle products and Lyapunov exponents.

A generalized eigenvector ``U psi = z psi`` with coefficients ``c_k`` is
propagated two sites at a time::

    (c_2k, c_2k+1) = T(k) (c_2k-2, c_2k-1)

where ``T(k)`` depends on ``eta_2k``, ``eta_2k-1`` and ``z``. One cocycle
step is one transfer matrix, i.e. two lattice sites, and Lyapunov exponents
are reported per step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .errors import ConfigurationError, DomainError, UsageError
from .laurent import LaurentMatrix
from .model import Coefficients, PhaseModel

__all__ = [
    "TransferMatrix",
    "Cocycle",
    "LyapunovEstimate",
    "transfer_matrix",
    "transfer_batch",
    "transfer_laurent",
    "cocycle_identity",
    "cocycle_extend",
    "cocycle_product",
    "lyapunov_estimate",
    "lyapunov_free",
    "free_transfer_eigs",
]

RENORM_LOG2 = 20
_HI, _LO = 2.0 ** RENORM_LOG2, 2.0 ** -RENORM_LOG2


def _check_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("spectral parameter z must be nonzero")
    return z


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 transfer matrix; ``det`` does not depend on ``z``."""

    m: np.ndarray
    eta_even: float
    eta_odd: float

    @property
    def det(self):
        return complex(np.linalg.det(self.m))

    @property
    def expected_det(self):
        return complex(np.exp(1j * (self.eta_even - self.eta_odd)))

    def __array__(self, dtype=None, copy=None):
        return self.m if dtype is None else self.m.astype(dtype)


def transfer_batch(eta_even, eta_odd, z, params):
    """Transfer matrices for broadcast arrays of phases and ``z``; shape ``(..., 2, 2)``."""
    z = _check_z(z)
    r, t = params.r, params.t
    ee = np.asarray(eta_even, dtype=float)
    eo = np.asarray(eta_odd, dtype=float)
    ez = np.exp(-1j * eo) / z          # exp(-i eta_2k-1) / z
    pz = np.exp(1j * ee) * z           # exp(i eta_2k) z
    d = np.exp(1j * (ee - eo))
    q = r / t
    shape = np.broadcast(ee, eo, z).shape
    out = np.empty(shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -ez
    out[..., 0, 1] = 1j * q * (ez - 1.0)
    out[..., 1, 0] = 1j * q * (d - ez)
    out[..., 1, 1] = -pz / (t * t) + q * q * (d + 1.0 - ez)
    return out


def transfer_matrix(eta_even, eta_odd, z, params):
    """``T(k)`` built from ``eta_2k = eta_even`` and ``eta_2k-1 = eta_odd``."""
    if np.ndim(z) != 0:
        raise UsageError("transfer_matrix takes a scalar z; use transfer_batch for arrays")
    m = transfer_batch(eta_even, eta_odd, complex(z), params)
    return TransferMatrix(m, float(eta_even), float(eta_odd))


def transfer_laurent(eta_even, eta_odd, params):
    """``T = C/z + B + z A`` as a :class:`LaurentMatrix` with powers -1, 0, 1."""
    r, t = params.r, params.t
    e = np.exp(-1j * eta_odd)
    p = np.exp(1j * eta_even)
    d = np.exp(1j * (eta_even - eta_odd))
    q = r / t
    C = e * np.array([[-1.0, 1j * q], [-1j * q, -q * q]])
    B = np.array([[0.0, -1j * q], [1j * q * d, q * q * (d + 1.0)]])
    A = np.array([[0.0, 0.0], [0.0, -p / (t * t)]])
    return LaurentMatrix(-1, np.stack([C, B, A]))


@dataclass(frozen=True)
class Cocycle:
    """Product ``exp(log_scale) * current`` of ``steps`` transfer matrices."""

    current: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    log_scale: float = 0.0
    steps: int = 0

    @property
    def product(self):
        return np.exp(self.log_scale) * self.current

    def log_norm(self, norm="op"):
        return self.log_scale + math.log(_norm(self.current, norm))


def cocycle_identity():
    return Cocycle()


def _norm(m, kind="op"):
    if kind == "fro":
        return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))
    if kind == "op":
        # largest singular value of a 2x2 matrix in closed form
        f = np.sum(np.abs(m) ** 2, axis=(-2, -1))
        det = np.abs(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0])
        return np.sqrt(0.5 * (f + np.sqrt(np.maximum(f * f - 4.0 * det * det, 0.0))))
    raise UsageError(f"unknown norm {kind!r}")


def _mul2(a, b):
    """Batched 2x2 product ``a @ b`` written out entrywise."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    a00, a01, a10, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    b00, b01, b10, b11 = b[..., 0, 0], b[..., 0, 1], b[..., 1, 0], b[..., 1, 1]
    out[..., 0, 0] = a00 * b00 + a01 * b10
    out[..., 0, 1] = a00 * b01 + a01 * b11
    out[..., 1, 0] = a10 * b00 + a11 * b10
    out[..., 1, 1] = a10 * b01 + a11 * b11
    return out


def cocycle_extend(c, T):
    """Left-multiply the cocycle by ``T`` and renormalize outside [2^-20, 2^20]."""
    m = np.asarray(T, dtype=complex) @ c.current
    log_scale = c.log_scale
    n = float(_norm(m, "op"))
    if n > _HI or n < _LO:
        if n == 0 or not np.isfinite(n):
            raise DomainError("cocycle product degenerated")
        m = m / n
        log_scale += math.log(n)
    return Cocycle(m, log_scale, c.steps + 1)


def cocycle_product(mats, norm="op"):
    """``(log_scale, current)`` for ``mats[-1] @ ... @ mats[0]`` over leading batch axes.

    ``mats`` has shape ``(n_steps, ..., 2, 2)``. The product is formed by
    pairwise tree reduction, dividing each partial product by its largest
    entry and the final one by its norm; this is exact up to rounding and
    avoids a Python loop over steps.
    """
    mats = np.array(mats, dtype=complex)
    log_scale = np.zeros(mats.shape[1:-2])
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            # fold the last (latest) factor into its neighbour
            tail = _mul2(mats[-1], mats[-2])
            mats = np.concatenate([mats[:-2], tail[None]])
        mats = _mul2(mats[1::2], mats[0::2])
        # any positive scale is exact here; the max entry is the cheapest
        s = np.abs(mats).max(axis=(-2, -1))
        mats /= s[..., None, None]
        log_scale = log_scale + np.log(s).sum(axis=0)
    n = _norm(mats[0], norm)
    return log_scale + np.log(n), mats[0] / n[..., None, None]


@dataclass(frozen=True)
class LyapunovEstimate:
    z: np.ndarray
    gamma: np.ndarray
    stderr: np.ndarray
    per_realization: np.ndarray
    n_steps: int
    norm: str = "op"

    def __iter__(self):
        yield self.gamma
        yield self.stderr


CHUNK = 2048


def _one_realization(task):
    z, model, params, n_steps, seed, realization, norm = task
    z = np.atleast_1d(z)
    # T(q) uses eta_{2q} and eta_{2q-1}, q = 1..n_steps
    ph = model.sample((1, 2 * n_steps), seed, realization)
    eta = ph.eta
    log_scale = np.zeros(z.shape)
    current = np.broadcast_to(np.eye(2, dtype=complex), z.shape + (2, 2)).copy()
    for start in range(0, n_steps, CHUNK):
        q = np.arange(start, min(start + CHUNK, n_steps))
        mats = transfer_batch(eta[2 * q + 1][:, None], eta[2 * q][:, None], z[None, :], params)
        ls, prod = cocycle_product(mats, norm)
        current = _mul2(prod, current)
        n = _norm(current, norm)
        current /= n[..., None, None]
        log_scale += ls + np.log(n)
    return log_scale / n_steps


def lyapunov_estimate(z, model, params, n_steps, n_realizations, seed,
                      norm="op", workers=None):
    """Monte Carlo Lyapunov exponent per transfer-matrix step.

    ``z`` may be a scalar or an array; realizations share nothing but the
    seed, and the mean is taken in realization-index order.
    """
    if not isinstance(model, PhaseModel):
        raise ConfigurationError("a PhaseModel is required to sample phases")
    if not isinstance(params, Coefficients):
        raise ConfigurationError("params must be Coefficients")
    if n_steps < 1000:
        raise UsageError("n_steps must be at least 1000")
    if n_realizations < 1:
        raise UsageError("need at least one realization")
    scalar = np.ndim(z) == 0
    zz = _check_z(np.atleast_1d(z)).ravel()
    tasks = [(zz, model, params, int(n_steps), seed, i, norm) for i in range(n_realizations)]
    per = np.array(ordered_map(_one_realization, tasks, workers))
    gamma = per.mean(axis=0)
    stderr = per.std(axis=0, ddof=1) / np.sqrt(n_realizations) if n_realizations > 1 \
        else np.full_like(gamma, np.nan)
    if scalar:
        return LyapunovEstimate(zz, float(gamma[0]), float(stderr[0]), per[:, 0], n_steps, norm)
    return LyapunovEstimate(zz, gamma, stderr, per, n_steps, norm)


def free_transfer_eigs(z, params):
    """Eigenvalues ``(tau_+, tau_-)`` of the free transfer matrix, ``|tau_+| >= |tau_-|``."""
    z = _check_z(z)
    m = transfer_batch(0.0, 0.0, z, params)
    tr = m[..., 0, 0] + m[..., 1, 1]
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    disc = np.sqrt(tr * tr / 4 - det)
    a, b = tr / 2 + disc, tr / 2 - disc
    swap = np.abs(b) > np.abs(a)
    return np.where(swap, b, a), np.where(swap, a, b)


def lyapunov_free(z, params, circle_tol=1e-12):
    """Lyapunov exponent of the free operator.

    On the unit circle ``z = exp(i lambda)`` this is 0 on the band
    ``|lambda| <= arccos(r^2 - t^2)`` and ``arccosh((r^2 - cos lambda)/t^2)``
    outside. Off the circle it is ``ln max |tau_+-|`` of the constant matrix.
    """
    z = _check_z(z)
    on = np.abs(np.abs(z) - 1.0) <= circle_tol
    y = (params.r ** 2 - np.cos(np.angle(z))) / params.t ** 2
    closed = np.arccosh(np.maximum(y, 1.0))
    tp, _ = free_transfer_eigs(np.where(on, 2.0, z), params)
    out = np.where(on, closed, np.log(np.abs(tp)))
    return float(out) if out.ndim == 0 else out

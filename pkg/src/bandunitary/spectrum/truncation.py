"""Finite unitary blocks obtained by cutting the operator at two sites.

Cutting at ``M`` and ``N`` isolates the sites ``M+1..N``. The phases next to
each cut are set to zero and the boundary columns are replaced so that the
block is exactly unitary and decoupled from the rest of the chain:

* even cut ``c``: ``eta_{c-1} = eta_c = eta_{c+1} = eta_{c+2} = 0``
* odd cut ``c``: ``eta_c = eta_{c+1} = 0``
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from ..model import BandUnitary, Coefficients, PhaseField, build_u

__all__ = ["TruncatedBlock", "truncate", "zeroed_sites", "boundary_rank", "trace_defect"]


def zeroed_sites(cut):
    if cut % 2 == 0:
        return [cut - 1, cut, cut + 1, cut + 2]
    return [cut, cut + 1]


def _window_eta(phases, M, N):
    """Phases on ``M..N+1`` after the boundary prescription."""
    zero = set(zeroed_sites(M)) | set(zeroed_sites(N))
    sites = np.arange(M, N + 2)
    eta = np.zeros(len(sites))
    for i, k in enumerate(sites):
        if k in zero:
            continue
        if not (phases.lo <= k <= phases.hi):
            raise UsageError(
                f"phases on [{phases.lo}, {phases.hi}] do not cover site {k} needed for the cut")
        eta[i] = phases.eta[k - phases.lo]
    return PhaseField(M, N + 1, eta)


@dataclass(frozen=True)
class TruncatedBlock:
    M: int
    N: int
    matrix: np.ndarray
    params: Coefficients
    phases: PhaseField      # phases on M..N+1 after zeroing

    @property
    def parity(self):
        return (self.M % 2, self.N % 2)

    @property
    def dim(self):
        return self.N - self.M

    @property
    def sites(self):
        return np.arange(self.M + 1, self.N + 1)

    def as_band(self):
        return BandUnitary.from_dense(self.matrix, self.M + 1, self.params,
                                      boundary=(("cut", self.M), ("cut", self.N)))

    def unitarity_defect(self):
        return float(np.linalg.norm(self.matrix.conj().T @ self.matrix - np.eye(self.dim), 2))


def truncate(params, phases, M, N):
    """Unitary block on ``M+1..N`` with boundary conditions at both cuts."""
    M, N = int(M), int(N)
    if N - M <= 4:
        raise UsageError("truncation needs N - M > 4")
    r, t = params.r, params.t
    eta = _window_eta(phases, M, N)
    lo, hi = M + 1, N
    B = build_u(params, eta, (lo, hi)).to_dense()

    def setcol(j, entries):
        B[:, j - lo] = 0
        for i, v in entries.items():
            B[i - lo, j - lo] = v

    e = lambda k: eta.eta[k - M]
    if M % 2 == 0:
        setcol(M + 1, {M + 1: r, M + 2: 1j * t})
    else:
        b = np.exp(-1j * e(M + 2))
        setcol(M + 1, {M + 1: r, M + 2: 1j * r * t * b, M + 3: -t * t * b})
        setcol(M + 2, {M + 1: 1j * t, M + 2: r * r * b, M + 3: 1j * r * t * b})
    if N % 2 == 0:
        setcol(N, {N - 1: 1j * t, N: r})
    else:
        a = np.exp(-1j * e(N - 1))
        setcol(N - 1, {N - 2: 1j * r * t * a, N - 1: r * r * a, N: 1j * t})
        setcol(N, {N - 2: -t * t * a, N - 1: 1j * r * t * a, N: r})
    return TruncatedBlock(M, N, B, params, eta)


def boundary_rank(block, phases, tol=1e-10):
    """Rank of the difference between the block and the uncut operator on the same sites."""
    U = build_u(block.params, phases, (block.M + 1, block.N)).to_dense()
    s = np.linalg.svd(block.matrix - U, compute_uv=False)
    return int(np.sum(s > tol))


def trace_defect(params, phases, M, N, s):
    """``|tr V^s - tr chi U^s chi|`` for the block ``V`` and the uncut operator ``U``.

    ``U^s`` restricted to ``M+1..N`` is computed exactly on a window padded
    by ``2s+2`` sites, beyond which the band cannot propagate in ``s`` steps.
    """
    block = truncate(params, phases, M, N)
    pad = 2 * s + 2
    U = build_u(params, phases, (M + 1 - pad, N + pad)).to_dense()
    Us = np.linalg.matrix_power(U, s)
    inner = Us[pad:pad + block.dim, pad:pad + block.dim]
    Vs = np.linalg.matrix_power(block.matrix, s)
    return float(abs(np.trace(Vs) - np.trace(inner)))

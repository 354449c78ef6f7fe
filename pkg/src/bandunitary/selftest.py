"""Fast consistency checks, run by ``bandunitary selftest``.

``run_selftest`` accepts a replacement transfer-matrix function so that a
deliberately corrupted implementation can be shown to fail the checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import (
    analyticity_margin,
    gen_poly,
    path_sum_bruteforce,
    s_exact_balanced,
)
from .model import Coefficients, DistributionSpec, PhaseModel, build_u, factorize, sample_phases
from .spectrum import (
    FreeMeasure,
    eigenphases,
    match_phases,
    secular_roots,
    truncate,
)
from .thouless import poisson_transform
from .spectrum.measure import SpectralMeasure
from .transfer import lyapunov_estimate, lyapunov_free, transfer_batch


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail):
    return CheckResult(name, bool(passed), detail)


def check_transfer_det(transfer_fn, params, rng, n=200):
    ee, eo = rng.uniform(-np.pi, np.pi, (2, n))
    z = np.exp(rng.uniform(-1, 1, n) + 1j * rng.uniform(-np.pi, np.pi, n))
    T = transfer_fn(ee, eo, z, params)
    det = T[:, 0, 0] * T[:, 1, 1] - T[:, 0, 1] * T[:, 1, 0]
    err = float(np.max(np.abs(det - np.exp(1j * (ee - eo)))))
    return _check("transfer determinant exp(i(eta_2k - eta_2k-1)), independent of z",
                  err <= 1e-12, f"max error {err:.2e}")


def check_transfer_identity(transfer_fn, params):
    T = transfer_fn(np.zeros(1), np.zeros(1), np.ones(1, dtype=complex), params)[0]
    err = float(np.max(np.abs(T + np.eye(2))))
    return _check("zero phases at z = 1 give T = -I", err <= 1e-12, f"max error {err:.2e}")


def run_selftest(transfer_fn=None, seed=2024):
    """Return a list of :class:`CheckResult`; each check takes well under a few seconds."""
    transfer_fn = transfer_fn or transfer_batch
    rng = np.random.default_rng(seed)
    p = Coefficients.from_r(0.6)
    half = Coefficients.balanced()
    uni = DistributionSpec.uniform()
    out = [check_transfer_det(transfer_fn, p, rng), check_transfer_identity(transfer_fn, p)]

    ph = sample_phases(uni, uni, (-3, 70), seed)
    U = build_u(p, ph, (1, 64))
    d = U.unitarity_defect()
    out.append(_check("unitarity of the five-diagonal operator", d <= 1e-12, f"{d:.2e}"))
    res = factorize(U, ph).residual
    out.append(_check("factorization U = V^-1 D S0 V", res <= 1e-12, f"residual {res:.2e}"))

    worst = 0.0
    for M, N in ((0, 40), (1, 40), (0, 41), (1, 41)):
        ph = sample_phases(uni, uni, (M - 3, N + 4), seed, M + N)
        b = truncate(p, ph, M, N)
        worst = max(worst, match_phases(eigenphases(b).phases,
                                        secular_roots(ph, p, M, N).measure.phases))
    out.append(_check("secular roots equal block eigenvalues (four parities)", worst <= 1e-8,
                      f"max distance {worst:.2e}"))

    F = FreeMeasure(p)
    mu = eigenphases(truncate(p, PhaseModel.free().sample((-4, 410), 0), 0, 400))
    grid = np.linspace(-np.pi, np.pi, 4001)
    gap = float(np.max(np.abs(mu.cdf(grid) - F.cdf(grid))))
    out.append(_check("free integrated density of states", gap <= 0.02, f"sup gap {gap:.4f}"))

    g = lyapunov_estimate(-1.0 + 0j, PhaseModel.free(), half, 2000, 1, 0).gamma
    ref = math.log(3 + 2 * math.sqrt(2))
    out.append(_check("free Lyapunov exponent at lambda = pi", abs(g - ref) <= 1e-3,
                      f"{g:.6f} vs {ref:.6f}"))
    ref_free = lyapunov_free(-1.0 + 0j, half)
    out.append(_check("free closed form at lambda = pi", abs(ref_free - ref) <= 1e-12,
                      f"{ref_free:.12f}"))

    est = lyapunov_estimate(np.exp(0.7j), PhaseModel.uniform(), half, 20000, 8, seed)
    tol = max(0.02, 3 * est.stderr)
    out.append(_check("uniform phases: gamma = ln(1/t^2)", abs(est.gamma - math.log(2)) <= tol,
                      f"{est.gamma:.4f} +- {est.stderr:.4f}"))

    atoms = SpectralMeasure.uniform_atoms(-np.pi + 2 * np.pi * (np.arange(4096) + 0.5) / 4096)
    pt = poisson_transform(atoms, 0.3, 0.2)
    out.append(_check("Poisson transform of the uniform measure is 1", abs(pt - 1) <= 1e-12,
                      f"{pt:.15f}"))

    ok = True
    for n in range(1, 13):
        plus, minus = gen_poly(n, half, exact=True)
        for j in range(-2 * n, 2 * n + 1):
            poly = plus if j % 2 == 0 else minus
            ok &= poly.coefficient(j) == s_exact_balanced(n, j).value
    out.append(_check("balanced path sums equal binomials exactly (n <= 12)", ok, "exact"))

    worst = 0.0
    for n in range(1, 7):
        plus, minus = gen_poly(n, p)
        for j in range(-2 * n, 2 * n + 1):
            poly = plus if j % 2 == 0 else minus
            worst = max(worst, abs(poly.coefficient(j) - path_sum_bruteforce(n, j, p)))
    out.append(_check("generating function equals brute-force path sums (n <= 6)",
                      worst <= 1e-12, f"max error {worst:.2e}"))

    v = analyticity_margin(1.0, 1.0, half)
    out.append(_check("analyticity margin 1 - ln 2 at A = B = 1, r = t",
                      abs(v.margin - (1 - math.log(2))) <= 1e-15 and v.analytic,
                      f"{v.margin:.15f}"))
    return out

"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line (shown in the pytest terminal summary)
and then asserts, so a red criterion is visible both ways. Run directly with
``python tests/test_acceptance.py`` to print the lines without pytest.
"""
import math
import sys
from math import comb
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from acceptance_log import RESULTS, criterion  # noqa: E402

from bandunitary import Coefficients, DistributionSpec, PhaseModel  # noqa: E402
from bandunitary.combinatorics import (  # noqa: E402
    analyticity_margin,
    gen_poly,
    moment_bound,
    path_sum_bruteforce,
    s_center,
    s_center_scaled,
    s_exact_balanced,
)
from bandunitary.model import build_u, factorize, sample_phases  # noqa: E402
from bandunitary.spectrum import (  # noqa: E402
    FreeMeasure,
    coverage,
    dos_moments,
    eigenphases,
    integrated_dos,
    ks_distance,
    match_phases,
    pooled_measure,
    predicted_support,
    secular_polynomial,
    secular_roots,
    support_check,
    truncate,
)
from bandunitary.thouless import ac_density, thouless_rhs  # noqa: E402
from bandunitary.transfer import lyapunov_estimate, lyapunov_free, transfer_batch  # noqa: E402

HALF = Coefficients.balanced()
UNI = DistributionSpec.uniform()
LN2 = math.log(2.0)


def _circle(n, offset=0.5):
    return np.exp(1j * (-np.pi + 2 * np.pi * (np.arange(n) + offset) / n))


def test_criterion_01_uniform_lyapunov():
    with criterion("1 uniform-phase Lyapunov exponent = ln(1/t^2)", 30) as c:
        z = _circle(8)
        est = lyapunov_estimate(z, PhaseModel.uniform(), HALF, 100_000, 32, seed=101)
        err = np.abs(est.gamma - LN2)
        tol = np.maximum(0.01, 3 * est.stderr)
        c.check("|gamma - ln 2| <= max(0.01, 3 stderr)", np.all(err <= tol),
                f"max err {err.max():.4f}, max stderr {est.stderr.max():.4f}")
    assert c.passed


def test_criterion_02_flat_density_of_states():
    with criterion("2 flat density of states for uniform phases", 120) as c:
        mu = pooled_measure(PhaseModel.uniform(), HALF, 500, 100, seed=202)
        ks = ks_distance(mu, "uniform")
        c.check("KS to d lambda/2pi <= 0.01", ks <= 0.01, f"KS {ks:.4f}")
        mom = dos_moments(PhaseModel.uniform(), HALF, 8, 100, seed=203)
        worst = float(np.max(np.abs(mom.m[1:])))
        c.check("|m_s| <= 3/sqrt(100), s = 1..8", worst <= 0.3, f"max |m_s| {worst:.4f}")
    assert c.passed


def test_criterion_03_free_closed_forms():
    p = Coefficients.from_r(0.6)
    with criterion("3 free operator closed forms", 60) as c:
        F = FreeMeasure(p)
        block = truncate(p, PhaseModel.free().sample((-4, 2005), 0), 0, 2000)
        mu = eigenphases(block)
        grid = np.linspace(-np.pi, np.pi, 20001)
        gap = float(np.max(np.abs(integrated_dos(mu, grid) - F.cdf(grid))))
        c.check("sup |N - N0| <= 0.02", gap <= 0.02, f"sup gap {gap:.4f}")
        a = p.band_edge
        inside = np.linspace(0.05, a - 0.05, 8)
        outside = np.linspace(a + 0.05, np.pi, 8)
        lam = np.concatenate([inside, outside])
        est = lyapunov_estimate(np.exp(1j * lam), PhaseModel.free(), p, 100_000, 1, 0)
        g0 = lyapunov_free(np.exp(1j * lam), p)
        d_in = float(np.max(np.abs(est.gamma[:8] - g0[:8])))
        d_out = float(np.max(np.abs(est.gamma[8:] - g0[8:])))
        c.check("cocycle vs gamma0 inside band <= 0.01", d_in <= 0.01, f"inside {d_in:.2e}")
        c.check("cocycle vs gamma0 outside band <= 1e-3", d_out <= 1e-3, f"outside {d_out:.2e}")
    assert c.passed


def test_criterion_04_thouless_formula():
    with criterion("4 Thouless formula", 120) as c:
        z = np.concatenate([0.8 * _circle(4), 1.25 * _circle(4, 0.25)])
        est = lyapunov_estimate(z, PhaseModel.uniform(), HALF, 100_000, 32, seed=404)
        mu = pooled_measure(PhaseModel.uniform(), HALF, 500, 100, seed=405)
        rhs = np.array([thouless_rhs(zz, mu, HALF) for zz in z])
        gap = float(np.max(np.abs(est.gamma - rhs)))
        c.check("uniform, |z| in {0.8, 1.25}: |gamma - rhs| <= 0.02", gap <= 0.02,
                f"max gap {gap:.4f}")
        p = Coefficients.from_r(0.6)
        lam = np.linspace(p.band_edge + 0.1, np.pi, 6)
        zf = np.exp(1j * lam)
        g = lyapunov_estimate(zf, PhaseModel.free(), p, 100_000, 1, 0).gamma
        mu0 = eigenphases(truncate(p, PhaseModel.free().sample((-4, 2005), 0), 0, 2000))
        rhs0 = np.array([thouless_rhs(zz, mu0, p) for zz in zf])
        gap0 = float(np.max(np.abs(g - rhs0)))
        c.check("free, on circle outside band: |gamma - rhs| <= 0.01", gap0 <= 0.01,
                f"max gap {gap0:.4f}")
    assert c.passed


def test_criterion_05_poisson_recovery():
    with criterion("5 a.c. density from Poisson transforms", 60) as c:
        mu = pooled_measure(PhaseModel.uniform(), HALF, 500, 100, seed=505)
        lam = np.linspace(-2.5, 2.5, 6)
        vals = np.array([ac_density(mu, l, [0.8, 0.4, 0.2]).estimate for l in lam])
        err = float(np.max(np.abs(vals - 1.0)))
        c.check("uniform: n(lambda') = 1 within 0.05", err <= 0.05, f"max err {err:.4f}")
        p = Coefficients.from_r(0.6)
        F = FreeMeasure(p)
        mu0 = eigenphases(truncate(p, PhaseModel.free().sample((-4, 2005), 0), 0, 2000))
        lamf = np.linspace(-0.8 * p.band_edge, 0.8 * p.band_edge, 7)
        est = np.array([ac_density(mu0, l, [0.08, 0.04, 0.02]).estimate for l in lamf])
        ref = 2 * np.pi * F.density(lamf)
        rel = float(np.max(np.abs(est / ref - 1)))
        c.check("free: matches dk0 density within 5%", rel <= 0.05, f"max rel err {rel:.4f}")
    assert c.passed


def test_criterion_06_secular_polynomial():
    p = Coefficients.from_r(0.6)
    with criterion("6 secular polynomial roots = block eigenvalues", 60) as c:
        worst, degree_ok = 0.0, True
        for M, N in ((0, 60), (1, 60), (0, 59), (1, 59)):
            for i in range(50):
                ph = sample_phases(UNI, UNI, (M - 3, N + 4), 606, i)
                sec = secular_roots(ph, p, M, N)
                degree_ok &= sec.polynomial.degree == N - M
                dense = eigenphases(truncate(p, ph, M, N))
                worst = max(worst, match_phases(dense.phases, sec.measure.phases))
        c.check("four parities, 50 realizations: agreement <= 1e-8", worst <= 1e-8,
                f"max distance {worst:.1e}")
        c.check("degree = N - M", degree_ok)
        rates = [secular_polynomial(sample_phases(UNI, UNI, (-3, 64), 607, i), HALF, 0, 60)
                 .growth_rate for i in range(10)]
        dev = float(np.max(np.abs(np.array(rates) - LN2)))
        c.check("growth rate -> ln(1/t^2) within 0.02 at N - M = 60", dev <= 0.02,
                f"max dev {dev:.2e}")
    assert c.passed


def test_criterion_07_path_combinatorics():
    with criterion("7 path combinatorics (oracle, exact, generic drift)", 60) as c:
        worst = 0.0
        for r in (0.3, 0.6, 0.8):
            p = Coefficients.from_r(r)
            for n in range(1, 11):
                plus, minus = gen_poly(n, p)
                for j in range(-2 * n, 2 * n + 1):
                    poly = plus if j % 2 == 0 else minus
                    worst = max(worst, abs(poly.coefficient(j) - path_sum_bruteforce(n, j, p)))
        c.check("brute force = generating function, n <= 10", worst <= 1e-12,
                f"max err {worst:.1e}")
        exact = all(
            (gen_poly(n, HALF, exact=True)[j % 2]).coefficient(j) == s_exact_balanced(n, j).value
            for n in range(1, 13) for j in range(-2 * n, 2 * n + 1))
        c.check("balanced binomials exact, n <= 12", exact)
        p = Coefficients.from_r(0.6)
        a = s_center_scaled(300, p) * math.sqrt(300)
        b = s_center_scaled(600, p) * math.sqrt(600)
        drift = abs(b / a - 1)
        c.check("generic ratio drift n = 300 -> 600 < 2%", drift < 0.02, f"drift {drift:.2e}")
    assert c.passed


def test_criterion_07_balanced_sqrt_pi_constant():
    """Stated clause S(0) sqrt(pi n) / 2^n in [0.99, 1.01] at n = 200, r = t.

    The exact value is C(2n-1, n) / 2^n = C(2n, n) / 2^(n+1), so the ratio
    tends to 1/2; this clause cannot hold and is expected to fail.
    """
    with criterion("7 balanced constant sqrt(pi n) S / 2^n in [0.99, 1.01] at n = 200", 60) as c:
        n = 200
        val = s_center(n, HALF) * math.sqrt(math.pi * n) / 2 ** n
        exact = comb(2 * n - 1, n) * math.sqrt(math.pi * n) / 4 ** n
        c.check("ratio in [0.99, 1.01]", 0.99 <= val <= 1.01,
                f"ratio {val:.5f}, exact binomial value {exact:.5f}")
    assert c.passed


def test_criterion_08_support_theorem():
    with criterion("8 almost sure spectrum for arc-supported phases", 60) as c:
        mu_law = DistributionSpec.arc(0.0, 0.3)
        arcs = predicted_support(mu_law, HALF)
        mu = pooled_measure(PhaseModel.iid(mu_law), HALF, 500, 100, seed=808)
        rep = support_check(mu, arcs, 0.05)
        inside = 1 - rep.outlier_fraction
        c.check(">= 99% inside the predicted arc +- 0.05", inside >= 0.99,
                f"inside {inside:.4f}")
        cov = coverage(mu, arcs, 0.05)
        c.check("predicted arc coverage >= 0.95", cov >= 0.95, f"coverage {cov:.4f}")
    assert c.passed


def test_criterion_09_structural_invariants():
    with criterion("9 structural invariants", 30) as c:
        rng = np.random.default_rng(909)
        worst_u = worst_f = 0.0
        for i in range(10):
            p = Coefficients.from_r(rng.uniform(0.05, 0.95))
            ph = sample_phases(UNI, UNI, (-2, 70), 909, i)
            U = build_u(p, ph, (1, 64))
            worst_u = max(worst_u, U.unitarity_defect())
            worst_f = max(worst_f, factorize(U, ph).residual)
        c.check("unitarity <= 1e-12", worst_u <= 1e-12, f"{worst_u:.1e}")
        c.check("factorization residual <= 1e-12", worst_f <= 1e-12, f"{worst_f:.1e}")
        ee, eo = rng.uniform(-np.pi, np.pi, (2, 1000))
        z = np.exp(rng.uniform(-1, 1, 1000) + 1j * rng.uniform(-np.pi, np.pi, 1000))
        T = transfer_batch(ee, eo, z, HALF)
        det = T[:, 0, 0] * T[:, 1, 1] - T[:, 0, 1] * T[:, 1, 0]
        derr = float(np.max(np.abs(det - np.exp(1j * (ee - eo)))))
        c.check("det T = exp(i(eta_2k - eta_2k-1)) <= 1e-12", derr <= 1e-12, f"{derr:.1e}")
        p = Coefficients.from_r(0.6)
        zs = 1.3 * np.exp(1j * np.array([0.4, 2.0]))
        # independent seeds: with shared phases the two sides coincide exactly
        a = lyapunov_estimate(zs, PhaseModel.uniform(), p, 20_000, 16, seed=910)
        b = lyapunov_estimate(1 / np.conj(zs), PhaseModel.uniform(), p, 20_000, 16, seed=913)
        diff = np.abs(a.gamma - b.gamma)
        joint = np.hypot(a.stderr, b.stderr)
        c.check("gamma(z) = gamma(1/conj z) within 3 sigma", np.all(diff <= 3 * joint),
                f"max diff/sigma {np.max(diff / joint):.2f}")
        on = lyapunov_estimate(_circle(8), PhaseModel.uniform(), p, 20_000, 16, seed=911)
        upper = math.log(4 / p.t ** 2)
        c.check("0 <= gamma <= ln(4/t^2) + 3 sigma on circle",
                np.all(on.gamma >= -0.01) and np.all(on.gamma <= upper + 3 * on.stderr),
                f"range [{on.gamma.min():.3f}, {on.gamma.max():.3f}]")
        mu = pooled_measure(PhaseModel.uniform(), p, 300, 20, seed=912)
        grid = np.linspace(-np.pi, np.pi, 257)
        N = integrated_dos(mu, grid)
        slack = 2.0 / 256 + 1.0 / mu.size
        ok = True
        for i in range(len(grid)):
            for j in range(i + 1, len(grid)):
                if grid[j] - grid[i] > 0.5:
                    break
                chord = abs(np.exp(1j * grid[j]) - np.exp(1j * grid[i]))
                ok &= abs(N[j] - N[i]) <= math.log(2 / p.t ** 2) / abs(math.log(chord)) + slack
        c.check("log-Hoelder continuity bound on empirical N", ok)
    assert c.passed


def test_criterion_10_analyticity_plumbing():
    with criterion("10 analyticity criterion plumbing", 60) as c:
        A, B = 1.0, 1.0
        model = PhaseModel.iid(DistributionSpec.wrapped_cauchy(B))
        mom = dos_moments(model, HALF, 8, 20_000, seed=1010)
        ok, worst = True, -np.inf
        for n in range(1, 9):
            bound = moment_bound(n, A, B, HALF)
            ok &= abs(mom.m[n]) <= bound + 3 * mom.stderr[n]
            worst = max(worst, (abs(mom.m[n]) - bound) / max(mom.stderr[n], 1e-300))
        c.check("|m_n| <= A^n e^{-Bn} S(n, 0) + 3 sigma, n <= 8", ok,
                f"max (|m|-bound)/sigma {worst:.2f}")
        v = analyticity_margin(A, B, HALF)
        c.check("margin 1 - ln 2 at A = B = 1, r = t",
                abs(v.margin - (1 - LN2)) <= 1e-15 and v.verdict == "analytic",
                f"{v.margin:.15f}")
        w = analyticity_margin(1.5, math.log(3.0) + 1e-6, Coefficients.from_r(0.2))
        c.check("B > ln 2A gives all r", w.all_r)
        A2, B2 = 1.2, 0.8
        v2 = analyticity_margin(A2, B2, HALF)
        q = math.exp(B2) / A2 - 1
        s = math.sqrt(1 - q * q)
        hand = (math.sqrt((1 - s) / 2), math.sqrt((1 + s) / 2))
        c.check("r thresholds match hand computation",
                abs(v2.r_minus - hand[0]) <= 1e-12 and abs(v2.r_plus - hand[1]) <= 1e-12,
                f"r- {v2.r_minus:.6f}, r+ {v2.r_plus:.6f}")
    assert c.passed


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
    print(f"{sum(l.startswith('PASS') for l in RESULTS)}/{len(RESULTS)} criteria passed")

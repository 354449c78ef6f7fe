"""Where the spectrum lives, and when the density of states is smooth.

For i.i.d. phases with law mu the almost sure spectrum is the free band
rotated by every point of supp mu. With phases on the arc [-0.3, 0.3] and
r = t the prediction is |lambda| <= pi/2 + 0.3.

For phases with a density whose Fourier coefficients decay like A e^{-B n},
the moments of the density of states are bounded by A^n e^{-B n} times a
path sum; when B > ln(1 + 2rt) + ln A this forces an analytic density.
"""
import numpy as np

from bandunitary import Coefficients, DistributionSpec, PhaseModel
from bandunitary.combinatorics import analyticity_margin, moment_bound
from bandunitary.spectrum import (coverage, dos_moments, pooled_measure, predicted_support,
                                  support_check)

params = Coefficients.balanced()
law = DistributionSpec.arc(0.0, 0.3)
arcs = predicted_support(law, params)
print("predicted spectrum:", [(round(a, 4), round(b, 4)) for a, b in arcs.intervals()])

mu = pooled_measure(PhaseModel.iid(law), params, size=300, n_realizations=30, seed=4)
rep = support_check(mu, arcs, tol=0.05)
print(f"eigenphases outside (tol 0.05): {rep.outlier_fraction:.4f}, "
      f"deepest point {rep.max_signed_distance:+.3f}")
print(f"predicted arc covered by eigenphases: {coverage(mu, arcs, 0.05):.3f}")

A, B = 1.0, 1.0
v = analyticity_margin(A, B, params)
print(f"\nmargin B - ln(1 + 2rt) - ln A = {v.margin:.4f} -> {v.verdict}")
mom = dos_moments(PhaseModel.iid(DistributionSpec.wrapped_cauchy(B)), params, 6, 5000, seed=5)
# Monte Carlo moments carry sampling noise, so compare against bound + 3 stderr
print(" n   |m_n|      stderr     bound")
for n in range(1, 7):
    print(f" {n}   {abs(mom.m[n]):.5f}   {mom.stderr[n]:.5f}    {moment_bound(n, A, B, params):.5f}")

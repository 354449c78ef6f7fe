"""The free operator: band spectrum, closed-form density of states, exponents.

With all phases zero the operator is a multiplication operator in Fourier
space. Its spectrum is the arc |lambda| <= arccos(r^2 - t^2), the integrated
density of states is explicit, and outside the band the Lyapunov exponent is
arccosh((r^2 - cos lambda)/t^2).
"""
import numpy as np

from bandunitary import Coefficients, PhaseModel, lyapunov_estimate, lyapunov_free
from bandunitary.spectrum import FreeMeasure, eigenphases, truncate
from bandunitary.thouless import ac_density

params = Coefficients.from_r(0.6)
F = FreeMeasure(params)
print(f"band edge arccos(r^2 - t^2) = {params.band_edge:.4f}")

block = truncate(params, PhaseModel.free().sample((-4, 1005), 0), 0, 1000)
mu = eigenphases(block)
print(f"largest |eigenphase| of a 1000-site block: {np.abs(mu.phases).max():.4f}")

grid = np.linspace(-np.pi, np.pi, 9)
print("\n lambda    N_empirical   N_0")
for l in grid:
    print(f"  {l:+.3f}    {mu.cdf(l):.4f}      {F.cdf(l):.4f}")

print("\n lambda    density (Poisson, extrapolated)   closed form")
for l in (0.0, 0.6, 1.2):
    est = ac_density(mu, l, [0.08, 0.04, 0.02]).estimate
    print(f"  {l:.2f}      {est:.4f}                          {2 * np.pi * F.density(l):.4f}")

lam = np.array([0.5, 1.5, 2.2, 3.0])
g = lyapunov_estimate(np.exp(1j * lam), PhaseModel.free(), params, 20000, 1, 0).gamma
print("\n lambda   cocycle   closed form")
for l, a, b in zip(lam, g, lyapunov_free(np.exp(1j * lam), params)):
    print(f"  {l:.2f}    {a:.5f}   {b:.5f}")

"""Uniformly distributed phases: flat spectrum and a constant Lyapunov exponent.

With i.i.d. uniform phases the density of states is d lambda / 2 pi and the
Lyapunov exponent equals ln(1/t^2) at every point of the unit circle. We
check both numerically and then tie them together through the Thouless
formula off the circle.
"""
import numpy as np

from bandunitary import Coefficients, PhaseModel, lyapunov_estimate
from bandunitary.spectrum import ks_distance, pooled_measure
from bandunitary.thouless import gamma_uniform, thouless_rhs

params = Coefficients.from_r(0.6)
model = PhaseModel.uniform()

# eigenphases of 40 truncations on 300 sites each
mu = pooled_measure(model, params, size=300, n_realizations=40, seed=1)
edges, dens = mu.histogram(bins=16)
print(f"pooled {mu.size} eigenphases, KS distance to uniform {ks_distance(mu, 'uniform'):.4f}")
print("histogram density (1 = flat):", np.round(dens, 2))

# Lyapunov exponent per two-site transfer step
lam = np.array([-2.5, -1.0, 0.0, 1.0, 2.5])
est = lyapunov_estimate(np.exp(1j * lam), model, params, n_steps=20000, n_realizations=8, seed=2)
print(f"\nln(1/t^2) = {np.log(1 / params.t ** 2):.4f}")
for l, g, s in zip(lam, est.gamma, est.stderr):
    print(f"  lambda = {l:+.2f}: gamma = {g:.4f} +- {s:.4f}")

# off the circle the exponent grows like |ln|z||, and the Thouless side agrees
print("\n   z       cocycle   Thouless  closed form")
for z in (0.8 * np.exp(0.5j), 1.25 * np.exp(-2.0j)):
    g = lyapunov_estimate(z, model, params, 20000, 8, 3).gamma
    print(f"  {abs(z):.2f}    {g:.4f}    {thouless_rhs(z, mu, params):.4f}    "
          f"{float(gamma_uniform(z, params)):.4f}")

"""Weighted lattice paths of the free operator.

S(n, j) sums the weights of n-step paths from 0 to j, where a stay costs
r^2, a unit step rt and a double step t^2, and the parity of the current
site restricts the allowed steps. A 2x2 transfer matrix of Laurent
polynomials generates all of them; at r = t they are binomial coefficients.
"""
import math

from bandunitary import Coefficients
from bandunitary.combinatorics import (gen_poly, path_sum_bruteforce, s_center,
                                       s_center_scaled, s_exact_balanced)

p = Coefficients.from_r(0.6)
plus, minus = gen_poly(3, p)
print("n = 3, generating function vs enumeration of all 4^3 step sequences")
for j in range(-6, 7):
    poly = plus if j % 2 == 0 else minus
    print(f"  j = {j:+d}: {poly.coefficient(j).real:.6f}  {path_sum_bruteforce(3, j, p):.6f}")

half = Coefficients.balanced()
plus, _ = gen_poly(6, half, exact=True)
print("\nr = t, n = 6, exact:", plus.coefficient(0), "=", s_exact_balanced(6, 0).value)

# S(n, 0) = C(2n-1, n)/2^n at r = t, so sqrt(pi n) S / 2^n tends to 1/2
for n in (50, 200, 800):
    print(f"  n = {n}: sqrt(pi n) S(n, 0) / 2^n = "
          f"{s_center(n, half, 'quad') * math.sqrt(math.pi * n) / 2 ** n:.5f}")

print("\ngeneric r: S(n, 0) sqrt(n) / (r + t)^(2n) settles to a constant")
for n in (100, 300, 600):
    print(f"  n = {n}: {s_center_scaled(n, p) * math.sqrt(n):.6f}")

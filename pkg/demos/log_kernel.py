"""
The planar log potential on a grid
==================================

Convolving with ``ln|x|`` by zero-padded FFT, checked against a brute-force
sum and against a one-dimensional radial quadrature.
"""

import math

import numpy as np

from planar_sps.grid import build_grid
from planar_sps.logkernel import build_kernel, convolve, direct_sum_potential, radial_log_oracle

# A small grid first, where the O(n^4) sum is still cheap.
g = build_grid(3.0, 32)
rho = np.random.default_rng(0).standard_normal(g.shape)
fast = convolve(build_kernel(g), rho)
slow = direct_sum_potential(g, rho)
print(f"FFT vs direct sum on 32^2: max rel diff {np.max(np.abs(fast - slow)) / np.max(np.abs(slow)):.2e}")

# Now a Gaussian blob of unit mass on the production grid.
g = build_grid(12.0, 256)
w = convolve(build_kernel(g), np.exp(-g.radius**2) / math.pi)
j0 = g.n // 2
print("\n     r     grid        quadrature")
for i in (0, 4, 16, 64, 120):
    r = abs(g.axis[j0 + i])
    (ref,) = radial_log_oracle(lambda s: math.exp(-s * s) / math.pi, [r], r_max=12.0)
    print(f"{r:6.3f}  {w[j0 + i, j0]: .8f}  {ref: .8f}")

# Far away the potential is just (total mass) * ln r.
r = g.axis[-1]
print(f"\nat r = {r:.2f}: potential {w[-1, j0]:.6f}, ln r = {math.log(r):.6f}")

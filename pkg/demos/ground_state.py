"""
A small-mass ground state
=========================

Minimise the energy at mass ``c = 0.05`` inside the kinetic ball
``A(u) < 0.5`` and look at what comes out.
"""

import math

import numpy as np

from planar_sps.functional import gamma_upper_bound
from planar_sps.groundstate import MinimizeConfig, minimize
from planar_sps.nonlinearity import NonlinearitySpec

spec = NonlinearitySpec("exp_b", 5.0, theta=1.0)

# The state is wide at this mass (width ~ 2/sqrt(c)), hence the large box.
config = MinimizeConfig(c=0.05, rho=0.5, spec=spec, L=64.0, n=256)
res = minimize(config, callback=lambda it, J, r: it % 50 or print(f"  iter {it:4d}  J={J:.10f}  res={r:.1e}"))

print(f"\nconverged after {res.iterations} steps: {res.converged}")
print(f"energy level   gamma = {res.gamma:.10f}  (bound {gamma_upper_bound(0.05):.6f})")
print(f"multiplier     lambda = {res.lambda_c:.8f}")
print(f"kinetic energy A = {res.A:.4e}, far from the ball radius 0.5")
print(f"Pohozaev residual |Q|/A = {abs(res.Q_residual) / res.A:.1e}")

# The log term grows like c ln r, so the tail falls off faster than any
# fixed exponential: the local decay rate -d ln u / dr keeps increasing.
u = res.u_c.values
g = res.u_c.grid
j0 = g.n // 2
prev = None
for i in (0, 16, 32, 64, 96):
    r = abs(g.axis[j0 + i])
    rate = ""
    if prev is not None:
        rate = f"   decay rate {-np.log(u[j0 + i, j0] / prev[1]) / (r - prev[0]):.3f}"
    print(f"  r = {r:5.1f}   u = {u[j0 + i, j0]:.3e}{rate}")
    prev = (r, u[j0 + i, j0])
print(f"sqrt|lambda| = {math.sqrt(abs(res.lambda_c)):.3f}")
print(f"min/max of u: {u.min():.2e} / {u.max():.4f}  (positive, single bump: {np.all(u > -1e-12)})")

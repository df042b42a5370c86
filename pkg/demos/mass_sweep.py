"""
Shrinking the mass
==================

Ground-state energy and kinetic energy both go to zero with the mass.
The sweep walks from the largest mass down, warm-starting each solve.
"""

from planar_sps.functional import gamma_upper_bound
from planar_sps.groundstate import MinimizeConfig, mass_sweep, sweep_to_csv
from planar_sps.nonlinearity import NonlinearitySpec

spec = NonlinearitySpec("exp_b", 5.0)
template = MinimizeConfig(c=0.2, rho=0.5, spec=spec, L=128.0, n=256)

rows = mass_sweep([0.2, 0.1, 0.05, 0.025], template)
print(sweep_to_csv(rows))

for small, big in zip(rows, rows[1:]):
    print(f"c {big.c:>5} -> {small.c:<5}  gamma x{small.gamma / big.gamma:.3f}   A x{small.A / big.A:.3f}")

# A settles at c^2/4, and gamma stays far below its c/2 + sqrt(pi) c^3/4 bound
for r in rows:
    print(f"c={r.c:<6} A/c^2 = {r.A / r.c**2:.4f}   gamma/bound = {r.gamma / gamma_upper_bound(r.c):.4f}")

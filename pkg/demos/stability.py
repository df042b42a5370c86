"""
Perturbing the ground state
===========================

Kick the ground state with a small smooth complex perturbation and track
how far the solution strays from the family of its phase rotations and
translations. For a stable state the distance stays of the order of the kick.
"""

from planar_sps.dynamics import EvolutionConfig, stability_experiment
from planar_sps.groundstate import MinimizeConfig, minimize
from planar_sps.nonlinearity import NonlinearitySpec

spec = NonlinearitySpec("exp_b", 5.0)
gs = minimize(MinimizeConfig(c=0.05, rho=0.5, spec=spec, L=64.0, n=256))

cfg = EvolutionConfig(spec=spec, dt=1e-2, T=5.0, L=64.0, n=256, record_every=50)
rep = stability_experiment(gs.u_c, [1e-3, 1e-2], trials=2, config=cfg)

print(f"|u_c|_X = {rep.u_norm_X:.5f}")
for d in rep.deltas:
    key = repr(d)
    print(f"\ndelta = {d}: sup dist / (delta |u_c|_X) = {rep.ratios[key]:.4f}")
    for run in rep.series[key]:
        row = "  ".join(f"{x / (d * rep.u_norm_X):.4f}" for x in run["dist"])
        print(f"  trial {run['trial']}: {row}")
print(f"\nwithin 20 delta |u_c|_X and no growth trend: {rep.passed}")

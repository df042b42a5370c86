"""
Ground states are standing waves
================================

With interaction strength ``2 pi`` a stationary solution ``u_c`` with
multiplier ``lambda`` should evolve as ``exp(i lambda t) u_c``. The modulus
stays put and the phase turns at a fixed rate.
"""

from planar_sps.dynamics import EvolutionConfig, standing_wave_test
from planar_sps.groundstate import MinimizeConfig, minimize
from planar_sps.nonlinearity import NonlinearitySpec

spec = NonlinearitySpec("exp_b", 5.0)
gs = minimize(MinimizeConfig(c=0.05, rho=0.5, spec=spec, L=64.0, n=256))

cfg = EvolutionConfig(spec=spec, dt=1e-2, T=5.0, L=64.0, n=256, record_every=50)
rep = standing_wave_test(gs.u_c, gs.lambda_c, cfg)

print("    t    |psi - e^{i phi} u|    phase")
for t, err, ph in zip(rep.record.times, rep.errors, rep.phases):
    print(f"{t:5.2f}   {err:.3e}            {ph: .6f}")
print(f"\nphase rate {rep.phase_rate:.9f}, expected -lambda = {rep.expected_rate:.9f}")
print(f"mass drift {rep.record.mass_drift():.1e}, energy drift {rep.record.energy_drift():.1e}")

"""
Energy along the dilation path
==============================

Stretch the ground state by ``u_t(x) = t u(t x)`` and follow the energy.
It rises from the local minimum, peaks, and falls below zero once the
nonlinearity takes over; the peak bounds the mountain-pass level from above.
"""

import numpy as np

from planar_sps.functional import mc_upper_bound, theta0
from planar_sps.groundstate import MinimizeConfig, dilation_path, minimize, mp_report
from planar_sps.nonlinearity import NonlinearitySpec

c, p = 0.05, 5.0
config = MinimizeConfig(c=c, rho=0.5, spec=NonlinearitySpec("exp_b", p), L=64.0, n=256)
gs = minimize(config)

th0 = theta0(gs.u_c, c, p)
print(f"threshold on the nonlinearity coefficient: theta0 = {th0:.4f}")

# With the coefficient at theta = 1 the path needs a long way to dip below zero.
path = dilation_path(gs.u_c, config.spec)
print(f"theta = 1: peak J = {path.J_max:.5f} at t = {path.t_max:.2f}; J < 0 first at t1 = {path.t1:g}")
for chk in path.grid_check:
    print(f"  t = {chk['t']:<5} scaling formula {chk['scaling']:.10f}   resampled grid {chk['direct']:.10f}")

# Above the threshold the bracket gamma < m_hat < bound holds.
(row,) = mp_report([2.0 * th0], config, initial=gs.u_c)
print(f"\ntheta = {row.theta:.3f}:")
print(f"  gamma = {row.gamma:.6f} < m_hat = {row.m_hat:.6f} < bound = {mc_upper_bound(c, p):.6f}")
print(f"  J(u_t1) = {row.J_at_t1:.4f} at t1 = {row.t1:g}; bracket holds: {row.passes}")

ts = np.geomspace(1, path.t1, 12)
print("\n   t        J(u_t)   (theta = 1)")
for t, J in zip(ts, np.interp(ts, path.t_samples, path.J_values)):
    print(f"{t:7.2f}  {J: .6f}")

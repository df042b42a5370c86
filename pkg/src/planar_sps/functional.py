"""Constrained energy, its gradient and the scalar diagnostics built from them.

Everything works with the normalisation

    J(u) = A(u)/2 + V(u)/4 - int F(u),

whose gradient is ``G(u) = -Lap u + (ln|.| * u^2) u - f(u)``. Standing waves
of the time-dependent problem with coupling ``gamma = 2 pi`` solve
``G(u) + lambda u = 0``.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import Field, dirichlet_energy, laplacian, lp_norm, mass, star_norm_sq
from .logkernel import V2, convolve
from .nonlinearity import F_eval, f_eval, h_eval

__all__ = [
    "EnergyBreakdown",
    "J_eval",
    "gradJ",
    "Q_eval",
    "lambda_est",
    "phi_eval",
    "lemma_gap_check",
    "GapReport",
    "gamma_upper_bound",
    "mc_upper_bound",
    "theta0",
    "v2_ratio",
    "euler_lagrange_residual",
]


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    interaction: float
    potential: float
    total: float
    c: float

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _require_real(u):
    if u.is_complex:
        raise ValueError("the stationary functional takes real fields")


def J_eval(kernel, spec, u):
    _require_real(u)
    g = u.grid
    A = dirichlet_energy(u)
    rho = u.values**2
    Vu = float(g.integrate(rho * convolve(kernel, rho)))
    intF = float(g.integrate(F_eval(spec, u.values)))
    kinetic, interaction, potential = 0.5 * A, 0.25 * Vu, -intF
    return EnergyBreakdown(kinetic, interaction, potential,
                           kinetic + interaction + potential, mass(u))


def gradJ(kernel, spec, u):
    """L^2 gradient of ``J`` without the multiplier term."""
    _require_real(u)
    vals = u.values
    w = convolve(kernel, vals**2)
    return Field(u.grid, -laplacian(vals, u.grid) + w * vals - f_eval(spec, vals))


def Q_eval(kernel, spec, u):
    """Pohozaev functional ``A - |u|_2^4/4 + int (2F(u) - f(u) u)``."""
    _require_real(u)
    vals = u.values
    m = mass(u)
    nl = u.grid.integrate(2.0 * F_eval(spec, vals) - f_eval(spec, vals) * vals)
    return float(dirichlet_energy(u) - 0.25 * m * m + nl)


def lambda_est(kernel, spec, u):
    """Multiplier ``(int f(u) u - A(u) - V(u)) / |u|_2^2``."""
    _require_real(u)
    m = mass(u)
    if m == 0:
        raise ValueError("multiplier is undefined for the zero field")
    g = u.grid
    vals = u.values
    rho = vals**2
    Vu = g.integrate(rho * convolve(kernel, rho))
    fu = g.integrate(f_eval(spec, vals) * vals)
    return float((fu - dirichlet_energy(u) - Vu) / m)


def euler_lagrange_residual(kernel, spec, u, lam=None):
    """``|G(u) + lambda u|_2 / |u|_2`` with ``lambda`` from :func:`lambda_est`."""
    lam = lambda_est(kernel, spec, u) if lam is None else lam
    r = gradJ(kernel, spec, u).values + lam * u.values
    return float(np.sqrt(u.grid.integrate(r * r) / mass(u)))


def phi_eval(spec, u, t):
    """Fiber map ``t^2 A(u)/2 - t^-2 int F(t u)``."""
    if not t > 0:
        raise ValueError(f"fiber map needs t > 0, got t={t}")
    return float(0.5 * t * t * dirichlet_energy(u)
                 - u.grid.integrate(F_eval(spec, t * u.values)) / (t * t))


def v2_ratio(kernel, u):
    """``V2(u) / (A(u)^(1/2) |u|_2^3)``, the empirical constant in the V2 bound."""
    A = dirichlet_energy(u)
    m = mass(u)
    if A == 0 or m == 0:
        return 0.0
    return V2(kernel, u) / (math.sqrt(A) * m**1.5)


@dataclass(frozen=True)
class GapReport:
    t: float
    lhs: float
    rhs: float
    K: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def lemma_gap_check(kernel, spec, u, t, p=None, K=None, slack=1e-8):
    """Compare ``J(u) - Phi(t)`` with its lower bound from the gap inequality.

    ``K`` is the constant of the V2 bound. When not given, the ratio of ``u``
    itself is used, which is the smallest value for which the inequality can
    be expected to hold.
    """
    p = spec.p if p is None else p
    if t < 0:
        raise ValueError("gap inequality needs t >= 0")
    K = v2_ratio(kernel, u) if K is None else K
    m = mass(u)
    A = dirichlet_energy(u)
    J = J_eval(kernel, spec, u).total
    if t == 0:
        phi = 0.0  # limit under the small-t decay of f
        tp = 0.0
    else:
        phi = phi_eval(spec, u, t)
        tp = t ** (p - 2)
    lhs = J - phi
    rhs = ((1 - tp) / (p - 2) * Q_eval(kernel, spec, u)
           + h_eval(t, p) / (2 * (p - 2)) * A
           - 0.25 * K * m**1.5 * math.sqrt(A)
           + (1 - tp) / (4 * (p - 2)) * m * m)
    return GapReport(float(t), float(lhs), float(rhs), float(K), bool(lhs >= rhs - slack))


def gamma_upper_bound(c):
    """Energy of the scaled Gaussian witness bounds the local minimum: ``c/2 + sqrt(pi) c^3/4``."""
    return 0.5 * c + math.sqrt(math.pi) * c**3 / 4.0


def mc_upper_bound(c, p):
    """Upper bound ``((p-4)(1-c) + c^2) / (4(p-2))`` for the mountain-pass level."""
    return ((p - 4) * (1 - c) + c * c) / (4.0 * (p - 2))


def theta0(u_c, c, p):
    """Threshold on the ``(f4)`` coefficient above which the level bound holds.

    Raises ``ValueError`` when ``1 - c + (1 - 2(p-2)|u_c|_*^2) c^2 / (p-4)`` is not
    positive, which means ``c`` is too large for the small-mass regime.
    """
    if not p > 4:
        raise ValueError("theta0 needs p > 4")
    A = dirichlet_energy(u_c)
    Lp = lp_norm(u_c, p) ** p
    star = star_norm_sq(u_c)
    denom = 1 - c + (1 - 2 * (p - 2) * star) / (p - 4) * c * c
    if not denom > 0:
        raise ValueError(f"theta0 denominator {denom:.3g} <= 0: c={c} is too large")
    return (A / ((p - 2) * Lp)) * (2 * A / denom) ** ((p - 4) / 2)

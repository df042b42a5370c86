"""Local minimisation on the mass sphere and the dilation-path estimate of the
mountain-pass level.

The minimiser is a preconditioned, mass-normalised gradient flow. Each step
moves along the tangent direction

    d = P r - (<u, P r> / <u, P u>) P u,   r = G(u) + lambda(u) u,

with ``P = (sigma - Lap)^-1``, then rescales back to mass ``c``. Steps are
accepted only if ``J`` decreases (Armijo test) and the iterate stays in the
kinetic ball ``A(u) <= rho``; otherwise the step is halved.
"""

import csv
import io
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .functional import (
    J_eval,
    Q_eval,
    euler_lagrange_residual,
    gamma_upper_bound,
    lambda_est,
    mc_upper_bound,
    theta0,
)
from .grid import (
    Field,
    build_grid,
    dilate_report,
    dirichlet_energy,
    gaussian_field,
    mass,
    normalize_mass,
    star_norm_sq,
)
from .logkernel import build_kernel, convolve
from .nonlinearity import ALPHA0, F_eval, NonlinearitySpec, f_eval

__all__ = [
    "MinimizeConfig",
    "GroundStateResult",
    "MinimizationError",
    "CriticalityError",
    "minimize",
    "mass_sweep",
    "SweepRow",
    "sweep_to_csv",
    "PathRecord",
    "dilation_path",
    "path_energy",
    "MountainPassRow",
    "mp_report",
    "recenter",
    "seed_field",
]


class MinimizationError(RuntimeError):
    """The descent could not make progress (energy rises at the smallest step)."""


class CriticalityError(ArithmeticError):
    """An iterate left the Moser-Trudinger regime ``4 pi A(u) < 4 pi (1 - margin)``."""


@dataclass(frozen=True)
class MinimizeConfig:
    c: float
    rho: float
    spec: NonlinearitySpec
    L: float = 12.0
    n: int = 256
    tau0: float = 1.0
    tol: float = 1e-6
    max_iter: int = 5000
    seed: str = "gaussian"
    seed_file: str = None
    rng_seed: int = 42
    precond_shift: float = None
    coupling: float = 1.0
    criticality_margin: float = 0.01
    armijo: float = 1e-4
    min_step: float = 1e-14

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError(f"kinetic radius must satisfy 0 < rho < 1, got rho={self.rho}")
        if not 0 < self.c < self.rho:
            raise ValueError(f"mass must satisfy 0 < c < rho, got c={self.c}, rho={self.rho}")
        if self.seed not in ("gaussian", "file", "random-smooth"):
            raise ValueError(f"unknown seed choice {self.seed!r}")
        if self.seed == "file" and not self.seed_file:
            raise ValueError("seed='file' needs seed_file")
        if not self.tol > 0 or not self.tau0 > 0 or self.max_iter < 1:
            raise ValueError("tol, tau0 and max_iter must be positive")

    @property
    def grid(self):
        return build_grid(self.L, self.n)

    def to_dict(self):
        d = asdict(self)
        d["spec"] = self.spec.to_dict()
        return d


@dataclass
class GroundStateResult:
    u_c: Field
    gamma: float
    lambda_c: float
    A: float
    Q_residual: float
    el_residual: float
    constraint_active: bool
    iterations: int
    converged: bool
    c: float = 0.0
    rho: float = 0.0
    energy_history: list = field(default_factory=list, repr=False)
    mass_drift: float = 0.0
    max_alpha_A: float = 0.0

    def summary(self):
        return {
            "c": self.c,
            "rho": self.rho,
            "gamma": self.gamma,
            "lambda_c": self.lambda_c,
            "A": self.A,
            "Q_residual": self.Q_residual,
            "el_residual": self.el_residual,
            "constraint_active": self.constraint_active,
            "iterations": self.iterations,
            "converged": self.converged,
            "mass": mass(self.u_c),
            "mass_drift": self.mass_drift,
            "star_norm_sq": star_norm_sq(self.u_c),
            "gamma_upper_bound": gamma_upper_bound(self.c),
            "grid": self.u_c.grid.to_dict(),
        }


def seed_field(config, grid=None):
    grid = grid or config.grid
    if config.seed == "gaussian":
        u = gaussian_field(grid)
    elif config.seed == "random-smooth":
        rng = np.random.default_rng(config.rng_seed)
        noise = rng.standard_normal(grid.shape)
        smooth = sfft.ifft2(sfft.fft2(noise) * np.exp(-grid.k2)).real
        env = gaussian_field(grid).values
        u = Field(grid, env * (1.0 + 0.5 * smooth / np.max(np.abs(smooth))))
    else:
        from .io import read_field

        u = read_field(config.seed_file)
        if u.grid != grid:
            raise ValueError(f"seed file grid {u.grid} does not match {grid}")
        if u.is_complex:
            u = Field(grid, np.abs(u.values))
    return normalize_mass(u, config.c)


def recenter(u):
    """Roll ``u`` by whole grid cells so its density centroid sits at the origin.

    The centroid is the circular mean of the density along each axis.
    """
    g = u.grid
    rho = np.abs(u.values) ** 2
    n = g.n
    phase = np.exp(2j * np.pi * np.arange(n) / n)
    shifts = []
    for axis in (0, 1):
        marginal = rho.sum(axis=1 - axis)
        z = np.sum(marginal * phase)
        if abs(z) < 1e-300:
            shifts.append(0)
            continue
        j = np.angle(z) / (2 * np.pi) * n  # centroid index
        shifts.append(int(round(n // 2 - j)) % n)
    if shifts == [0, 0]:
        return u
    return Field(g, np.roll(u.values, shifts, axis=(0, 1)))


class _Problem:
    """Energy pieces for one grid, kernel and nonlinearity, on raw arrays."""

    def __init__(self, grid, spec, coupling=1.0):
        self.grid = grid
        self.spec = spec
        self.kernel = build_kernel(grid)
        self.coupling = coupling

    def evaluate(self, vals):
        g = self.grid
        uh = sfft.fft2(vals)
        A = float(np.sum(g.k2 * np.abs(uh) ** 2) * g.h**2 / g.n**2)
        rho = vals * vals
        w = self.coupling * convolve(self.kernel, rho) if self.coupling else np.zeros_like(vals)
        Vu = float(g.integrate(rho * w))
        Fint = float(g.integrate(F_eval(self.spec, vals)))
        J = 0.5 * A + 0.25 * Vu - Fint
        return J, A, Vu, w, uh

    def gradient(self, vals, w, uh):
        fv = f_eval(self.spec, vals)
        lap = sfft.ifft2(-self.grid.k2 * uh).real
        return -lap + w * vals - fv, fv


def _precondition(grid, r, sigma):
    return sfft.ifft2(sfft.fft2(r) / (sigma + grid.k2)).real


def minimize(config, initial=None, callback=None):
    """Minimise ``J`` on ``S(c) intersect B_rho``.

    Parameters
    ----------
    config : MinimizeConfig
    initial : Field, optional
        Warm start; overrides ``config.seed``. It is renormalised to mass ``c``.
    callback : callable, optional
        Called as ``callback(iteration, J, residual)`` after every accepted step.

    Returns
    -------
    GroundStateResult
        ``converged`` is False when ``max_iter`` is hit before the residual
        reaches ``tol``.

    Raises
    ------
    MinimizationError
        When no step size down to ``min_step`` decreases the energy.
    CriticalityError
        When an iterate leaves the Moser-Trudinger regime.
    """
    grid = config.grid
    c = config.c
    prob = _Problem(grid, config.spec, config.coupling)
    u = normalize_mass(initial, c) if initial is not None else seed_field(config, grid)
    if u.grid != grid:
        raise ValueError("initial field is on a different grid")
    vals = np.array(u.values, dtype=float)
    h2 = grid.h**2
    a_limit = 1.0 - config.criticality_margin  # alpha0 A < 4 pi (1 - margin)

    J, A, Vu, w, uh = prob.evaluate(vals)
    if A > config.rho:
        raise ValueError(f"initial field has A={A:.4g} > rho={config.rho}")
    sigma = config.precond_shift
    history = [J]
    tau = config.tau0
    it = 0
    converged = False
    max_alpha_A = ALPHA0 * A
    while True:
        G, fv = prob.gradient(vals, w, uh)
        lam = (h2 * np.sum(fv * vals) - A - Vu) / c
        r = G + lam * vals
        res = math.sqrt(h2 * np.sum(r * r) / c)
        if res <= config.tol:
            converged = True
            break
        if it >= config.max_iter:
            break
        if sigma is None:
            sigma = max(abs(lam), 1e-3)
        Pr = _precondition(grid, r, sigma)
        Pu = _precondition(grid, vals, sigma)
        d = Pr - (np.sum(vals * Pr) / np.sum(vals * Pu)) * Pu
        slope = h2 * np.sum(r * d)
        while True:
            trial = vals - tau * d
            trial *= math.sqrt(c / (h2 * np.sum(trial * trial)))
            Jt, At, Vt, wt, uht = prob.evaluate(trial)
            if At <= config.rho and Jt <= J - config.armijo * tau * slope:
                break
            tau *= 0.5
            if tau < config.min_step:
                if Jt > J and At <= config.rho:
                    raise MinimizationError(
                        f"energy increases at the minimal step (iteration {it}, J={J:.6g})")
                # no admissible step left; the iterate is as good as it gets
                tau = None
                break
        if tau is None:
            break
        vals, J, A, Vu, w, uh = trial, Jt, At, Vt, wt, uht
        if A >= a_limit:
            raise CriticalityError(f"A(u)={A:.4g} left the Moser-Trudinger regime")
        max_alpha_A = max(max_alpha_A, ALPHA0 * A)
        history.append(J)
        it += 1
        if callback is not None:
            callback(it, J, res)
        tau = min(2.0 * tau, 1e6)

    u = recenter(Field(grid, vals))

    kernel = prob.kernel
    if config.coupling == 1.0:
        lam = lambda_est(kernel, config.spec, u)
        gamma = J_eval(kernel, config.spec, u).total
        el = euler_lagrange_residual(kernel, config.spec, u, lam)
    else:
        gamma = J
        el = res
    A = dirichlet_energy(u)
    Q = Q_eval(kernel, config.spec, u)
    return GroundStateResult(
        u_c=u,
        gamma=float(gamma),
        lambda_c=float(lam),
        A=float(A),
        Q_residual=float(Q),
        el_residual=float(el),
        constraint_active=bool(abs(A - config.rho) <= 1e-3),
        iterations=it,
        converged=bool(converged and el <= config.tol * 1.01),
        c=c,
        rho=config.rho,
        energy_history=history,
        mass_drift=abs(mass(u) - c) / c,
        max_alpha_A=float(max_alpha_A),
    )


# -- mass sweep -------------------------------------------------------------

SWEEP_HEADER = ("c", "gamma", "A", "lambda", "Q_residual", "el_residual", "converged")


@dataclass(frozen=True)
class SweepRow:
    c: float
    gamma: float
    A: float
    lambda_c: float
    Q_residual: float
    el_residual: float
    converged: bool
    below_upper_bound: bool

    def as_tuple(self):
        return (self.c, self.gamma, self.A, self.lambda_c, self.Q_residual,
                self.el_residual, self.converged)


def _row(res):
    return SweepRow(res.c, res.gamma, res.A, res.lambda_c, res.Q_residual,
                    res.el_residual, res.converged,
                    res.gamma <= gamma_upper_bound(res.c))


def _solve_cold(config):
    return minimize(config)


def mass_sweep(c_list, template, workers=1, warm_start=True):
    """Ground states for each mass in ``c_list``, returned sorted by ``c``.

    With ``warm_start`` the masses are visited from largest to smallest and
    each run starts from the previous minimiser rescaled to the new mass. That
    chain is sequential; ``workers > 1`` implies independent cold starts run
    in a process pool.
    """
    cs = sorted({float(c) for c in c_list}, reverse=True)
    for c in cs:
        if not 0 < c < template.rho:
            raise ValueError(f"sweep mass c={c} must satisfy 0 < c < rho={template.rho}")
    configs = [replace(template, c=c) for c in cs]
    if workers > 1 and len(configs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_cold, configs))
    else:
        results = []
        prev = None
        for cfg in configs:
            res = minimize(cfg, initial=prev if warm_start else None)
            results.append(res)
            prev = res.u_c
    rows = sorted((_row(r) for r in results), key=lambda r: r.c)
    return rows


def sweep_to_csv(rows, path=None):
    from .io import write_csv

    data = [r.as_tuple() for r in rows]
    if path is not None:
        return write_csv(path, SWEEP_HEADER, data)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(SWEEP_HEADER)
    for row in data:
        w.writerow([str(v).lower() if isinstance(v, bool) else repr(v) if isinstance(v, float) else v
                    for v in row])
    return buf.getvalue()


# -- dilation path ----------------------------------------------------------

@dataclass
class PathRecord:
    t_samples: np.ndarray
    J_values: np.ndarray
    t_max: float
    J_max: float
    t1: float
    J_at_t1: float
    grid_check: list = field(default_factory=list)

    def to_dict(self):
        return {
            "t_samples": [float(t) for t in self.t_samples],
            "J_values": [float(j) for j in self.J_values],
            "t_max": self.t_max,
            "J_max": self.J_max,
            "t1": self.t1,
            "J_at_t1": self.J_at_t1,
            "grid_check": self.grid_check,
        }


def path_energy(u, spec, t, A=None, V=None, kernel=None):
    """``J(u_t)`` for ``u_t(x) = t u(t x)`` from the exact scaling relations.

    ``A(u_t) = t^2 A(u)``, ``V(u_t) = V(u) - c^2 ln t`` and
    ``int F(u_t) = t^-2 int F(t u)`` turn the energy along the path into a
    function of ``u``'s own samples, so large ``t`` needs no resampling.
    """
    if not t > 0:
        raise ValueError(f"path parameter must be positive, got t={t}")
    if A is None:
        A = dirichlet_energy(u)
    if V is None:
        from .logkernel import V as V_form

        V = V_form(kernel or build_kernel(u.grid), u)
    c = mass(u)
    Fint = u.grid.integrate(F_eval(spec, t * u.values)) / (t * t)
    return float(0.5 * t * t * A + 0.25 * (V - c * c * math.log(t)) - Fint)


def dilation_path(u_c, spec, num=200, t_start=2.0, t_limit=1e4, check_ts=(0.8, 1.25, 2.0)):
    """Energy along ``t -> (u_c)_t`` from ``t = 1`` to the first doubling ``t1``
    with ``J < 0``, sampled on a log grid.

    ``grid_check`` compares the scaling formula with a direct evaluation on
    the resampled field for the ``check_ts`` whose dilation stays resolved.
    """
    from .logkernel import V as V_form

    kernel = build_kernel(u_c.grid)
    A = dirichlet_energy(u_c)
    V = V_form(kernel, u_c)
    t1 = float(t_start)
    while path_energy(u_c, spec, t1, A, V) >= 0:
        t1 *= 2.0
        if t1 > t_limit:
            raise ValueError(f"no t <= {t_limit} with J(u_t) < 0; the path never dips below zero")
        if spec.t_cap < t1 * float(np.max(np.abs(u_c.values))):
            raise ValueError(
                f"dilated amplitude exceeds the nonlinearity range at t={t1:g}; increase resolution")
    ts = np.geomspace(1.0, t1, num)
    Js = np.array([path_energy(u_c, spec, t, A, V) for t in ts])
    k = int(np.argmax(Js))
    checks = []
    for t in check_ts:
        ut, truncated, lost = dilate_report(u_c, t)
        # resolution of the resampled field: spectral tail beyond 2/3 Nyquist
        uh = np.abs(sfft.fft2(ut.values))
        g = u_c.grid
        kmax = np.pi / g.h
        tail = float(np.sqrt(np.sum(uh[g.k2 > (2 * kmax / 3) ** 2] ** 2) / np.sum(uh**2)))
        resolved = (not truncated) and tail < 1e-6
        checks.append({
            "t": float(t),
            "scaling": path_energy(u_c, spec, t, A, V),
            "direct": J_eval(kernel, spec, ut).total,
            "resolved": bool(resolved),
            "lost_mass": lost,
        })
    return PathRecord(ts, Js, float(ts[k]), float(Js[k]), t1, float(Js[-1]), checks)


# -- level bracket ----------------------------------------------------------

@dataclass(frozen=True)
class MountainPassRow:
    theta: float
    gamma: float
    m_hat: float
    bound: float
    theta0: float
    t1: float
    J_at_t1: float
    passes: bool

    def to_dict(self):
        return asdict(self)


def mp_report(theta_list, template, num=200, initial=None):
    """For each ``theta`` recompute the ground state and the path maximum.

    ``passes`` means ``gamma < m_hat < bound`` and ``J(u_t1) < 0``; it is only
    expected when ``theta`` exceeds ``theta0`` of the recomputed state.
    """
    p = template.spec.p
    rows = []
    for theta in theta_list:
        spec = replace(template.spec, theta=float(theta))
        res = minimize(replace(template, spec=spec), initial=initial)
        path = dilation_path(res.u_c, spec, num=num)
        bound = mc_upper_bound(template.c, p)
        try:
            th0 = theta0(res.u_c, template.c, p)
        except ValueError:
            th0 = float("nan")
        passes = res.gamma < path.J_max < bound and path.J_at_t1 < 0
        rows.append(MountainPassRow(float(theta), res.gamma, path.J_max, bound, th0,
                                    path.t1, path.J_at_t1, bool(passes and res.converged)))
    return rows

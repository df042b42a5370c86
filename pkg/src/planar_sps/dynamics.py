"""Split-step evolution of ``i psi_t + Lap psi + gamma w psi + f(psi) = 0`` with
``w = -(1/2 pi) ln|.| * |psi|^2``.

One step is the symmetric splitting

    psi <- exp(i dt/2 (gamma w + q(|psi|))) psi
    psi <- IFFT(exp(-i dt |k|^2) FFT(psi))
    psi <- exp(i dt/2 (gamma w + q(|psi|))) psi

Both phase factors depend on ``|psi|`` only, so each half step leaves the
modulus untouched and the potential at the end of one step is reused at the
start of the next.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import Field, build_grid, dirichlet_energy, mass, normalize_mass, x_norm_sq
from .logkernel import build_kernel, convolve
from .nonlinearity import F_eval, NonlinearityRangeError, NonlinearitySpec, q_eval

__all__ = [
    "EvolutionConfig",
    "TrajectoryRecord",
    "EvolutionState",
    "POTENTIAL_MODES",
    "assemble_potential",
    "energy",
    "initial_state",
    "step",
    "evolve",
    "modulated_error",
    "dist_to_orbit",
    "standing_wave_test",
    "StandingWaveReport",
    "stability_experiment",
    "StabilityReport",
    "smooth_perturbation",
    "is_monotone_growth",
    "growth_ratio",
]

POTENTIAL_MODES = ("direct", "split_linear")
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EvolutionConfig:
    spec: NonlinearitySpec
    dt: float = 1e-3
    T: float = 1.0
    gamma: float = TWO_PI
    potential_mode: str = "direct"
    L: float = 12.0
    n: int = 256
    record_every: int = 10
    kinetic_warning: float = 0.9

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ValueError(f"dt and T must be positive, got dt={self.dt}, T={self.T}")
        if self.potential_mode not in POTENTIAL_MODES:
            raise ValueError(f"unknown potential mode {self.potential_mode!r}; use {POTENTIAL_MODES}")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be a finite real number")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def grid(self):
        return build_grid(self.L, self.n)

    @property
    def steps(self):
        return int(round(self.T / self.dt))


@dataclass
class TrajectoryRecord:
    times: list = field(default_factory=list)
    mass_series: list = field(default_factory=list)
    energy_series: list = field(default_factory=list)
    dist_series: list = field(default_factory=list)
    max_modulus_series: list = field(default_factory=list)

    HEADER = ("t", "mass", "energy", "dist", "max_modulus")

    def rows(self):
        dist = self.dist_series or [float("nan")] * len(self.times)
        return list(zip(self.times, self.mass_series, self.energy_series, dist,
                        self.max_modulus_series))

    def mass_drift(self):
        m0 = self.mass_series[0]
        return max(abs(m - m0) for m in self.mass_series) / m0

    def energy_drift(self):
        e0 = self.energy_series[0]
        return max(abs(e - e0) for e in self.energy_series) / max(abs(e0), 1e-300)

    def to_dict(self):
        return {
            "times": self.times,
            "mass": self.mass_series,
            "energy": self.energy_series,
            "dist": self.dist_series,
            "max_modulus": self.max_modulus_series,
        }


def _log_potential(kernel, rho, mode):
    """``ln|.| * rho`` in ``direct`` mode, or rebuilt from the split pieces.

    The split form is ``M ln(1 + |x|) + R(x)`` with the remainder
    ``R = (ln(1+|.|) - ln(1+1/|.|)) * rho - M ln(1 + |x|)``.
    """
    if mode == "direct":
        return convolve(kernel, rho, "B0")
    if mode == "split_linear":
        g = kernel.grid
        M = g.integrate(rho)
        linear = M * np.log1p(g.radius)
        remainder = convolve(kernel, rho, "B1") - convolve(kernel, rho, "B2") - linear
        return linear + remainder
    raise ValueError(f"unknown potential mode {mode!r}; use {POTENTIAL_MODES}")


def assemble_potential(kernel, psi, gamma=TWO_PI, mode="direct"):
    """Real potential ``gamma w = -(gamma / 2 pi) (ln|.| * |psi|^2)``."""
    if psi.grid != kernel.grid:
        raise ValueError("field and kernel grids differ")
    rho = np.abs(psi.values) ** 2
    return Field(psi.grid, -(gamma / TWO_PI) * _log_potential(kernel, rho, mode))


def energy(kernel, spec, psi, gamma=TWO_PI):
    """``A/2 + (gamma / 8 pi) V - int F(|psi|)``."""
    g = psi.grid
    rho = np.abs(psi.values) ** 2
    Vu = g.integrate(rho * convolve(kernel, rho))
    Fint = g.integrate(F_eval(spec, np.abs(psi.values)))
    return float(0.5 * dirichlet_energy(psi) + gamma / (8.0 * math.pi) * Vu - Fint)


@dataclass
class EvolutionState:
    """Current samples plus the phase rate ``gamma w + q(|psi|)`` that belongs to them."""

    psi: np.ndarray
    t: float
    log_conv: np.ndarray
    rate: np.ndarray


def _rate(kernel, spec, psi, gamma, mode):
    s = np.abs(psi)
    if spec.t_cap < float(np.max(s)):
        raise NonlinearityRangeError(
            f"max|psi| = {np.max(s):.4g} exceeds the nonlinearity range "
            f"{spec.t_cap}: possible amplitude blow-up or under-resolution")
    lc = _log_potential(kernel, s * s, mode)
    return lc, -(gamma / TWO_PI) * lc + q_eval(spec, s)


def initial_state(psi0, config, kernel=None):
    kernel = kernel or build_kernel(psi0.grid)
    vals = np.array(psi0.values, dtype=np.complex128)
    lc, rate = _rate(kernel, config.spec, vals, config.gamma, config.potential_mode)
    return EvolutionState(vals, 0.0, lc, rate)


def step(state, config, kernel, dt=None):
    """Advance one symmetric split step in place and return ``state``.

    A negative ``dt`` runs the exact inverse step.
    """
    dt = config.dt if dt is None else dt
    g = kernel.grid
    psi = state.psi * np.exp(0.5j * dt * state.rate)
    psi = sfft.ifft2(np.exp(-1j * dt * g.k2) * sfft.fft2(psi))
    lc, rate = _rate(kernel, config.spec, psi, config.gamma, config.potential_mode)
    psi *= np.exp(0.5j * dt * rate)
    state.psi, state.log_conv, state.rate = psi, lc, rate
    state.t += dt
    return state


def _energy_from_state(state, config, grid):
    rho = np.abs(state.psi) ** 2
    f = Field(grid, state.psi)
    Vu = grid.integrate(rho * state.log_conv)
    Fint = grid.integrate(F_eval(config.spec, np.abs(state.psi)))
    return float(0.5 * dirichlet_energy(f) + config.gamma / (8.0 * math.pi) * Vu - Fint)


def evolve(psi0, config, reference=None, steps=None, observer=None):
    """Evolve ``psi0`` for ``steps`` (default ``T / dt``) steps.

    Diagnostics are recorded every ``record_every`` steps and at the end. With
    a ``reference`` field the modulated X-distance to its orbit is recorded
    too. ``observer(state)`` is called at every record.

    Returns ``(final_field, TrajectoryRecord)``.
    """
    grid = psi0.grid
    if grid != config.grid:
        raise ValueError(f"initial field grid {grid} does not match config grid {config.grid}")
    kernel = build_kernel(grid)
    state = initial_state(psi0, config, kernel)
    nsteps = config.steps if steps is None else int(steps)
    rec = TrajectoryRecord()
    warned = False

    def record():
        nonlocal warned
        f = Field(grid, state.psi)
        rec.times.append(float(state.t))
        rec.mass_series.append(mass(f))
        rec.energy_series.append(_energy_from_state(state, config, grid))
        rec.max_modulus_series.append(float(np.max(np.abs(state.psi))))
        if reference is not None:
            rec.dist_series.append(dist_to_orbit(f, reference))
        A = dirichlet_energy(f)
        if A >= config.kinetic_warning and not warned:
            warnings.warn(f"kinetic energy {A:.3g} at t={state.t:.4g} is close to the "
                          "Moser-Trudinger threshold 1", RuntimeWarning, stacklevel=3)
            warned = True
        if observer is not None:
            observer(state)

    record()
    for k in range(1, nsteps + 1):
        step(state, config, kernel)
        if k % config.record_every == 0 or k == nsteps:
            record()
    return Field(grid, state.psi), rec


def _project(psi, u):
    """Optimal phase alignment: ``e^{i theta} u`` closest to ``psi`` in L^2."""
    z = np.vdot(u, psi)
    phase = z / abs(z) if abs(z) > 0 else 1.0
    return phase * u, z


def modulated_error(psi, u):
    """``min_theta |psi - e^{i theta} u|_2`` for two fields on one grid."""
    aligned, _ = _project(psi.values, u.values)
    return float(math.sqrt(psi.grid.integrate(np.abs(psi.values - aligned) ** 2)))


def dist_to_orbit(psi, u_ref):
    """X-distance from ``psi`` to ``{e^{i theta} u_ref(. - y)}`` over grid shifts ``y``.

    The shift maximising ``|<u_ref(. - y), psi>|`` is found by FFT
    cross-correlation; the phase is then optimal for that shift.
    """
    if psi.grid != u_ref.grid:
        raise ValueError("fields live on different grids")
    corr = sfft.ifft2(np.conj(sfft.fft2(u_ref.values)) * sfft.fft2(psi.values))
    j, k = np.unravel_index(int(np.argmax(np.abs(corr))), corr.shape)
    shifted = np.roll(u_ref.values, (j, k), axis=(0, 1))
    aligned, _ = _project(psi.values, shifted)
    return float(math.sqrt(x_norm_sq(Field(psi.grid, psi.values - aligned))))


@dataclass
class StandingWaveReport:
    record: TrajectoryRecord
    errors: list
    phases: list
    max_error: float
    tolerance: float
    phase_rate: float
    expected_rate: float
    phase_rate_error: float
    passed: bool

    def to_dict(self):
        return {
            "times": self.record.times,
            "modulated_error": self.errors,
            "phase": self.phases,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "phase_rate": self.phase_rate,
            "expected_rate": self.expected_rate,
            "phase_rate_error": self.phase_rate_error,
            "mass_drift": self.record.mass_drift(),
            "energy_drift": self.record.energy_drift(),
            "passed": self.passed,
        }


def standing_wave_test(u_c, lambda_c, config, tol=None, rate_tol=1e-3):
    """Evolve ``u_c`` and compare with the standing wave ``e^{i lambda t} u_c``.

    The recorded phase is ``arg int u_c conj(psi)``, which advances at rate
    ``-lambda_c``. ``phase_rate_error`` is relative to ``|lambda_c|``.
    """
    c = mass(u_c)
    tol = 1e-4 * math.sqrt(c) if tol is None else tol
    errors, phases = [], []
    u = u_c.values

    def observe(state):
        errors.append(modulated_error(Field(u_c.grid, state.psi), u_c))
        phases.append(float(np.angle(np.vdot(state.psi, u))))

    _, rec = evolve(Field(u_c.grid, u.astype(np.complex128)), config, observer=observe)
    unwrapped = np.unwrap(phases)
    t = np.asarray(rec.times)
    rate = float(np.polyfit(t, unwrapped, 1)[0]) if len(t) > 1 else 0.0
    expected = -float(lambda_c)
    rate_err = abs(rate - expected) / max(abs(expected), 1e-300)
    max_err = max(errors)
    return StandingWaveReport(rec, errors, [float(p) for p in unwrapped], max_err, tol,
                              rate, expected, rate_err,
                              bool(max_err <= tol and rate_err <= rate_tol))


def smooth_perturbation(u_c, rng, scale=1.0):
    """Complex band-limited noise, localised where ``u_c`` lives, with
    ``|eta|_X = |u_c|_X``."""
    g = u_c.grid
    filt = np.exp(-g.k2 / (2.0 * scale**2))
    noise = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    smooth = sfft.ifft2(filt * sfft.fft2(noise))
    env = np.abs(u_c.values) / np.max(np.abs(u_c.values))
    eta = Field(g, smooth * env)
    ratio = math.sqrt(x_norm_sq(u_c) / x_norm_sq(eta))
    return Field(g, eta.values * ratio)


@dataclass
class StabilityReport:
    deltas: list
    trials: int
    sup_dist: dict
    ratios: dict
    monotone_growth: dict
    growth: dict
    strictly_increasing: dict
    u_norm_X: float
    bound_factor: float
    passed: bool
    series: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            "deltas": self.deltas,
            "trials": self.trials,
            "sup_dist": self.sup_dist,
            "sup_dist_over_delta_norm": self.ratios,
            "monotone_growth": self.monotone_growth,
            "max_growth_ratio": self.growth,
            "any_strictly_increasing": self.strictly_increasing,
            "u_norm_X": self.u_norm_X,
            "bound_factor": self.bound_factor,
            "passed": self.passed,
        }


def growth_ratio(series):
    """Final over initial distance of a recorded series."""
    return float(series[-1] / series[0]) if series[0] > 0 else float("inf")


def strictly_increasing(series):
    d = np.asarray(series)
    return bool(len(d) > 2 and np.all(np.diff(d) > 0))


def is_monotone_growth(series, factor=2.0):
    """A growth trend: the distance rises at every record and at least
    ``factor``-folds over the run.

    Slow monotone drift of a few percent is what bounded, linearly stable
    dynamics look like over a window shorter than the oscillation period, so
    a rise alone is not counted.
    """
    return strictly_increasing(series) and growth_ratio(series) >= factor


def _stability_trial(args):
    u_c, delta, trial, rng_seed, config = args
    rng = np.random.default_rng([int(rng_seed), int(trial)])
    eta = smooth_perturbation(u_c, rng)
    psi0 = normalize_mass(Field(u_c.grid, u_c.values + delta * eta.values), mass(u_c))
    _, rec = evolve(psi0, config, reference=u_c)
    return rec.times, rec.dist_series


def stability_experiment(u_c, delta_list, trials, config, rng_seed=42, bound_factor=20.0,
                         workers=1):
    """Sup over time of the orbit distance for perturbed ground states.

    Trial ``j`` draws its perturbation shape from the stream seeded by
    ``(rng_seed, j)``, so every ``delta`` sees the same shapes. ``passed``
    requires ``sup_t dist <= bound_factor * delta * |u_c|_X`` for every trial
    and no growth trend in the sense of :func:`is_monotone_growth`.
    """
    norm_X = math.sqrt(x_norm_sq(u_c))
    jobs = [(u_c, float(d), j, rng_seed, config) for d in delta_list for j in range(trials)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_stability_trial, jobs))
    else:
        results = [_stability_trial(job) for job in jobs]
    sup, ratios, mono, series, growth, incr = {}, {}, {}, {}, {}, {}
    ok = True
    for (_, d, j, _, _), (times, dist) in zip(jobs, results):
        key = repr(d)
        s = max(dist)
        sup[key] = max(sup.get(key, 0.0), s)
        ratios[key] = sup[key] / (d * norm_X) if d > 0 else float("nan")
        grows = is_monotone_growth(dist)
        mono[key] = mono.get(key, False) or grows
        growth[key] = max(growth.get(key, 0.0), growth_ratio(dist))
        incr[key] = incr.get(key, False) or strictly_increasing(dist)
        series.setdefault(key, []).append({"trial": j, "times": times, "dist": dist})
        if d > 0 and s > bound_factor * d * norm_X:
            ok = False
        ok = ok and not grows
    return StabilityReport([float(d) for d in delta_list], int(trials), sup, ratios, mono,
                           growth, incr, norm_X, bound_factor, ok, series)

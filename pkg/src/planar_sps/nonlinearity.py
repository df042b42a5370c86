"""Exponential-critical and power nonlinearities, and sampled checks of their
structural conditions.

Three families are supported:

``exp_a``   ``f(t) = |t|^(p-2) t exp(4 pi t^2)``, ``F`` by power series
``exp_b``   ``F(t) = theta |t|^p exp(4 pi t^2)``
``power``   ``f(t) = a |t|^(p-2) t``, ``F(t) = a |t|^p / p``

All evaluations are vectorised over numpy arrays. Complex arguments are
handled through the modulus, ``f(z) = q(|z|) z`` with ``q(s) = f(s)/s``.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "ALPHA0",
    "NonlinearityRangeError",
    "NonlinearitySpec",
    "ConditionReport",
    "f_eval",
    "F_eval",
    "q_eval",
    "f_complex",
    "check_f1",
    "check_f2",
    "check_f5",
    "check_f6",
    "check_f7",
    "g_eval",
    "check_g_nonneg",
    "h_eval",
    "check_h_nonneg",
    "check_F_ratio_monotone",
    "moser_trudinger_integral",
    "gn_check",
]

ALPHA0 = 4.0 * math.pi
KINDS = ("exp_a", "exp_b", "power")


class NonlinearityRangeError(ArithmeticError):
    """Argument beyond the range where the exponential can be evaluated safely."""


@dataclass(frozen=True)
class NonlinearitySpec:
    kind: str
    p: float
    theta: float = 1.0
    a: float = 1.0
    t_cap: float = 7.0
    alpha0: float = field(default=ALPHA0, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}; use one of {KINDS}")
        if self.kind == "exp_a" and not self.p > 2:
            raise ValueError(f"exp_a needs p > 2, got p={self.p}")
        if self.kind == "exp_b" and not self.p > 4:
            raise ValueError(f"exp_b needs p > 4, got p={self.p}")
        if self.kind == "power" and not self.p >= 2:
            raise ValueError(f"power needs p >= 2, got p={self.p}")

    @property
    def is_zero(self):
        return (self.kind == "power" and self.a == 0) or (self.kind == "exp_b" and self.theta == 0)

    def to_json(self):
        return json.dumps({"kind": self.kind, "p": self.p, "theta": self.theta, "a": self.a})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(kind=d["kind"], p=float(d["p"]), theta=float(d.get("theta", 1.0)),
                   a=float(d.get("a", 1.0)))

    def to_dict(self):
        d = asdict(self)
        d.pop("alpha0")
        return d


def _check_range(spec, s):
    if spec.kind == "power":
        return
    m = np.max(s) if np.size(s) else 0.0
    if m > spec.t_cap:
        raise NonlinearityRangeError(
            f"|t| = {m:.3g} exceeds the nonlinearity range cap {spec.t_cap}")


def _exp_a_series(s, p):
    """``sum_k (4 pi)^k s^(p+2k) / (k! (p+2k))`` for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    x = ALPHA0 * s * s
    a = s**p
    total = a / p
    k = 0
    while True:
        k += 1
        a = a * x / k
        term = a / (p + 2 * k)
        total = total + term
        if np.all(term <= 1e-16 * total):
            break
        if k > 5000:  # pragma: no cover - guarded by the range cap
            raise NonlinearityRangeError("exp_a series did not converge")
    return total


def F_eval(spec, t):
    """Primitive ``F(t) = int_0^t f``; even in ``t``."""
    t = np.asarray(t, dtype=float)
    s = np.abs(t)
    _check_range(spec, s)
    p = spec.p
    if spec.kind == "power":
        out = spec.a * s**p / p
    elif spec.kind == "exp_b":
        out = spec.theta * s**p * np.exp(ALPHA0 * s * s)
    else:
        out = _exp_a_series(s, p)
    return out if out.ndim else float(out)


def q_eval(spec, s):
    """Modulus coefficient ``q(s) = f(s)/s`` (``q(0) = 0``) for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    _check_range(spec, s)
    p = spec.p
    if spec.kind == "power":
        out = spec.a * s ** (p - 2)
    elif spec.kind == "exp_b":
        out = spec.theta * (p * s ** (p - 2) + 2.0 * ALPHA0 * s**p) * np.exp(ALPHA0 * s * s)
    else:
        out = s ** (p - 2) * np.exp(ALPHA0 * s * s)
    return out if out.ndim else float(out)


def f_eval(spec, t):
    """``f(t)``; odd in ``t`` and ``f(0) = 0``."""
    t = np.asarray(t, dtype=float)
    out = q_eval(spec, np.abs(t)) * t
    return out if np.ndim(out) else float(out)


def f_complex(spec, z):
    """Gauge-covariant extension ``f(z) = q(|z|) z``."""
    z = np.asarray(z)
    return q_eval(spec, np.abs(z)) * z


@dataclass
class ConditionReport:
    name: str
    passed: bool
    worst: float
    details: dict = field(default_factory=dict)


def _positive_samples(lo, hi, num):
    return np.geomspace(lo, hi, num)


def check_f1(spec, t_max=None, witnesses=(ALPHA0 - 0.5, ALPHA0 + 0.5)):
    """Sampled critical-growth test at two witness exponents around ``4 pi``.

    ``f(t)/(exp(alpha t^2) - 1)`` must be increasing in the tail for
    ``alpha < 4 pi`` and decreasing for ``alpha > 4 pi``. Only the exponential
    families have critical growth; for ``power`` both ratios decay.
    """
    t_max = t_max or spec.t_cap
    t = np.linspace(0.5 * t_max, t_max, 64)
    ft = np.abs(f_eval(spec, t))
    lo, hi = witnesses
    r_lo = np.log(ft) - np.log(np.expm1(lo * t * t))
    r_hi = np.log(ft) - np.log(np.expm1(hi * t * t))
    grows = bool(np.all(np.diff(r_lo) > 0))
    decays = bool(np.all(np.diff(r_hi) < 0))
    return ConditionReport("f1", grows and decays, float(r_hi[-1] - r_hi[0]),
                           {"below_grows": grows, "above_decays": decays})


def check_f2(spec, tau=3.5, samples=None):
    """``|f(t)|/|t|^tau -> 0`` as ``t -> 0`` on a geometric sample.

    Passes when the ratio decreases monotonically towards ``t = 1e-8`` and has
    dropped by at least three decades over the sample.
    """
    t = _positive_samples(1e-8, 1e-1, 29) if samples is None else np.asarray(samples)
    ratio = np.abs(f_eval(spec, t)) / t**tau
    r = ratio[::-1]  # from large t to small t
    ok = bool(np.all(np.diff(r) <= 0) and r[-1] <= 1e-3 * r[0])
    return ConditionReport("f2", ok, float(r[-1]), {"tau": tau})


def check_f5(spec, samples=None):
    """``|f(t)|/|t| -> 0`` monotonically along ``t = 1e-1 ... 1e-8``."""
    t = _positive_samples(1e-8, 1e-1, 29) if samples is None else np.asarray(samples)
    r = (np.abs(f_eval(spec, t)) / t)[::-1]
    ok = bool(np.all(np.diff(r) <= 0) and r[-1] < 1e-6)
    return ConditionReport("f5", ok, float(r[-1]))


def _monotone_up(values, rtol=1e-12):
    d = np.diff(values)
    scale = np.maximum(np.abs(values[1:]), np.abs(values[:-1]))
    worst = float(np.min(d / np.where(scale > 0, scale, 1.0)))
    return bool(np.all(d >= -rtol * scale)), worst


def check_f6(spec, beta, samples=None):
    """``(t f(t) - 2 F(t)) / |t|^beta`` increasing on ``t > 0``, decreasing on ``t < 0``."""
    t = _positive_samples(1e-3, 3.0, 200) if samples is None else np.asarray(samples)
    ratio = (t * f_eval(spec, t) - 2.0 * F_eval(spec, t)) / t**beta
    ok_pos, worst = _monotone_up(ratio)
    tn = -t[::-1]
    ratio_n = (tn * f_eval(spec, tn) - 2.0 * F_eval(spec, tn)) / np.abs(tn) ** beta
    ok_neg, worst_n = _monotone_up(-ratio_n)
    return ConditionReport("f6", ok_pos and ok_neg, min(worst, worst_n), {"beta": beta})


def check_f7(spec, eps=0.1, box=1.0, num=400, rng_seed=0):
    """Discrete Lipschitz ratio of ``f`` on a sampled complex box.

    Reports ``max |f(z1) - f(z2)| / (|z1 - z2| sum_j (exp(4 pi (1+eps) |z_j|^2) - 1))``
    over random pairs. The constant is not known in closed form, so the
    report passes whenever the ratio is finite.
    """
    rng = np.random.default_rng(rng_seed)
    z1 = rng.uniform(-box, box, num) + 1j * rng.uniform(-box, box, num)
    z2 = rng.uniform(-box, box, num) + 1j * rng.uniform(-box, box, num)
    num_ = np.abs(f_complex(spec, z1) - f_complex(spec, z2))
    den = np.abs(z1 - z2) * (np.expm1(ALPHA0 * (1 + eps) * np.abs(z1) ** 2)
                             + np.expm1(ALPHA0 * (1 + eps) * np.abs(z2) ** 2))
    ratio = num_ / den
    worst = float(np.max(ratio))
    return ConditionReport("f7", bool(np.isfinite(worst)), worst, {"eps": eps, "box": box})


def g_eval(spec, t, v, p=None):
    """``t^-2 F(t v) - F(v) + (1 - t^(p-2))/(p-2) (f(v) v - 2 F(v))``."""
    p = spec.p if p is None else p
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("g is defined for t > 0 only")
    v = np.asarray(v, dtype=float)
    Fv = F_eval(spec, v)
    out = (F_eval(spec, t * v) / t**2 - Fv
           + (1.0 - t ** (p - 2)) / (p - 2) * (f_eval(spec, v) * v - 2.0 * Fv))
    return out if np.ndim(out) else float(out)


def _g_scale(spec, t, v, p):
    Fv = np.abs(F_eval(spec, v))
    return (np.abs(F_eval(spec, t * v)) / t**2 + Fv
            + np.abs((1.0 - t ** (p - 2)) / (p - 2)) * (np.abs(f_eval(spec, v) * v) + 2 * Fv))


def check_g_nonneg(spec, p=None, t_samples=None, v_samples=None, tol=1e-12):
    """``g(t, v) >= 0`` on a tensor grid, with ``g(1, v) = 0``.

    The lower bound is ``-tol`` times the magnitude of the terms of ``g``;
    for large ``|v|`` the terms reach ``exp(4 pi t^2 v^2)`` and an absolute
    threshold would only measure roundoff.
    """
    p = spec.p if p is None else p
    t = np.linspace(0.1, 3.0, 59) if t_samples is None else np.asarray(t_samples)
    v = np.linspace(-2.0, 2.0, 81) if v_samples is None else np.asarray(v_samples)
    T, Vv = np.meshgrid(t, v, indexing="ij")
    g = g_eval(spec, T, Vv, p)
    scale = np.maximum(_g_scale(spec, T, Vv, p), 1e-300)
    rel = g / scale
    g1 = g_eval(spec, np.ones_like(v), v, p)
    ok = bool(np.all(g >= -tol * scale)) and bool(np.all(g1 == 0.0))
    return ConditionReport("g_nonneg", ok, float(np.min(rel)),
                           {"max_abs_g_at_t1": float(np.max(np.abs(g1)))})


def h_eval(t, p):
    """``2 t^(p-2) - (p-2) t^2 + p - 4``."""
    if not p > 4:
        raise ValueError(f"h needs p > 4, got p={p}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("h is defined for t >= 0")
    out = 2.0 * t ** (p - 2) - (p - 2) * t**2 + p - 4
    return out if np.ndim(out) else float(out)


def check_h_nonneg(p, samples=None):
    t = np.linspace(0.0, 5.0, 501) if samples is None else np.asarray(samples)
    h = h_eval(t, p)
    scale = 2.0 * t ** (p - 2) + (p - 2) * t**2 + p - 4
    ok = bool(np.all(h >= -1e-12 * scale)) and h_eval(1.0, p) == 0.0
    off = np.abs(t - 1.0) > 1e-9
    strict = bool(np.all(h[off] > 0))
    return ConditionReport("h_nonneg", ok and strict, float(np.min(h)),
                           {"h_at_1": h_eval(1.0, p), "strict_away_from_1": strict})


def check_F_ratio_monotone(spec, p=None, samples=None):
    """``F(t) / (|t|^(p-1) t)`` non-decreasing on ``(0, 3]``."""
    p = spec.p if p is None else p
    t = np.linspace(0.01, 3.0, 300) if samples is None else np.asarray(samples)
    ratio = F_eval(spec, t) / (t ** (p - 1) * t)
    ok, worst = _monotone_up(ratio)
    return ConditionReport("F_ratio", ok, worst, {"p": p})


def moser_trudinger_integral(u, alpha):
    """``int (exp(alpha u^2) - 1)`` on the grid."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    s = alpha * np.abs(u.values) ** 2
    if s.size and np.max(s) > 700:
        raise NonlinearityRangeError(f"alpha u^2 reaches {np.max(s):.1f} > 700")
    return float(u.grid.integrate(np.expm1(s)))


def gn_check(u, r):
    """Gagliardo-Nirenberg ratio ``||u||_r^r / (A(u)^((r-2)/2) ||u||_2^2)``."""
    from .grid import dirichlet_energy, lp_norm, mass

    if not r > 2:
        raise ValueError("GN ratio needs r > 2")
    m = mass(u)
    if m == 0:
        raise ValueError("GN ratio is undefined for the zero field")
    A = dirichlet_energy(u)
    return lp_norm(u, r) ** r / (A ** ((r - 2) / 2) * m)

"""Seeded property suite over a corpus of test fields.

Each check returns a :class:`CheckReport`. Identities (oracle agreement,
scaling laws, gradient consistency, structural properties of the closed-form
nonlinearities) are hard checks and can fail; inequalities whose constant is
only known empirically are ``report-only``.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft as sfft

from . import functional as fn
from . import nonlinearity as nl
from .grid import (
    Field,
    build_grid,
    dilate,
    dilate_report,
    dirichlet_energy,
    gaussian_field,
    lp_norm,
    mass,
    normalize_mass,
    shift,
    star_norm_sq,
)
from .groundstate import path_energy
from .logkernel import (
    V,
    V1,
    V2,
    build_kernel,
    convolve,
    direct_sum_potential,
    radial_log_oracle,
)

__all__ = ["CheckReport", "build_corpus", "run_suite", "format_table", "report_json",
           "DEFAULT_SPECS"]

PASS, FAIL, REPORT = "pass", "fail", "report-only"

DEFAULT_SPECS = (
    nl.NonlinearitySpec("exp_b", 5.0, theta=1.0),
    nl.NonlinearitySpec("exp_a", 5.0),
    nl.NonlinearitySpec("power", 6.0, a=1.0),
)


@dataclass
class CheckReport:
    check_id: str
    status: str
    measured: dict
    tolerance: float
    anchor: str

    def to_dict(self):
        return asdict(self)


@dataclass
class Corpus:
    grid: object
    fields: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def __len__(self):
        return len(self.fields)


def _band_limited(grid, rng, k0=1.5, width=2.0):
    filt = np.exp(-grid.k2 / (2 * k0**2))
    noise = rng.standard_normal(grid.shape)
    smooth = sfft.ifft2(filt * sfft.fft2(noise)).real
    env = gaussian_field(grid, width=width).values
    return Field(grid, smooth * env)


def build_corpus(seed=42, L=12.0, n=128, size=None):
    """Deterministic list of real test fields.

    Gaussians of several widths and centres, Gaussian mixtures, enveloped
    band-limited noise, and dilations of the first few. ``size`` truncates the
    list (``size=0`` gives an empty corpus).
    """
    grid = build_grid(L, n)
    rng = np.random.default_rng(seed)
    fields, labels = [], []

    def add(u, label):
        fields.append(normalize_mass(u, float(rng.uniform(0.05, 0.5))))
        labels.append(label)

    for w in (0.8, 1.2, 1.7):
        add(gaussian_field(grid, width=w), f"gaussian w={w}")
    add(gaussian_field(grid, width=1.0, center=(1.5, -0.75)), "gaussian off-centre")
    for j in range(3):
        parts = Field.zeros(grid)
        for _ in range(int(rng.integers(2, 4))):
            ctr = tuple(rng.uniform(-2.5, 2.5, size=2))
            parts = parts + float(rng.uniform(0.3, 1.0)) * gaussian_field(
                grid, width=float(rng.uniform(0.7, 1.5)), center=ctr)
        add(parts, f"mixture {j}")
    for j in range(3):
        add(_band_limited(grid, rng), f"band-limited {j}")
    for base in range(2):
        for t in (0.8, 1.25):
            fields.append(dilate(fields[base], t))
            labels.append(f"{labels[base]} dilated t={t}")
    if size is not None:
        fields, labels = fields[:size], labels[:size]
    return Corpus(grid, fields, labels)


def _is_plain_gaussian(label):
    return label.startswith("gaussian") and "dilated" not in label


def _resolved_gaussians(corpus):
    return [u for u, lab in zip(corpus.fields, corpus.labels) if _is_plain_gaussian(lab)]


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _hard(check_id, worst, tol, anchor, **extra):
    status = PASS if worst <= tol else FAIL
    return CheckReport(check_id, status, {"worst": float(worst), **extra}, float(tol), anchor)


def _report(check_id, value, anchor, **extra):
    return CheckReport(check_id, REPORT, {"value": float(value), **extra}, float("nan"), anchor)


# -- grid ---------------------------------------------------------------------

def _grid_checks(corpus):
    out = []
    fields = corpus.fields
    worst = max(np.max(np.abs(sfft.ifft2(sfft.fft2(u.values)).real - u.values))
                / np.max(np.abs(u.values)) for u in fields)
    out.append(_hard("grid.fft_roundtrip", worst, 1e-12, "spectral round trip"))
    g = corpus.grid
    worst = max(_rel(mass(u), float(np.sum(np.abs(sfft.fft2(u.values)) ** 2)) * g.h**2 / g.n**2)
                for u in fields)
    out.append(_hard("grid.plancherel", worst, 1e-10, "Plancherel identity"))
    neg = min(min(mass(u), dirichlet_energy(u), star_norm_sq(u)) for u in fields)
    out.append(CheckReport("grid.nonnegative_norms", PASS if neg >= 0 else FAIL,
                           {"min": float(neg)}, 0.0, "mass, kinetic and log-weighted norms"))
    gauss = _resolved_gaussians(corpus)
    worst = 0.0
    for u in gauss:
        for s, t in ((0.8, 1.25), (1.2, 0.9), (0.75, 1.3)):
            a = dilate(dilate(u, s), t).values
            b = dilate(u, s * t).values
            worst = max(worst, float(np.sqrt(np.sum((a - b) ** 2) / np.sum(b**2))))
    out.append(_hard("grid.dilate_compose", worst, 1e-6, "dilations compose"))
    worst_m, worst_a, worst_r = 0.0, 0.0, 0.0
    for u in gauss:
        m, A, L4 = mass(u), dirichlet_energy(u), lp_norm(u, 4) ** 4
        for t in (0.5, 0.8, 1.25, 2.0):
            ut, _, _ = dilate_report(u, t)
            worst_m = max(worst_m, _rel(mass(ut), m))
            worst_a = max(worst_a, _rel(dirichlet_energy(ut), t * t * A))
            worst_r = max(worst_r, _rel(lp_norm(ut, 4) ** 4, t * t * L4))
    out.append(_hard("grid.scaling_mass", worst_m, 1e-3, "dilation preserves mass"))
    out.append(_hard("grid.scaling_kinetic", worst_a, 1e-3, "kinetic energy scales as t^2"))
    out.append(_hard("grid.scaling_lp", worst_r, 1e-3, "L^r norm scales as t^(r-2)"))
    return out


# -- log kernel -----------------------------------------------------------------

def _kernel_checks(corpus, rng_seed):
    out = []
    g = corpus.grid
    kern = build_kernel(g)
    small = build_grid(g.L / 4, 16)
    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for kind in ("B0", "B1", "B2"):
        rho = rng.standard_normal(small.shape)
        a = convolve(build_kernel(small), rho, kind)
        b = direct_sum_potential(small, rho, kind)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    out.append(_hard("logkernel.direct_sum_oracle", worst, 1e-10, "brute-force convolution"))

    def dens(s):
        return math.exp(-s * s) / math.pi

    w = convolve(kern, np.exp(-g.radius**2) / math.pi)
    j0 = g.n // 2
    idx = [0, 4, 8, 16]
    radii = [abs(g.axis[j0 + i]) for i in idx]
    ref = radial_log_oracle(dens, radii, r_max=12.0)
    worst = max(_rel(w[j0 + i, j0], r) for i, r in zip(idx, ref))
    out.append(_hard("logkernel.radial_oracle", worst, 1e-3, "radial quadrature of a Gaussian"))

    fields = corpus.fields
    worst_lin = worst_tr = worst_split = worst_inv = 0.0
    min_v1 = min_v2 = math.inf
    worst_v1_bound = -math.inf
    v2_ratios = []
    for j, u in enumerate(fields):
        u2 = fields[(j + 1) % len(fields)]
        r1, r2 = u.values**2, u2.values**2
        lhs = convolve(kern, 0.7 * r1 - 1.3 * r2)
        rhs = 0.7 * convolve(kern, r1) - 1.3 * convolve(kern, r2)
        worst_lin = max(worst_lin, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))))
        # shift inside the box so zero padding sees no wrap
        sh = np.roll(r1, (3, -2), axis=(0, 1))
        a = np.roll(convolve(kern, r1), (3, -2), axis=(0, 1))[8:-8, 8:-8]
        b = convolve(kern, sh)[8:-8, 8:-8]
        worst_tr = max(worst_tr, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
        v, v1, v2 = V(kern, u), V1(kern, u), V2(kern, u)
        worst_split = max(worst_split, abs(v - (v1 - v2)) / max(abs(v1), 1e-300))
        worst_inv = max(worst_inv, _rel(V(kern, -u), v), _rel(V(kern, shift(u, 3, -2)), v))
        min_v1, min_v2 = min(min_v1, v1), min(min_v2, v2)
        worst_v1_bound = max(worst_v1_bound, v1 / (2 * star_norm_sq(u) * mass(u)))
        v2_ratios.append(fn.v2_ratio(kern, u))
    out.append(_hard("logkernel.linearity", worst_lin, 1e-12, "linearity of the potential"))
    out.append(_hard("logkernel.translation", worst_tr, 1e-10, "translation covariance"))
    out.append(_hard("logkernel.V_split", worst_split, 1e-10, "V = V1 - V2"))
    out.append(_hard("logkernel.V_invariance", worst_inv, 1e-10,
                     "V invariant under sign flip and shift"))
    out.append(CheckReport("logkernel.V1_V2_nonnegative",
                           PASS if min(min_v1, min_v2) >= 0 else FAIL,
                           {"min_V1": float(min_v1), "min_V2": float(min_v2)}, 0.0,
                           "both split forms are nonnegative"))
    out.append(_hard("logkernel.V1_bound", max(worst_v1_bound - 1.0, 0.0), 1e-3,
                     "V1(u) <= 2 |u|_*^2 |u|_2^2", max_ratio=float(worst_v1_bound)))
    out.append(_report("logkernel.V2_constant", max(v2_ratios),
                       "V2(u) <= K A(u)^(1/2) |u|_2^3, empirical K",
                       min=float(min(v2_ratios))))
    worst = 0.0
    for u in _resolved_gaussians(corpus):
        v, c = V(kern, u), mass(u)
        for t in (0.5, 0.8, 1.25, 2.0):
            vt = V(kern, dilate(u, t))
            worst = max(worst, abs(vt - (v - c * c * math.log(t))) / max(abs(v), c * c))
    out.append(_hard("logkernel.scaling_V", worst, 1e-3, "V(u_t) = V(u) - c^2 ln t"))
    return out


# -- nonlinearity ---------------------------------------------------------------

def _nonlinearity_checks(specs):
    out = []
    ts = np.linspace(-2.0, 2.0, 401)
    ts = ts[ts != 0]
    for spec in specs:
        tag = f"{spec.kind}_p{spec.p:g}"
        odd = float(np.max(np.abs(nl.f_eval(spec, -ts) + nl.f_eval(spec, ts))))
        even = float(np.max(np.abs(nl.F_eval(spec, -ts) - nl.F_eval(spec, ts))))
        out.append(_hard(f"nonlinearity.{tag}.parity", max(odd, even), 1e-13,
                         "f odd, F even"))
        eps = 1e-5
        Fv = [nl.F_eval(spec, ts + k * eps) for k in (-2, -1, 1, 2)]
        fd = (Fv[0] - 8 * Fv[1] + 8 * Fv[2] - Fv[3]) / (12 * eps)
        f = nl.f_eval(spec, ts)
        mask = np.abs(f) > 1e-8
        worst = float(np.max(np.abs(fd[mask] - f[mask]) / np.abs(f[mask])))
        out.append(_hard(f"nonlinearity.{tag}.derivative", worst, 1e-6, "F' = f"))
        Fmin = float(np.min(nl.F_eval(spec, np.linspace(0, 3, 301))))
        out.append(CheckReport(f"nonlinearity.{tag}.F_nonnegative",
                               PASS if Fmin >= 0 else FAIL, {"min": Fmin}, 0.0, "F >= 0"))
        conditions = [("f2", nl.check_f2(spec)), ("f5", nl.check_f5(spec))]
        if spec.kind != "power":  # critical exponential growth only
            conditions.insert(0, ("f1", nl.check_f1(spec)))
        for name, rep in conditions:
            out.append(CheckReport(f"nonlinearity.{tag}.{name}", PASS if rep.passed else FAIL,
                                   {"worst": float(rep.worst)}, float("nan"),
                                   f"growth condition {name}"))
        rep = nl.check_f7(spec)
        out.append(_report(f"nonlinearity.{tag}.f7_lipschitz", rep.worst,
                           "Lipschitz-type bound, sampled ratio"))
        if spec.kind in ("exp_b", "power") and spec.p > 4:
            rep = nl.check_f6(spec, beta=spec.p)
            out.append(CheckReport(f"nonlinearity.{tag}.f6", PASS if rep.passed else FAIL,
                                   {"worst": float(rep.worst)}, 1e-12, "ratio monotonicity"))
            rep = nl.check_g_nonneg(spec)
            out.append(CheckReport(f"nonlinearity.{tag}.g_nonnegative",
                                   PASS if rep.passed else FAIL, {"worst": float(rep.worst)},
                                   1e-12, "g(t, v) >= 0 with g(1, v) = 0"))
            rep = nl.check_F_ratio_monotone(spec)
            out.append(CheckReport(f"nonlinearity.{tag}.F_ratio_monotone",
                                   PASS if rep.passed else FAIL, {"worst": float(rep.worst)},
                                   1e-12, "F(t)/(|t|^(p-1) t) nondecreasing"))
            rep = nl.check_h_nonneg(spec.p)
            out.append(CheckReport(f"nonlinearity.{tag}.h_nonnegative",
                                   PASS if rep.passed else FAIL, {"worst": float(rep.worst)},
                                   0.0, "h(t) >= 0 with h(1) = 0"))
    return out


def _field_nonlinearity_checks(corpus):
    out = []
    ratios = []
    worst_inv = 0.0
    worst_mt = 0.0
    for u in corpus.fields:
        r4 = nl.gn_check(u, 4)
        ratios.append(r4)
        ut, truncated, _ = dilate_report(u, 1.25)
        worst_inv = max(worst_inv, _rel(nl.gn_check(ut, 4), r4))
        vals = [nl.moser_trudinger_integral(u, a) for a in (1.0, 4.0, 4 * math.pi - 0.5)]
        worst_mt = max(worst_mt, max(0.0, vals[0] - vals[1], vals[1] - vals[2]))
    out.append(_report("nonlinearity.gn_ratio_r4", max(ratios),
                       "Gagliardo-Nirenberg ratio, empirical S_4 lower estimate"))
    out.append(_hard("nonlinearity.gn_dilation_invariance", worst_inv, 1e-3,
                     "GN ratio invariant under dilation"))
    out.append(_hard("nonlinearity.moser_trudinger_monotone", worst_mt, 0.0,
                     "Moser-Trudinger integral increases with alpha"))
    return out


# -- functional -----------------------------------------------------------------

def _functional_checks(corpus, spec, rng_seed):
    out = []
    g = corpus.grid
    kern = build_kernel(g)
    rng = np.random.default_rng(rng_seed + 1)
    worst_fd = worst_tot = worst_inv = worst_lam = worst_q = worst_dil = 0.0
    gaps = []
    for u, lab in zip(corpus.fields, corpus.labels):
        v = _band_limited(g, rng)
        v = v / math.sqrt(mass(v))
        eps = 1e-5
        jp = fn.J_eval(kern, spec, u + eps * v).total
        jm = fn.J_eval(kern, spec, u - eps * v).total
        fd = (jp - jm) / (2 * eps)
        an = g.integrate(fn.gradJ(kern, spec, u).values * v.values)
        worst_fd = max(worst_fd, abs(fd - an) / max(abs(an), 1e-12))
        br = fn.J_eval(kern, spec, u)
        worst_tot = max(worst_tot, abs(br.total - (br.kinetic + br.interaction + br.potential)))
        worst_inv = max(worst_inv, _rel(fn.J_eval(kern, spec, -u).total, br.total),
                        _rel(fn.J_eval(kern, spec, shift(u, 2, 5)).total, br.total))
        lam = fn.lambda_est(kern, spec, u)
        G = fn.gradJ(kern, spec, u)
        worst_lam = max(worst_lam, _rel(lam, -g.integrate(G.values * u.values) / mass(u)))
        # Pohozaev functional is the t-derivative of J(u_t) at t = 1
        d = 1e-4
        deriv = (path_energy(u, spec, 1 + d, kernel=kern)
                 - path_energy(u, spec, 1 - d, kernel=kern)) / (2 * d)
        q = fn.Q_eval(kern, spec, u)
        worst_q = max(worst_q, abs(deriv - q) / max(abs(q), dirichlet_energy(u), 1e-12))
        if _is_plain_gaussian(lab):
            for t in (0.8, 1.25):
                direct = fn.J_eval(kern, spec, dilate(u, t)).total
                scaled = path_energy(u, spec, t, kernel=kern)
                worst_dil = max(worst_dil, abs(direct - scaled)
                                / max(abs(scaled), dirichlet_energy(u)))
        for t in (0.0, 0.5, 1.5):
            rep = fn.lemma_gap_check(kern, spec, u, t)
            gaps.append(rep.lhs - rep.rhs)
    out.append(_hard("functional.gradient_fd", worst_fd, 1e-5, "gradient vs finite differences"))
    out.append(_hard("functional.breakdown_total", worst_tot, 1e-15, "energy parts add up"))
    out.append(_hard("functional.J_invariance", worst_inv, 1e-10,
                     "J invariant under sign flip and shift"))
    out.append(_hard("functional.lambda_identity", worst_lam, 1e-10,
                     "multiplier equals -<G(u), u>/|u|^2"))
    out.append(_hard("functional.pohozaev_is_dilation_derivative", worst_q, 1e-6,
                     "Q(u) = d/dt J(u_t) at t = 1"))
    out.append(_hard("functional.J_dilation", worst_dil, 1e-3,
                     "J along the dilation path from the scaling laws"))
    out.append(_report("functional.gap_inequality_margin", min(gaps),
                       "gap inequality with the field's own V2 constant"))
    worst = max(_rel(fn.gamma_upper_bound(0.1), 0.05 + math.sqrt(math.pi) * 1e-3 / 4),
                _rel(fn.mc_upper_bound(0.1, 5), 0.91 / 12))
    out.append(_hard("functional.bound_formulas", worst, 1e-15,
                     "closed-form energy bounds"))
    return out


def run_suite(corpus_seed=42, L=12.0, n=128, corpus_size=None, specs=DEFAULT_SPECS,
              workers=None):
    """Run every check; the result is sorted by ``check_id``.

    An empty corpus gives an empty list. ``workers`` threads evaluate the
    check groups concurrently (default: one per CPU).
    """
    corpus = build_corpus(corpus_seed, L, n, corpus_size)
    if len(corpus) == 0:
        return []
    build_kernel(corpus.grid)  # warm the cache before threads share it
    build_kernel(build_grid(corpus.grid.L / 4, 16))
    jobs = [
        lambda: _grid_checks(corpus),
        lambda: _kernel_checks(corpus, corpus_seed),
        lambda: _nonlinearity_checks(specs),
        lambda: _field_nonlinearity_checks(corpus),
        lambda: _functional_checks(corpus, specs[0], corpus_seed),
    ]
    if workers == 1:
        groups = [job() for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(lambda job: job(), jobs))
    reports = [r for grp in groups for r in grp]
    return sorted(reports, key=lambda r: r.check_id)


def hard_failures(reports):
    return [r for r in reports if r.status == FAIL]


def report_json(reports):
    from .io import jsonable

    return json.dumps([jsonable(r.to_dict()) for r in reports], sort_keys=True, indent=2) + "\n"


def format_table(reports):
    width = max((len(r.check_id) for r in reports), default=10)
    lines = []
    for r in reports:
        key = "worst" if "worst" in r.measured else "value" if "value" in r.measured else None
        val = f"{r.measured[key]:.3e}" if key else ""
        tol = "" if math.isnan(r.tolerance) else f"<= {r.tolerance:.0e}"
        lines.append(f"{r.check_id:<{width}}  {r.status:<11}  {val:>10}  {tol:<9}  {r.anchor}")
    return "\n".join(lines)

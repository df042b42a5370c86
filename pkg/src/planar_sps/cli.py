"""Command-line front end: ``planar-sps <subcommand> [flags]``.

Every run writes ``summary.json`` (schema-tagged, reproducible byte for byte),
``metadata.json`` (timestamp and argv, kept apart so summaries stay
comparable), CSV tables where they apply and field dumps.

Exit status: 0 on success, 1 when a run fails its checks or does not
converge, 2 on configuration errors.
"""

import argparse
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .io import SCHEMA, jsonable, write_csv, write_field, write_summary

SUBCOMMANDS = ("groundstate", "sweep", "mountainpass", "evolve", "standingwave",
               "stability", "verify", "oracle")

# Grid defaults per subcommand. Small-mass ground states are wide, so the
# stationary experiments default to a larger box than the dynamics ones.
GRID_DEFAULTS = {
    "groundstate": (64.0, 256),
    "sweep": (128.0, 256),
    "mountainpass": (64.0, 256),
    "standingwave": (64.0, 256),
    "stability": (64.0, 256),
    "evolve": (12.0, 256),
    "verify": (12.0, 128),
    "oracle": (12.0, 256),
}

CONFIG_KEYS = {
    "c", "rho", "p", "theta", "kind", "gamma", "L", "n", "dt", "T", "tol", "seed",
    "out", "mode", "workers", "max_iter", "masses", "thetas", "deltas", "trials",
    "field", "record_every", "kick",
}


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


def read_config_file(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="planar-sps", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--c", type=float)
        p.add_argument("--rho", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--kind", choices=("exp_a", "exp_b", "power"))
        p.add_argument("--gamma", type=float)
        p.add_argument("--L", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--mode", choices=("direct", "split_linear"))
        p.add_argument("--workers", type=int)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--record-every", dest="record_every", type=int)
        if name == "sweep":
            p.add_argument("--masses", help="comma-separated list of masses")
        if name == "mountainpass":
            p.add_argument("--thetas", help="comma-separated theta values "
                                            "(default: twice the computed threshold)")
        if name == "stability":
            p.add_argument("--deltas", help="comma-separated perturbation sizes")
            p.add_argument("--trials", type=int)
        if name in ("evolve", "standingwave", "stability"):
            p.add_argument("--field", help="field dump to start from (path without suffix)")
        if name == "evolve":
            p.add_argument("--kick", type=float, help="momentum kick along x for the seed")
    return parser


DEFAULTS = {
    "c": 0.05, "rho": 0.5, "p": 5.0, "theta": 1.0, "kind": "exp_b", "gamma": 2 * math.pi,
    "dt": None, "T": None, "tol": 1e-6, "seed": 42, "out": "out", "mode": "direct",
    "workers": None, "max_iter": 5000, "masses": "0.2,0.1,0.05,0.025", "thetas": None,
    "deltas": "0.001,0.01", "trials": 5, "field": None, "record_every": None, "kick": 0.0,
}

_TYPES = {"c": float, "rho": float, "p": float, "theta": float, "gamma": float, "L": float,
          "n": int, "dt": float, "T": float, "tol": float, "seed": int, "workers": int,
          "max_iter": int, "trials": int, "record_every": int, "kick": float}


def resolve(args):
    """Merge defaults, config file and flags into one dict (flags win)."""
    cfg = dict(DEFAULTS)
    L, n = GRID_DEFAULTS[args.command]
    cfg.update(L=L, n=n)
    if args.config:
        try:
            file_vals = read_config_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for key, val in file_vals.items():
            try:
                cfg[key] = _TYPES[key](val) if key in _TYPES else val
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    return cfg


def _spec(cfg):
    from .nonlinearity import NonlinearitySpec

    kw = {"theta": cfg["theta"]} if cfg["kind"] == "exp_b" else {}
    if cfg["kind"] == "power":
        kw = {"a": cfg["theta"]}
    return NonlinearitySpec(cfg["kind"], cfg["p"], **kw)


def _min_config(cfg):
    from .groundstate import MinimizeConfig

    return MinimizeConfig(c=cfg["c"], rho=cfg["rho"], spec=_spec(cfg), L=cfg["L"], n=cfg["n"],
                          tol=cfg["tol"], max_iter=cfg["max_iter"], rng_seed=cfg["seed"])


def _evo_config(cfg, dt=1e-3, T=1.0, record_every=10):
    from .dynamics import EvolutionConfig

    return EvolutionConfig(spec=_spec(cfg), dt=cfg["dt"] or dt, T=cfg["T"] or T,
                           gamma=cfg["gamma"], potential_mode=cfg["mode"], L=cfg["L"],
                           n=cfg["n"], record_every=cfg["record_every"] or record_every)


def _public(cfg):
    return {k: v for k, v in sorted(cfg.items()) if k not in ("out", "workers")}


def _ground_state(cfg):
    from .groundstate import minimize

    return minimize(_min_config(cfg))


def _load_or_solve(cfg):
    """Ground state from ``--field`` if given, else solved from the flags."""
    from .functional import lambda_est
    from .grid import Field, mass
    from .io import read_field
    from .logkernel import build_kernel

    if cfg.get("field"):
        u = read_field(cfg["field"])
        if u.is_complex:
            u = Field(u.grid, abs(u.values))
        lam = lambda_est(build_kernel(u.grid), _spec(cfg), u)
        return u, lam, {"source": "file", "mass": mass(u), "lambda_c": lam}
    res = _ground_state(cfg)
    if not res.converged:
        raise RuntimeError(f"ground state did not converge (residual {res.el_residual:.3g})")
    return res.u_c, res.lambda_c, res.summary()


def cmd_groundstate(cfg, out):
    res = _ground_state(cfg)
    s = res.summary()
    s["config"] = _public(cfg)
    write_summary(out / "summary.json", "groundstate", s)
    write_field(out / "u_c", res.u_c, f"ground state c={cfg['c']}")
    write_csv(out / "energy_history.csv", ("iteration", "J"), enumerate(res.energy_history))
    ok = res.converged and not res.constraint_active
    return ok, (f"groundstate c={res.c:g}: gamma={res.gamma:.10g} A={res.A:.6g} "
                f"lambda={res.lambda_c:.8g} residual={res.el_residual:.2e} "
                f"{'converged' if res.converged else 'NOT converged'}")


def cmd_sweep(cfg, out):
    from .groundstate import SWEEP_HEADER, mass_sweep

    masses = _floats(cfg["masses"])
    rows = mass_sweep(masses, _min_config(replace_c(cfg, max(masses))), workers=cfg["workers"])
    write_csv(out / "sweep.csv", SWEEP_HEADER, [r.as_tuple() for r in rows])
    by_c = sorted(rows, key=lambda r: r.c)
    gam = [r.gamma for r in by_c]
    kin = [r.A for r in by_c]
    monotone = all(a < b for a, b in zip(gam, gam[1:])) and all(a < b for a, b in zip(kin, kin[1:]))
    converged = all(r.converged for r in rows)
    ok = converged and monotone
    write_summary(out / "summary.json", "sweep", {
        "rows": [r.__dict__ for r in rows], "monotone_in_c": monotone,
        "config": _public(cfg)})
    return ok, (f"sweep over {len(rows)} masses: gamma and A decreasing with c: {monotone}, "
                f"all converged: {converged}")


def replace_c(cfg, c):
    d = dict(cfg)
    d["c"] = c
    return d


def cmd_mountainpass(cfg, out):
    from .functional import mc_upper_bound, theta0
    from .groundstate import dilation_path, mp_report

    res = _ground_state(cfg)
    th0 = theta0(res.u_c, cfg["c"], cfg["p"])
    path = dilation_path(res.u_c, _spec(cfg))
    thetas = _floats(cfg["thetas"]) if cfg["thetas"] else [2.0 * th0]
    rows = mp_report(thetas, _min_config(cfg))
    write_csv(out / "path.csv", ("t", "J"), zip(path.t_samples, path.J_values))
    write_csv(out / "mp_report.csv", ("theta", "gamma", "m_hat", "bound", "theta0", "passes"),
              [(r.theta, r.gamma, r.m_hat, r.bound, r.theta0, r.passes) for r in rows])
    write_summary(out / "summary.json", "mountainpass", {
        "ground_state": res.summary(), "theta0": th0, "path": path.to_dict(),
        "bound": mc_upper_bound(cfg["c"], cfg["p"]), "rows": [r.to_dict() for r in rows],
        "config": _public(cfg)})
    required = [r for r in rows if r.theta > r.theta0]
    ok = res.converged and all(r.passes for r in required)
    line = "; ".join(f"theta={r.theta:.4g}: m_hat={r.m_hat:.6g} bound={r.bound:.6g} "
                     f"{'pass' if r.passes else 'fail'}" for r in rows)
    return ok, f"mountainpass theta0={th0:.6g}; {line}"


def cmd_evolve(cfg, out):
    import numpy as np

    from .dynamics import TrajectoryRecord, evolve
    from .grid import Field, build_grid, gaussian_field, normalize_mass
    from .io import read_field

    econf = _evo_config(cfg)
    if cfg.get("field"):
        psi0 = read_field(cfg["field"])
    else:
        g = build_grid(cfg["L"], cfg["n"])
        u = normalize_mass(gaussian_field(g), cfg["c"])
        X, _ = g.coords
        psi0 = Field(g, u.values * np.exp(1j * cfg["kick"] * X))
    psi, rec = evolve(psi0, econf)
    write_csv(out / "trajectory.csv", TrajectoryRecord.HEADER, rec.rows())
    write_field(out / "psi_final", psi, f"state at t={rec.times[-1]:g}")
    s = {"mass_drift": rec.mass_drift(), "energy_drift": rec.energy_drift(),
         "final_time": rec.times[-1], "trajectory": rec.to_dict(), "config": _public(cfg)}
    write_summary(out / "summary.json", "evolve", s)
    ok = rec.mass_drift() <= 1e-11
    return ok, (f"evolve to T={rec.times[-1]:g}: mass drift {rec.mass_drift():.2e}, "
                f"energy drift {rec.energy_drift():.2e}")


def cmd_standingwave(cfg, out):
    from .dynamics import standing_wave_test

    u, lam, gs = _load_or_solve(cfg)
    econf = _evo_config(cfg, dt=1e-2, T=5.0, record_every=10)
    econf = replace(econf, L=u.grid.L, n=u.grid.n)
    rep = standing_wave_test(u, lam, econf)
    write_csv(out / "trajectory.csv", ("t", "modulated_error", "phase"),
              zip(rep.record.times, rep.errors, rep.phases))
    write_summary(out / "summary.json", "standingwave",
                  {"ground_state": gs, "test": rep.to_dict(), "config": _public(cfg)})
    return rep.passed, (f"standingwave: max error {rep.max_error:.2e} (tol {rep.tolerance:.2e}), "
                        f"phase rate {rep.phase_rate:.8g} vs {rep.expected_rate:.8g}")


def cmd_stability(cfg, out):
    from .dynamics import stability_experiment

    u, _, gs = _load_or_solve(cfg)
    econf = _evo_config(cfg, dt=1e-2, T=5.0, record_every=10)
    econf = replace(econf, L=u.grid.L, n=u.grid.n)
    rep = stability_experiment(u, _floats(cfg["deltas"]), cfg["trials"], econf,
                               rng_seed=cfg["seed"], workers=cfg["workers"])
    rows = [(d, s["trial"], t, x) for d, runs in rep.series.items() for s in runs
            for t, x in zip(s["times"], s["dist"])]
    write_csv(out / "distances.csv", ("delta", "trial", "t", "dist"), rows)
    write_summary(out / "summary.json", "stability",
                  {"ground_state": gs, "report": rep.to_dict(), "config": _public(cfg)})
    ratios = ", ".join(f"delta={d}: {r:.3g}" for d, r in rep.ratios.items())
    return rep.passed, f"stability sup dist/(delta |u|_X): {ratios}"


def cmd_verify(cfg, out):
    from .verify import format_table, hard_failures, report_json, run_suite

    reports = run_suite(corpus_seed=cfg["seed"], L=cfg["L"], n=cfg["n"],
                        workers=cfg["workers"])
    (out / "summary.json").write_text(
        f'{{"schema": "{SCHEMA}", "kind": "verify", "result": '
        + report_json(reports).rstrip("\n") + "}\n")
    (out / "report.txt").write_text(format_table(reports) + "\n")
    bad = hard_failures(reports)
    return not bad, f"verify: {len(reports)} checks, {len(bad)} hard failures"


def cmd_oracle(cfg, out):
    import numpy as np

    from .grid import build_grid
    from .logkernel import build_kernel, convolve, direct_sum_potential, radial_log_oracle

    rng = np.random.default_rng(cfg["seed"])
    rows = []
    for n_small in (16, 32):
        g = build_grid(cfg["L"] / 4, n_small)
        for kind in ("B0", "B1", "B2"):
            rho = rng.standard_normal(g.shape)
            a = convolve(build_kernel(g), rho, kind)
            b = direct_sum_potential(g, rho, kind)
            rows.append({"test": f"direct_sum_n{n_small}_{kind}",
                         "rel_error": float(np.max(np.abs(a - b)) / np.max(np.abs(b))),
                         "tolerance": 1e-10})
    g = build_grid(cfg["L"], cfg["n"])
    w = convolve(build_kernel(g), np.exp(-g.radius**2) / math.pi)
    j0 = g.n // 2
    idx = [0, 1, 4, 16, g.n // 8]
    radii = [abs(g.axis[j0 + i]) for i in idx]
    ref = radial_log_oracle(lambda s: math.exp(-s * s) / math.pi, radii, r_max=12.0)
    err = max(abs(w[j0 + i, j0] - r) / abs(r) for i, r in zip(idx, ref))
    rows.append({"test": f"radial_gaussian_n{g.n}", "rel_error": float(err), "tolerance": 1e-3})
    for r in rows:
        r["passed"] = r["rel_error"] <= r["tolerance"]
    write_csv(out / "oracle.csv", ("test", "rel_error", "tolerance", "passed"),
              [(r["test"], r["rel_error"], r["tolerance"], r["passed"]) for r in rows])
    write_summary(out / "summary.json", "oracle", {"rows": rows, "config": _public(cfg)})
    ok = all(r["passed"] for r in rows)
    worst = max(rows, key=lambda r: r["rel_error"] / r["tolerance"])
    return ok, f"oracle: {len(rows)} comparisons, worst {worst['test']} {worst['rel_error']:.2e}"


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def _write_metadata(out, argv, cfg, elapsed):
    import json

    meta = {"schema": SCHEMA, "version": __version__, "argv": list(argv),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "elapsed_s": elapsed,
            "workers": cfg["workers"]}
    (out / "metadata.json").write_text(json.dumps(jsonable(meta), indent=2) + "\n")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    from .groundstate import CriticalityError, MinimizationError
    from .nonlinearity import NonlinearityRangeError

    try:
        cfg = resolve(args)
        if args.command in ("groundstate", "sweep", "mountainpass") or (
                args.command in ("standingwave", "stability") and not cfg.get("field")):
            _min_config(cfg)  # validates c, rho and the nonlinearity up front
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, ValueError) as exc:
        print(f"planar-sps {args.command}: configuration error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        ok, line = COMMANDS[args.command](cfg, out)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"planar-sps {args.command}: configuration error: {exc}", file=sys.stderr)
        return 2
    except (MinimizationError, CriticalityError, NonlinearityRangeError, RuntimeError,
            ValueError) as exc:
        print(f"planar-sps {args.command}: failed: {exc}", file=sys.stderr)
        _write_metadata(out, argv, cfg, time.perf_counter() - start)
        return 1
    _write_metadata(out, argv, cfg, time.perf_counter() - start)
    print(line)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

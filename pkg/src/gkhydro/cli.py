"""Command-line entry point.

Exit codes: 0 on success, 2 on configuration or validation errors, 3 when
a numerical monitor (comparison principle, balance/bistability check)
flags a violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cltvar, harness, interface, kmc, pde
from .conductivity import minimize, tabulate_D
from .harness import ConfigError, ExperimentConfig, write_csv
from .lattice import save_snapshot
from .localfn import VectorLocalFunction
from .measures import compressibility
from .rates import (RateModelError, classify_reaction, reaction_term,
                    validate)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MONITOR = 3


def cmd_rates(cfg: ExperimentConfig, args, out: Path) -> int:
    model = cfg.model
    bounds = validate(model)
    result = {
        "d": model.d,
        "radius": model.radius(),
        "c_star_min": bounds.c_star_min,
        "c_star_max": bounds.c_star_max,
        "K": model.K,
        "has_flips": model.has_flips(),
    }
    if model.has_flips():
        f = reaction_term(model)
        result["reaction_coefficients"] = list(f.coef)
        try:
            D = tabulate_D(model, np.linspace(0.1, 0.9, 9), n=1)
            cls = classify_reaction(f, D)
            result["roots"] = list(cls.roots)
            result["balanced"] = cls.balanced
        except RateModelError as err:
            result["classification_error"] = str(err)
    path = out / "rates.json"
    with open(path, "w") as fh:
        json.dump(result, fh, indent=2)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_conductivity(cfg: ExperimentConfig, args, out: Path) -> int:
    sec = cfg.section("conductivity", required=False)
    n = int(sec.get("n", 1))
    rhos = sec.get("rho_grid", list(np.linspace(0.05, 0.95, 19)))
    rows = []
    d = cfg.model.d
    for rho in rhos:
        res = minimize(cfg.model, float(rho), n)
        chi = compressibility(float(rho))
        for i in range(d):
            for j in range(d):
                rows.append(
                    (rho, n, i + 1, j + 1, res.c_hat[i, j],
                     res.c_hat[i, j] / (2 * chi))
                )
    path = out / "conductivity.csv"
    write_csv(path, ["rho", "n", "i", "j", "c_hat_ij", "D_ij"], rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_cltvar(cfg: ExperimentConfig, args, out: Path) -> int:
    sec = cfg.section("cltvar", required=False)
    ells = [int(x) for x in sec.get("ells", [2, 3])]
    model = cfg.model
    d = model.d
    r = model.radius()
    theta = np.zeros(d)
    theta[0] = 1.0
    F = VectorLocalFunction.zero(d)
    rows = []
    for ell in ells:
        vol = (2 * ell + 1) ** d
        for m in range(vol + 1):
            chi = compressibility(m / vol)
            for zid, zeta in cltvar.standard_zetas(ell, r, d, n_random=2):
                lhs, rhs, gap = cltvar.dirichlet_identity_check(
                    model, F, ell, zeta, m, theta
                )
                rows.append((d, ell, m, zid, "dirichlet", lhs, rhs, gap))
                l2, r2, g2, q5 = cltvar.cross_identity_check(
                    model, F, ell, zeta, m, theta, theta
                )
                rows.append((d, ell, m, zid, "cross", l2, r2, g2))
                rows.append((d, ell, m, zid, "q5", r2, chi, abs(q5)))
    path = out / "cltvar.csv"
    write_csv(path, ["d", "ell", "m", "zeta", "quantity", "value", "target", "gap"],
              rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, args, out: Path) -> int:
    sec = cfg.section("simulate")
    N = int(sec.get("N", 128))
    horizon = float(sec.get("horizon", 0.1))
    times = sorted(float(t) for t in sec.get("snapshot_times", [horizon]))
    profile = harness.resolve_profile(sec.get("profile", 0.5))
    phis = harness.resolve_phis(sec.get("phis", ["one"]))
    seed = args.seed if args.seed is not None else int(sec.get("seed", 0))
    state = kmc.init(cfg.model, N, profile, seed)
    series = kmc.ObservableSeries(tuple(phis))
    series.record(state, phis)
    t_prev = 0.0
    for k, t in enumerate(times):
        kmc.advance(state, t - t_prev)
        t_prev = t
        series.record(state, phis)
        save_snapshot(
            state.cfg, out / f"snapshot_{k:03d}.bin", t=t,
            meta={"seed": seed, "backend": kmc.backend_name()},
        )
    ts, vals = series.as_arrays()
    rows = [
        (t,) + tuple(v) for t, v in zip(ts, vals)
    ]
    path = out / "observables.csv"
    write_csv(path, ["t"] + list(phis), rows)
    print(f"wrote {path} and {len(times)} snapshots")
    return EXIT_OK


def cmd_pde(cfg: ExperimentConfig, args, out: Path) -> int:
    sec = cfg.section("pde")
    M = int(sec.get("M", 256))
    horizon = float(sec.get("horizon", 0.1))
    times = sorted(float(t) for t in sec.get("snapshot_times", [horizon]))
    profile = harness.resolve_profile(sec.get("profile", 0.5))
    problem = harness.build_pde_problem(
        cfg.model, cfg.model.d, M, n_corrector=int(sec.get("n_corrector", 1))
    )
    res = pde.solve(problem, profile, horizon, snapshot_times=times)
    for k, fld in enumerate(res.snapshots):
        np.save(out / f"field_{k:03d}.npy", fld.values)
        with open(out / f"field_{k:03d}.json", "w") as fh:
            json.dump({"t": fld.t, "M": fld.M, "d": fld.d}, fh)
    print(
        f"wrote {len(res.snapshots)} fields; monitor overshoot "
        f"{res.report.max_overshoot:.3e}/{res.report.max_undershoot:.3e}"
    )
    if res.report.violated:
        print("comparison monitor violated", file=sys.stderr)
        return EXIT_MONITOR
    return EXIT_OK


def cmd_interface(cfg: ExperimentConfig, args, out: Path) -> int:
    sec = cfg.section("interface", required=False)
    model = cfg.model
    if model.d != 2:
        raise ConfigError("interface quadratures need a d=2 model")
    f = reaction_term(model)
    D = tabulate_D(model, np.linspace(0.1, 0.9, 9),
                   n=int(sec.get("n_corrector", 1)))
    cls = classify_reaction(f, D)
    if not cls.balanced:
        print("reaction term is not balanced for this D", file=sys.stderr)
        return EXIT_MONITOR
    mob = interface.MobilityTensor(
        D=D, f=f, rho_minus=cls.roots[0], rho_plus=cls.roots[2]
    )
    n_dirs = int(sec.get("n_directions", 32))
    rows = []
    for a in np.linspace(0.0, 2 * np.pi, n_dirs, endpoint=False):
        e = np.array([np.cos(a), np.sin(a)])
        m = mob.mu(e)
        rows.append((a, e[0], e[1], m[0, 0], m[0, 1], m[1, 0], m[1, 1],
                     mob.lambda_e(e)))
    path = out / "mobility.csv"
    write_csv(path, ["angle", "e1", "e2", "mu11", "mu12", "mu21", "mu22",
                     "lambda"], rows)
    print(f"wrote {path}")
    if "K_list" in sec:
        report = interface.sharp_vs_diffuse(
            D, f, [float(k) for k in sec["K_list"]],
            horizon=float(sec.get("horizon", 0.02)),
            M=int(sec.get("M", 128)),
            R0=float(sec.get("R0", 0.3)),
        )
        rpath = out / "sharp_vs_diffuse.json"
        with open(rpath, "w") as fh:
            json.dump(report, fh, indent=2)
        print(f"wrote {rpath}")
    return EXIT_OK


def cmd_hydro_compare(cfg: ExperimentConfig, args, out: Path) -> int:
    report = harness.run_hydro_comparison(cfg, out)
    sys.stdout.write(harness.render_report(report))
    return EXIT_MONITOR if report.get("monitor_violated") else EXIT_OK


def cmd_interface_pipeline(cfg: ExperimentConfig, args, out: Path) -> int:
    report = harness.run_interface_pipeline(cfg, out)
    sys.stdout.write(harness.render_report(report))
    return EXIT_OK


COMMANDS = {
    "rates": cmd_rates,
    "conductivity": cmd_conductivity,
    "cltvar": cmd_cltvar,
    "simulate": cmd_simulate,
    "pde": cmd_pde,
    "interface": cmd_interface,
    "hydro-compare": cmd_hydro_compare,
    "interface-pipeline": cmd_interface_pipeline,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gk-hydro",
        description="lattice-gas hydrodynamics laboratory",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cfg = ExperimentConfig.from_file(args.config)
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, RateModelError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

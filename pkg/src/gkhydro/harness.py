"""Experiment orchestration: config loading, run manifests, and the two
end-to-end pipelines (particle-vs-PDE comparison and the d=2 interface
pipeline from particles to the sharp flow)."""

from __future__ import annotations

import csv
import hashlib
import json
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import __version__, interface, kmc, pde
from .conductivity import tabulate_D
from .rates import (RateModel, classify_reaction, model_from_dict,
                    reaction_term, validate)


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


# named test functions usable from config files; phi maps (..., d) -> values
PHI_LIBRARY = {
    "one": lambda v: np.ones(v.shape[:-1]),
    "sin": lambda v: np.sin(2 * np.pi * v[..., 0]),
    "cos": lambda v: np.cos(2 * np.pi * v[..., 0]),
    "sin2": lambda v: np.sin(4 * np.pi * v[..., 0]),
}

# named initial profiles, mapping (..., d) position arrays to densities
PROFILE_LIBRARY = {
    "uniform": lambda p: (lambda v: np.full(v.shape[:-1], p)),
    "sine": lambda p: (
        lambda v: 0.5 + p * np.sin(2 * np.pi * v[..., 0])
    ),
    "cosine": lambda p: (
        lambda v: 0.5 + p * np.cos(2 * np.pi * v[..., 0])
    ),
}


def resolve_phis(names) -> dict:
    try:
        return {name: PHI_LIBRARY[name] for name in names}
    except KeyError as err:
        raise ConfigError(f"unknown test function {err.args[0]!r}") from err


def resolve_profile(spec):
    """spec: {'kind': name, 'param': value} or a plain number."""
    if isinstance(spec, (int, float)):
        return float(spec)
    kind = spec.get("kind", "uniform")
    if kind not in PROFILE_LIBRARY:
        raise ConfigError(f"unknown profile kind {kind!r}")
    return PROFILE_LIBRARY[kind](float(spec.get("param", 0.5)))


@dataclass
class ExperimentConfig:
    model: RateModel
    raw: dict

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        raw = load_config(path)
        if "model" not in raw:
            raise ConfigError("config needs a [model] table")
        try:
            model = model_from_dict(raw["model"])
            validate(model)
        except (KeyError, ValueError) as err:
            raise ConfigError(f"invalid model: {err}") from err
        return cls(model=model, raw=raw)

    def section(self, name: str, required: bool = True) -> dict:
        if name not in self.raw and required:
            raise ConfigError(f"config needs a [{name}] table")
        return self.raw.get(name, {})


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    version: str
    seeds: list
    artifacts: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @classmethod
    def start(cls, raw_config: dict, seeds) -> "RunManifest":
        blob = json.dumps(raw_config, sort_keys=True, default=str).encode()
        return cls(
            config_hash=hashlib.sha256(blob).hexdigest(),
            version=__version__,
            seeds=list(seeds),
        )

    def add(self, path: Path):
        self.artifacts[str(path)] = _sha256(path)

    def write(self, out_dir: Path, started: float):
        self.wall_clock = time.time() - started
        path = out_dir / "manifest.json"
        with open(path, "w") as fh:
            json.dump(
                {
                    "config_hash": self.config_hash,
                    "version": self.version,
                    "seeds": self.seeds,
                    "artifacts": self.artifacts,
                    "wall_clock_s": round(self.wall_clock, 3),
                },
                fh,
                indent=2,
            )
        return path


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# -- pipeline 1: particle system vs hydrodynamic PDE ---------------------


def build_pde_problem(model: RateModel, d: int, M: int, n_corrector: int = 1,
                      rho_nodes: int = 9) -> pde.PdeProblem:
    """PDE problem with D tabulated from the variational formula and f
    from the exact reaction average; nothing hand-entered."""
    grid = np.linspace(0.1, 0.9, rho_nodes)
    D = tabulate_D(model, grid, n=n_corrector)
    f = reaction_term(model) if model.has_flips() else None
    return pde.PdeProblem(D=D, f=f, K=model.K, d=d, M=M)


def run_hydro_comparison(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """For each (N, seed): particle run and PDE run from the same initial
    profile; pairing discrepancies at the snapshot times.

    Config table [hydro]: N_list, seeds, horizon, snapshot_times, phis,
    profile, M (PDE resolution, default max N), block_ell.
    Note: the regime of interest keeps K of order log N; this is a
    guideline for choosing configs, not a constraint the code enforces.
    """
    started = time.time()
    sec = cfg.section("hydro")
    N_list = [int(n) for n in sec.get("N_list", [128])]
    seeds = [int(s) for s in sec.get("seeds", [0])]
    horizon = float(sec.get("horizon", 0.1))
    times = [float(t) for t in sec.get("snapshot_times", [horizon])]
    phis = resolve_phis(sec.get("phis", ["one", "sin", "cos"]))
    profile = resolve_profile(sec.get("profile", {"kind": "sine", "param": 0.2}))
    manifest = RunManifest.start(cfg.raw, seeds)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    trend = {}
    monitor_violated = False
    for N in N_list:
        M = int(sec.get("M", N))
        problem = build_pde_problem(cfg.model, cfg.model.d, M)
        pres = pde.solve(problem, profile, horizon, snapshot_times=times)
        monitor_violated |= pres.report.violated
        per_phi_gaps = {name: [] for name in phis}
        for seed in seeds:
            state = kmc.init(cfg.model, N, profile, seed)
            t_prev = 0.0
            for fld in pres.snapshots:
                kmc.advance(state, fld.t - t_prev)
                t_prev = fld.t
                gaps = pde.discrepancy(
                    fld, state.cfg.grid().astype(float), phis
                )
                for name in phis:
                    rows.append((N, seed, fld.t, name, gaps[name]))
                    per_phi_gaps[name].append(gaps[name])
        trend[N] = {
            name: float(np.mean(vals)) for name, vals in per_phi_gaps.items()
        }
    csv_path = out_dir / "hydro_discrepancy.csv"
    write_csv(csv_path, ["N", "seed", "t", "phi", "gap"], rows)
    manifest.add(csv_path)
    report = {
        "trend": trend,
        "monitor_violated": monitor_violated,
        "decreasing": {
            name: all(
                trend[N_list[k + 1]][name] <= trend[N_list[k]][name]
                for k in range(len(N_list) - 1)
            )
            for name in phis
        } if len(N_list) > 1 else {},
    }
    report_path = out_dir / "hydro_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
    manifest.add(report_path)
    manifest.write(out_dir, started)
    return report


# -- pipeline 2: particles -> front -> sharp flow ------------------------


def smoothed_block_field(state, ell: int, sigma: float = 2.0) -> np.ndarray:
    """Block averages plus a small Gaussian blur, for stable level sets."""
    prof = kmc.block_profile(state, ell)
    return ndimage.gaussian_filter(prof, sigma=sigma, mode="wrap")


def run_interface_pipeline(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """d=2 front comparison: particle level set against the sharp flow.

    Config table [interface]: N, seeds (or seed), horizon, n_times,
    block_ell, sigma, R0, center, n_vertices.

    With several seeds the smoothed occupation fields are averaged over
    the ensemble before the level set is extracted; this estimates the
    hydrodynamic (mean) front, whose single-run estimate is dominated by
    flip-noise shape fluctuations at accessible lattice sizes.
    """
    started = time.time()
    model = cfg.model
    if model.d != 2:
        raise ConfigError("interface pipeline needs a d=2 model")
    f = reaction_term(model)
    sec = cfg.section("interface")
    N = int(sec.get("N", 128))
    seeds = [int(s) for s in sec.get("seeds", [sec.get("seed", 0)])]
    n_corrector = int(sec.get("n_corrector", 1))
    grid = np.linspace(0.1, 0.9, 9)
    D = tabulate_D(model, grid, n=n_corrector)
    cls = classify_reaction(f, D)
    if not cls.balanced:
        raise ConfigError("interface pipeline needs a balanced reaction term")
    rho_minus, rho_star, rho_plus = cls.roots
    fprime = f.deriv()(rho_star)
    t_K = np.log(model.K) / (2.0 * model.K * fprime)
    horizon = float(sec.get("horizon", 3.0 * t_K))
    n_times = int(sec.get("n_times", 4))
    times = list(np.linspace(t_K, horizon, n_times))
    ell = int(sec.get("block_ell", 2))
    sigma = float(sec.get("sigma", 2.0))
    R0 = float(sec.get("R0", 0.35))
    center = tuple(sec.get("center", (0.5, 0.5)))
    n_vertices = int(sec.get("n_vertices", 256))

    manifest = RunManifest.start(cfg.raw, seeds)
    out_dir.mkdir(parents=True, exist_ok=True)

    def rho0(v):
        dx = (v[..., 0] - center[0] + 0.5) % 1.0 - 0.5
        dy = (v[..., 1] - center[1] + 0.5) % 1.0 - 0.5
        r = np.sqrt(dx * dx + dy * dy)
        width = float(sec.get("init_width", 0.02))
        return rho_minus + (rho_plus - rho_minus) * 0.5 * (
            1.0 - np.tanh((r - R0) / width)
        )

    mob = interface.MobilityTensor(
        D=D, f=f, rho_minus=rho_minus, rho_plus=rho_plus
    )
    mu_eval = mob.tabulate(n_angles=int(sec.get("n_angles", 128)))
    phis = resolve_phis(sec.get("phis", ["one", "sin", "cos"]))

    fields = [np.zeros((N, N)) for _ in times]
    pairings = [{name: 0.0 for name in phis} for _ in times]
    for seed in seeds:
        state = kmc.init(model, N, rho0, seed)
        t_prev = 0.0
        for i, t in enumerate(times):
            kmc.advance(state, t - t_prev)
            t_prev = t
            fields[i] += smoothed_block_field(state, ell, sigma)
            for name, phi in phis.items():
                pairings[i][name] += kmc.empirical_pairing(state, phi)

    front_rows = []
    distances = []
    sharp = None
    passes = int(sec.get("smooth_passes", 20))
    for i, t in enumerate(times):
        field = fields[i] / len(seeds)
        # light curve smoothing removes sub-vertex noise that would
        # otherwise pinch into loops under the explicit flow
        particle_front = (
            interface.extract_level_set(field, rho_star, t=t)
            .resample(n_vertices).smoothed(passes)
        )
        if sharp is None:
            sharp = interface.FrontCurve(particle_front.vertices.copy(), t)
        else:
            dt = interface.stable_step_size(sharp)
            _, sharp = interface.evolve(sharp, mu_eval, horizon=t, dt=dt)
        H = interface.hausdorff_torus(
            particle_front.vertices, sharp.vertices
        )
        step = interface.StepProfile(sharp, rho_minus, rho_plus)
        gaps = {
            name: abs(pairings[i][name] / len(seeds) - step.pairing(phi))
            for name, phi in phis.items()
        }
        distances.append((t, H, H * N, gaps))
        for v in particle_front.vertices:
            front_rows.append((t, "particle", v[0], v[1]))
        for v in sharp.vertices:
            front_rows.append((t, "sharp", v[0], v[1]))

    fronts_path = out_dir / "fronts.csv"
    write_csv(fronts_path, ["t", "which", "x", "y"], front_rows)
    manifest.add(fronts_path)
    report = {
        "t_K": t_K,
        "roots": [rho_minus, rho_star, rho_plus],
        "distances": [
            {"t": t, "hausdorff": H, "grid_cells": cells, "pairing_gaps": gaps}
            for t, H, cells, gaps in distances
        ],
        "max_grid_cells": max(c for _, _, c, _ in distances),
    }
    report_path = out_dir / "interface_report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
    manifest.add(report_path)
    manifest.write(out_dir, started)
    return report


def render_report(report: dict) -> str:
    """Deterministic human-readable rendering of a pipeline report."""
    lines = []
    for key in sorted(report):
        val = report[key]
        if isinstance(val, float):
            lines.append(f"{key}: {val:.6g}")
        elif isinstance(val, dict):
            lines.append(f"{key}:")
            for k2 in sorted(val):
                lines.append(f"  {k2}: {json.dumps(val[k2], sort_keys=True)}")
        else:
            lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
    return "\n".join(lines) + "\n"

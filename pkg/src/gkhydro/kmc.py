"""Kinetic Monte Carlo driver for the exchange dynamics sped up by N^2 with
flips at strength K, via uniformized thinning.

Every directed bond is proposed at the uniform bound N^2 c^* and accepted
with probability c_b/c^*; every site is proposed for a flip at K g_max and
accepted with probability c_x/g_max.  Proposal counts over an interval are
Poisson with the total bound as intensity, which reproduces the continuous
time chain exactly.

The inner loop lives in a compiled extension when available; set
GKHYDRO_FORCE_PY=1 to force the pure-Python kernel.  Both kernels consume
identical pre-drawn uniforms, so trajectories do not depend on the backend.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .lattice import Configuration, Torus, block_average_field
from .measures import product_measure_sample
from .rates import RateModel, validate

if os.environ.get("GKHYDRO_FORCE_PY"):
    from . import _kmc_py as _kernel

    BACKEND = "python"
else:
    try:
        from . import _kmc_cy as _kernel

        BACKEND = "cython"
    except ImportError:
        from . import _kmc_py as _kernel

        BACKEND = "python"

BATCH = 1 << 20


def backend_name() -> str:
    return BACKEND


def _offset_map(torus: Torus, offset) -> np.ndarray:
    """Flat index of x + offset for every site x, as int32."""
    n = torus.n_sites
    coords = np.empty((torus.d, n), dtype=np.int64)
    idx = np.arange(n)
    for a in range(torus.d):
        coords[a] = (idx // torus.N**a) % torus.N
    out = np.zeros(n, dtype=np.int64)
    for a in range(torus.d - 1, -1, -1):
        out = out * torus.N + (coords[a] + offset[a]) % torus.N
    return out.astype(np.int32)


@dataclass
class _KernelParams:
    """Rate tables and index maps in the layout the kernels expect."""

    d: int
    n_sites: int
    w_exch: float
    w_flip: float
    c_max: float
    g_max: float
    exch_k: np.ndarray
    exch_tables: np.ndarray
    exch_maps: np.ndarray
    nbr_fwd: np.ndarray
    flip_k_p: int
    flip_k_m: int
    flip_table_p: np.ndarray
    flip_table_m: np.ndarray
    flip_map_p: np.ndarray
    flip_map_m: np.ndarray

    @classmethod
    def build(cls, model: RateModel, torus: Torus) -> "_KernelParams":
        bounds = validate(model)
        d, n = torus.d, torus.n_sites
        if torus.N <= 2 * model.radius():
            raise ValueError("torus too small for the rate supports")
        c_max = bounds.c_star_max
        g_max = model.max_flip_rate()
        kmax = max(
            [len(c.support) for c in model.exchange]
            + [len(model.flip_plus.support), len(model.flip_minus.support), 1]
        )
        exch_k = np.array([len(c.support) for c in model.exchange], dtype=np.int64)
        exch_tables = np.zeros((d, 1 << kmax))
        exch_maps = np.zeros((d, kmax, n), dtype=np.int32)
        for i, c in enumerate(model.exchange):
            exch_tables[i, : c.table.size] = c.table
            for jj, off in enumerate(c.support):
                exch_maps[i, jj] = _offset_map(torus, off)
        nbr_fwd = np.empty((d, n), dtype=np.int32)
        for i in range(d):
            e = tuple(1 if a == i else 0 for a in range(d))
            nbr_fwd[i] = _offset_map(torus, e)

        def flip_parts(f):
            k = len(f.support)
            table = np.zeros(1 << max(k, 0))
            table[: f.table.size] = f.table
            maps = np.zeros((max(k, 1), n), dtype=np.int32)
            for jj, off in enumerate(f.support):
                maps[jj] = _offset_map(torus, off)
            return k, table, maps

        kp, tp, mp = flip_parts(model.flip_plus)
        km, tm, mm = flip_parts(model.flip_minus)
        N2 = float(torus.N) ** 2
        w_exch = N2 * c_max * d * n
        w_flip = model.K * g_max * n if g_max > 0.0 else 0.0
        return cls(d, n, w_exch, w_flip, c_max, g_max, exch_k, exch_tables,
                   exch_maps, nbr_fwd, kp, km, tp, tm, mp, mm)


@dataclass
class SimulationState:
    """A trajectory of the chain at macroscopic time t."""

    model: RateModel
    cfg: Configuration
    t: float
    rng: np.random.Generator
    seed: int
    params: _KernelParams
    n_exchanges: int = 0
    n_flips: int = 0
    n_proposals: int = 0


def init(model: RateModel, N: int, rho0, seed: int) -> SimulationState:
    """Sample the product measure with marginals rho0(x/N) on the size-N torus."""
    torus = Torus(model.d, N)
    params = _KernelParams.build(model, torus)
    rng = np.random.default_rng(np.random.Philox(seed))
    if callable(rho0):
        p = np.array(
            [rho0(np.array(torus.coords(i), dtype=float) / N)
             for i in range(torus.n_sites)]
        )
    else:
        p = np.broadcast_to(
            np.asarray(rho0, dtype=float).ravel(), (torus.n_sites,)
        )
    if p.min() <= 0.0 or p.max() >= 1.0:
        raise ValueError("initial profile must take values in the open interval (0,1)")
    cfg = product_measure_sample(p, torus, rng)
    return SimulationState(model, cfg, 0.0, rng, seed, params)


def total_rate_bound(state: SimulationState) -> float:
    return state.params.w_exch + state.params.w_flip


def advance(state: SimulationState, dt: float) -> SimulationState:
    """Evolve the chain in place for macroscopic duration dt; exact in law."""
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    p = state.params
    lam = (p.w_exch + p.w_flip) * dt
    n_events = int(state.rng.poisson(lam)) if lam > 0.0 else 0
    occ = state.cfg.occupancy
    done = 0
    while done < n_events:
        nb = min(BATCH, n_events - done)
        u_select = state.rng.random(nb)
        u_accept = state.rng.random(nb)
        ax, af = _kernel.run_events(
            occ, nb, u_select, u_accept,
            p.d, p.n_sites, p.w_exch, p.w_flip,
            p.exch_k, p.exch_tables, p.exch_maps, p.nbr_fwd,
            p.flip_k_p, p.flip_k_m, p.flip_table_p, p.flip_table_m,
            p.flip_map_p, p.flip_map_m, p.c_max, p.g_max,
        )
        state.n_exchanges += ax
        state.n_flips += af
        done += nb
    state.n_proposals += n_events
    state.t += dt
    return state


def empirical_pairing(state: SimulationState, phi) -> float:
    """N^{-d} sum_x eta_x phi(x/N); phi maps (..., d) arrays to values."""
    torus = state.cfg.torus
    n = torus.n_sites
    idx = np.arange(n)
    coords = np.empty((n, torus.d))
    for a in range(torus.d):
        coords[:, a] = (idx // torus.N**a) % torus.N
    vals = np.asarray(phi(coords / torus.N), dtype=float)
    return float(np.dot(state.cfg.occupancy, vals) / n)


def block_profile(state: SimulationState, ell: int) -> np.ndarray:
    """Coarse-grained density field over boxes of radius ell, full resolution."""
    return block_average_field(state.cfg, ell)


@dataclass
class ObservableSeries:
    """Named pairings recorded along a trajectory."""

    names: tuple
    times: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def record(self, state: SimulationState, phis: dict):
        if tuple(phis) != self.names:
            raise ValueError("observable set changed mid-series")
        self.times.append(state.t)
        self.values.append(
            [empirical_pairing(state, phi) for phi in phis.values()]
        )

    def as_arrays(self):
        return np.array(self.times), np.array(self.values)

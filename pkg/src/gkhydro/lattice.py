"""Periodic lattice geometry, occupancy configurations, and elementary moves.

Sites of the d-dimensional periodic lattice of side N are linearized
row-major: a coordinate tuple (z_1, ..., z_d) maps to
z_1 + N*z_2 + N^2*z_3 + ...  All radii use the sup-norm
|z| = max_i |z_i|.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

SNAPSHOT_MAGIC = b"GKH1"


@dataclass(frozen=True)
class Torus:
    """Periodic square lattice of dimension d and side N."""

    d: int
    N: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.N < 1:
            raise ValueError("side length must be >= 1")

    @property
    def n_sites(self) -> int:
        return self.N**self.d

    def wrap(self, coords):
        """Reduce coordinates modulo N per axis."""
        return tuple(int(c) % self.N for c in coords)

    def index(self, coords) -> int:
        """Row-major flat index of a (possibly out-of-range) coordinate."""
        idx = 0
        for c in reversed(self.wrap(coords)):
            idx = idx * self.N + c
        return idx

    def coords(self, idx: int):
        out = []
        for _ in range(self.d):
            out.append(idx % self.N)
            idx //= self.N
        return tuple(out)

    def neighbor(self, idx: int, axis: int, step: int = 1) -> int:
        c = list(self.coords(idx))
        c[axis] = (c[axis] + step) % self.N
        return self.index(c)

    def neighbor_table(self) -> np.ndarray:
        """(n_sites, 2d) array: forward then backward neighbor per axis."""
        n = self.n_sites
        table = np.empty((n, 2 * self.d), dtype=np.int64)
        idx = np.arange(n)
        for axis in range(self.d):
            stride = self.N**axis
            block = stride * self.N
            base = idx - (idx % block) + (idx % block) % stride
            pos = (idx % block) // stride
            table[:, 2 * axis] = base + ((pos + 1) % self.N) * stride
            table[:, 2 * axis + 1] = base + ((pos - 1) % self.N) * stride
        return table


@dataclass
class Configuration:
    """Occupancy field eta in {0,1} on a torus, stored flat as uint8."""

    torus: Torus
    occupancy: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.occupancy is None:
            self.occupancy = np.zeros(self.torus.n_sites, dtype=np.uint8)
        else:
            self.occupancy = np.asarray(self.occupancy, dtype=np.uint8).reshape(
                self.torus.n_sites
            )
            if self.occupancy.max(initial=0) > 1:
                raise ValueError("occupancy values must be 0 or 1")

    def copy(self) -> "Configuration":
        return Configuration(self.torus, self.occupancy.copy())

    def particle_count(self) -> int:
        return int(self.occupancy.sum())

    def grid(self) -> np.ndarray:
        """Occupancies reshaped to a d-dimensional array, axis 0 = x_1."""
        N, d = self.torus.N, self.torus.d
        return self.occupancy.reshape((N,) * d, order="F")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Configuration)
            and self.torus == other.torus
            and np.array_equal(self.occupancy, other.occupancy)
        )


def is_bond(torus: Torus, x, y) -> bool:
    """Whether x and y are sup-norm nearest neighbors on the torus."""
    diff = [min((xi - yi) % torus.N, (yi - xi) % torus.N) for xi, yi in zip(x, y)]
    return max(diff) == 1 and sum(diff) == 1


def exchange(cfg: Configuration, bond) -> Configuration:
    """Configuration eta^{x,y} with the values at the bond endpoints swapped."""
    x, y = bond
    if not is_bond(cfg.torus, x, y):
        raise ValueError(f"{x}-{y} is not a nearest-neighbor bond")
    out = cfg.copy()
    i, j = cfg.torus.index(x), cfg.torus.index(y)
    out.occupancy[i], out.occupancy[j] = cfg.occupancy[j], cfg.occupancy[i]
    return out


def flip(cfg: Configuration, x) -> Configuration:
    """Configuration eta^x with the value at x flipped."""
    out = cfg.copy()
    i = cfg.torus.index(x)
    out.occupancy[i] ^= 1
    return out


def shift(cfg: Configuration, z) -> Configuration:
    """(tau_z eta)_y = eta_{y+z}."""
    g = cfg.grid()
    shifted = np.roll(g, shift=[-zi for zi in z], axis=tuple(range(cfg.torus.d)))
    return Configuration(cfg.torus, shifted.ravel(order="F"))


def block_average(cfg: Configuration, x, ell: int) -> float:
    """Sample average of eta over the sup-norm box of radius ell around x."""
    N, d = cfg.torus.N, cfg.torus.d
    if 2 * ell + 1 > N:
        raise ValueError("averaging box does not fit in the torus")
    total = 0
    for offset in np.ndindex(*(2 * ell + 1,) * d):
        coords = tuple(xi + oi - ell for xi, oi in zip(x, offset))
        total += cfg.occupancy[cfg.torus.index(coords)]
    return total / (2 * ell + 1) ** d


def block_average_field(cfg: Configuration, ell: int) -> np.ndarray:
    """Block average at every site, as a d-dimensional array."""
    N = cfg.torus.N
    if 2 * ell + 1 > N:
        raise ValueError("averaging box does not fit in the torus")
    g = cfg.grid().astype(np.float64)
    return ndimage.uniform_filter(g, size=2 * ell + 1, mode="wrap")


def save_snapshot(cfg: Configuration, path, t: float = 0.0, meta: dict | None = None):
    """Write header (d, N, time) + packed little-endian bitstream + JSON sidecar.

    Byte order: little-endian header; occupancies packed 8 sites per byte,
    site index increasing with bit significance (bitorder='little').
    """
    payload = np.packbits(cfg.occupancy, bitorder="little").tobytes()
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<IId", cfg.torus.d, cfg.torus.N, t))
        fh.write(payload)
    sidecar = {
        "d": cfg.torus.d,
        "N": cfg.torus.N,
        "t": t,
        "particles": cfg.particle_count(),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    sidecar.update(meta or {})
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def load_snapshot(path) -> tuple[Configuration, float]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError("not a configuration snapshot")
        d, N, t = struct.unpack("<IId", fh.read(16))
        torus = Torus(d, N)
        bits = np.frombuffer(fh.read(), dtype=np.uint8)
    occ = np.unpackbits(bits, bitorder="little")[: torus.n_sites]
    return Configuration(torus, occ), t

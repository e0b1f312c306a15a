"""Exact finite-box resolvent computations for the central-limit-theorem
variances: localized exchange generator on a particle-number sector,
boundary-current observables, the two resolvent identities, spectral gaps,
and decay sweeps toward the macroscopic targets."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg

from .localfn import VectorLocalFunction
from .measures import box_sites, compressibility
from .rates import RateModel, unit_offset, validate

SECTOR_CAP = 10**6
CENTER_TOL = 1e-12
DENSE_LIMIT = 4000


# -- boundary configurations ---------------------------------------------


def collar_sites(ell: int, r: int, d: int) -> list:
    """Lambda(ell+r) \\ Lambda(ell): sites outside the box that rates can see."""
    inner = set(box_sites(ell, d))
    return [s for s in box_sites(ell + r, d) if s not in inner]


def zeta_empty(ell: int, r: int, d: int) -> dict:
    return {s: 0 for s in collar_sites(ell, r, d)}


def zeta_full(ell: int, r: int, d: int) -> dict:
    return {s: 1 for s in collar_sites(ell, r, d)}


def zeta_checkerboard(ell: int, r: int, d: int) -> dict:
    return {s: sum(s) & 1 for s in collar_sites(ell, r, d)}


def zeta_random(ell: int, r: int, d: int, rng) -> dict:
    return {s: int(rng.integers(0, 2)) for s in collar_sites(ell, r, d)}


def standard_zetas(ell: int, r: int, d: int, n_random: int = 8, seed: int = 0):
    """(id, zeta) pairs: empty, full, checkerboard, and random fills."""
    rng = np.random.default_rng(seed)
    out = [
        ("empty", zeta_empty(ell, r, d)),
        ("full", zeta_full(ell, r, d)),
        ("checker", zeta_checkerboard(ell, r, d)),
    ]
    for k in range(n_random):
        out.append((f"rand{k}", zeta_random(ell, r, d, rng)))
    return out


# -- sector and generator ------------------------------------------------


@dataclass
class Sector:
    """All configurations of Lambda(ell) with exactly m particles, as
    bitmasks over the box sites (bit j = occupancy at sites[j])."""

    ell: int
    d: int
    m: int
    sites: list
    states: np.ndarray  # sorted int64 bitmasks

    @classmethod
    def build(cls, ell: int, m: int, d: int) -> "Sector":
        sites = box_sites(ell, d)
        n = len(sites)
        if not 0 <= m <= n:
            raise ValueError("particle count out of range")
        if comb(n, m) > SECTOR_CAP:
            raise ValueError(f"sector size {comb(n, m)} exceeds cap {SECTOR_CAP}")
        masks = np.fromiter(
            (sum(1 << j for j in combo) for combo in combinations(range(n), m)),
            dtype=np.int64,
            count=comb(n, m),
        )
        masks.sort()
        return cls(ell, d, m, sites, masks)

    @property
    def size(self) -> int:
        return len(self.states)

    def locate(self, masks) -> np.ndarray:
        idx = np.searchsorted(self.states, masks)
        if not np.array_equal(self.states[idx], masks):
            raise KeyError("state not in sector")
        return idx

    def occupancies(self) -> np.ndarray:
        """(size, n_sites) 0/1 array."""
        bits = (self.states[:, None] >> np.arange(len(self.sites))[None, :]) & 1
        return bits.astype(np.float64)


def _bond_list(ell: int, d: int, sites: list):
    """Directed bonds (x, x+e_i) with both endpoints in the box."""
    pos = {s: j for j, s in enumerate(sites)}
    bonds = []
    for i in range(d):
        e = unit_offset(i, d)
        for x in sites:
            y = tuple(a + b for a, b in zip(x, e))
            if y in pos:
                bonds.append((i, x, y, pos[x], pos[y]))
    return bonds


def _bond_rate_vector(model, sector: Sector, zeta: dict, bond) -> np.ndarray:
    """c_b(xi . zeta) for every sector state, vectorized via a reduced table."""
    i, x, _, _, _ = bond
    c = model.exchange[i].shifted(x)
    pos = {s: j for j, s in enumerate(sector.sites)}
    inner, fixed = [], {}
    for off in c.support:
        if off in pos:
            inner.append(off)
        elif off in zeta:
            fixed[off] = zeta[off]
        else:
            raise ValueError(f"rate support site {off} not covered by the collar")
    k = len(inner)
    table = np.empty(1 << k)
    for idx in range(1 << k):
        bits = dict(fixed)
        for j, off in enumerate(inner):
            bits[off] = (idx >> j) & 1
        table[idx] = c.evaluate_bits(bits)
    if k == 0:
        return np.full(sector.size, table[0])
    key = np.zeros(sector.size, dtype=np.int64)
    for j, off in enumerate(inner):
        key |= ((sector.states >> pos[off]) & 1) << j
    return table[key]


@dataclass
class LocalizedGenerator:
    """Exchange generator restricted to a box with frozen outside fill."""

    sector: Sector
    zeta: dict
    matrix: sparse.csr_matrix  # L: symmetric, row sums 0, spectrum <= 0
    bonds: list
    bond_rates: list  # per bond: rate at every sector state

    @property
    def size(self) -> int:
        return self.sector.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def build_generator(model: RateModel, ell: int, zeta: dict, m: int) -> LocalizedGenerator:
    """Assemble L_{Lambda(ell),zeta} on the m-particle sector, exactly."""
    validate(model)
    sector = Sector.build(ell, m, model.d)
    bonds = _bond_list(ell, model.d, sector.sites)
    n = sector.size
    rows = np.arange(n)
    bond_rates = []
    coo_r, coo_c, coo_v = [], [], []
    for bond in bonds:
        _, _, _, ja, jb = bond
        rates = _bond_rate_vector(model, sector, zeta, bond)
        bond_rates.append(rates)
        ba = (sector.states >> ja) & 1
        bb = (sector.states >> jb) & 1
        active = ba != bb
        if not active.any():
            continue
        flipmask = np.int64((1 << ja) | (1 << jb))
        partners = sector.locate(sector.states[active] ^ flipmask)
        r = rates[active]
        coo_r.extend([rows[active], rows[active]])
        coo_c.extend([partners, rows[active]])
        coo_v.extend([r, -r])
    if coo_r:
        L = sparse.coo_matrix(
            (np.concatenate(coo_v), (np.concatenate(coo_r), np.concatenate(coo_c))),
            shape=(n, n),
        ).tocsr()
    else:
        L = sparse.csr_matrix((n, n))
    asym = abs(L - L.T).max() if n > 1 else 0.0
    if asym > 1e-12:
        raise AssertionError(f"generator not symmetric: {asym}")
    rowsum = np.abs(np.asarray(L.sum(axis=1))).max()
    if rowsum > 1e-12:
        raise AssertionError(f"generator row sums not zero: {rowsum}")
    return LocalizedGenerator(sector, zeta, L, bonds, bond_rates)


# -- resolvent -----------------------------------------------------------


def _center(v: np.ndarray) -> np.ndarray:
    return v - v.mean()


def _solve_poisson(gen: LocalizedGenerator, g: np.ndarray) -> np.ndarray:
    """Mean-zero solution u of (-L) u = g."""
    n = gen.size
    if n == 1:
        return np.zeros(1)
    A = -gen.matrix
    if n <= DENSE_LIMIT:
        u = np.linalg.lstsq(A.toarray(), g, rcond=None)[0]
        return _center(u)

    def matvec(v):
        return A @ _center(v)

    op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    u, info = cg(op, g, rtol=1e-12, atol=0.0, maxiter=50 * n)
    if info != 0:
        raise RuntimeError(f"conjugate gradient did not converge (info={info})")
    return _center(u)


def clt_variance(gen: LocalizedGenerator, f: np.ndarray, g: np.ndarray) -> float:
    """Delta(f, g) = <f (-L)^{-1} g> under the uniform sector measure."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    scale = max(np.abs(f).max(initial=0.0), np.abs(g).max(initial=0.0), 1.0)
    if abs(f.mean()) > CENTER_TOL * scale or abs(g.mean()) > CENTER_TOL * scale:
        raise ValueError("inputs must be centered on the sector")
    u = _solve_poisson(gen, g)
    return float(np.dot(f, u) / gen.size)


def sector_mean(v: np.ndarray) -> float:
    return float(np.mean(v))


# -- the current observables ---------------------------------------------


@dataclass
class CurrentTriple:
    """A (boundary current), B = -L(position sum), H = L(corrector sum);
    each a (d, sector size) array of sector functions."""

    A: np.ndarray
    B: np.ndarray
    H: np.ndarray


def corrector_sum(gen: LocalizedGenerator, F: VectorLocalFunction, theta) -> np.ndarray:
    """u(xi) = sum_{x in Lambda(ell - n)} tau_x (theta . F), n = r(F) + 1.

    The translates then live inside Lambda(ell - 1), so the collar never
    enters and the sum is a pure sector function.
    """
    sector = gen.sector
    ell, d = sector.ell, sector.d
    n = F.radius() + 1
    if n > ell:
        # the inner box is empty and the sum vanishes
        return np.zeros(sector.size)
    f = F.dot(theta)
    pos = {s: j for j, s in enumerate(sector.sites)}
    out = np.zeros(sector.size)
    for x in box_sites(ell - n, d):
        shifted = f.shifted(x)
        k = len(shifted.support)
        if k == 0:
            out += shifted.table[0]
            continue
        key = np.zeros(sector.size, dtype=np.int64)
        for j, off in enumerate(shifted.support):
            key |= ((sector.states >> pos[off]) & 1) << j
        out += shifted.table[key]
    return out


def current_triple(gen: LocalizedGenerator, F: VectorLocalFunction) -> CurrentTriple:
    sector = gen.sector
    d = sector.d
    occ = sector.occupancies()
    coords = np.array(sector.sites, dtype=float)  # (n_sites, d)
    A = np.zeros((d, sector.size))
    for i, x, y, ja, jb in gen.bonds:
        A[i] += occ[:, jb] - occ[:, ja]
    B = np.empty((d, sector.size))
    H = np.empty((d, sector.size))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = 1.0
        B[i] = -gen.apply(occ @ coords[:, i])
        H[i] = gen.apply(corrector_sum(gen, F, ei))
    return CurrentTriple(A=A, B=B, H=H)


# -- the two resolvent identities ----------------------------------------


def dirichlet_identity_check(model: RateModel, F: VectorLocalFunction, ell: int,
                             zeta: dict, m: int, theta):
    """l_*^{-d} Delta(theta.(B - H)) against the explicit Dirichlet sum.

    Both sides are computed independently: the left by a resolvent solve,
    the right as a plain canonical average of squared bond terms.
    """
    theta = np.asarray(theta, dtype=float)
    gen = build_generator(model, ell, zeta, m)
    sector = gen.sector
    trip = current_triple(gen, F)
    g = _center(theta @ (trip.B - trip.H))
    lhs = clt_variance(gen, g, g) / (2 * ell + 1) ** model.d

    u = corrector_sum(gen, F, theta)
    occ = sector.occupancies()
    total = np.zeros(sector.size)
    for bond, rates in zip(gen.bonds, gen.bond_rates):
        i, x, y, ja, jb = bond
        diff = occ[:, jb] - occ[:, ja]
        active = diff != 0.0
        pi_u = np.zeros(sector.size)
        if active.any():
            flipmask = np.int64((1 << ja) | (1 << jb))
            partners = sector.locate(sector.states[active] ^ flipmask)
            pi_u[active] = u[partners] - u[active]
        total += rates * (theta[i] * diff - pi_u) ** 2
    rhs = 0.5 * float(total.mean()) / (2 * ell + 1) ** model.d
    return lhs, rhs, abs(lhs - rhs)


def cross_identity_check(model: RateModel, F: VectorLocalFunction, ell: int,
                         zeta: dict, m: int, theta, theta_tilde):
    """Covariance identity for Delta(theta~.A, theta.(B - H)).

    Returns (lhs, rhs, |lhs - rhs|, q5) where q5 = rhs - (theta.theta~) chi,
    the finite-box error against the macroscopic target.
    """
    theta = np.asarray(theta, dtype=float)
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    gen = build_generator(model, ell, zeta, m)
    sector = gen.sector
    vol = (2 * ell + 1) ** model.d
    trip = current_triple(gen, F)
    a = _center(theta_tilde @ trip.A)
    g = _center(theta @ (trip.B - trip.H))
    lhs = clt_variance(gen, a, g) / vol

    occ = sector.occupancies()
    coords = np.array(sector.sites, dtype=float)
    u = occ @ (coords @ theta) + corrector_sum(gen, F, theta)
    rhs = float(np.dot(a, u)) / sector.size / vol
    chi = compressibility(m / vol)
    q5 = rhs - float(np.dot(theta, theta_tilde)) * chi
    return lhs, rhs, abs(lhs - rhs), q5


# -- spectra and sweeps --------------------------------------------------


def spectral_gap(gen: LocalizedGenerator) -> float:
    """Smallest nonzero eigenvalue of -L on the sector."""
    n = gen.size
    if n <= 1:
        raise ValueError("sector is trivial")
    w = np.linalg.eigvalsh(-gen.matrix.toarray())
    if w[0] < -1e-10:
        raise AssertionError(f"generator has positive spectrum: {w[0]}")
    gap = float(w[1])
    if gap <= 0.0:
        raise AssertionError("sector not irreducible: zero spectral gap")
    return gap


def spectral_gap_sweep(model: RateModel, ells, rho: float = 0.5):
    """Rows (ell, m, gap) at m ~ rho * volume; plus the log-log slope of the
    gap against the box side 2 ell + 1."""
    rows = []
    r = model.radius()
    for ell in ells:
        vol = (2 * ell + 1) ** model.d
        m = max(1, min(vol - 1, round(rho * vol)))
        gen = build_generator(model, ell, zeta_empty(ell, r, model.d), m)
        rows.append((ell, m, spectral_gap(gen)))
    ls = np.log([2 * row[0] + 1 for row in rows])
    gs = np.log([row[2] for row in rows])
    slope = float(np.polyfit(ls, gs, 1)[0])
    return rows, slope


def variance_decay_sweep(model: RateModel, F: VectorLocalFunction, ells, theta,
                         c_hat_fn, c_hat_F_fn=None, zetas_per_ell=None,
                         n_random_zeta: int = 2, seed: int = 0):
    """Sup over m and sampled zeta of the three finite-box gaps per ell.

    c_hat_fn(rho) must return the d x d conductivity matrix; c_hat_F_fn(rho)
    the quadratic form matrix at the frozen corrector F (defaults to
    c_hat_fn).  Rows: (ell, q4_sup, q5_sup, q6_sup); also returns fitted
    log-log decay exponents for each column.
    """
    theta = np.asarray(theta, dtype=float)
    if c_hat_F_fn is None:
        c_hat_F_fn = c_hat_fn
    r = model.radius()
    d = model.d
    rows = []
    for ell in ells:
        vol = (2 * ell + 1) ** d
        q4 = q5 = q6 = 0.0
        zetas = zetas_per_ell(ell) if zetas_per_ell else standard_zetas(
            ell, r, d, n_random=n_random_zeta, seed=seed
        )
        for m in range(vol + 1):
            rho = m / vol
            chi = compressibility(rho)
            c_hat = np.atleast_2d(c_hat_fn(rho))
            c_hat_F = np.atleast_2d(c_hat_F_fn(rho))
            if chi > 0.0:
                target6 = 2.0 * float(
                    theta @ np.linalg.solve(c_hat, theta)
                ) * chi**2
            else:
                target6 = 0.0
            for _, zeta in zetas:
                gen = build_generator(model, ell, zeta, m)
                trip = current_triple(gen, F)
                a = _center(theta @ trip.A)
                g = _center(theta @ (trip.B - trip.H))
                q6 = max(q6, abs(clt_variance(gen, a, a) / vol - target6))
                q4 = max(
                    q4,
                    abs(
                        clt_variance(gen, g, g) / vol
                        - 0.5 * float(theta @ c_hat_F @ theta)
                    ),
                )
                occ = gen.sector.occupancies()
                coords = np.array(gen.sector.sites, dtype=float)
                u = occ @ (coords @ theta) + corrector_sum(gen, F, theta)
                rhs = float(np.dot(a, u)) / gen.size / vol
                q5 = max(q5, abs(rhs - float(theta @ theta) * chi))
        rows.append((ell, q4, q5, q6))
    ls = np.log([row[0] for row in rows])
    exps = []
    for col in (1, 2, 3):
        vals = np.array([row[col] for row in rows])
        if np.all(vals > 0.0):
            exps.append(float(np.polyfit(ls, np.log(vals), 1)[0]))
        else:
            exps.append(float("-inf"))
    return rows, tuple(exps)

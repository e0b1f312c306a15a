"""Variational conductivity c_hat(rho), diffusion matrix D(rho), corrector
optimization and the remainder R(rho; F).

The quadratic form is evaluated exactly by expanding every ingredient as a
multilinear polynomial in the occupancies: under a Bernoulli product
measure the expectation of a monomial over a site set S is rho^|S|, so
each matrix element of the normal equations is an exact polynomial in rho.
Masks over a bounded offset window make products and unions cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .localfn import Monomials, VectorLocalFunction
from .measures import box_sites, compressibility
from .rates import RateModel, unit_offset, validate

EIG_CUTOFF = 1e-10


def signed_directions(d: int):
    """The 2d unit offsets x with |x| = 1, as (axis, sign, offset)."""
    out = []
    for i in range(d):
        e = unit_offset(i, d)
        out.append((i, +1, e))
        out.append((i, -1, tuple(-c for c in e)))
    return out


def exchange_rate_monomials(model: RateModel, axis: int, sign: int) -> Monomials:
    """c_{0,x} for x = +/- e_axis; c_{0,-e} = tau_{-e} c_{0,e} by homogeneity."""
    mono = model.exchange[axis].to_monomials()
    if sign < 0:
        mono = mono.shifted(tuple(-c for c in unit_offset(axis, model.d)))
    return mono


def gradient_monomial(offset, d: int) -> Monomials:
    """eta_x - eta_0 for the signed direction offset x."""
    return Monomials.monomial([offset]) - Monomials.monomial([(0,) * d])


def formal_sum_bond_difference(mono: Monomials, bond) -> Monomials:
    """pi_b(sum_y tau_y P) for a multilinear polynomial P; finite sum."""
    a, b = tuple(bond[0]), tuple(bond[1])
    acc = Monomials()
    shifts = set()
    for key in mono.terms:
        for s in key:
            for t in (a, b):
                shifts.add(tuple(ti - si for ti, si in zip(t, s)))
    for y in sorted(shifts):
        acc = acc + mono.shifted(y).exchange_difference((a, b))
    return acc


class _MaskEncoder:
    """Encode site offsets as bit positions so monomial unions are ORs."""

    def __init__(self):
        self.bits = {}

    def encode(self, mono: Monomials):
        masks, coeffs = [], []
        for key, c in mono.terms.items():
            m = 0
            for off in key:
                if off not in self.bits:
                    self.bits[off] = len(self.bits)
                m |= 1 << self.bits[off]
            masks.append(m)
            coeffs.append(c)
        return np.array(masks, dtype=object), np.array(coeffs, dtype=float)


def _pair_expectation_poly(ma, ca, mb, cb, max_deg: int) -> np.ndarray:
    """Coefficients in rho of < A * B >_rho for mask-encoded polynomials."""
    out = np.zeros(max_deg + 1)
    for m1, c1 in zip(ma, ca):
        for m2, c2 in zip(mb, cb):
            out[bin(m1 | m2).count("1")] += c1 * c2
    return out


@dataclass
class CorrectorBasis:
    """Monomial search space for the corrector F with radius <= n.

    Each element is one vector local function with a single nonzero
    component equal to a monomial over a subset of Lambda(n).  Elements
    whose formal-sum bond difference vanishes for every direction are in
    the null space of the quadratic form and are dropped, as are exact
    translates of a kept element (the form depends on F only through
    sum_y pi_b tau_y F).
    """

    d: int
    n: int
    components: list  # component index per element
    monomials: list  # generating monomial per element
    bond_diffs: list  # per element: per signed direction, Monomials

    @classmethod
    def build(cls, d: int, n: int, max_degree: int | None = None) -> "CorrectorBasis":
        sites = box_sites(n, d)
        if max_degree is None:
            max_degree = len(sites) if d == 1 else 2
        dirs = signed_directions(d)
        subsets = []
        for mask in range(1, 1 << len(sites)):
            S = frozenset(sites[j] for j in range(len(sites)) if (mask >> j) & 1)
            if len(S) <= max_degree and (n == 0 or _shift_representative(S, n, d)):
                subsets.append(S)
        components, monomials, bond_diffs = [], [], []
        for S in subsets:
            mono = Monomials.monomial(S)
            diffs = [
                formal_sum_bond_difference(mono, ((0,) * d, off))
                for _, _, off in dirs
            ]
            if all(g.is_zero() for g in diffs):
                continue
            for j in range(d):
                components.append(j)
                monomials.append(mono)
                bond_diffs.append(diffs)
        return cls(d, n, components, monomials, bond_diffs)

    def __len__(self):
        return len(self.components)


def _shift_representative(S: frozenset, n: int, d: int) -> bool:
    # translate class representative: every coordinate-min at the box floor
    # along axis 0; other axes merely inside the box (they are not free to
    # slide without leaving Lambda(n) in general, so only axis 0 is fixed)
    return min(s[0] for s in S) == -n


@dataclass
class _QuadraticProgram:
    """rho-polynomial moments of the quadratic form over a corrector basis."""

    basis: CorrectorBasis
    const_poly: np.ndarray  # (2d, deg+1): <c_x (eta_x - eta_0)^2>
    cross_poly: np.ndarray  # (2d, K, deg+1): <c_x (eta_x-eta_0) G_k,x>
    gram_poly: np.ndarray  # (2d, K, K, deg+1): <c_x G_k,x G_l,x>

    @classmethod
    def assemble(cls, model: RateModel, basis: CorrectorBasis) -> "_QuadraticProgram":
        d = model.d
        dirs = signed_directions(d)
        K = len(basis)
        enc = _MaskEncoder()
        # generous degree bound: every support involved is finite
        max_deg = 64
        const = np.zeros((2 * d, max_deg + 1))
        cross = np.zeros((2 * d, K, max_deg + 1))
        gram = np.zeros((2 * d, K, K, max_deg + 1))
        for xi, (axis, sign, off) in enumerate(dirs):
            c_x = exchange_rate_monomials(model, axis, sign)
            psi = gradient_monomial(off, d)
            c_psi = c_x * psi
            m_cpsi = enc.encode(c_psi)
            m_psi = enc.encode(psi)
            const[xi] = _pair_expectation_poly(*m_cpsi, *m_psi, max_deg)
            encoded = [enc.encode(basis.bond_diffs[k][xi]) for k in range(K)]
            cg = [enc.encode(c_x * basis.bond_diffs[k][xi]) for k in range(K)]
            for k in range(K):
                cross[xi, k] = _pair_expectation_poly(*m_cpsi, *encoded[k], max_deg)
                for l in range(k + 1):
                    p = _pair_expectation_poly(*cg[k], *encoded[l], max_deg)
                    gram[xi, k, l] = p
                    gram[xi, l, k] = p
        deg = max_deg
        while deg > 0 and not (
            const[..., deg].any() or cross[..., deg].any() or gram[..., deg].any()
        ):
            deg -= 1
        return cls(basis, const[..., : deg + 1], cross[..., : deg + 1],
                   gram[..., : deg + 1])

    def at_density(self, rho: float):
        powers = rho ** np.arange(self.const_poly.shape[-1])
        return (
            self.const_poly @ powers,
            self.cross_poly @ powers,
            self.gram_poly @ powers,
        )


@dataclass
class ConductivityResult:
    rho: float
    n: int
    c_hat: np.ndarray  # d x d symmetric
    F_coeffs: dict  # theta label -> coefficient vector over the basis
    residual: float  # minimum of the quadratic form at theta = e_1
    basis: CorrectorBasis


class _Solver:
    """Caches the basis and moment polynomials per (model, n)."""

    def __init__(self, model: RateModel, n: int, max_degree: int | None = None):
        validate(model)
        self.model = model
        self.n = n
        self.basis = CorrectorBasis.build(model.d, n, max_degree)
        self.program = _QuadraticProgram.assemble(model, self.basis)
        comp = np.array(self.basis.components, dtype=int)
        self.comp = comp

    def value_and_coeffs(self, rho: float, theta):
        """Minimize the quadratic form over the basis at fixed theta."""
        theta = np.asarray(theta, dtype=float)
        const, cross, gram = self.program.at_density(rho)
        dirs = signed_directions(self.model.d)
        tdotx = np.array([sign * theta[axis] for axis, sign, _ in dirs])
        tk = theta[self.comp] if len(self.comp) else np.zeros(0)
        c0 = 0.5 * float(np.dot(tdotx**2, const))
        if len(self.comp) == 0:
            return c0, np.zeros(0)
        b = 0.5 * (tdotx[:, None] * cross).sum(axis=0) * tk
        A = 0.5 * np.einsum("xkl->kl", gram) * np.outer(tk, tk)
        # least-norm pseudo-solution of A a = b (A is PSD; the minimum value
        # is unique even when the minimizer is not)
        w, V = np.linalg.eigh(A)
        wmax = w.max(initial=0.0)
        keep = w > EIG_CUTOFF * max(wmax, 1e-300)
        inv = np.zeros_like(w)
        np.divide(1.0, w, out=inv, where=keep)
        a = V @ (inv * (V.T @ b))
        return c0 - float(b @ a), a

    def quadratic_form_value(self, rho: float, theta, coeffs) -> float:
        theta = np.asarray(theta, dtype=float)
        const, cross, gram = self.program.at_density(rho)
        dirs = signed_directions(self.model.d)
        tdotx = np.array([sign * theta[axis] for axis, sign, _ in dirs])
        c0 = 0.5 * float(np.dot(tdotx**2, const))
        if len(self.comp) == 0:
            return c0
        tk = theta[self.comp]
        b = 0.5 * (tdotx[:, None] * cross).sum(axis=0) * tk
        A = 0.5 * np.einsum("xkl->kl", gram) * np.outer(tk, tk)
        a = np.asarray(coeffs, dtype=float)
        return c0 - 2.0 * float(b @ a) + float(a @ A @ a)


_solver_cache: dict = {}


def get_solver(model: RateModel, n: int, max_degree: int | None = None) -> _Solver:
    key = (id(model), n, max_degree)
    if key not in _solver_cache:
        _solver_cache[key] = _Solver(model, n, max_degree)
    return _solver_cache[key]


def _polarization_thetas(d: int):
    thetas = {}
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        thetas[f"e{i+1}"] = e
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros(d)
            e[i] = e[j] = 1.0 / np.sqrt(2.0)
            thetas[f"e{i+1}+e{j+1}"] = e
    return thetas


def minimize(model: RateModel, rho: float, n: int,
             max_degree: int | None = None) -> ConductivityResult:
    """Exact minimizer of the convex quadratic over correctors of radius <= n.

    c_hat is assembled entrywise from the theta-specific minima by the
    polarization identity on the values.
    """
    solver = get_solver(model, n, max_degree)
    d = model.d
    values, coeffs = {}, {}
    for label, theta in _polarization_thetas(d).items():
        values[label], coeffs[label] = solver.value_and_coeffs(rho, theta)
    c_hat = np.zeros((d, d))
    for i in range(d):
        c_hat[i, i] = values[f"e{i+1}"]
    for i in range(d):
        for j in range(i + 1, d):
            c_hat[i, j] = c_hat[j, i] = (
                values[f"e{i+1}+e{j+1}"] - 0.5 * (c_hat[i, i] + c_hat[j, j])
            )
    return ConductivityResult(
        rho=rho, n=n, c_hat=c_hat, F_coeffs=coeffs,
        residual=values["e1"], basis=solver.basis,
    )


def corrector_function(result: ConductivityResult,
                       label: str = "e1") -> VectorLocalFunction:
    """The minimizing corrector for one polarization direction as an
    explicit vector local function (frozen at result.rho)."""
    comps = list(VectorLocalFunction.zero(result.basis.d).components)
    for a, j, mono in zip(
        result.F_coeffs[label], result.basis.components, result.basis.monomials
    ):
        if a != 0.0:
            comps[j] = comps[j] + mono.to_local_function() * float(a)
    return VectorLocalFunction(tuple(comps))


def quadratic_form(model: RateModel, rho: float, theta,
                   F: VectorLocalFunction) -> float:
    """(theta, c_hat(rho; F) theta): exact value for an explicit corrector F."""
    validate(model)
    d = model.d
    theta = np.asarray(theta, dtype=float)
    F_theta = F.dot(theta).to_monomials()
    total = 0.0
    for axis, sign, off in signed_directions(d):
        c_x = exchange_rate_monomials(model, axis, sign)
        g0 = gradient_monomial(off, d) * float(sign * theta[axis])
        G = formal_sum_bond_difference(F_theta, ((0,) * d, off))
        diff = g0 - G
        total += (c_x * diff * diff).expectation(rho)
    return 0.5 * total


def diffusion_matrix(result: ConductivityResult, bounds=None) -> np.ndarray:
    """D(rho) = c_hat(rho) / (2 chi(rho)); asserts the uniform bounds."""
    chi = compressibility(result.rho)
    if chi == 0.0:
        raise ValueError("use tabulate_D endpoint extrapolation at rho in {0,1}")
    D = result.c_hat / (2.0 * chi)
    if bounds is not None:
        eig = np.linalg.eigvalsh(0.5 * (D + D.T))
        if eig.min() < bounds.c_star_min - 1e-8 or eig.max() > bounds.c_star_max + 1e-8:
            raise AssertionError(
                f"diffusion eigenvalues {eig} escape "
                f"[{bounds.c_star_min}, {bounds.c_star_max}]"
            )
    return D


def remainder(model: RateModel, rho: float, F: VectorLocalFunction,
              n_ref: int, max_degree: int | None = None) -> np.ndarray:
    """R(rho; F) = c_hat(rho; F) - c_hat(rho), against the reference radius n_ref."""
    d = model.d
    ref = minimize(model, rho, n_ref, max_degree)
    values = {}
    for label, theta in _polarization_thetas(d).items():
        values[label] = quadratic_form(model, rho, theta, F)
    R = np.zeros((d, d))
    for i in range(d):
        R[i, i] = values[f"e{i+1}"] - ref.c_hat[i, i]
    for i in range(d):
        for j in range(i + 1, d):
            ref_val = (
                ref.c_hat[i, j] + 0.5 * (ref.c_hat[i, i] + ref.c_hat[j, j])
            )
            R[i, j] = R[j, i] = values[f"e{i+1}+e{j+1}"] - ref_val - 0.5 * (
                R[i, i] + R[j, j]
            )
    return R


def remainder_from_results(res: ConductivityResult,
                           ref: ConductivityResult) -> np.ndarray:
    """R between two minimization results at the same density."""
    return res.c_hat - ref.c_hat


@dataclass
class DiffusionTable:
    """Tabulated D(rho) with monotone-safe cubic interpolation per entry."""

    rho_grid: np.ndarray
    matrices: np.ndarray  # (len(grid), d, d)
    bounds: object = None

    def __post_init__(self):
        self._interp = [
            [
                PchipInterpolator(self.rho_grid, self.matrices[:, i, j])
                for j in range(self.d)
            ]
            for i in range(self.d)
        ]

    @property
    def d(self) -> int:
        return self.matrices.shape[-1]

    def __call__(self, rho):
        rho = np.clip(rho, 0.0, 1.0)
        out = np.empty(np.shape(rho) + (self.d, self.d))
        for i in range(self.d):
            for j in range(self.d):
                out[..., i, j] = self._interp[i][j](rho)
        return out

    def scalar(self, rho):
        """Entry (0,0); convenience for isotropic/1-d problems."""
        return self(rho)[..., 0, 0]

    @classmethod
    def constant(cls, D: np.ndarray, bounds=None) -> "DiffusionTable":
        D = np.atleast_2d(np.asarray(D, dtype=float))
        grid = np.linspace(0.0, 1.0, 5)
        return cls(grid, np.broadcast_to(D, (5,) + D.shape).copy(), bounds)


def tabulate_D(model: RateModel, rho_grid, n: int,
               max_degree: int | None = None) -> DiffusionTable:
    """Solve the variational problem on an interior grid and extend D to
    [0,1] by quadratic extrapolation from the three nearest interior nodes."""
    bounds = validate(model)
    rho_grid = np.asarray(rho_grid, dtype=float)
    if rho_grid.min() <= 0.0 or rho_grid.max() >= 1.0:
        raise ValueError("grid must be interior; endpoints are extrapolated")
    d = model.d
    mats = np.empty((len(rho_grid), d, d))
    for g, rho in enumerate(rho_grid):
        res = minimize(model, rho, n, max_degree)
        mats[g] = diffusion_matrix(res)
    full_grid = np.concatenate([[0.0], rho_grid, [1.0]])
    full = np.empty((len(full_grid), d, d))
    full[1:-1] = mats
    for i in range(d):
        for j in range(d):
            full[0, i, j] = _quad_extrapolate(rho_grid[:3], mats[:3, i, j], 0.0)
            full[-1, i, j] = _quad_extrapolate(rho_grid[-3:], mats[-3:, i, j], 1.0)
    # extrapolation can overshoot the rate bounds by O(h^2); project the
    # endpoint matrices back into the admissible eigenvalue band
    for k in (0, -1):
        w, V = np.linalg.eigh(0.5 * (full[k] + full[k].T))
        w = np.clip(w, bounds.c_star_min, bounds.c_star_max)
        full[k] = (V * w) @ V.T
    table = DiffusionTable(full_grid, full, bounds)
    # eigenvalue scan of the interpolant
    scan = np.linspace(0.0, 1.0, 257)
    eigs = np.array([np.linalg.eigvalsh(0.5 * (M + M.T)) for M in table(scan)])
    eps = 1e-6
    if eigs.min() < bounds.c_star_min - eps or eigs.max() > bounds.c_star_max + eps:
        raise AssertionError(
            "interpolated diffusion eigenvalues escape "
            f"[{bounds.c_star_min}, {bounds.c_star_max}]: "
            f"range [{eigs.min()}, {eigs.max()}]"
        )
    return table


def _quad_extrapolate(xs, ys, x0) -> float:
    coef = np.polyfit(xs, ys, 2)
    return float(np.polyval(coef, x0))

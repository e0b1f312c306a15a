"""Exact expectations under Bernoulli and uniform canonical measures,
thermodynamic functions, and the large-deviation rate function."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Configuration, Torus
from .localfn import LocalFunction


def ensemble_average(f: LocalFunction, rho: float) -> float:
    """<f>_rho under the Bernoulli product measure with density rho. Exact."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("density must lie in [0,1]")
    k = len(f.support)
    idx = np.arange(1 << k)
    ones = np.array([bin(i).count("1") for i in range(1 << k)])
    weights = rho**ones * (1.0 - rho) ** (k - ones)
    return float(np.dot(f.table[idx], weights))


def ensemble_average_polynomial(f: LocalFunction) -> np.polynomial.Polynomial:
    """<f>_rho as an exact polynomial in rho (degree <= |supp f|)."""
    return np.polynomial.Polynomial(f.to_monomials().expectation_poly())


def box_sites(ell: int, d: int) -> list:
    """Sites of the sup-norm box Lambda(ell) centered at 0."""
    rng = range(-ell, ell + 1)
    out = [()]
    for _ in range(d):
        out = [pref + (c,) for c in rng for pref in out]
    return sorted(out)


@dataclass(frozen=True)
class CanonicalMeasure:
    """Uniform measure on configurations of a finite box with m particles."""

    box: tuple  # site offsets
    m: int

    def __post_init__(self):
        if not 0 <= self.m <= len(self.box):
            raise ValueError("particle count out of range")


def canonical_average(f: LocalFunction, mu: CanonicalMeasure) -> float:
    """Uniform average over the C(|box|, m) configurations; exact.

    Only the restriction to supp f matters: the marginal of the uniform
    canonical measure on k tagged sites is hypergeometric, so the sum
    runs over 2^k local patterns weighted by C(n-k, m-j)/C(n, m).
    """
    box = set(tuple(s) for s in mu.box)
    if not set(f.support) <= box:
        raise ValueError("support of f escapes the box")
    n, m, k = len(box), mu.m, len(f.support)
    total = 0.0
    denom = math.comb(n, m)
    for i in range(1 << k):
        j = bin(i).count("1")
        if j > m or m - j > n - k:
            continue
        total += f.table[i] * math.comb(n - k, m - j)
    return total / denom


def equivalence_gap(h: LocalFunction, ell: int, m: int, d: int) -> float:
    """|canonical average on Lambda(ell) at count m - grand canonical at m/l_*^d|."""
    box = box_sites(ell, d)
    mu = CanonicalMeasure(tuple(box), m)
    rho = m / len(box)
    return abs(canonical_average(h, mu) - ensemble_average(h, rho))


def equivalence_sweep(h: LocalFunction, ells, density: float, d: int):
    """Rows (d, ell, m, m/l_*^d, gap) with m = round(density * l_*^d)."""
    rows = []
    for ell in ells:
        n = (2 * ell + 1) ** d
        m = round(density * n)
        rows.append((d, ell, m, m / n, equivalence_gap(h, ell, m, d)))
    return rows


# -- thermodynamics ------------------------------------------------------


def pressure(lam: float) -> float:
    """p(lambda) = log(e^lambda + 1)."""
    return float(np.logaddexp(lam, 0.0))


def entropy(u: float) -> float:
    """q(u) = -(u log u + (1-u) log(1-u)), with 0 log 0 = 0."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("density must lie in [0,1]")
    out = 0.0
    if u > 0.0:
        out -= u * math.log(u)
    if u < 1.0:
        out -= (1.0 - u) * math.log(1.0 - u)
    return out


def bar_rho(lam: float) -> float:
    """Mean density at chemical potential lambda: e^l/(e^l+1)."""
    return 0.5 * (1.0 + math.tanh(lam / 2.0))


def bar_lambda(rho: float) -> float:
    """Inverse of bar_rho: log(rho/(1-rho))."""
    if not 0.0 < rho < 1.0:
        raise ValueError("density must lie in (0,1)")
    return math.log(rho / (1.0 - rho))


def compressibility(rho: float) -> float:
    """chi(rho) = rho - rho^2."""
    return rho - rho * rho


def rate_function(u: float, lam: float) -> float:
    """Large-deviation rate I(u; lambda) = -lambda*u - q(u) + p(lambda)."""
    return -lam * u - entropy(u) + pressure(lam)


def canonical_log_count(n: int, m: int) -> float:
    """log C(n, m), the canonical partition count of an n-site box."""
    return math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)


# -- sampling ------------------------------------------------------------


def product_measure_sample(rho_profile, torus: Torus, rng) -> Configuration:
    """Independent occupancies with P(eta_x = 1) = rho_profile(x).

    rho_profile may be a callable on coordinate tuples, a flat array over
    sites, or a scalar.
    """
    n = torus.n_sites
    if callable(rho_profile):
        p = np.array([rho_profile(torus.coords(i)) for i in range(n)])
    else:
        p = np.broadcast_to(np.asarray(rho_profile, dtype=float).ravel(), (n,))
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("profile values must lie in [0,1]")
    occ = (rng.random(n) < p).astype(np.uint8)
    return Configuration(torus, occ)

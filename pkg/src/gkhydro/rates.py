"""Jump/flip rate models: validation, the macroscopic reaction term, and
its bistable/balanced classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .localfn import LocalFunction, parse_local_function
from .measures import ensemble_average_polynomial

BALANCE_REL_TOL = 1e-10


class RateModelError(ValueError):
    pass


class DetailedBalanceViolation(RateModelError):
    pass


class DegeneracyViolation(RateModelError):
    pass


class NegativityViolation(RateModelError):
    pass


@dataclass(frozen=True)
class RateBounds:
    c_star_min: float
    c_star_max: float


@dataclass(frozen=True)
class RateModel:
    """Exchange rates c_{0,e_i} per direction, flip rates c^+/c^-, Glauber K.

    Spatial homogeneity is structural: only the bond-at-origin and
    flip-at-origin rate functions are stored; all others are shifts.
    """

    exchange: tuple  # one LocalFunction per direction e_1..e_d
    flip_plus: LocalFunction = field(default=None)
    flip_minus: LocalFunction = field(default=None)
    K: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "exchange", tuple(self.exchange))
        if self.flip_plus is None:
            object.__setattr__(self, "flip_plus", LocalFunction.constant(0.0))
        if self.flip_minus is None:
            object.__setattr__(self, "flip_minus", LocalFunction.constant(0.0))

    @property
    def d(self) -> int:
        return len(self.exchange)

    def radius(self) -> int:
        r = max(c.radius() for c in self.exchange)
        return max(r, self.flip_plus.radius(), self.flip_minus.radius())

    def flip_rate(self) -> LocalFunction:
        """c(eta) = c^+(eta)(1 - eta_0) + c^-(eta) eta_0."""
        eta0 = LocalFunction.occupancy((0,) * self.d)
        one = LocalFunction.constant(1.0)
        return self.flip_plus * (one - eta0) + self.flip_minus * eta0

    def max_flip_rate(self) -> float:
        return max(self.flip_plus.value_max(), self.flip_minus.value_max(), 0.0)

    def has_flips(self) -> bool:
        return not (self.flip_plus.is_zero() and self.flip_minus.is_zero())


def unit_offset(i: int, d: int):
    return tuple(1 if j == i else 0 for j in range(d))


def validate(model: RateModel) -> RateBounds:
    """Assert conditions (non-degeneracy, detailed balance, flip positivity);
    return the uniform exchange-rate bounds (c_*, c^*)."""
    d = model.d
    cmin, cmax = np.inf, -np.inf
    origin = (0,) * d
    for i, c in enumerate(model.exchange):
        e_i = unit_offset(i, d)
        # canonical tables drop non-influential offsets, so membership is
        # genuine dependence
        if c.depends_on(origin) or c.depends_on(e_i):
            raise DetailedBalanceViolation(
                f"c_0,e{i+1} depends on its own bond endpoints"
            )
        if c.value_min() <= 0.0:
            raise DegeneracyViolation(f"c_0,e{i+1} is not uniformly positive")
        cmin, cmax = min(cmin, c.value_min()), max(cmax, c.value_max())
    for name, c in (("c^+", model.flip_plus), ("c^-", model.flip_minus)):
        if c.depends_on(origin):
            raise DetailedBalanceViolation(f"{name} depends on eta_0")
        if c.value_min() < 0.0:
            raise NegativityViolation(f"{name} takes negative values")
    if model.K < 0.0:
        raise NegativityViolation("K must be nonnegative")
    return RateBounds(float(cmin), float(cmax))


def reaction_term(model: RateModel) -> np.polynomial.Polynomial:
    """f(rho) = <(1-2 eta_0) c(eta)>_rho = (1-rho)<c^+>_rho - rho <c^->_rho."""
    validate(model)
    rho = np.polynomial.Polynomial([0.0, 1.0])
    f = (1 - rho) * ensemble_average_polynomial(model.flip_plus) - (
        rho
    ) * ensemble_average_polynomial(model.flip_minus)
    if model.has_flips():
        if not model.flip_plus.is_zero() and f(0.0) <= 0.0:
            raise RateModelError("f(0) = <c^+>_0 must be positive")
        if not model.flip_minus.is_zero() and f(1.0) >= 0.0:
            raise RateModelError("f(1) = -<c^->_1 must be negative")
    return f


class NotBistable(RateModelError):
    pass


@dataclass
class ReactionClassification:
    bistable: bool
    roots: tuple  # (rho_-, rho_*, rho_+)
    balanced: bool
    balance_integrals: np.ndarray  # eigen-direction integrals of f * (e.De)
    balance_tol: float


def polynomial_roots_in_unit_interval(f, grid_points: int = 1000, tol: float = 1e-12):
    """Interior roots of f located by sign changes on a grid, refined by bisection."""
    xs = np.linspace(0.0, 1.0, grid_points + 1)
    vals = f(xs)
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if fa == 0.0 and 0.0 < a < 1.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(bisect(f, a, b, xtol=tol)))
    return sorted(set(round(r, 13) for r in roots if 0.0 < r < 1.0))


def classify_reaction(f, D, quad_points: int = 4097) -> ReactionClassification:
    """Check bistability of f and the balance condition against D.

    D is a DiffusionTable (or any rho -> d x d matrix callable).  With a
    matrix-valued D the balance condition is required in every
    eigen-direction: each eigenvalue of the matrix int f(rho) D(rho) drho
    over [rho_-, rho_+] must vanish within tolerance.  For scalar D this
    reduces to the plain integral condition.
    """
    roots = polynomial_roots_in_unit_interval(f)
    if len(roots) != 3:
        raise NotBistable(f"expected 3 interior roots, found {len(roots)}: {roots}")
    lo, mid, hi = roots
    df = f.deriv()
    if not (df(lo) < 0.0 and df(mid) > 0.0 and df(hi) < 0.0):
        raise NotBistable("root stability pattern is not (stable, unstable, stable)")

    xs = np.linspace(lo, hi, quad_points)
    fvals = f(xs)
    Dmats = np.array([np.atleast_2d(D(x)) for x in xs])
    d = Dmats.shape[-1]
    integral = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            integral[i, j] = np.trapezoid(fvals * Dmats[:, i, j], xs)
    integral = 0.5 * (integral + integral.T)
    eigvals = np.linalg.eigvalsh(integral)
    scale = float(np.max(np.abs(fvals))) * float(np.max(np.abs(Dmats))) or 1.0
    tol = BALANCE_REL_TOL * scale
    balanced = bool(np.all(np.abs(eigvals) <= tol))
    return ReactionClassification(
        bistable=True,
        roots=(lo, mid, hi),
        balanced=balanced,
        balance_integrals=eigvals,
        balance_tol=tol,
    )


# -- model construction --------------------------------------------------


def ssep_model(d: int = 1, K: float = 0.0, flip_plus=None, flip_minus=None) -> RateModel:
    """Unit exchange rates; optional flips."""
    one = LocalFunction.constant(1.0)
    return RateModel(
        exchange=tuple(one for _ in range(d)),
        flip_plus=flip_plus,
        flip_minus=flip_minus,
        K=K,
    )


def nongradient_model_1d(K: float = 0.0, flip_plus=None, flip_minus=None) -> RateModel:
    """d=1 non-gradient example: c_{0,e1} = 1 + eta_{2e1}/2."""
    c = LocalFunction.constant(1.0) + LocalFunction.occupancy((2,)) * 0.5
    return RateModel(
        exchange=(c,), flip_plus=flip_plus, flip_minus=flip_minus, K=K
    )


def bistable_flip_rates(d: int, amplitude: float = 16.0):
    """Particle-hole symmetric flip pair whose reaction term is the balanced
    cubic f(rho) = -amplitude (rho - 1/4)(rho - 1/2)(rho - 3/4).

    c^+ = amplitude*(3/32 + eta_{e1} eta_{-e1} / 2), c^- mirrored; both
    depend only on the two e_1-axis neighbors, valid in any dimension.
    """
    up = LocalFunction.occupancy(unit_offset(0, d))
    down = LocalFunction.occupancy(tuple(-c for c in unit_offset(0, d)))
    one = LocalFunction.constant(1.0)
    c_plus = (LocalFunction.constant(3.0 / 32.0) + up * down * 0.5) * amplitude
    c_minus = (
        LocalFunction.constant(3.0 / 32.0) + (one - up) * (one - down) * 0.5
    ) * amplitude
    return c_plus, c_minus


def glauber_kawasaki_bistable(d: int, K: float, amplitude: float = 16.0) -> RateModel:
    """SSEP Kawasaki part with the balanced bistable Glauber pair."""
    c_plus, c_minus = bistable_flip_rates(d, amplitude)
    return ssep_model(d=d, K=K, flip_plus=c_plus, flip_minus=c_minus)


# -- model files ---------------------------------------------------------


def model_from_dict(data: dict) -> RateModel:
    """Build a RateModel from the parsed [model] table of a config file."""
    d = int(data.get("d", 1))
    if "preset" in data:
        preset = data["preset"]
        K = float(data.get("K", 0.0))
        if preset == "ssep":
            model = ssep_model(d=d, K=K)
        elif preset == "nongradient1d":
            model = nongradient_model_1d(K=K)
        elif preset == "bistable":
            model = glauber_kawasaki_bistable(
                d=d, K=K, amplitude=float(data.get("amplitude", 16.0))
            )
        else:
            raise RateModelError(f"unknown preset {preset!r}")
        if "flip" in data:
            fp = parse_local_function(data["flip"]["plus"])
            fm = parse_local_function(data["flip"]["minus"])
            model = RateModel(model.exchange, fp, fm, model.K)
        return model
    exchange = tuple(
        parse_local_function(data["exchange"][f"e{i+1}"]) for i in range(d)
    )
    fp = fm = None
    if "flip" in data:
        fp = parse_local_function(data["flip"]["plus"])
        fm = parse_local_function(data["flip"]["minus"])
    return RateModel(exchange, fp, fm, float(data.get("K", 0.0)))

"""Finite-support functions of occupancy configurations.

A LocalFunction stores the full truth table over its support: offsets are
d-tuples in Z^d, and table[i] is the value when the occupancies restricted
to the support spell the integer i (bit j of i = occupancy at support[j]).
This representation is exact and makes equality, algebra and enumeration
straightforward; the support is capped at 24 offsets.

A parallel sparse representation as a multilinear polynomial in the
occupancy variables (Monomials) is provided for the conductivity solver,
where products of functions with large combined support would overflow
the truth-table cap but expectations under product measures stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUPPORT_CAP = 24


def _canonical(support, table):
    """Sort offsets, drop offsets the table does not depend on."""
    support = [tuple(int(c) for c in off) for off in support]
    table = np.asarray(table, dtype=np.float64)
    if table.shape != (1 << len(support),):
        raise ValueError("table length must be 2^|support|")
    # drop irrelevant offsets
    keep = []
    for j in range(len(support)):
        idx = np.arange(table.size)
        lo = table[idx[(idx >> j) & 1 == 0]]
        hi = table[idx[(idx >> j) & 1 == 1]]
        if not np.array_equal(lo, hi):
            keep.append(j)
    if len(keep) < len(support):
        new_support = [support[j] for j in keep]
        new_table = np.empty(1 << len(keep))
        for i in range(new_table.size):
            full = 0
            for jj, j in enumerate(keep):
                full |= ((i >> jj) & 1) << j
            new_table[i] = table[full]
        support, table = new_support, new_table
    # sort lexicographically and permute table bits accordingly
    order = sorted(range(len(support)), key=lambda j: support[j])
    if order != list(range(len(support))):
        sorted_support = [support[j] for j in order]
        new_table = np.empty_like(table)
        for i in range(table.size):
            full = 0
            for jj, j in enumerate(order):
                full |= ((i >> jj) & 1) << j
            new_table[i] = table[full]
        support, table = sorted_support, new_table
    return tuple(support), table


class LocalFunction:
    """Real function of finitely many occupancy variables (truth table)."""

    __slots__ = ("support", "table")

    def __init__(self, support, table):
        if len(support) > SUPPORT_CAP:
            raise ValueError(f"support larger than cap {SUPPORT_CAP}")
        self.support, self.table = _canonical(support, table)

    @classmethod
    def constant(cls, value: float, d: int = 1):
        return cls([], [float(value)])

    @classmethod
    def occupancy(cls, offset):
        """eta at the given offset."""
        return cls([tuple(offset)], [0.0, 1.0])

    @classmethod
    def monomial(cls, offsets):
        """Product of occupancies over the given offsets (1 if empty)."""
        offsets = [tuple(o) for o in offsets]
        k = len(offsets)
        table = np.zeros(1 << k)
        table[(1 << k) - 1] = 1.0
        return cls(offsets, table)

    @classmethod
    def from_callable(cls, support, fn):
        """Tabulate fn(bits) over all restrictions; bits aligned with support."""
        support = [tuple(o) for o in support]
        k = len(support)
        table = np.empty(1 << k)
        for i in range(1 << k):
            bits = [(i >> j) & 1 for j in range(k)]
            table[i] = fn(dict(zip(support, bits)))
        return cls(support, table)

    @property
    def d(self) -> int:
        return len(self.support[0]) if self.support else 1

    def radius(self) -> int:
        """Sup-norm radius of the support, centered at 0."""
        if not self.support:
            return 0
        return max(max(abs(c) for c in off) for off in self.support)

    def is_zero(self) -> bool:
        return bool(np.all(self.table == 0.0))

    def depends_on(self, offset) -> bool:
        return tuple(offset) in self.support

    def value_min(self) -> float:
        return float(self.table.min())

    def value_max(self) -> float:
        return float(self.table.max())

    # -- evaluation ------------------------------------------------------

    def evaluate(self, cfg, x) -> float:
        """Value of tau_x f at cfg; support must not self-wrap (N > 2r)."""
        torus = cfg.torus
        if torus.N <= 2 * self.radius():
            raise ValueError("torus too small: support would wrap onto itself")
        idx = 0
        for j, off in enumerate(self.support):
            coords = tuple(xi + oi for xi, oi in zip(x, _pad(off, torus.d)))
            idx |= int(cfg.occupancy[torus.index(coords)]) << j
        return float(self.table[idx])

    def evaluate_bits(self, bits: dict) -> float:
        """Value given a mapping offset -> occupancy (must cover the support)."""
        idx = 0
        for j, off in enumerate(self.support):
            idx |= int(bits[off]) << j
        return float(self.table[idx])

    # -- algebra ---------------------------------------------------------

    def _align(self, other: "LocalFunction"):
        support = sorted(set(self.support) | set(other.support))
        if len(support) > SUPPORT_CAP:
            raise ValueError("combined support exceeds cap")
        return support, self._expand(support), other._expand(support)

    def _expand(self, support) -> np.ndarray:
        pos = {off: j for j, off in enumerate(support)}
        k = len(support)
        mask = np.zeros(1 << k, dtype=np.int64)
        for jj, off in enumerate(self.support):
            j = pos[off]
            idx = np.arange(1 << k)
            mask |= (((idx >> j) & 1) << jj).astype(np.int64)
        return self.table[mask]

    def __add__(self, other):
        if np.isscalar(other):
            other = LocalFunction.constant(float(other))
        support, a, b = self._align(other)
        return LocalFunction(support, a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, LocalFunction) else -other)

    def __mul__(self, other):
        if np.isscalar(other):
            return LocalFunction(self.support, self.table * float(other))
        support, a, b = self._align(other)
        return LocalFunction(support, a * b)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LocalFunction)
            and self.support == other.support
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.support, self.table.tobytes()))

    def __repr__(self):
        return f"LocalFunction(support={self.support}, table={self.table.tolist()})"

    def shifted(self, y) -> "LocalFunction":
        """tau_y f as a local function: support translated by y."""
        y = tuple(y)
        return LocalFunction(
            [tuple(a + b for a, b in zip(off, y)) for off in self.support], self.table
        )

    # -- difference operators -------------------------------------------

    def exchange_difference(self, bond) -> "LocalFunction":
        """pi_b f(eta) = f(eta^b) - f(eta) for a bond of offsets b = (a, b)."""
        a, b = tuple(bond[0]), tuple(bond[1])
        support = sorted(set(self.support) | {a, b})
        if len(support) > SUPPORT_CAP:
            raise ValueError("support cap exceeded")
        pos = {off: j for j, off in enumerate(support)}
        f = self._expand(support)
        idx = np.arange(f.size)
        ja, jb = pos[a], pos[b]
        bit_a, bit_b = (idx >> ja) & 1, (idx >> jb) & 1
        swapped = idx & ~((1 << ja) | (1 << jb)) | (bit_b << ja) | (bit_a << jb)
        return LocalFunction(support, f[swapped] - f)

    def flip_difference(self, x) -> "LocalFunction":
        """pi_x f(eta) = f(eta^x) - f(eta)."""
        x = tuple(x)
        support = sorted(set(self.support) | {x})
        if len(support) > SUPPORT_CAP:
            raise ValueError("support cap exceeded")
        pos = {off: j for j, off in enumerate(support)}
        f = self._expand(support)
        idx = np.arange(f.size)
        return LocalFunction(support, f[idx ^ (1 << pos[x])] - f)

    # -- monomial form ---------------------------------------------------

    def to_monomials(self) -> "Monomials":
        """Exact multilinear expansion: sum_S c_S prod_{z in S} eta_z."""
        k = len(self.support)
        coeffs = self.table.copy()
        # Moebius transform over the subset lattice
        for j in range(k):
            idx = np.arange(coeffs.size)
            hi = (idx >> j) & 1 == 1
            coeffs[hi] -= coeffs[idx[hi] ^ (1 << j)]
        terms = {}
        for i in range(coeffs.size):
            if coeffs[i] != 0.0:
                key = frozenset(self.support[j] for j in range(k) if (i >> j) & 1)
                terms[key] = float(coeffs[i])
        return Monomials(terms)


def _pad(off, d):
    return off + (0,) * (d - len(off))


@dataclass(frozen=True)
class VectorLocalFunction:
    """F = (F_i)_{i=1..d}: one LocalFunction per lattice direction."""

    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def d(self) -> int:
        return len(self.components)

    def radius(self) -> int:
        return max(f.radius() for f in self.components)

    def dot(self, theta) -> LocalFunction:
        out = LocalFunction.constant(0.0)
        for t, f in zip(theta, self.components):
            if t != 0.0:
                out = out + f * float(t)
        return out

    @classmethod
    def zero(cls, d: int):
        return cls(tuple(LocalFunction.constant(0.0) for _ in range(d)))


def translate_overlaps(f: LocalFunction, targets) -> list:
    """Shifts y such that the support of tau_y f meets the target offsets."""
    targets = [tuple(t) for t in targets]
    ys = set()
    for t in targets:
        for s in f.support:
            ys.add(tuple(ti - si for ti, si in zip(t, s)))
    return sorted(ys)


def formal_sum_exchange_difference(F: VectorLocalFunction, bond) -> VectorLocalFunction:
    """pi_b(sum_y tau_y F), computed over the finitely many overlapping y."""
    a, b = tuple(bond[0]), tuple(bond[1])
    out = []
    for f in F.components:
        acc = LocalFunction.constant(0.0)
        for y in translate_overlaps(f, (a, b)):
            acc = acc + f.shifted(y).exchange_difference((a, b))
        out.append(acc)
    return VectorLocalFunction(tuple(out))


class Monomials:
    """Multilinear polynomial sum_S c_S prod_{z in S} eta_z (S a set of offsets)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {}
        for key, c in (terms or {}).items():
            if c != 0.0:
                self.terms[frozenset(key)] = self.terms.get(frozenset(key), 0.0) + c

    @classmethod
    def monomial(cls, offsets, coeff: float = 1.0):
        return cls({frozenset(tuple(o) for o in offsets): coeff})

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.terms.values())

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0.0) + c
        return Monomials(out)

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            return Monomials({k: c * float(other) for k, c in self.terms.items()})
        out = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                key = ka | kb
                out[key] = out.get(key, 0.0) + ca * cb
        return Monomials(out)

    __rmul__ = __mul__

    def shifted(self, y):
        y = tuple(y)
        return Monomials(
            {
                frozenset(tuple(a + b for a, b in zip(off, y)) for off in key): c
                for key, c in self.terms.items()
            }
        )

    def exchange_difference(self, bond):
        """pi_b of the polynomial: swap the two bond offsets in every term."""
        a, b = tuple(bond[0]), tuple(bond[1])
        out = {}
        for key, c in self.terms.items():
            if a in key or b in key:
                swapped = frozenset(
                    b if z == a else a if z == b else z for z in key
                )
                if swapped != key:
                    out[swapped] = out.get(swapped, 0.0) + c
                    out[key] = out.get(key, 0.0) - c
        return Monomials(out)

    def expectation(self, rho: float) -> float:
        """<.>_rho under the Bernoulli product measure: E prod_S eta = rho^|S|."""
        return float(sum(c * rho ** len(key) for key, c in self.terms.items()))

    def expectation_poly(self) -> np.ndarray:
        """Coefficients of <.>_rho as a polynomial in rho (ascending)."""
        deg = max((len(k) for k in self.terms), default=0)
        out = np.zeros(deg + 1)
        for key, c in self.terms.items():
            out[len(key)] += c
        return out

    def support(self):
        out = set()
        for key in self.terms:
            out |= key
        return out

    def to_local_function(self) -> LocalFunction:
        support = sorted(self.support())
        if len(support) > SUPPORT_CAP:
            raise ValueError("support cap exceeded")
        pos = {off: j for j, off in enumerate(support)}
        table = np.zeros(1 << len(support))
        idx = np.arange(table.size)
        for key, c in self.terms.items():
            mask = 0
            for off in key:
                mask |= 1 << pos[off]
            table[(idx & mask) == mask] += c
        return LocalFunction(support, table)


# -- text format ---------------------------------------------------------


def serialize_local_function(f: LocalFunction) -> dict:
    """Offsets + 2^|support| values; the on-disk form used in model files."""
    return {"support": [list(o) for o in f.support], "table": f.table.tolist()}


def parse_local_function(data) -> LocalFunction:
    if np.isscalar(data):
        return LocalFunction.constant(float(data))
    return LocalFunction(
        [tuple(o) for o in data["support"]], np.asarray(data["table"], dtype=float)
    )

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkhydro.lattice import Configuration, Torus
from gkhydro.localfn import (LocalFunction, Monomials, VectorLocalFunction,
                             formal_sum_exchange_difference,
                             parse_local_function, serialize_local_function)

ETA0 = LocalFunction.occupancy((0,))
ETA1 = LocalFunction.occupancy((1,))


def close(f, g, atol=1e-9):
    sup = sorted(set(f.support) | set(g.support))
    return np.allclose((f - g)._expand(sup), 0.0, atol=atol)


def random_local(rng, d=1, radius=1):
    offs = [(c,) if d == 1 else (c, cc)
            for c in range(-radius, radius + 1)
            for cc in (range(-radius, radius + 1) if d == 2 else [0])]
    k = rng.integers(1, min(len(offs), 4) + 1)
    chosen = [offs[i] for i in rng.choice(len(offs), size=k, replace=False)]
    return LocalFunction(chosen, rng.standard_normal(1 << k))


def test_evaluate_occupancy_and_constant():
    t = Torus(1, 6)
    cfg = Configuration(t, np.array([1, 0, 1, 1, 0, 0], dtype=np.uint8))
    for x in range(6):
        assert ETA0.evaluate(cfg, (x,)) == cfg.occupancy[x]
        assert LocalFunction.constant(2.5).evaluate(cfg, (x,)) == 2.5


def test_evaluate_pair_product():
    cfg = Configuration(Torus(1, 4), np.array([1, 1, 0, 0], dtype=np.uint8))
    f = LocalFunction.monomial([(0,), (1,)])
    assert f.evaluate(cfg, (0,)) == 1.0
    assert f.evaluate(cfg, (1,)) == 0.0


def test_evaluate_rejects_wrapping_support():
    cfg = Configuration(Torus(1, 4), np.zeros(4, dtype=np.uint8))
    wide = LocalFunction.monomial([(-2,), (2,)])
    with pytest.raises(ValueError):
        wide.evaluate(cfg, (0,))


def test_canonicalization_drops_irrelevant_offsets():
    f = LocalFunction([(0,), (1,)], [0.0, 1.0, 0.0, 1.0])  # = eta_0
    assert f == ETA0


def test_exchange_difference_examples():
    b = ((0,), (1,))
    const = LocalFunction.constant(3.0)
    assert const.exchange_difference(b).is_zero()
    assert ETA0.exchange_difference(b) == ETA1 - ETA0
    far = LocalFunction.occupancy((5,))
    assert far.exchange_difference(b).is_zero()


def test_exchange_difference_antisymmetry_tablewise():
    rng = np.random.default_rng(0)
    b = ((0,), (1,))
    for _ in range(10):
        f = random_local(rng)
        g = f.exchange_difference(b)
        # pi_b f evaluated at eta^b equals -(pi_b f)(eta)
        assert (g.exchange_difference(b) + 2.0 * g).is_zero()


def test_flip_difference_examples():
    assert ETA0.flip_difference((0,)) == LocalFunction.constant(1.0) - 2.0 * ETA0
    assert ETA1.flip_difference((0,)).is_zero()
    pair = LocalFunction.monomial([(0,), (1,)])
    expect = (LocalFunction.constant(1.0) - 2.0 * ETA0) * ETA1
    assert pair.flip_difference((0,)) == expect


def test_formal_sum_zero_and_cancellation():
    b = ((0,), (1,))
    zero = VectorLocalFunction.zero(1)
    assert formal_sum_exchange_difference(zero, b).components[0].is_zero()
    # F = eta_0: sum of translates overlapping the bond is eta_0 + eta_1,
    # symmetric under the swap, so the difference cancels
    F = VectorLocalFunction((ETA0,))
    assert formal_sum_exchange_difference(F, b).components[0].is_zero()


def test_formal_sum_radius_bound():
    rng = np.random.default_rng(1)
    for _ in range(10):
        f = random_local(rng, radius=1)
        F = VectorLocalFunction((f,))
        out = formal_sum_exchange_difference(F, ((0,), (1,)))
        # translates are not recentered, so support can reach 2r+1 out
        assert out.components[0].radius() <= 2 * f.radius() + 1


def test_vector_dot():
    F = VectorLocalFunction((ETA0, ETA1))
    assert F.dot([2.0, 0.0]) == 2.0 * ETA0
    assert F.dot([1.0, 1.0]) == ETA0 + ETA1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
def test_difference_operators_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    f, g = random_local(rng), random_local(rng)
    bond = ((0,), (1,))
    lhs = (a * f + b * g).exchange_difference(bond)
    rhs = a * f.exchange_difference(bond) + b * g.exchange_difference(bond)
    assert np.allclose(
        (lhs - rhs)._expand(sorted(set(lhs.support) | set(rhs.support))), 0.0,
        atol=1e-9,
    )
    lhs2 = (a * f + b * g).flip_difference((0,))
    rhs2 = a * f.flip_difference((0,)) + b * g.flip_difference((0,))
    assert np.allclose(
        (lhs2 - rhs2)._expand(sorted(set(lhs2.support) | set(rhs2.support))),
        0.0, atol=1e-9,
    )


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_monomial_expansion_roundtrip(seed):
    rng = np.random.default_rng(seed)
    f = random_local(rng, radius=2)
    assert close(f.to_monomials().to_local_function(), f)


def test_monomials_algebra():
    m = Monomials.monomial([(0,)]) * Monomials.monomial([(1,)])
    assert m.terms == {frozenset({(0,), (1,)}): 1.0}
    # idempotence of occupancies: eta_0 * eta_0 = eta_0
    sq = Monomials.monomial([(0,)]) * Monomials.monomial([(0,)])
    assert sq.terms == {frozenset({(0,)}): 1.0}
    shifted = m.shifted((3,))
    assert shifted.terms == {frozenset({(3,), (4,)}): 1.0}


def test_monomials_exchange_difference_matches_truth_table():
    rng = np.random.default_rng(7)
    bond = ((0,), (1,))
    for _ in range(10):
        f = random_local(rng, radius=1)
        via_mono = f.to_monomials().exchange_difference(bond).to_local_function()
        assert close(via_mono, f.exchange_difference(bond))


def test_monomials_expectation_matches_truth_table():
    from gkhydro.measures import ensemble_average

    rng = np.random.default_rng(9)
    for rho in (0.0, 0.3, 1.0):
        f = random_local(rng, radius=2)
        assert f.to_monomials().expectation(rho) == pytest.approx(
            ensemble_average(f, rho), abs=1e-12
        )


def test_serialization_roundtrip():
    rng = np.random.default_rng(13)
    f = random_local(rng, d=2)
    assert parse_local_function(serialize_local_function(f)) == f
    assert parse_local_function(1.5) == LocalFunction.constant(1.5)


def test_support_cap_enforced():
    with pytest.raises(ValueError):
        LocalFunction.monomial([(i,) for i in range(25)])

"""Prime field scalars, binomial coefficients mod p, semilinear maps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhdx.gfp import (
    MAX_PRIME,
    PRIMES,
    FpScalar,
    PrimeField,
    SemilinearMap,
    binomial_mod,
    fitting_decomposition,
    lucas_binomial,
)


def integer_binomial(m, q):
    """Independent oracle: product formula, exact integer arithmetic.

    C(m, q) = m (m-1) ... (m-q+1) / q!   (an integer for every integer m).
    """
    num = 1
    for i in range(q):
        num *= m - i
    return num // math.factorial(q)


small_primes = st.sampled_from([2, 3, 5, 7, 13, 97])


def test_prime_validation():
    PrimeField(2)
    PrimeField(97)
    with pytest.raises(ValueError):
        PrimeField(1)
    with pytest.raises(ValueError):
        PrimeField(4)
    with pytest.raises(ValueError):
        PrimeField(101)  # beyond the supported bound
    assert max(PRIMES) == MAX_PRIME == 97


@settings(deadline=None)
@given(small_primes, st.integers(-200, 200), st.integers(-200, 200), st.integers(-200, 200))
def test_field_axioms(p, a, b, c):
    k = PrimeField(p)
    x, y, z = k(a), k(b), k(c)
    assert (x + y) + z == x + (y + z)
    assert x + y == y + x
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x + k.zero() == x
    assert x * k.one() == x
    assert x + (-x) == k.zero()
    if y != 0:
        assert (x / y) * y == x
        assert y * y.inverse() == k.one()


@settings(deadline=None)
@given(small_primes, st.integers(-100, 100))
def test_frobenius_is_identity_on_prime_field(p, a):
    x = PrimeField(p)(a)
    assert x.frobenius() == x


def test_scalar_int_interop():
    k = PrimeField(5)
    assert k(3) + 4 == k(2)
    assert 4 + k(3) == k(2)
    assert 2 - k(3) == k(4)
    assert k(2) ** -1 == k(3)
    assert int(k(7)) == 2
    assert bool(k(5)) is False


@settings(deadline=None)
@given(small_primes, st.integers(0, 64), st.integers(0, 64))
def test_lucas_matches_factorial_oracle(p, m, q):
    assert lucas_binomial(m, q, p) == math.comb(m, q) % p


@settings(deadline=None)
@given(small_primes, st.integers(-120, 120), st.integers(0, 40))
def test_binomial_mod_matches_product_oracle(p, m, q):
    assert binomial_mod(m, q, p) == integer_binomial(m, q) % p


@settings(deadline=None)
@given(small_primes, st.integers(-60, 60), st.integers(0, 30))
def test_pascal_rule(p, m, q):
    lhs = binomial_mod(m, q + 1, p)
    rhs = (binomial_mod(m - 1, q + 1, p) + binomial_mod(m - 1, q, p)) % p
    assert lhs == rhs


def test_binomial_edge_cases():
    assert binomial_mod(5, 0, 3) == 1
    assert binomial_mod(0, 0, 2) == 1
    assert binomial_mod(3, 5, 7) == 0
    assert binomial_mod(-1, 3, 5) == (-1) % 5
    assert binomial_mod(-2, 2, 7) == 3
    assert binomial_mod(4, -1, 5) == 0
    # digit rule: C(p, q) = 0 mod p for 0 < q < p
    for p in (2, 3, 5, 7):
        for q in range(1, p):
            assert lucas_binomial(p, q, p) == 0


def test_semilinear_apply_matches_linear_on_prime_field():
    # over F_p coordinates, v -> v^[p] is the identity, so F acts as M
    rng = np.random.default_rng(7)
    for p in (2, 3, 5):
        m = rng.integers(0, p, size=(4, 4))
        f = SemilinearMap(p, m)
        for _ in range(10):
            v = rng.integers(0, p, size=4)
            assert np.array_equal(f.apply(v), (m @ v) % p)
        assert np.array_equal(f.iterate_matrix(3),
                              np.linalg.matrix_power(m, 3) % p)


def test_fitting_identity_zero_and_projector():
    f = SemilinearMap(5, np.eye(3, dtype=np.int64))
    nil, semi = fitting_decomposition(f)
    assert nil.shape[0] == 0 and semi.shape[0] == 3

    z = SemilinearMap(5, np.zeros((3, 3), dtype=np.int64))
    nil, semi = fitting_decomposition(z)
    assert nil.shape[0] == 3 and semi.shape[0] == 0

    proj = SemilinearMap(2, np.diag([1, 0]).astype(np.int64))
    nil, semi = fitting_decomposition(proj)
    assert [list(r) for r in nil] == [[0, 1]]
    assert [list(r) for r in semi] == [[1, 0]]


def test_fitting_nilpotent_block():
    j = np.array([[0, 1], [0, 0]], dtype=np.int64)
    nil, semi = fitting_decomposition(SemilinearMap(3, j))
    assert nil.shape[0] == 2 and semi.shape[0] == 0

    mixed = np.zeros((3, 3), dtype=np.int64)
    mixed[0, 1] = 1  # J_2(0) on first two coordinates
    mixed[2, 2] = 1  # identity on the third
    nil, semi = fitting_decomposition(SemilinearMap(3, mixed))
    assert nil.shape[0] == 2 and semi.shape[0] == 1
    assert [list(r) for r in semi] == [[0, 0, 1]]


@settings(deadline=None, max_examples=60)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(0, 10 ** 6))
def test_fitting_random_invariants(p, n, seed):
    rng = np.random.default_rng(seed)
    f = SemilinearMap(p, rng.integers(0, p, size=(n, n)))
    nil, semi = fitting_decomposition(f)  # internal checks assert the axioms
    assert nil.shape[0] + semi.shape[0] == n

"""Divided-power operators: products, actions, invariants, realizations."""

import itertools

import numpy as np
import pytest

from hhdx.dpdo import (
    DPDOperator,
    OperatorAlgebra,
    TruncatedOperatorModule,
    invert_variable,
    matrix_realize,
    morita_compress,
)
from hhdx.errors import CapacityError, DepthError, WindowError
from hhdx.gfp import binomial_mod
from hhdx.poly import PolyRing


def random_operator(alg, rng, max_terms=4, max_a=4, max_b=4):
    lo = -max_a if alg.laurent else 0
    terms = {}
    for _ in range(int(rng.integers(0, max_terms + 1))):
        a = tuple(int(rng.integers(lo, max_a + 1)) for _ in range(alg.n))
        b = tuple(int(rng.integers(0, max_b + 1)) for _ in range(alg.n))
        terms[(a, b)] = int(rng.integers(0, alg.p))
    return alg.from_terms(terms)


def random_poly(ring, rng, max_terms=4, max_exp=6):
    lo = -max_exp if ring.laurent else 0
    return ring.from_terms({
        tuple(int(rng.integers(lo, max_exp + 1)) for _ in range(ring.n)):
            int(rng.integers(0, ring.p))
        for _ in range(int(rng.integers(0, max_terms + 1)))
    })


def test_construction_guards():
    alg = OperatorAlgebra(3, 1)
    with pytest.raises(ValueError):
        alg.monomial((-1,), (0,))
    with pytest.raises(ValueError):
        alg.monomial((0,), (-1,))
    with pytest.raises(CapacityError):
        alg.monomial((0,), (3 ** 4 + 1,))
    assert alg.monomial((1,), (0,), 3).is_zero()  # 3 = 0 mod 3
    assert OperatorAlgebra(3, 1, laurent=True).monomial((-2,), (1,)).order() == 1


def test_divided_power_composition_rule():
    # D^(q) D^(q') = C(q+q', q) D^(q+q'), symbolically, across primes
    for p in (2, 3, 5):
        alg = OperatorAlgebra(p, 1)
        for q in range(0, 9):
            for qp in range(0, 9):
                lhs = alg.divided_power(0, q) * alg.divided_power(0, qp)
                c = binomial_mod(q + qp, q, p)
                rhs = alg.monomial((0,), (q + qp,), c)
                assert lhs == rhs, (p, q, qp)


def test_straightening_rule_against_direct_sum():
    # D^(q) x^m = sum_j C(m, j) x^(m-j) D^(q-j)
    for p in (2, 3, 5):
        alg = OperatorAlgebra(p, 1)
        for q in range(0, 6):
            for m in range(0, 6):
                lhs = alg.divided_power(0, q) * alg.variable(0, m)
                expected = alg.zero()
                for j in range(0, min(q, m) + 1):
                    expected = expected + alg.monomial(
                        (m - j,), (q - j,), binomial_mod(m, j, p))
                assert lhs == expected, (p, q, m)


def test_monomial_action():
    alg = OperatorAlgebra(5, 2)
    ring = alg.ring
    op = alg.monomial((1, 0), (2, 1))
    f = ring.monomial((3, 4), 2)
    # coefficient C(3,2) * C(4,1) = 3 * 4 = 12 = 2 mod 5; exponents (3-2+1, 4-1)
    assert op.act(f) == ring.monomial((2, 3), 4)
    # insufficient degree annihilates
    assert op.act(ring.monomial((1, 1))).is_zero()


def test_action_is_module_structure():
    # act(A * B, f) == act(A, act(B, f)) — products mean composition
    rng = np.random.default_rng(123)
    for p in (2, 3, 5):
        for n in (1, 2):
            for laurent in (False, True):
                alg = OperatorAlgebra(p, n, laurent=laurent)
                for _ in range(20):
                    a = random_operator(alg, rng)
                    b = random_operator(alg, rng)
                    f = random_poly(alg.ring, rng)
                    assert (a * b).act(f) == a.act(b.act(f))


def test_associativity_spot():
    rng = np.random.default_rng(7)
    alg = OperatorAlgebra(3, 2, laurent=True)
    for _ in range(10):
        a, b, c = (random_operator(alg, rng, max_terms=3, max_a=3, max_b=3)
                   for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_multiplication_embeds_ring():
    rng = np.random.default_rng(11)
    alg = OperatorAlgebra(5, 2)
    for _ in range(10):
        f = random_poly(alg.ring, rng)
        g = random_poly(alg.ring, rng)
        assert alg.multiplication(f) * alg.multiplication(g) == alg.multiplication(f * g)


def test_divided_power_leibniz_via_action():
    # D^(q)(fg) = sum_i D^(i)(f) * D^(q-i)(g)
    rng = np.random.default_rng(17)
    alg = OperatorAlgebra(3, 1)
    ring = alg.ring
    for _ in range(10):
        f = random_poly(ring, rng)
        g = random_poly(ring, rng)
        for q in range(0, 5):
            lhs = alg.divided_power(0, q).act(f * g)
            rhs = ring.zero()
            for i in range(q + 1):
                rhs = rhs + alg.divided_power(0, i).act(f) * alg.divided_power(0, q - i).act(g)
            assert lhs == rhs


def test_order_and_certificate():
    alg = OperatorAlgebra(2, 2)
    op = alg.monomial((1, 0), (3, 1)) + alg.monomial((0, 0), (1, 1))
    assert op.order() == 4
    assert op.is_order_le(4)
    assert not op.is_order_le(3)
    assert alg.zero().order() is None
    assert alg.zero().is_order_le(-1)
    assert alg.one().order() == 0
    assert alg.one().is_order_le(0)


def test_order_certificate_random():
    rng = np.random.default_rng(23)
    for p in (2, 3):
        for n in (1, 2):
            alg = OperatorAlgebra(p, n, laurent=bool(rng.integers(0, 2)))
            for _ in range(8):
                op = random_operator(alg, rng, max_b=3)
                k = op.order()
                if k is None:
                    assert op.is_order_le(0)
                    continue
                assert op.is_order_le(k)
                if k > 0:
                    assert not op.is_order_le(k - 1)


def test_centrality_depth_closed_form_vs_commutators():
    rng = np.random.default_rng(31)
    for p in (2, 3):
        for n in (1, 2):
            alg = OperatorAlgebra(p, n)
            ring = alg.ring
            for _ in range(10):
                op = random_operator(alg, rng, max_b=5)
                r = op.centrality_depth()
                # commutes with every x_i^(p^r)
                for i in range(n):
                    e = [0] * n
                    e[i] = p ** r
                    assert op.commutes_with(ring.monomial(tuple(e)))
                # and fails for some coordinate one level down
                if r > 0:
                    failures = []
                    for i in range(n):
                        e = [0] * n
                        e[i] = p ** (r - 1)
                        failures.append(not op.commutes_with(ring.monomial(tuple(e))))
                    assert any(failures)


def test_matrix_realize_frozen_examples():
    # p = 2, depth 1, basis {1, t}: multiplication by t and the derivation
    alg = OperatorAlgebra(2, 1, names=("t",))
    t = alg.variable()
    real_t = matrix_realize(t, 1)
    assert real_t.basis == [(0,), (1,)]
    assert real_t.render() == [["0", "t^2"], ["1", "0"]]
    twisted = real_t.entries_in_twist_variables()
    assert [[f.render() for f in row] for row in twisted] == [["0", "u"], ["1", "0"]]

    d = alg.divided_power(0, 1)
    real_d = matrix_realize(d, 1)
    assert real_d.render() == [["0", "1"], ["0", "0"]]
    assert not real_d.truncated

    with pytest.raises(DepthError):
        matrix_realize(alg.divided_power(0, 2), 1)  # depth 2 at p = 2


def poly_matrix_product(a, b, ring):
    size = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(size)), ring.zero())
             for j in range(size)] for i in range(size)]


def test_matrix_realize_is_multiplicative():
    rng = np.random.default_rng(41)
    for p, r in ((2, 1), (2, 2), (3, 1)):
        alg = OperatorAlgebra(p, 1, names=("t",))
        q = p ** r
        for _ in range(12):
            # force centrality depth <= r by keeping divided powers < p^r
            a = alg.from_terms({
                ((int(rng.integers(0, 4)),), (int(rng.integers(0, q)),)):
                    int(rng.integers(1, p))
                for _ in range(3)
            })
            b = alg.from_terms({
                ((int(rng.integers(0, 4)),), (int(rng.integers(0, q)),)):
                    int(rng.integers(1, p))
                for _ in range(3)
            })
            ra = matrix_realize(a, r)
            rb = matrix_realize(b, r)
            rab = matrix_realize(a * b, r)
            assert rab.entries == poly_matrix_product(ra.entries, rb.entries, alg.ring)


def test_matrix_realize_truncation_flag():
    alg = OperatorAlgebra(2, 1, names=("t",))
    op = alg.variable(0, 5)  # multiplication by t^5
    exact = matrix_realize(op, 1)
    assert not exact.truncated
    windowed = matrix_realize(op, 1, degree_bound=2)
    assert windowed.truncated


def test_morita_compress_frozen():
    alg = OperatorAlgebra(2, 1, names=("t",))
    # aligned: t^2 D^(2) compresses to u D^(1)
    op = alg.monomial((2,), (2,))
    small = morita_compress(op, 1, degree_bound=8)
    assert small.render() == "u*Du^(1)"
    # misaligned terms act by zero on the subring
    assert morita_compress(alg.monomial((1,), (1,)), 1, degree_bound=8).is_zero()
    assert morita_compress(alg.monomial((2,), (1,)), 1, degree_bound=8).is_zero()
    with pytest.raises(WindowError):
        morita_compress(alg.monomial((4,), (4,)), 1, degree_bound=4)


def test_morita_compress_products():
    # compression is multiplicative on aligned operators
    rng = np.random.default_rng(53)
    p, r = 2, 1
    q = p ** r
    alg = OperatorAlgebra(p, 1, names=("t",))
    for _ in range(10):
        a = alg.from_terms({((q * int(rng.integers(0, 3)),), (q * int(rng.integers(0, 3)),)): 1
                            for _ in range(2)})
        b = alg.from_terms({((q * int(rng.integers(0, 3)),), (q * int(rng.integers(0, 3)),)): 1
                            for _ in range(2)})
        ca = morita_compress(a, r, degree_bound=32)
        cb = morita_compress(b, r, degree_bound=32)
        cab = morita_compress(a * b, r, degree_bound=32)
        assert cab == ca * cb


def test_invert_variable_frozen_and_involutive():
    alg = OperatorAlgebra(5, 1, names=("v",), laurent=True)
    target = OperatorAlgebra(5, 1, names=("u",), laurent=True)
    d = alg.divided_power(0, 1)
    flipped = invert_variable(d, target)
    # the derivation in v becomes -u^2 Du
    assert flipped == target.monomial((2,), (1,), -1)
    back = invert_variable(flipped, alg)
    assert back == d

    rng = np.random.default_rng(61)
    for _ in range(10):
        op = random_operator(alg, rng, max_a=3, max_b=3)
        other = invert_variable(op, target)
        assert invert_variable(other, alg) == op


def test_invert_variable_matches_action():
    p = 3
    alg = OperatorAlgebra(p, 1, names=("v",), laurent=True)
    target = OperatorAlgebra(p, 1, names=("u",), laurent=True)
    rng = np.random.default_rng(67)
    for _ in range(10):
        op = random_operator(alg, rng, max_a=3, max_b=3)
        flipped = invert_variable(op, target)
        for k in range(-5, 6):
            # u^k corresponds to v^(-k)
            image = op.act(alg.ring.monomial((-k,)))
            expected = {(-e,): c for (e,), c in image.terms.items()}
            assert flipped.act(target.ring.monomial((k,))).terms == expected


def test_truncated_module_windows():
    alg = OperatorAlgebra(2, 1, names=("t",))
    mod = TruncatedOperatorModule(alg, degree_bound=3, dp_bound=2)
    assert mod.dim == 4 * 3
    op = alg.monomial((2,), (1,)) + alg.monomial((0,), (0,))
    vec = mod.vectorize(op)
    assert mod.from_vector(vec) == op
    with pytest.raises(WindowError):
        mod.vectorize(alg.monomial((4,), (0,)))

    # [t, -] lowers the divided power and stays inside every window
    t = alg.variable()
    mat = mod.commutator_matrix(t)
    for (a, b) in mod.basis:
        col = mat.a[:, mod.index[(a, b)]]
        img = mod.from_vector(col)
        if b[0] == 0:
            assert img.is_zero()
        else:
            assert img == alg.monomial(a, (b[0] - 1,), -1)

    # the central power [t^(p^r), -] with p^r > dp window acts by zero
    central = alg.multiplication(alg.ring.monomial((4,)))
    assert mod.commutator_matrix(central).is_zero()

    # ad of a higher divided power raises the dp degree and escapes:
    # [D^(2), t D^(2)] = 3 D^(3), outside the dp window
    with pytest.raises(WindowError):
        mod.commutator_matrix(alg.divided_power(0, 2))


def test_truncated_module_laurent_window():
    alg = OperatorAlgebra(3, 1, names=("u",), laurent=True)
    mod = TruncatedOperatorModule(alg, degree_bound=2, dp_bound=1)
    assert mod.dim == 5 * 2
    assert mod.contains(alg.monomial((-2,), (1,)))
    assert not mod.contains(alg.monomial((-3,), (0,)))


def test_parse_render_round_trip():
    rng = np.random.default_rng(71)
    for laurent in (False, True):
        alg = OperatorAlgebra(5, 2, names=("t", "s"), laurent=laurent)
        for _ in range(20):
            op = random_operator(alg, rng)
            assert alg.parse(op.render()) == op


def test_parse_examples():
    alg = OperatorAlgebra(5, 1, names=("t",))
    assert alg.parse("Dt^(2)") == alg.divided_power(0, 2)
    assert alg.parse("2*t^3*Dt^(2) + t + 1") == (
        alg.monomial((3,), (2,), 2) + alg.variable() + alg.one())
    assert alg.parse("t - t") == alg.zero()
    assert alg.parse("Dt") == alg.divided_power(0, 1)
    assert alg.parse("-3") == alg.one().scale(-3)
    laurent = OperatorAlgebra(5, 1, names=("u",), laurent=True)
    assert laurent.parse("u^-1*Du^(1)") == laurent.monomial((-1,), (1,))
    with pytest.raises(ValueError):
        alg.parse("q^2")
    with pytest.raises(ValueError):
        alg.parse("")
    with pytest.raises(ValueError):
        alg.parse("t^-1")  # needs a Laurent algebra


def test_capacity_guard_on_products():
    alg = OperatorAlgebra(2, 1)
    big = alg.monomial((0,), (16,))
    # C(32, 16) = 0 mod 2, so the product is zero and must not raise
    assert (big * big).is_zero()
    with pytest.raises(CapacityError):
        # C(17, 16) = 17 = 1 mod 2: a genuinely nonzero term beyond the cap
        _ = big * alg.monomial((0,), (1,))

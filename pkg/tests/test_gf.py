import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from introspect import gf
from introspect.gf import FieldError, make_field, gf2, self_dual_basis


def poly_mul_mod_gf2(a, b, mod, t):
    # independent carry-less multiply, reduction by long division
    r = 0
    for i in range(t):
        if (b >> i) & 1:
            r ^= a << i
    for i in range(2 * t - 2, t - 1, -1):
        if (r >> i) & 1:
            r ^= mod << (i - t)
    return r


@pytest.mark.parametrize("t", range(1, 17))
def test_builtin_moduli_irreducible(t):
    mod = gf.BUILTIN_MODULI[t]
    coeffs = [(mod >> i) & 1 for i in range(t + 1)]
    assert gf.is_irreducible(coeffs, 2)


def test_make_field_examples():
    assert gf2(1).q == 2
    f4 = make_field(2, 2, [1, 1, 1])
    assert f4.q == 4 and f4.modulus == (1, 1, 1)
    with pytest.raises(FieldError):
        make_field(2, 2, [1, 0, 1])
    with pytest.raises(FieldError):
        make_field(4, 1)
    with pytest.raises(FieldError):
        make_field(2, 17)


def test_general_p_search_smallest_irreducible():
    f9 = make_field(3, 2)
    assert gf.is_irreducible(f9.modulus, 3)
    # x^2 + 1 is the lexicographically first irreducible quadratic over GF(3)
    assert f9.modulus == (1, 0, 1)


def test_gf4_examples():
    f = gf2(2)
    w = 2
    assert f.mul(w, w) == 3
    assert f.inv(w) == 3
    assert f.add(w, 0) == w
    assert [f.trace(a) for a in range(4)] == [0, 0, 1, 1]
    assert f.neg(3) == 3


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_tables_match_bitwise_multiplication(t):
    f = gf2(t)
    mod = gf.BUILTIN_MODULI[t]
    for a in range(f.q):
        for b in range(f.q):
            assert f.mul(a, b) == poly_mul_mod_gf2(a, b, mod, t)


@pytest.mark.parametrize("t", [2, 3, 4])
def test_field_axioms_exhaustive(t):
    f = gf2(t)
    q = f.q
    a, b = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    assert np.array_equal(f.mul_arr(a, b), f.mul_arr(b, a))
    assert np.array_equal(f.add_arr(a, b), f.add_arr(b, a))
    for c in range(q):
        lhs = f.mul_arr(a, f.add_arr(b, c))
        rhs = f.add_arr(f.mul_arr(a, b), f.mul_arr(a, c))
        assert np.array_equal(lhs, rhs)
        assert np.array_equal(f.mul_arr(f.mul_arr(a, b), c), f.mul_arr(a, f.mul_arr(b, c)))
    for x in range(1, q):
        assert f.mul(x, f.inv(x)) == 1
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


def test_field_axioms_random_large():
    f = gf2(16)
    rng = np.random.default_rng(0)
    a, b, c = rng.integers(0, f.q, size=(3, 10_000))
    assert np.array_equal(f.mul_arr(a, f.add_arr(b, c)), f.add_arr(f.mul_arr(a, b), f.mul_arr(a, c)))
    assert np.array_equal(f.mul_arr(f.mul_arr(a, b), c), f.mul_arr(a, f.mul_arr(b, c)))
    nz = a[a != 0]
    assert np.all(f.mul_arr(nz, f.inv_arr(nz)) == 1)
    for x, y in zip(a[:50], b[:50]):
        assert f.mul(int(x), int(y)) == poly_mul_mod_gf2(int(x), int(y), gf.BUILTIN_MODULI[16], 16)


def test_general_p_axioms():
    f = make_field(3, 2)
    for a in range(9):
        assert f.add(a, f.neg(a)) == 0
        if a:
            assert f.mul(a, f.inv(a)) == 1
        for b in range(9):
            assert f.trace(f.add(a, b)) == (f.trace(a) + f.trace(b)) % 3


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_trace_linear_exhaustive(t):
    f = gf2(t)
    for a in range(f.q):
        for b in range(f.q):
            assert f.trace(f.add(a, b)) == f.trace(a) ^ f.trace(b)


def test_trace_prime_field_identity():
    f = gf2(1)
    assert [f.trace(0), f.trace(1)] == [0, 1]


@pytest.mark.parametrize("t", range(1, 9))
def test_self_dual_basis_gram_identity(t):
    b = self_dual_basis(gf2(t))
    assert np.array_equal(b.gram(), np.eye(t, dtype=np.int64))


def test_self_dual_basis_examples():
    assert self_dual_basis(gf2(2)).elements == (2, 3)
    assert self_dual_basis(gf2(1)).elements == (1,)
    with pytest.raises(FieldError):
        self_dual_basis(make_field(3, 2))


def test_self_dual_reconstruction_gf8():
    b = self_dual_basis(gf2(3))
    for u in range(8):
        assert b.combine(b.coords(u)) == u


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_character_sum(t):
    f = gf2(t)
    for a in range(f.q):
        expect = 1.0 if a == 0 else 0.0
        assert abs(gf.character_sum(f, a) - expect) <= 1e-12


def test_character_sum_general_p():
    f = make_field(3, 2)
    for a in range(9):
        assert abs(gf.character_sum(f, a) - (1.0 if a == 0 else 0.0)) <= 1e-12


def test_character_sum_subspace():
    f = gf2(1)
    assert abs(gf.character_sum_subspace(f, [[1, 0]], [0, 1]) - 1) <= 1e-12
    assert abs(gf.character_sum_subspace(f, [[1, 0]], [1, 1])) <= 1e-12
    f4 = gf2(2)
    vecs = [[1, 2, 0]]
    for a in itertools.product(range(4), repeat=3):
        # the trace form is nondegenerate, so a is orthogonal to span(v) iff v.a = 0
        perp = f4.dot(vecs[0], a) == 0
        val = gf.character_sum_subspace(f4, vecs, a)
        assert abs(val - (1.0 if perp else 0.0)) <= 1e-12


def test_serialization_roundtrip():
    for t in (1, 4, 8, 16):
        f = gf2(t)
        assert gf.parse_field(f.to_string()) is f
    f = gf2(8)
    assert f.to_string() == "GF(2^8)/11b"
    assert f.element_from_hex(f.element_to_hex(0xA7)) == 0xA7
    with pytest.raises(FieldError):
        f.element_from_hex("1ff")


def test_field_element_wrapper():
    f = gf2(2)
    w = f(2)
    assert w * w == f(3)
    assert w.inv() == f(3)
    assert w + 0 == w
    assert -w == w
    assert (w ** 3) == f(1)
    assert w.trace() == 1
    assert w.coeffs() == [0, 1]
    with pytest.raises(FieldError):
        w + gf2(3)(1)
    with pytest.raises(FieldError):
        f(4)


def test_linear_algebra():
    f = gf2(2)
    M = [[1, 2], [2, 1]]
    inv = gf.inverse(f, M)
    assert np.array_equal(f.matmul(M, inv), np.eye(2, dtype=np.int64))
    x = gf.solve(f, M, [1, 0])
    assert np.array_equal(f.matmul(M, x.reshape(2, 1)).ravel(), [1, 0])
    assert gf.rank(f, [[1, 2], [2, 3]]) == 1
    assert gf.solve(f, [[1, 2], [2, 3]], [1, 0]) is None
    with pytest.raises(FieldError):
        gf.inverse(f, [[1, 2], [2, 3]])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.data())
def test_prop_pow_and_inverse(t, data):
    f = gf2(t)
    a = data.draw(st.integers(1, f.q - 1))
    e = data.draw(st.integers(-50, 50))
    assert f.mul(f.pow(a, e), f.pow(a, -e)) == 1
    assert f.pow(a, f.q - 1) == 1
    assert f.pow(a, 2) == f.mul(a, a)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 16), st.data())
def test_prop_frobenius_additive(t, data):
    f = gf2(t)
    a = data.draw(st.integers(0, f.q - 1))
    b = data.draw(st.integers(0, f.q - 1))
    assert f.pow(f.add(a, b), 2) == f.add(f.pow(a, 2), f.pow(b, 2))
    assert f.trace(f.pow(a, 2)) == f.trace(a)

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from introspect.gf import gf2
from introspect.poly import (
    AffineSubspace, LdParams, MultiPoly, PolyError, ProductPoly, agreement_fraction, grid_points,
    indicator, indicator_nd, interpolate_grid, ld_encode, monomials, product_decompose,
    subcube_decompose, surfaces, telescoping_decompose, zero_combination, zero_poly,
)

F2, F4, F8, F16 = gf2(1), gf2(2), gf2(3), gf2(4)


def random_poly(field, arity, degree, rng, density=0.6):
    terms = {}
    for e in monomials(arity, degree):
        if rng.random() < density:
            terms[e] = int(rng.integers(0, field.q))
    return MultiPoly(field, arity, terms)


def brute_eval(f, x):
    # independent evaluator using repeated multiplication only
    F = f.field
    acc = 0
    for e, c in f.terms.items():
        v = c
        for xi, d in zip(x, e):
            for _ in range(d):
                v = F.mul(v, xi)
        acc = F.add(acc, v)
    return acc


def test_eval_examples():
    x1x2 = MultiPoly(F4, 2, {(1, 1): 1})
    assert x1x2.eval([2, 2]) == 3
    assert MultiPoly.const(F4, 2, 1).eval([3, 1]) == 1
    assert MultiPoly.zero(F4, 2).eval([3, 1]) == 0
    with pytest.raises(PolyError):
        x1x2.eval([1])


def test_eval_many_matches_eval():
    rng = np.random.default_rng(1)
    for field in (F2, F4, F16):
        f = random_poly(field, 3, 4, rng)
        pts = grid_points(field, 3)
        vals = f.eval_many(pts)
        for x, v in zip(pts[::7], vals[::7]):
            assert v == brute_eval(f, x)


def test_arithmetic_consistent_with_evaluation():
    rng = np.random.default_rng(2)
    f, g = random_poly(F4, 2, 3, rng), random_poly(F4, 2, 2, rng)
    pts = grid_points(F4, 2)
    fv, gv = f.eval_many(pts), g.eval_many(pts)
    assert np.array_equal((f * g).eval_many(pts), F4.mul_arr(fv, gv))
    assert np.array_equal((f + g).eval_many(pts), F4.add_arr(fv, gv))
    assert np.array_equal((f - g).eval_many(pts), F4.sub_arr(fv, gv))
    assert np.array_equal((f ** 3).eval_many(pts), F4.mul_arr(fv, F4.mul_arr(fv, fv)))
    assert (f * g).degree() == f.degree() + g.degree()


def test_normalize_preserves_function():
    f = MultiPoly(F4, 2, {(5, 0): 1, (4, 7): 2, (1, 1): 3})
    n = f.normalize()
    assert max(max(e) for e in n.terms) < 4
    pts = grid_points(F4, 2)
    assert np.array_equal(f.eval_many(pts), n.eval_many(pts))


def test_restrict_examples():
    f = MultiPoly(F2, 2, {(1, 0): 1, (0, 1): 1})
    line = AffineSubspace(F2, [0, 0], [[1, 1]])
    assert f.restrict(line).is_zero()
    rng = np.random.default_rng(3)
    g = random_poly(F4, 3, 3, rng)
    pt = AffineSubspace(F4, [1, 2, 3])
    r = g.restrict(pt)
    assert r.arity == 0 and r.eval([]) == g.eval([1, 2, 3])
    with pytest.raises(PolyError):
        g.restrict(AffineSubspace(F4, [0, 0], [[1, 0]]))


def test_restrict_degree_sweep():
    rng = np.random.default_rng(4)
    for _ in range(100):
        f = random_poly(F4, 3, int(rng.integers(0, 4)), rng)
        k = int(rng.integers(1, 3))
        s = AffineSubspace(F4, rng.integers(0, 4, 3), rng.integers(0, 4, (k, 3)))
        r = f.restrict(s, "symbolic")
        assert r.degree() <= f.degree()
        assert r.normalize() == f.restrict(s, "interp")


def test_restrict_commutes_with_eval_exhaustive():
    rng = np.random.default_rng(5)
    for field in (F2, F4, F16):
        f = random_poly(field, 3, 3, rng)
        for k in (1, 2):
            s = AffineSubspace(field, rng.integers(0, field.q, 3), rng.integers(0, field.q, (k, 3)))
            r = f.restrict(s)
            lam = grid_points(field, s.dim)
            assert np.array_equal(r.eval_many(lam), f.eval_many(s.points()))
            raw = f.restrict_raw(s.intercept, s.raw)
            for lv in itertools.product(range(field.q), repeat=len(s.raw)):
                x = s.intercept.copy()
                for c, row in zip(lv, s.raw):
                    x = field.add_arr(x, field.mul_arr(row, c))
                assert raw.eval(list(lv)) == f.eval(x)


def test_affine_subspace_canonical_form():
    rng = np.random.default_rng(6)
    for _ in range(30):
        k = int(rng.integers(0, 3))
        s = AffineSubspace(F4, rng.integers(0, 4, 3), rng.integers(0, 4, (k, 3)))
        pts = s.points()
        assert len({tuple(p) for p in pts}) == 4 ** s.dim
        assert tuple(s.intercept) == min(tuple(int(v) for v in p) for p in pts)
        for p in pts:
            assert s.contains(p)
            assert np.array_equal(s.point(s.coords(p)), p)
            assert s.parallel_through(p) == s
        assert AffineSubspace.from_wire(F4, s.wire()) == s


def test_dependent_directions_dropped():
    s = AffineSubspace(F4, [1, 1], [[1, 2], [2, 3], [0, 0]])
    assert s.dim == 1 and s.raw.shape == (3, 2)


def test_surfaces_partition():
    for dirs in ([[1, 0]], [[1, 1]], [[1, 0], [0, 1]], []):
        ss = surfaces(F2, dirs, 2)
        seen = sorted(tuple(p) for s in ss for p in s.points())
        assert seen == sorted(itertools.product(range(2), repeat=2))
    assert len(surfaces(F4, [[1, 2, 3]], 3)) == 16


def test_indicator_examples():
    ind = indicator(F4, [0, 1], 1)
    assert ind == MultiPoly(F4, 1, {(1,): 1})
    H = [0, 2, 3]
    for x in H:
        p = indicator(F4, H, x)
        assert p.degree() == len(H) - 1
        assert [p.eval([y]) for y in H] == [int(y == x) for y in H]
    with pytest.raises(PolyError):
        indicator(F4, [0, 1], 2)
    p = indicator_nd(F4, [0, 1], [1, 0])
    assert p.degree() == 2
    for y in itertools.product([0, 1], repeat=2):
        assert p.eval(y) == int(y == (1, 0))


def test_zero_poly():
    z = zero_poly(F4, [0, 1])
    assert z == MultiPoly(F4, 1, {(2,): 1, (1,): 1})
    assert [z.eval([c]) == 0 for c in range(4)] == [True, True, False, False]


def test_ld_params_and_maps():
    p = LdParams(4, 2, 4, 2)
    assert p.exact and p.d == 2 and p.H == (0, 2)
    for i in range(4):
        assert p.nu(p.pi(i)) == tuple(p.bits(i))
        assert p.nu_index(p.pi(i)) == i
    assert p.sigma([0, 0]) == (0, 0)
    for mp in p.mu_polys:
        assert mp.degree() <= p.h - 1
    with pytest.raises(PolyError):
        LdParams(5, 2, 4, 2)
    with pytest.raises(PolyError):
        LdParams(4, 8, 4, 1)


def test_pi_timing():
    import time
    p = LdParams(4, 2, 4, 2)
    t0 = time.perf_counter()
    for i in range(1000):
        p.pi(i % 4)
    assert (time.perf_counter() - t0) / 1000 < 1e-3


@pytest.mark.parametrize("n,h,q,m", [(4, 2, 4, 2), (16, 4, 16, 2), (8, 2, 8, 3), (16, 2, 4, 4), (9, 4, 4, 2)])
def test_ld_encode_exhaustive(n, h, q, m):
    p = LdParams(n, h, q, m)
    rng = np.random.default_rng(n + q)
    for _ in range(5):
        a = rng.integers(0, q, n)
        g = ld_encode(a, p)
        assert g.degree() <= p.d
        assert [g.eval(p.pi(i)) for i in range(n)] == list(a)
        # compare with the naive sum of indicators
        naive = MultiPoly.zero(p.field, m)
        for i, v in enumerate(a):
            naive = naive + indicator_nd(p.field, p.H, p.pi(i)).scale(int(v))
        assert naive == g
    assert ld_encode([0] * n, p).is_zero()


def test_schwartz_zippel_pairs():
    rng = np.random.default_rng(7)
    for field in (F4, F8):
        for d in (1, 2, 3):
            fam = [random_poly(field, 2, d, rng) for _ in range(6)]
            for f, g in itertools.combinations(fam, 2):
                if f != g:
                    assert agreement_fraction(f, g) <= d / field.q


def test_interpolation_roundtrip():
    rng = np.random.default_rng(8)
    vals = rng.integers(0, 4, (4, 4))
    p = interpolate_grid(F4, vals)
    assert np.array_equal(p.eval_many(grid_points(F4, 2)).reshape(4, 4), vals)


def test_subcube_decompose_examples():
    f = MultiPoly(F4, 1, {(2,): 1, (1,): 1}).embed(2, [0])
    dec = subcube_decompose(f, [[0, 1], [0, 1]])
    assert dec.ok
    assert dec.coeffs[0] == MultiPoly.const(F4, 2, 1)
    assert dec.coeffs[1].is_zero()
    one = MultiPoly.const(F4, 2, 1)
    dec = subcube_decompose(one, [[0, 1], [0, 1]])
    assert not dec.ok and dec.witness in set(itertools.product([0, 1], repeat=2))


def test_subcube_roundtrip_random():
    rng = np.random.default_rng(9)
    cube = [[0, 1], [0, 2]]
    zs = [zero_poly(F4, H, 2, i) for i, H in enumerate(cube)]
    for _ in range(100):
        cs = [random_poly(F4, 2, 2, rng) for _ in range(2)]
        f = zs[0] * cs[0] + zs[1] * cs[1]
        dec = subcube_decompose(f, cube)
        assert dec.ok
        assert zs[0] * dec.coeffs[0] + zs[1] * dec.coeffs[1] == f
        for i in range(2):
            assert dec.coeffs[i].degree() <= f.degree() - len(cube[i])
        ev = zero_combination(F4, cube, dec.coeffs)
        for x in grid_points(F4, 2)[::3]:
            assert ev(x) == f.eval(x)


def test_product_decompose_matches_expanded():
    rng = np.random.default_rng(10)
    cube = [[0, 2]] * 4
    a = random_poly(F4, 2, 2, rng).embed(4, [0, 1])
    b = random_poly(F4, 2, 2, rng).embed(4, [2, 3])
    P = ProductPoly([a, b])
    coeffs, reduced = product_decompose(P, cube)
    R = reduced[0] * reduced[1]
    zs = [zero_poly(F4, H, 4, i) for i, H in enumerate(cube)]
    total = R
    for z, c in zip(zs, coeffs):
        cc = c.expand() if isinstance(c, ProductPoly) else c
        total = total + z * cc
    assert total == P.expand()
    s = AffineSubspace(F4, [1, 2, 3, 0], [[1, 0, 1, 2], [0, 1, 1, 3]])
    assert P.restrict(s) == P.expand().restrict(s)


def test_serialization_roundtrip():
    rng = np.random.default_rng(11)
    f = random_poly(F16, 2, 3, rng)
    data = f.serialize(3)
    assert len(data["coeffs"]) == len(monomials(2, 3)) == 10
    assert MultiPoly.deserialize(F16, data) == f
    assert monomials(2, 1) == ((0, 0), (1, 0), (0, 1))
    with pytest.raises(PolyError):
        f.serialize(1)


def test_divmod_univariate():
    rng = np.random.default_rng(12)
    f = random_poly(F8, 2, 5, rng)
    div = [3, 1, 1]
    quo, rem = f.divmod_univariate(div, 1)
    d = MultiPoly.univariate(F8, div, 2, 1)
    assert quo * d + rem == f
    assert rem.degree_in(1) < 2


def test_telescoping_residual_reduced():
    rng = np.random.default_rng(13)
    f = random_poly(F4, 3, 4, rng)
    cube = [[0, 1], [0, 2], [1, 3]]
    cs, r = telescoping_decompose(f, cube)
    for i in range(3):
        assert r.degree_in(i) < 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=1, max_size=16), st.sampled_from([(16, 4, 16, 2), (16, 2, 16, 4)]))
def test_prop_ld_encode_interpolates(a, prm):
    p = LdParams(*prm)
    g = ld_encode(a, p)
    assert all(g.eval(p.pi(i)) == v for i, v in enumerate(a))
    assert g.degree() <= p.d


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_prop_restrict_eval(data):
    seed = data.draw(st.integers(0, 10 ** 6))
    rng = np.random.default_rng(seed)
    f = random_poly(F4, 3, 3, rng)
    s = AffineSubspace(F4, rng.integers(0, 4, 3), rng.integers(0, 4, (2, 3)))
    lam = rng.integers(0, 4, s.dim)
    assert f.restrict(s).eval(list(lam)) == f.eval(s.point(lam))

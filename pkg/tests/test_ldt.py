import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from introspect.games import exact_value, mc_value
from introspect.gf import field_of_order
from introspect.ldt import (
    FunctionOracle, HonestOracle, LdtError, SerializedOracle, SurfaceTestConfig, combine_poly,
    combine_values, exactly_linear, lift_sample, linear_restriction_fraction, oracle_strategy, proj,
    random_subspace_containing, restrict_y, run_subset_tester, run_surface_vs_point, sample_surface_point,
    subset_tester_game, subspaces_containing, surface_vs_point_game, tv_from_uniform, two_step_distribution,
)
from introspect.poly import AffineSubspace, MultiPoly, agreement_fraction, grid_points

F4 = field_of_order(4)
F2 = field_of_order(2)


def g_poly(f, m=2):
    x = [MultiPoly.var(f, m, i) for i in range(m)]
    return x[0] * x[1] + x[0] * x[0] + MultiPoly.const(f, m, 3 % f.q)


def test_config_validation():
    with pytest.raises(LdtError):
        SurfaceTestConfig(2, 1, 4, k=0)
    assert SurfaceTestConfig(2, 1, 4).field.q == 4


def test_sample_point_on_surface():
    cfg = SurfaceTestConfig(3, 2, 4, 2)
    rng = np.random.default_rng(0)
    for _ in range(200):
        v, s, u = sample_surface_point(cfg, rng)
        assert s.contains(u) and v.shape == (2, 3)


def test_point_marginal_uniform_exact():
    g = surface_vs_point_game(SurfaceTestConfig(2, 1, 2, 1))
    marg = {}
    for e in g.entries:
        marg[e.x1[1]] = marg.get(e.x1[1], 0) + e.prob
    assert len(marg) == 4 and all(abs(p - 0.25) < 1e-12 for p in marg.values())


def test_low_dimension_frequency():
    cfg = SurfaceTestConfig(3, 1, 4, 2)
    rng = np.random.default_rng(1)
    low = sum(sample_surface_point(cfg, rng)[1].dim < 2 for _ in range(100_000)) / 100_000
    assert low <= 4 ** 2 / 4 ** 3


def test_honest_surface_point_exact_and_sampled():
    cfg = SurfaceTestConfig(2, 2, 4, 1)
    o = HonestOracle([g_poly(F4)])
    assert exact_value(surface_vs_point_game(cfg), oracle_strategy(o)) == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    for _ in range(50):
        ok, rec = run_surface_vs_point(cfg, o, o, rng)
        assert ok and rec["verdict"]
        json.dumps(rec)


def test_bob_off_by_one_rejected():
    cfg = SurfaceTestConfig(2, 2, 4, 1)
    g = g_poly(F4)
    o = HonestOracle([g])
    bad = FunctionOracle(point=lambda u: [F4.add(g.eval(list(u)), 1)])
    assert exact_value(surface_vs_point_game(cfg), oracle_strategy(o, bad)) == 0.0


def test_bob_other_codeword_rate_is_agreement():
    cfg = SurfaceTestConfig(2, 2, 4, 1)
    g = g_poly(F4)
    x = MultiPoly.var(F4, 2, 0)
    g2 = g + x * MultiPoly.var(F4, 2, 1) * MultiPoly.const(F4, 2, 2) + MultiPoly.const(F4, 2, 1)
    val = exact_value(surface_vs_point_game(cfg), oracle_strategy(HonestOracle([g]), HonestOracle([g2])))
    assert val == pytest.approx(agreement_fraction(g, g2))
    assert val < 1


def test_malformed_answer_rejected_with_diagnostic():
    cfg = SurfaceTestConfig(2, 1, 4, 1)
    o = HonestOracle([g_poly(F4)])
    bad = FunctionOracle(surface=lambda s, v: [MultiPoly.zero(F4, 5)])
    ok, rec = run_surface_vs_point(cfg, bad, o, np.random.default_rng(0))
    assert not ok and "arity" in rec["diagnostic"]


def test_simultaneous_honest_and_corrupted():
    cfg = SurfaceTestConfig(2, 2, 4, 1, ell=2)
    x = [MultiPoly.var(F4, 2, i) for i in range(2)]
    gs = [g_poly(F4), x[0] + x[1]]
    honest = HonestOracle(gs)
    game = surface_vs_point_game(cfg)
    assert exact_value(game, oracle_strategy(honest)) == pytest.approx(1.0)
    g2 = gs[1] + x[0] * x[0]
    bad = HonestOracle([gs[0], g2])
    assert exact_value(game, oracle_strategy(honest, bad)) == pytest.approx(agreement_fraction(gs[1], g2))


def test_serialized_oracle_passthrough():
    cfg = SurfaceTestConfig(2, 2, 4, 1)
    o = SerializedOracle(HonestOracle([g_poly(F4)]))
    assert exact_value(surface_vs_point_game(cfg), oracle_strategy(o)) == pytest.approx(1.0)


def test_combine():
    g = g_poly(F4)
    c = combine_poly([g])
    for x in range(4):
        for y in grid_points(F4, 2):
            assert c.eval([x, *y]) == F4.mul(x, g.eval(list(y)))
    assert exactly_linear(c, 1)
    assert combine_values(F4, [2, 3], [1, 1]) == F4.add(2, 3)


def test_proj_dimension():
    rng = np.random.default_rng(3)
    for _ in range(30):
        d = rng.integers(0, 4, (1, 4))
        s = AffineSubspace(F4, rng.integers(0, 4, 4), d)
        assert proj(s, 1).dim <= 1
        t = lift_sample(F4, s, 1, 2, rng)
        assert t.dim == 2 and all(t.contains(p) for p in proj(s, 1).points())


def test_exactly_linear_restrictions():
    x = [MultiPoly.var(F4, 3, i) for i in range(3)]
    f = x[0] * x[1]
    assert not exactly_linear(f, 2)
    assert linear_restriction_fraction(f, 2) <= 2 / 4
    h = x[0] + x[2]
    assert not exactly_linear(h, 2)
    assert exactly_linear(restrict_y(h, [0], 2), 2)
    assert linear_restriction_fraction(h, 2) == pytest.approx(0.25)


def test_subspaces_containing_counts():
    # Gaussian binomial: lines through 0 in F_4^2 = 5; planes in F_2^3 containing a fixed nonzero point = 3
    assert len(subspaces_containing(F4, [], 1, 2)) == 5
    assert len(subspaces_containing(F2, [(1, 0, 0)], 2, 3)) == 3
    with pytest.raises(LdtError):
        subspaces_containing(F2, [(1, 0, 0), (0, 1, 0)], 1, 3)
    s = random_subspace_containing(F4, [(1, 2, 3)], 2, 3, np.random.default_rng(0))
    assert s.dim == 2 and s.contains([1, 2, 3]) and s.contains([0, 0, 0])


def test_subset_tester_honest_exact():
    g = g_poly(F4)
    game = subset_tester_game(2, 4, 2, [(1, 2)], k=1)
    assert game.enumerable
    assert exact_value(game, oracle_strategy(HonestOracle([g]))) == pytest.approx(1.0)
    rng = np.random.default_rng(4)
    for _ in range(20):
        ok, rec = run_subset_tester(2, 4, 2, [(1, 2)], (HonestOracle([g]), HonestOracle([g])), rng)
        assert ok


def test_subset_tester_other_codeword_on_F():
    g = g_poly(F4)
    g2 = g + MultiPoly.const(F4, 2, 1)
    o = HonestOracle([g])
    liar = FunctionOracle(surface=o.surface, point=o.point, subset=lambda F: [g2.eval(list(x)) for x in F])
    game = subset_tester_game(2, 4, 2, [(1, 2)], k=1)
    val = exact_value(game, oracle_strategy(liar))
    # only the subspace-vs-F sub-branch (weight 1/4) catches it, always
    assert val == pytest.approx(0.75)


def test_subset_tester_rejects_oversized_F():
    with pytest.raises(LdtError):
        subset_tester_game(2, 4, 1, [(0, 1), (1, 0)], k=1)


@pytest.mark.parametrize("q,m,k", [(q, m, k) for q in (2, 4) for m in (2, 3) for k in (1, 2)])
def test_two_step_tv_within_one_over_q(q, m, k):
    f = field_of_order(q)
    F = [tuple([1] + [0] * (m - 1))][:k]
    tv = tv_from_uniform(two_step_distribution(f, F, k, m), f, m)
    assert tv <= 1 / q + 1e-12
    if k + 1 <= m:
        ell = 1
        assert tv == pytest.approx(float(q ** ell * (Fraction(1, q ** (k + 1)) - Fraction(1, q ** m))))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_prop_honest_random_poly_passes(seed):
    rng = np.random.default_rng(seed)
    coeffs = {tuple(e): int(rng.integers(0, 4)) for e in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)]}
    g = MultiPoly(F4, 2, coeffs)
    cfg = SurfaceTestConfig(2, 2, 4, 2)
    o = HonestOracle([g])
    r = mc_value(surface_vs_point_game(cfg, max_entries=0), oracle_strategy(o), 50, seed=seed)
    assert r.rejections == 0

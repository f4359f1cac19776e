import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from introspect.games import GameError, branch_values, exact_value, mc_value, sampler_distribution
from introspect.gf import field_of_order
from introspect.ldt import SurfaceTestConfig, surface_vs_point_game
from introspect.poly import AffineSubspace, MultiPoly, PolyBank, agreement_fraction
from introspect.protocols import (
    Aux, PauliBasisConfig, ProtocolError, RegisterProver, ZReadCheater, compile_full, compile_k_to_semi,
    compiled_prover, cross_check_question_law, data_hiding_cheater, data_hiding_cheater_value, data_hiding_game,
    formula_game, formula_rejection_of, global_poly_prover, intersecting_lines_game, intro_cross_check,
    intro_hide_game, intro_intersect_game, intro_low_degree, intro_neexp_game, intro_surface_sampler,
    ld_pauli_subgame, lift_answer, lift_question, lines_strategy, neexp_prover, neexp_registers,
    partial_data_hiding_game, partial_hiding_cheater_value, pauli_basis_game, pauli_basis_strategy,
    unlift_answer, unwrap_question,
)
from introspect.qsim import total_variation
from introspect.sat import toy_instance, toy_params

F2 = field_of_order(2)
REGS = [(2, 2), (2, 2)]
ROLES = ((0,), (1,))


def g2():
    x = [MultiPoly.var(F2, 2, i) for i in range(2)]
    return x[0] * x[1] + MultiPoly.const(F2, 2, 1)


@pytest.fixture(scope="module")
def cfg():
    return PauliBasisConfig(2, 2, desk=True)


def test_basis_config_params():
    c = PauliBasisConfig(2, 2, desk=True)
    assert (c.h, c.m, c.d) == (2, 2, 2)
    assert len(c.waived) == 2
    assert PauliBasisConfig(4, 16, desk=True).h == 4
    assert PauliBasisConfig(2, 8, desk=True).h == 4
    with pytest.raises(ProtocolError):
        PauliBasisConfig(2, 2)
    with pytest.raises(ProtocolError):
        PauliBasisConfig(1, 4, desk=True)
    with pytest.raises(ProtocolError):
        PauliBasisConfig(2, 6, desk=True)


def test_basis_config_admissible_without_waiver():
    c = PauliBasisConfig(2, 256)
    assert c.waived == [] and c.m == 2 and c.d == 30


def test_ld_pauli_subgame_honest(cfg):
    g = ld_pauli_subgame(cfg)
    assert len(g.entries) == 256
    assert exact_value(g, pauli_basis_strategy(cfg)) == pytest.approx(1.0, abs=1e-9)


def test_pauli_basis_game_values(cfg):
    g = pauli_basis_game(cfg)
    assert exact_value(g, pauli_basis_strategy(cfg)) == pytest.approx(1.0, abs=1e-9)
    assert exact_value(g, pauli_basis_strategy(cfg, "wrong-basis")) == pytest.approx(0.9375, abs=1e-9)
    shifted = exact_value(g, pauli_basis_strategy(cfg, "shift", shift=[1, 0]))
    agree = agreement_fraction(cfg.encode([0, 0]), cfg.encode([1, 0]))
    assert shifted == pytest.approx(0.75, abs=1e-9)
    assert shifted < 1 and agree < 1


def test_pauli_basis_sampler(cfg):
    r = mc_value(pauli_basis_game(cfg), pauli_basis_strategy(cfg), 500, 4)
    assert r.rejections == 0


def test_data_hiding_honest_and_cheater():
    g = data_hiding_game((("H",), "x"))
    assert len(g.entries) == 4
    assert exact_value(g, RegisterProver([(2, 2)]).strategy()) == pytest.approx(1.0, abs=1e-12)
    assert exact_value(g, data_hiding_cheater([(2, 2)])) == pytest.approx(0.625, abs=1e-9)
    assert data_hiding_cheater_value(2, 2) == 0.625
    g = data_hiding_game((("Z", "H"), "x"))
    assert exact_value(g, data_hiding_cheater([(1, 2), (1, 2)])) == pytest.approx(0.75, abs=1e-9)


def test_data_hiding_rejects_bad_question():
    with pytest.raises(ProtocolError):
        data_hiding_game((("Z",), "x"))
    with pytest.raises(ProtocolError):
        data_hiding_game("x")


@pytest.mark.parametrize("S,k", [([[[1, 0]], [[0, 1]], [[1, 1]]], 1), ([[[1, 0], [0, 1]]], 2)])
def test_partial_data_hiding(S, k):
    g = partial_data_hiding_game(S, "x", 2, 2)
    assert exact_value(g, RegisterProver([(2, 2)]).strategy()) == pytest.approx(1.0, abs=1e-9)
    cheat = exact_value(g, ZReadCheater([(2, 2)]).measurement_strategy())
    assert cheat == pytest.approx(partial_hiding_cheater_value(k, 2), abs=1e-9)


def test_partial_data_hiding_validation():
    with pytest.raises(ProtocolError):
        partial_data_hiding_game([[[1, 0], [1, 0]]], "x", 2, 2)
    with pytest.raises(ProtocolError):
        partial_data_hiding_game([[[1, 0, 0]]], "x", 2, 2)
    with pytest.raises(ProtocolError):
        partial_data_hiding_game([], "x", 2, 2)


def test_intro_games_honest_exact():
    pr = global_poly_prover(REGS, g2())
    for g in (intro_hide_game(REGS, ROLES, "x"), intro_surface_sampler(REGS, ROLES, 2),
              intro_cross_check(REGS, ROLES, 2), intro_low_degree(REGS, ROLES, 2)):
        assert exact_value(g, pr.strategy()) == pytest.approx(1.0, abs=1e-9), g.name


def test_lying_surface_cheater():
    g = intro_surface_sampler(REGS, ROLES, 2)
    liar = global_poly_prover(REGS, g2(), surface_shift=[1, 0]).strategy()
    assert exact_value(g, liar) == pytest.approx(13 / 16, abs=1e-9)
    bv = branch_values(g, liar)
    assert bv["intro-surface/t1"] == pytest.approx(0.25, abs=1e-9)
    assert all(bv[f"intro-surface/t{i}"] == pytest.approx(1.0) for i in (2, 3, 4))


def test_cross_check_question_law_matches_classical():
    g = intro_cross_check(REGS, ROLES, 2)
    law = cross_check_question_law(g, global_poly_prover(REGS, g2()).strategy())
    ref = surface_vs_point_game(SurfaceTestConfig(2, 2, 2, 1)).question_distribution()
    assert total_variation(law, ref) <= 1e-9


def test_sampler_matches_statevector_on_intro_games():
    strat = global_poly_prover(REGS, g2()).strategy()
    for g in (intro_cross_check(REGS, ROLES, 2), intro_hide_game(REGS, ROLES, "x")):
        for e in g.entries:
            exact = {(a, b): p for p, a, b in strat.answer_distribution(e.x0, e.x1)}
            assert total_variation(exact, sampler_distribution(strat, e.x0, e.x1)) <= 1e-9


def test_layout_mismatch():
    with pytest.raises(ProtocolError):
        intro_hide_game([(2, 2), (1, 2)], ROLES, "x")
    with pytest.raises(ProtocolError):
        intro_hide_game([(2, 2), (2, 4)], ROLES, "x")


def test_malformed_answers_reject():
    g = intro_cross_check(REGS, ROLES, 2)
    for e in g.entries:
        assert e.pred(None, "junk") is False
        assert e.pred(((None, None), ("s", ())), ((None,), ())) is False


def test_intersecting_lines():
    g = intersecting_lines_game(2, 2, 2)
    assert len(g.entries) == 16
    f = g2()
    assert exact_value(g, lines_strategy(f)) == pytest.approx(1.0, abs=1e-12)
    other = f + MultiPoly.var(F2, 2, 0)
    assert exact_value(g, lines_strategy(f, other)) == pytest.approx(agreement_fraction(f, other), abs=1e-12)


def test_intro_intersect_honest():
    g = intro_intersect_game(REGS, (0, 1), 2)
    assert exact_value(g, global_poly_prover(REGS, g2()).strategy()) == pytest.approx(1.0, abs=1e-9)


def test_superregister_is_sampler_only():
    regs = [(1, 2), (1, 2), (2, 2)]
    pr = global_poly_prover(regs, g2())
    g = intro_cross_check(regs, ((0, 1), (2,)), 2)
    with pytest.raises(GameError):
        exact_value(g, pr.strategy())
    assert mc_value(g, pr.strategy(), 300, 2).rejections == 0


def test_lift_roundtrip():
    x = (("Z", "H"), Aux("point", (0,)))
    assert unwrap_question(lift_question(x)) == (("Z", "H"), x[1], 1)
    a = (((0, 1), None), (1,), None)
    assert unlift_answer(lift_answer(a)) == a


def test_compiled_toy_stack(cfg):
    g = compile_full(data_hiding_game((("H",), "x")), [cfg])
    assert exact_value(g, compiled_prover([(2, 2)], [cfg]).strategy()) == pytest.approx(1.0, abs=1e-9)
    assert exact_value(g, compiled_prover([(2, 2)], [cfg], swap_basis=True).strategy()) == pytest.approx(0.92578125, abs=1e-9)


def test_compile_format_mismatch(cfg):
    with pytest.raises(ProtocolError):
        compile_k_to_semi(data_hiding_game((("H",), "x")), 2)


@pytest.fixture(scope="module")
def sat_params():
    return toy_params(toy_instance("sat_toy"))


def test_neexp_layout(sat_params):
    assert neexp_registers(sat_params) == [(2, 16)] * 3 + [(5, 16), (11, 16), (11, 16)]
    g = intro_neexp_game(sat_params)
    assert sorted({e.branch.split("/")[0] for e in g.entries})[:2] == ["cons1", "cons2"]


def test_neexp_honest_sampler(sat_params):
    r = mc_value(intro_neexp_game(sat_params), neexp_prover(sat_params).strategy(), 1500, 11)
    assert r.rejections == 0


def test_neexp_refuses_unsat():
    with pytest.raises(ProtocolError, match="unsatisfiable"):
        neexp_prover(toy_params(toy_instance("unsat_toy")))


def test_unsat_formula_rejection_within_3_sigma():
    p = toy_params(toy_instance("unsat_toy"))
    a = [0] * p.inst.n_vars
    exact = float(formula_rejection_of(p, a))
    trials = 4000
    r = mc_value(formula_game(p, neexp_registers(p)), neexp_prover(p, a, honest_format=True).strategy(), trials, 5)
    sd = math.sqrt(exact * (1 - exact) / trials)
    assert exact > 0.5
    assert abs(r.rejections / trials - exact) <= 3 * sd


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 4, 3]))
def test_poly_bank_matches_eval(seed, q):
    f = field_of_order(q)
    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(4):
        terms = {tuple(int(v) for v in rng.integers(0, 3, 3)): int(rng.integers(0, q)) for _ in range(int(rng.integers(0, 5)))}
        polys.append(MultiPoly(f, 3, terms))
    bank = PolyBank(polys)
    x = [int(v) for v in rng.integers(0, q, 3)]
    assert bank.eval(x) == [p.eval(x) for p in polys]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_intro_cross_sampler_accepts(seed):
    pr = global_poly_prover(REGS, g2())
    assert mc_value(intro_low_degree(REGS, ROLES, 2), pr.strategy(), 60, seed).rejections == 0

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from introspect.games import (
    DeterministicStrategy, Entry, Game, GameError, MixedStrategy, OracleStrategy, Plan,
    QuantumStrategy, RecipeStrategy, RegisterParams, always_accept_game, branch_values,
    consistency_game, distance_diagnostics, exact_value, mc_value, mixture, oracularize,
    transcript_lines, validate_register_strategy,
)
from introspect.gf import gf2
from introspect.qsim import BipartiteState, Layout, Measurement, basis_measurement, epr, trivial_measurement

F2 = gf2(1)


def z_or_x_strategy(ba, bb):
    st_ = epr(F2, 1)
    return QuantumStrategy(st_, lambda x: basis_measurement(F2, ba, 1), lambda x: basis_measurement(F2, bb, 1))


def test_consistency_game_values():
    g = consistency_game(["q"])
    assert exact_value(g, z_or_x_strategy("Z", "Z")) == pytest.approx(1.0, abs=1e-12)
    assert exact_value(g, z_or_x_strategy("Z", "X")) == pytest.approx(0.5, abs=1e-12)
    assert exact_value(always_accept_game(), z_or_x_strategy("Z", "X")) == pytest.approx(1.0)


def test_mc_value():
    g = consistency_game(["q"])
    r = mc_value(g, z_or_x_strategy("Z", "X"), 100_000, seed=3)
    assert abs(r.estimate - 0.5) <= 3 * r.stderr
    r1 = mc_value(always_accept_game(), z_or_x_strategy("Z", "X"), 100, seed=3)
    assert r1.estimate == 1.0 and r1.stderr == 0.0
    r2 = mc_value(g, z_or_x_strategy("Z", "X"), 500, seed=3)
    r3 = mc_value(g, z_or_x_strategy("Z", "X"), 500, seed=3)
    assert r2.estimate == r3.estimate
    with pytest.raises(GameError):
        mc_value(g, z_or_x_strategy("Z", "X"), 0, seed=1)


def random_game(rng):
    qs = [0, 1]
    entries = []
    w = rng.random(4)
    w /= w.sum()
    for i, (x0, x1) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        table = rng.integers(0, 2, (2, 2)).astype(bool)
        entries.append(Entry(float(w[i]), x0, x1, lambda a, b, t=table: bool(t[a[0], b[0]])))
    return Game("random", entries)


def random_strategy(rng):
    Ms = {}
    for x in (0, 1):
        theta = rng.random() * np.pi
        v = np.array([np.cos(theta), np.sin(theta)])
        P = np.outer(v, v)
        Ms[x] = Measurement([(0,), (1,)], [P, np.eye(2) - P])
    return QuantumStrategy(epr(F2, 1), lambda x: Ms[x])


def test_mc_agrees_with_exact_on_random_games():
    rng = np.random.default_rng(0)
    for i in range(10):
        g, s = random_game(rng), random_strategy(rng)
        ex = exact_value(g, s)
        r = mc_value(g, s, 4000, seed=i)
        assert abs(r.estimate - ex) <= 3 * max(r.stderr, 1e-3)


def test_distance_diagnostics():
    st_ = epr(F2, 1)
    Z = basis_measurement(F2, "Z", 1)
    d = distance_diagnostics({0: Z}, {0: Z}, st_, [(1.0, 0)])
    assert d["sim_delta"] == pytest.approx(0.0, abs=1e-12) and d["approx_delta"] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(GameError):
        distance_diagnostics({0: Z}, {0: trivial_measurement(2)}, st_, [(1.0, 0)])


def test_mixture_and_branches():
    g = mixture("m", [(0.5, consistency_game(["q"]), "a"), (0.5, always_accept_game(), "b")])
    s = z_or_x_strategy("Z", "X")
    assert exact_value(g, s) == pytest.approx(0.75)
    bv = branch_values(g, s)
    assert bv["a/consistency"] == pytest.approx(0.5) and bv["b/trivial"] == pytest.approx(1.0)
    with pytest.raises(GameError):
        mixture("bad", [(0.4, g, "x")])


def zz_plan(x):
    return Plan([(0, ("Z",))], lambda o: o[0])


def test_recipe_strategy_matches_quantum():
    s = RecipeStrategy([(2, 2)], zz_plan)
    g = consistency_game(["q"])
    assert exact_value(g, s) == pytest.approx(1.0)
    r = mc_value(g, s, 1000, seed=1)
    assert r.rejections == 0


def test_oracularize_honest_and_trivial():
    base = RecipeStrategy([(1, 2), (1, 2)], lambda x: Plan([(0, ("Z",) if x == "z" else ("X",))], lambda o: o[0]))
    g = consistency_game(["z", "x"])
    og = oracularize(g)
    assert abs(sum(e.prob for e in og.entries) - 1) < 1e-12
    ostrat = OracleStrategy(base)
    assert exact_value(og, ostrat) == pytest.approx(1.0)
    assert mc_value(og, ostrat, 500, seed=2).rejections == 0
    triv = oracularize(always_accept_game())
    assert exact_value(triv, OracleStrategy(DeterministicStrategy(lambda x: 0))) == pytest.approx(1.0)


def test_oracularize_detects_inconsistent_pair_answers():
    g = consistency_game(["q"])
    liar = DeterministicStrategy(lambda x: (0, 1) if x[0] == "P" else 0)
    val = exact_value(oracularize(g), liar)
    assert val < 1


def test_oracularize_sampled_game():
    sampled = Game("s", sampler=lambda rng: Entry(1.0, "q", "q", lambda a, b: a == b))
    og = oracularize(sampled)
    assert not og.enumerable
    r = mc_value(og, OracleStrategy(RecipeStrategy([(1, 2)], zz_plan)), 300, seed=0)
    assert r.rejections == 0


def register_plan(x):
    W, x2 = x
    steps = [(i, (w,) if w != "H" else ("H",)) for i, w in enumerate(W)]
    return Plan(steps, lambda o: (tuple(o[i] for i in range(len(W))), 0))


def test_validate_register_strategy():
    lam = RegisterParams(2, (1, 1), (2, 2))
    s = RecipeStrategy(lam.registers, register_plan)
    qs = [(("Z", "H"), 0), (("X", "Z"), 0), (("H", "H"), 0)]
    assert validate_register_strategy(s, lam, "register", qs).ok

    def cheat(x):
        W, _ = x
        steps = [(i, (w,) if w != "H" else ("Z",)) for i, w in enumerate(W)]
        return Plan(steps, lambda o: (tuple(o[i] if W[i] != "H" else None for i in range(2)), o[1] if W[1] == "H" else 0))

    bad = RecipeStrategy(lam.registers, cheat)
    rep = validate_register_strategy(bad, lam, "register", [(("Z", "H"), 0)])
    assert not rep.ok and any(v[0] == "hidden" and "register 1" in v[2] for v in rep.violations)
    # register k (index 1) is exempt for semiregister strategies
    assert validate_register_strategy(bad, lam, "semiregister", [(("Z", "H"), 0)]).ok
    with pytest.raises(GameError):
        RegisterParams(1, (1,), (3,))


def test_validate_detects_non_epr_state():
    lam = RegisterParams(1, (1,), (2,))
    psi = np.zeros((2, 2))
    psi[0, 0] = 1.0
    s = QuantumStrategy(BipartiteState(psi, Layout([(1, 2)])), lambda x: basis_measurement(F2, "Z", 1))
    rep = validate_register_strategy(s, lam, "register", [])
    assert not rep.ok and rep.violations[0][0] == "epr"


def test_transcripts():
    g = consistency_game(["q"])
    r = mc_value(g, z_or_x_strategy("Z", "Z"), 3, seed=0, transcript=True)
    text = transcript_lines(r.transcript, {"game": "consistency"})
    assert len(text.strip().splitlines()) == 4
    assert '"verdict": true' in text


def test_mixed_strategy():
    s = MixedStrategy([(0.5, DeterministicStrategy(lambda x: 0)), (0.5, DeterministicStrategy(lambda x: 0, lambda x: 1))])
    assert exact_value(consistency_game(["q"]), s) == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_prop_values_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    v = exact_value(random_game(rng), random_strategy(rng))
    assert -1e-10 <= v <= 1 + 1e-10

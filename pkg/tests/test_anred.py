import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from introspect.anred import (
    ALL, AnredError, BitFormat, EnumFormat, ReducedStrategy, SerialFormat, Word, answer_reduction_game,
    compose_verifier, exhaustive_pcpp, ld_code, neexp_answer_code, non_codeword_tamper, oracularized_source,
    symbols_at, toy_source,
)
from introspect.games import Plan, RecipeStrategy, branch_values, consistency_game, exact_value, mc_value
from introspect.gf import field_of_order
from introspect.poly import AffineSubspace, LdParams, MultiPoly, agreement_fraction
from introspect.protocols import intro_neexp_game, neexp_prover
from introspect.sat import toy_instance, toy_params


def toy_code_params(n):
    return LdParams(n, 2, 4, 2) if n <= 4 else LdParams(n, 2, 4, 3)


@pytest.fixture(scope="module")
def code():
    return ld_code(LdParams(4, 2, 4, 2))


@pytest.fixture(scope="module")
def toy_game(code):
    return answer_reduction_game(toy_source(), code)


@pytest.mark.parametrize("n", range(1, 9))
def test_round_trip_and_embedding(n):
    c = ld_code(toy_code_params(n))
    for a in itertools.product((0, 1), repeat=n):
        w = c.enc(a)
        assert list(c.dec(w)) == list(a)
        assert c.sub(w)
        tab = w.table()
        assert all(int(tab[c.mu(i)]) == a[i] for i in range(n))


def test_single_symbol_change_decodes_to_bottom(code):
    for a in itertools.product((0, 1), repeat=4):
        tab = code.enc(a).table()
        for i in (0, 5, 15):
            t = tab.copy()
            t[i] = code.field.add(int(t[i]), 1)
            assert code.dec(t) is None


def test_distinct_codewords_agree_at_most_eta(code):
    words = [code.enc(a).poly() for a in itertools.product((0, 1), repeat=4)]
    worst = max(agreement_fraction(u, v) for u, v in itertools.combinations(words, 2))
    assert worst <= code.eta


def test_word_restriction_matches_values():
    f = field_of_order(8)
    rng = np.random.default_rng(3)
    w = Word(f, 3, rng.integers(0, 8, (2, 2, 2)))
    for _ in range(20):
        s = AffineSubspace(f, rng.integers(0, 8, 3), rng.integers(0, 8, (2, 3)))
        assert w.restrict(s) == w._restrict_by_values(s)
    assert w.restrict(AffineSubspace(f, [0, 0, 0], np.eye(3, dtype=int))) is w


def test_word_eval_paths_agree():
    f = field_of_order(4)
    w = Word(f, 2, [[1, 2], [3, 1]])
    pts = list(itertools.product(range(4), repeat=2))
    assert [w.eval(x) for x in pts] == [int(v) for v in w.eval_points(pts)] == [w.poly().eval(list(x)) for x in pts]
    assert symbols_at(w, ALL) is w


def test_composed_decider_exhaustive(code):
    src = toy_source()
    for e in src.game.entries:
        composed = compose_verifier(lambda y0, y1, a0, a1, e=e: e.pred(a0, a1), code, src.fmt)
        for a0 in itertools.product((0, 1), repeat=4):
            for a1 in itertools.product((0, 1), repeat=4):
                want = e.pred(a0, a1)
                assert composed(e.x0, e.x1, code.enc(a0), code.enc(a1)) == want


def test_sub_member_non_witness_rejected(code):
    f = code.field
    src = toy_source()
    e = src.game.entries[0]
    composed = compose_verifier(lambda y0, y1, a0, a1: e.pred(a0, a1), code, src.fmt)
    P = exhaustive_pcpp(composed, code)
    honest = code.enc((e.x0, 1, 1, 0)), code.enc((e.x1, 1, 1, 0))
    assert P.acceptance((e.x0, e.x1), honest) == 1.0
    fake = Word.from_poly(MultiPoly.const(f, 2, 2))
    assert code.sub(fake) and code.dec(fake) is None
    assert P.acceptance((e.x0, e.x1), (fake, honest[1])) == 0.0
    assert P.acceptance((e.x0, e.x1), (honest[0], "junk")) == 0.0
    assert P.descriptor() == {"randomness": 0, "queries": 2 * code.length, "proof_length": 0}


def test_toy_honest_value_is_one(code, toy_game):
    assert exact_value(toy_game, ReducedStrategy(toy_source(), code)) == pytest.approx(1.0, abs=1e-9)


def test_non_codeword_prover_fails_code_checks(code, toy_game):
    cheat = ReducedStrategy(toy_source(), code, tamper=non_codeword_tamper(code, 3))
    assert exact_value(toy_game, cheat) == pytest.approx(2807 / 4096, abs=1e-9)
    bv = branch_values(toy_game, cheat)
    assert bv["toy/answer-code/c0/low-degree/answer-code/low-degree"] < 1
    assert bv["toy/answer-code/c0/cross/answer-code/cross-point"] == pytest.approx(0.0, abs=1e-12)


def test_inconsistent_verify_answers_rejected(code, toy_game):
    flip = lambda x0, x1, a0, a1: (a0, (1 - a1[0],) + a1[1:])
    cheat = ReducedStrategy(toy_source(), code, verify_override=flip)
    bv = branch_values(toy_game, cheat)
    assert bv["toy/verify/verify"] == pytest.approx(0.0, abs=1e-12)
    assert exact_value(toy_game, cheat) == pytest.approx(0.75, abs=1e-9)


def test_parameter_hypothesis_enforced(code):
    with pytest.raises(AnredError):
        answer_reduction_game(toy_source(), code, gamma=0.3)
    src = toy_source()
    src.fmt = BitFormat(3)
    with pytest.raises(AnredError):
        answer_reduction_game(src, code)


def test_oracularized_consistency_reduces_with_value_one(code):
    base = RecipeStrategy([(1, 2), (1, 2)], lambda x: Plan([(0, ("Z",) if x == "z" else ("X",))], lambda o: o[0]))
    g = consistency_game(["z", "x"])
    bits = [(0,), (1,)]
    src = oracularized_source(g, base, EnumFormat(bits + list(itertools.product(bits, bits)), 4))
    G = answer_reduction_game(src, code)
    R = ReducedStrategy(src, code)
    assert exact_value(G, R) == pytest.approx(1.0, abs=1e-9)
    assert mc_value(G, R, 200, 3).rejections == 0
    assert all(e.pred.__code__.co_argcount == 2 for e in src.game.entries)


def test_neexp_pipeline_short_run():
    p = toy_params(toy_instance("sat_toy"))
    code = ld_code(neexp_answer_code(12224))
    assert (code.n, code.m, code.q, code.d) == (16384, 14, 32, 14)
    src = oracularized_source(intro_neexp_game(p), neexp_prover(p).strategy(), SerialFormat(code.n))
    r = mc_value(answer_reduction_game(src, code), ReducedStrategy(src, code), 300, 17)
    assert r.rejections == 0


def test_serial_format_too_long():
    with pytest.raises(AnredError):
        SerialFormat(40).to_bits("too long for forty bits")


def test_enum_format_round_trip():
    fmt = EnumFormat(["a", "b", "c"])
    assert fmt.n == 2
    assert [fmt.from_bits(fmt.to_bits(v)) for v in "abc"] == list("abc")
    assert fmt.from_bits([1, 1]) is None


_leaf = st.one_of(st.none(), st.booleans(), st.integers(-10 ** 6, 10 ** 6), st.text(max_size=6))
_tree = st.recursive(_leaf, lambda kids: st.lists(kids, max_size=4).map(tuple), max_leaves=12)


@settings(max_examples=80, deadline=None)
@given(_tree)
def test_serial_format_round_trip(obj):
    fmt = SerialFormat(4096)
    bits = fmt.to_bits(obj)
    assert len(bits) == 4096
    assert fmt.from_bits(bits) == obj


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_serial_format_rejects_garbage(seed):
    fmt = SerialFormat(256)
    bits = np.random.default_rng(seed).integers(0, 2, 256)
    out = fmt.from_bits(bits)
    assert out is None or fmt.to_bits(out).tolist() == bits.tolist()


def test_serial_format_polys_and_flats():
    f = field_of_order(8)
    p = MultiPoly(f, 2, {(1, 0): 3, (0, 2): 5})
    s = AffineSubspace(f, [1, 2, 3], [[1, 0, 1]])
    fmt = SerialFormat(2048)
    back = fmt.from_bits(fmt.to_bits((p, s, -7)))
    assert back[0] == p and back[1] == s and back[2] == -7

"""Registered experiments, one per acceptance criterion.

Each experiment takes (params, seed, trials) and returns an Outcome with measured values, the
tolerances they were held to and named pass/fail checks. Everything is a pure function of its
arguments, so reports are reproducible byte for byte.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .rng import make_rng


@dataclass
class Outcome:
    values: dict
    tolerances: dict
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


@dataclass(frozen=True)
class Experiment:
    name: str
    criterion: int
    title: str
    fn: Callable[[dict, int, int | None], Outcome]
    defaults: dict
    trials: int | None
    budget: float


REGISTRY: dict[str, Experiment] = {}


def experiment(name: str, criterion: int, title: str, budget: float, trials: int | None = None, **defaults):
    def wrap(fn):
        REGISTRY[name] = Experiment(name, criterion, title, fn, defaults, trials, budget)
        return fn
    return wrap


def by_criterion() -> list[Experiment]:
    return sorted(REGISTRY.values(), key=lambda e: e.criterion)


def _frac(v: float, den: int = 1 << 20) -> str:
    return str(Fraction(v).limit_denominator(den))


def _max(xs) -> float:
    return float(max(xs, default=0.0))


# -- 1. field and code algebra ---------------------------------------------------------------------

def _all_rows(q: int, width: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return (idx[:, None] // q ** np.arange(width, dtype=np.int64)[None, :]) % q


def max_zero_fraction(field, d: int, rows: np.ndarray) -> float:
    """Largest fraction of F_q^2 on which a nonzero row's polynomial of total degree <= d vanishes."""
    q = field.q
    mons = [(i, j) for i in range(d + 1) for j in range(d + 1 - i)]
    pts = np.array(list(itertools.product(range(q), repeat=2)), dtype=np.int64)
    mon_vals = np.stack([field.mul_arr(field.pow_arr(pts[:, 0], i), field.pow_arr(pts[:, 1], j)) for i, j in mons])
    mt = field.mul_table.astype(np.uint16)
    acc = np.zeros((len(rows), len(pts)), dtype=np.uint16)
    for k in range(len(mons)):
        acc ^= mt[rows[:, k]][:, mon_vals[k]]
    nonzero = rows.any(axis=1)
    zeros = (acc == 0).sum(axis=1)[nonzero]
    return float(zeros.max()) / len(pts) if len(zeros) else 0.0


@experiment("field-code-algebra", 1, "Field/code algebra", 5.0,
            gram_q=[4, 16], encode_q=[[2, 4], [4, 16]], n_max=16, sz_q=[4, 8], d_max=3,
            sampled_rows=1 << 16, exhaustive_limit=1 << 21)
def field_code_algebra(p: dict, seed: int, trials: int | None) -> Outcome:
    from .gf import field_of_order, self_dual_basis
    from .poly import LdParams, axis_transform, ld_encode, ld_encode_batch

    values, checks = {}, {}
    for q in p["gram_q"]:
        b = self_dual_basis(field_of_order(q))
        ok = bool(np.array_equal(b.gram(), np.eye(len(b.elements), dtype=np.int64)))
        values[f"gram_identity_q{q}"] = ok
        checks[f"gram_q{q}"] = ok

    rng = make_rng(seed, 1)
    for h, q in p["encode_q"]:
        mismatches, messages = 0, 0
        for n in range(1, p["n_max"] + 1):
            m = max(1, math.ceil(math.log(n, h) - 1e-9))
            params = LdParams(n, h, q, m)
            A = ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
            C = ld_encode_batch(A, params)
            E = np.array([[params.field.pow(x, e) for e in range(h)] for x in params.H], dtype=np.int64)
            V = C
            for ax in range(m):
                V = axis_transform(params.field, V, E, ax + 1)
            pos = {x: i for i, x in enumerate(params.H)}
            for i in range(n):
                cell = tuple(pos[c] for c in params.pi(i))
                mismatches += int(np.count_nonzero(V[(slice(None),) + cell] != A[:, i]))
            for a in A[rng.integers(0, len(A), 2)]:
                g = ld_encode(list(a), params)
                D = np.zeros((h,) * m, dtype=np.int64)
                for e, c in g.terms.items():
                    D[e] = c
                mismatches += int(not np.array_equal(D, ld_encode_batch(a[None, :], params)[0]))
            messages += len(A)
        values[f"encode_h{h}_q{q}"] = {"messages": messages, "mismatches": mismatches}
        checks[f"encode_h{h}_q{q}"] = mismatches == 0

    for q in p["sz_q"]:
        f = field_of_order(q)
        for d in range(1, p["d_max"] + 1):
            width = (d + 1) * (d + 2) // 2
            total = q ** width
            if total <= p["exhaustive_limit"]:
                worst, step = 0.0, 1 << 17
                for lo in range(0, total, step):
                    worst = max(worst, max_zero_fraction(f, d, _all_rows(q, width, lo, min(total, lo + step))))
                mode = f"exhaustive ({total} polynomials)"
            else:
                sub = _all_rows(2, width, 0, 2 ** width)
                rows = np.concatenate([sub, make_rng(seed, 2).integers(0, q, (p["sampled_rows"], width))])
                worst = max_zero_fraction(f, d, rows)
                mode = f"all F_2-coefficient plus {p['sampled_rows']} seeded random polynomials"
            values[f"sz_q{q}_d{d}"] = {"max_agreement": worst, "bound": d / q, "mode": mode}
            checks[f"sz_q{q}_d{d}"] = worst <= d / q
    return Outcome(values, {"encode": "exact", "schwartz_zippel": "max agreement <= d/q exactly"}, checks)


# -- 2. Pauli algebra ------------------------------------------------------------------------------

def _strings(field, n):
    from .poly import grid_points
    return [tuple(int(x) for x in r) for r in grid_points(field, n)]


@experiment("pauli-algebra", 2, "Pauli algebra", 10.0, q=[2, 4], n_max=2, tol=1e-12)
def pauli_algebra(p: dict, seed: int, trials: int | None) -> Outcome:
    from .gf import field_of_order
    from .qsim import epr, pauli, pauli_X, pauli_Z, tau

    qs = p["q"] if isinstance(p["q"], list) else [p["q"]]
    err = {"commutation": 0.0, "power": 0.0, "reconstruction": 0.0, "projector": 0.0, "completeness": 0.0,
           "epr_xx": 0.0, "epr_zz": 0.0, "epr_transpose": 0.0}
    for q in qs:
        f = field_of_order(q)
        om = lambda a: f.omega_power(f.trace(a))
        for n in range(1, p["n_max"] + 1):
            D = q ** n
            S = _strings(f, n)
            dot = {(u, v): f.dot(u, v) for u in S for v in S}
            for x in S:
                for z in S:
                    lhs = pauli_X(f, x) @ pauli_Z(f, z)
                    rhs = np.conj(om(dot[x, z])) * pauli_Z(f, z) @ pauli_X(f, x)
                    err["commutation"] = max(err["commutation"], float(np.linalg.norm(lhs - rhs)))
            for W in ("X", "Z"):
                taus = {u: tau(f, W, u) for u in S}
                for v in S:
                    P = pauli(f, W, v)
                    err["power"] = max(err["power"], float(np.linalg.norm(np.linalg.matrix_power(P, f.p) - np.eye(D))))
                    rec = sum(om(dot[u, v]) * taus[u] for u in S)
                    err["reconstruction"] = max(err["reconstruction"], float(np.linalg.norm(rec - P)))
                paulis = {v: pauli(f, W, v) for v in S}
                for u in S:
                    proj = sum(np.conj(om(dot[u, v])) * paulis[v] for v in S) / D
                    err["projector"] = max(err["projector"], float(np.linalg.norm(proj - taus[u])))
                err["completeness"] = max(err["completeness"], float(np.linalg.norm(sum(taus.values()) - np.eye(D))))
            v = epr(f, n).vector
            for x in S:
                neg = tuple(f.neg(c) for c in x)
                X = pauli_X(f, x)
                err["epr_xx"] = max(err["epr_xx"], float(np.linalg.norm(np.kron(X, X) @ v - v)))
                zz = np.kron(pauli_Z(f, x), pauli_Z(f, neg)) @ v
                err["epr_zz"] = max(err["epr_zz"], float(np.linalg.norm(zz - v)))
                for W in ("X", "Z"):
                    lhs = np.kron(tau(f, W, x), np.eye(D)) @ v
                    rhs = np.kron(np.eye(D), tau(f, W, neg)) @ v
                    err["epr_transpose"] = max(err["epr_transpose"], float(np.linalg.norm(lhs - rhs)))
    checks = {k: e <= p["tol"] for k, e in err.items()}
    return Outcome({"max_error": err, "q": qs, "n_max": p["n_max"]}, {"norm": p["tol"]}, checks)


# -- 3. twirl identities ---------------------------------------------------------------------------

def _random_herm(D: int, rng) -> np.ndarray:
    A = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    return A + A.conj().T


@experiment("twirl-identities", 3, "Twirl identities", 30.0, operators=50, tol_twirl=1e-12, tol_hide=1e-10,
            tol_block=1e-12)
def twirl_identities(p: dict, seed: int, trials: int | None) -> Outcome:
    from .gf import gf2
    from .poly import surfaces
    from .qsim import Layout, hide, pauli_X, pauli_Z, pauli_twirl, subspace_projector, subspace_twirl

    F2 = gf2(1)
    twirl_err = 0.0
    for n in (1, 2):
        D = 2 ** n
        twirl_err = max(twirl_err, float(np.linalg.norm(pauli_twirl(np.eye(D), F2, n) - np.eye(D))))
        for x in _strings(F2, n):
            for z in _strings(F2, n):
                P = pauli_X(F2, x) @ pauli_Z(F2, z)
                expect = P if not any(x) and not any(z) else 0 * P
                twirl_err = max(twirl_err, float(np.linalg.norm(pauli_twirl(P, F2, n) - expect)))
    rng = make_rng(seed, 3)
    hide_err = 0.0
    for k in range(p["operators"]):
        n = 1 + k % 2
        A = _random_herm(2 ** n * 2, rng)
        h = hide(A, Layout([(n, 2), (1, 2)]), 0)
        hide_err = max(hide_err, float(np.linalg.norm(h - pauli_twirl(A, F2, n, aux_dim=2))))
    off, within, count = 0.0, 0.0, 0
    for k in (1, 2):
        for v in itertools.product(_strings(F2, 2), repeat=k):
            A = _random_herm(4, rng)
            T = subspace_twirl(A, F2, 2, v)
            Ps = [subspace_projector(F2, v, s) for s in surfaces(F2, v, 2)]
            for i, P in enumerate(Ps):
                for j, Q in enumerate(Ps):
                    if i != j:
                        off = max(off, float(np.linalg.norm(P @ T @ Q)))
                blk = P @ T @ P
                within = max(within, float(np.linalg.norm(blk - np.trace(blk) / np.trace(P) * P)))
            count += 1
    values = {"pauli_twirl_max_error": twirl_err, "hide_vs_twirl_max_diff": hide_err,
              "subspace_twirl_off_block_max": off, "subspace_twirl_in_block_max": within, "descriptors": count}
    checks = {"pauli_twirl": twirl_err <= p["tol_twirl"], "hide": hide_err <= p["tol_hide"],
              "block_diagonal": off <= p["tol_block"]}
    return Outcome(values, {"twirl": p["tol_twirl"], "hide": p["tol_hide"], "block": p["tol_block"]}, checks)


# -- 4. honest completeness ------------------------------------------------------------------------

def toy_poly():
    from .gf import gf2
    from .poly import MultiPoly
    F2 = gf2(1)
    x = [MultiPoly.var(F2, 2, i) for i in range(2)]
    return x[0] * x[1] + MultiPoly.const(F2, 2, 1)


def completeness_cases():
    """(name, game builder, honest strategy builder) at q = 2, n <= 2."""
    from .games import QuantumStrategy, consistency_game
    from .gf import gf2
    from .protocols import (
        PauliBasisConfig, RegisterProver, compile_full, compiled_prover, data_hiding_game, global_poly_prover,
        intersecting_lines_game, intro_cross_check, intro_hide_game, intro_intersect_game, intro_surface_sampler,
        ld_pauli_subgame, lines_strategy, partial_data_hiding_game, pauli_basis_game, pauli_basis_strategy,
    )
    from .qsim import basis_measurement, epr

    F2 = gf2(1)
    regs, roles = [(2, 2), (2, 2)], ((0,), (1,))
    cfg = PauliBasisConfig(2, 2, desk=True)
    g2 = toy_poly()
    gp = lambda: global_poly_prover(regs, g2).strategy()
    rp = lambda: RegisterProver([(2, 2)]).strategy()
    return [
        ("consistency-epr", lambda: consistency_game(["q"]),
         lambda: QuantumStrategy(epr(F2, 1), lambda x: basis_measurement(F2, "Z", 1))),
        ("data-hiding", lambda: data_hiding_game((("H",), "x")), rp),
        ("partial-data-hiding-k1", lambda: partial_data_hiding_game([[[1, 0]], [[0, 1]], [[1, 1]]], "x", 2, 2), rp),
        ("intro-hide", lambda: intro_hide_game(regs, roles, "x"), gp),
        ("intro-surface-sampler", lambda: intro_surface_sampler(regs, roles, 2), gp),
        ("intro-cross-check", lambda: intro_cross_check(regs, roles, 2), gp),
        ("intersecting-lines", lambda: intersecting_lines_game(2, 2, 2), lambda: lines_strategy(g2)),
        ("intro-intersecting-lines", lambda: intro_intersect_game(regs, (0, 1), 2), gp),
        ("ld-pauli-subgame", lambda: ld_pauli_subgame(cfg), lambda: pauli_basis_strategy(cfg)),
        ("pauli-basis", lambda: pauli_basis_game(cfg), lambda: pauli_basis_strategy(cfg)),
        ("compiled-toy-stack", lambda: compile_full(data_hiding_game((("H",), "x")), [cfg]),
         lambda: compiled_prover([(2, 2)], [cfg]).strategy()),
    ]


@experiment("honest-completeness", 4, "Honest completeness", 120.0, tol=1e-9)
def honest_completeness(p: dict, seed: int, trials: int | None) -> Outcome:
    from .games import exact_value
    values, checks = {}, {}
    for name, game, strat in completeness_cases():
        v = exact_value(game(), strat())
        values[name] = v
        checks[name] = abs(v - 1) <= p["tol"]
    return Outcome({"exact_value": values}, {"abs": p["tol"]}, checks)


# -- 5. introspection distribution fidelity ----------------------------------------------------------

def sampler_descriptors(field, n: int) -> list[tuple]:
    vs = [v for v in _strings(field, n) if any(v)]
    out = [("Z",), ("X",), ("H",)]
    for k in (1, 2):
        for tup in itertools.combinations_with_replacement(vs, k):
            out.extend((kind, tup) for kind in ("PI", "PX", "PIPX"))
    return out


@experiment("introspection-fidelity", 5, "Introspection distribution fidelity", 60.0, tol=1e-9)
def introspection_fidelity(p: dict, seed: int, trials: int | None) -> Outcome:
    from .games import sampler_distribution
    from .gf import gf2
    from .ldt import SurfaceTestConfig, surface_vs_point_game
    from .protocols import cross_check_question_law, global_poly_prover, intro_cross_check, intro_hide_game
    from .qsim import descriptor_measurement, epr, exact_descriptor_distribution, total_variation

    F2 = gf2(1)
    regs, roles = [(2, 2), (2, 2)], ((0,), (1,))
    strat = global_poly_prover(regs, toy_poly()).strategy()
    law = cross_check_question_law(intro_cross_check(regs, roles, 2), strat)
    ref = surface_vs_point_game(SurfaceTestConfig(2, 2, 2, 1)).question_distribution()
    law_tv = total_variation(law, ref)

    pair_tv, pairs = 0.0, 0
    for n in (1, 2):
        st = epr(F2, n)
        ds = sampler_descriptors(F2, n)
        meas = {d: descriptor_measurement(F2, n, d) for d in ds}
        for da in ds:
            for db in ds:
                exact = st.joint_distribution(meas[da], meas[db])
                pair_tv = max(pair_tv, total_variation(exact, exact_descriptor_distribution(F2, n, da, db)))
                pairs += 1

    game_tv, entries = 0.0, 0
    for g in (intro_cross_check(regs, roles, 2), intro_hide_game(regs, roles, "x")):
        for e in g.entries:
            exact = {(a, b): pr for pr, a, b in strat.answer_distribution(e.x0, e.x1)}
            game_tv = max(game_tv, total_variation(exact, sampler_distribution(strat, e.x0, e.x1)))
            entries += 1
    values = {"question_law_tv": law_tv, "descriptor_pairs": pairs, "descriptor_pair_max_tv": pair_tv,
              "game_entries": entries, "game_entry_max_tv": game_tv}
    checks = {"question_law": law_tv <= p["tol"], "descriptor_pairs": pair_tv <= p["tol"],
              "game_entries": game_tv <= p["tol"]}
    return Outcome(values, {"tv": p["tol"]}, checks)


# -- 6. cheating detection -------------------------------------------------------------------------

@experiment("cheating-detection", 6, "Cheating detection", 60.0, trials=2000, seeds=5, gap=0.05, sigmas=4.0)
def cheating_detection(p: dict, seed: int, trials: int | None) -> Outcome:
    from .games import branch_values, exact_value, mc_value
    from .protocols import data_hiding_cheater, data_hiding_game, global_poly_prover, intro_surface_sampler

    regs, roles = [(2, 2), (2, 2)], ((0,), (1,))
    cases = {
        "data-hiding-z-read": (data_hiding_game((("H",), "x")), data_hiding_cheater([(2, 2)])),
        "lying-surface": (intro_surface_sampler(regs, roles, 2),
                          global_poly_prover(regs, toy_poly(), surface_shift=[1, 0]).strategy()),
    }
    values, checks = {}, {}
    for name, (game, strat) in cases.items():
        v = exact_value(game, strat)
        sd = math.sqrt(v * (1 - v) / trials)
        ests = [mc_value(game, strat, trials, seed + k).estimate for k in range(p["seeds"])]
        values[name] = {"exact": v, "exact_fraction": _frac(v), "gap": 1 - v, "mc_estimates": ests,
                        "mc_max_sigma": _max(abs(e - v) / sd for e in ests) if sd else 0.0}
        checks[f"{name}/below-one"] = v < 1
        checks[f"{name}/gap"] = 1 - v >= p["gap"]
        checks[f"{name}/stable"] = all(abs(e - v) <= p["sigmas"] * sd for e in ests)
    bv = branch_values(*cases["lying-surface"])
    values["lying-surface"]["correct_surface_check"] = bv["intro-surface/t1"]
    checks["lying-surface/fails-correct-surface-check"] = bv["intro-surface/t1"] < 1
    return Outcome(values, {"gap": p["gap"], "mc_sigmas": p["sigmas"]}, checks)


# -- 7. classical PCP ------------------------------------------------------------------------------

@experiment("pcp-soundness", 7, "Classical PCP", 120.0, instance="unsat_toy", sat_instance="sat_toy", q=16)
def pcp_soundness(p: dict, seed: int, trials: int | None) -> Outcome:
    from .sat import (
        TOY_CORPUS, brute_force_sat, formula_rejection, threshold_check, honest_format_proof, pcp_acceptance,
        pcp_prove, toy_instance, toy_params,
    )

    q = p["q"]
    sat_inst = toy_instance(p["sat_instance"])
    sp = toy_params(sat_inst, q)
    completeness = pcp_acceptance(sp, pcp_prove(sat_inst, sp, brute_force_sat(sat_inst)))

    inst = toy_instance(p["instance"])
    up = toy_params(inst, q)
    unsat = brute_force_sat(inst) is None
    rows, margin_ok = [], True
    for a in itertools.product((0, 1), repeat=inst.n_vars):
        proof = honest_format_proof(up, a)
        rej = formula_rejection(up, proof)
        bound = 1 - Fraction(proof.residual.degree(), q)
        rows.append({"assignment": "".join(map(str, a)), "rejection": str(rej), "bound": str(bound)})
        margin_ok &= rej >= bound
    min_rej = min(Fraction(r["rejection"]) for r in rows)

    corpus = {}
    for name in TOY_CORPUS:
        ci = toy_instance(name)
        cp = toy_params(ci, q)
        consistent = all(threshold_check(cp, honest_format_proof(cp, a))["consistent"]
                         for a in itertools.product((0, 1), repeat=ci.n_vars))
        corpus[name] = consistent
    values = {"completeness": str(completeness), "instance_unsatisfiable": unsat, "min_rejection": str(min_rej),
              "min_rejection_float": float(min_rej), "assignments": rows, "threshold_consistent": corpus}
    checks = {"completeness": completeness == 1, "instance-unsat": unsat, "rejection-bound": margin_ok,
              "threshold-consistency": all(corpus.values())}
    return Outcome(values, {"rejection": "exact, >= 1 - deg/q"}, checks)


# -- 8. intro-NEEXP end to end ---------------------------------------------------------------------

@experiment("intro-neexp-honest", 8, "Intro-NEEXP end-to-end", 300.0, trials=100000, instance="sat_toy",
            unsat_instance="unsat_toy", unsat_trials=4000, sigmas=3.0)
def intro_neexp_honest(p: dict, seed: int, trials: int | None) -> Outcome:
    from .games import MixedStrategy, mc_value
    from .protocols import formula_game, formula_rejection_of, intro_neexp_game, neexp_prover, neexp_registers
    from .sat import toy_instance, toy_params

    P = toy_params(toy_instance(p["instance"]))
    r = mc_value(intro_neexp_game(P), neexp_prover(P).strategy(), trials, seed)

    U = toy_params(toy_instance(p["unsat_instance"]))
    family = list(itertools.product((0, 1), repeat=U.inst.n_vars))
    w = 1 / len(family)
    exact = float(sum(Fraction(formula_rejection_of(U, a)) for a in family) / len(family))
    mixed = MixedStrategy([(w, neexp_prover(U, list(a), honest_format=True).strategy()) for a in family])
    t = p["unsat_trials"]
    u = mc_value(formula_game(U, neexp_registers(U)), mixed, t, seed + 1)
    rate = u.rejections / t
    sd = math.sqrt(exact * (1 - exact) / t)
    values = {"honest_trials": trials, "honest_rejections": r.rejections, "unsat_family_size": len(family),
              "unsat_exact_rejection": exact, "unsat_observed_rejection": rate, "unsat_sigma": sd,
              "unsat_deviation_sigmas": abs(rate - exact) / sd if sd else 0.0}
    checks = {"honest-zero-rejections": r.rejections == 0, "unsat-within-3-sigma": abs(rate - exact) <= p["sigmas"] * sd}
    return Outcome(values, {"honest_rejections": 0, "unsat_sigmas": p["sigmas"]}, checks)


# -- 9. answer reduction ---------------------------------------------------------------------------

@experiment("answer-reduction", 9, "Answer reduction", 120.0, trials=10000, n_max=8, instance="sat_toy", tol=1e-9)
def answer_reduction(p: dict, seed: int, trials: int | None) -> Outcome:
    from .anred import (
        ReducedStrategy, SerialFormat, Word, answer_reduction_game, compose_verifier, exhaustive_pcpp, ld_code,
        neexp_answer_code, oracularized_source, toy_source,
    )
    from .games import exact_value, mc_value
    from .poly import LdParams, MultiPoly
    from .protocols import intro_neexp_game, neexp_prover
    from .sat import toy_instance, toy_params

    bad = 0
    for n in range(1, p["n_max"] + 1):
        code = ld_code(LdParams(n, 2, 4, 2) if n <= 4 else LdParams(n, 2, 4, 3))
        for a in itertools.product((0, 1), repeat=n):
            w = code.enc(a)
            tab = w.table()
            bad += list(code.dec(w)) != list(a)
            bad += not code.sub(w)
            bad += any(int(tab[code.mu(i)]) != a[i] for i in range(n))

    code = ld_code(LdParams(4, 2, 4, 2))
    src = toy_source()
    honest = exact_value(answer_reduction_game(src, code), ReducedStrategy(src, code))

    fake = Word.from_poly(MultiPoly.const(code.field, 2, 2))
    nonwitness = []
    for e in src.game.entries:
        V = exhaustive_pcpp(compose_verifier(lambda y0, y1, a0, a1, e=e: e.pred(a0, a1), code, src.fmt), code)
        good = code.enc((e.x0, 1, 1, 0)), code.enc((e.x1, 1, 1, 0))
        nonwitness += [V.acceptance((e.x0, e.x1), (fake, good[1])), V.acceptance((e.x0, e.x1), (good[0], fake))]

    P = toy_params(toy_instance(p["instance"]))
    big = ld_code(neexp_answer_code(12224))
    nsrc = oracularized_source(intro_neexp_game(P), neexp_prover(P).strategy(), SerialFormat(big.n))
    r = mc_value(answer_reduction_game(nsrc, big), ReducedStrategy(nsrc, big), trials, seed)
    values = {"roundtrip_failures": bad, "toy_honest_value": honest, "pipeline_code": big.descriptor(),
              "pipeline_trials": trials, "pipeline_rejections": r.rejections,
              "sub_member_nonwitness_max_acceptance": max(nonwitness), "sub_member_is_sub": bool(code.sub(fake))}
    checks = {"roundtrip": bad == 0, "toy-honest-one": abs(honest - 1) <= p["tol"],
              "pipeline-zero-rejections": r.rejections == 0,
              "nonwitness-rejected": max(nonwitness) == 0.0 and code.sub(fake)}
    return Outcome(values, {"toy_value": p["tol"], "pipeline_rejections": 0, "nonwitness_acceptance": 0}, checks)


# -- 10. determinism -------------------------------------------------------------------------------

@experiment("suite-determinism", 10, "Determinism", 900.0)
def suite_determinism(p: dict, seed: int, trials: int | None) -> Outcome:
    from .cli import suite_bytes
    first = suite_bytes(seed)
    second = suite_bytes(seed)
    return Outcome({"bytes": len(first), "identical": first == second}, {"comparison": "byte-identical"},
                   {"identical": first == second})

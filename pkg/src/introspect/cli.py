"""Command-line front end: instance parsing, experiments and JSON reports.

Reports are canonical JSON (sorted keys, fixed indentation) and carry a schema version. Wall
time is kept out of reports unless --timing is passed, so equal (experiment, params, seed)
produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .games import to_jsonable
from .rng import make_rng

SCHEMA_VERSION = 1


class CliError(ValueError):
    pass


# -- instances -------------------------------------------------------------------------------------

def parse_instance(path):
    """Read a circuit file (or a bundled toy name) as a succinct SAT instance."""
    from .sat import SatError, SuccinctInstance, TOY_CORPUS, load_circuit, toy_instance

    if str(path) in TOY_CORPUS and not Path(path).exists():
        return toy_instance(str(path))
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such instance file: {path}")
    c = load_circuit(p)
    if (c.n_inputs - 3) % 3:
        raise SatError(f"circuit has {c.n_inputs} inputs; a succinct instance needs 3n + 3")
    return SuccinctInstance(c, (c.n_inputs - 3) // 3)


# -- experiments -----------------------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    trials: int | None = None
    output: str | None = None


def _registry():
    from . import experiments
    return experiments.REGISTRY


def canonical(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def run(spec: ExperimentSpec, timing: bool = False) -> dict:
    """Run one registered experiment; writes the report to spec.output when given."""
    reg = _registry()
    if spec.name not in reg:
        raise CliError(f"unknown experiment {spec.name!r}; known: {', '.join(sorted(reg))}")
    exp = reg[spec.name]
    unknown = set(spec.params) - set(exp.defaults)
    if unknown:
        raise CliError(f"malformed params for {spec.name}: unknown keys {sorted(unknown)}")
    params = {**exp.defaults, **spec.params}
    trials = spec.trials if spec.trials is not None else exp.trials
    if trials is not None and trials < 1:
        raise CliError("trials must be positive")
    t0 = time.perf_counter()
    out = exp.fn(params, spec.seed, trials)
    wall = time.perf_counter() - t0
    report = {"schema_version": SCHEMA_VERSION, "experiment": exp.name, "criterion": exp.criterion,
              "title": exp.title, "params": params, "seed": spec.seed, "trials": trials,
              "values": out.values, "tolerances": out.tolerances, "checks": out.checks,
              "passed": out.passed, "budget_seconds": exp.budget}
    if timing:
        report["wall_time"] = wall
    if spec.output:
        Path(spec.output).write_text(canonical(report))
    return report


def suite_reports(seed: int, timing: bool = False, log=None) -> list[dict]:
    from .experiments import by_criterion
    reports = []
    for exp in by_criterion():
        if exp.name == "suite-determinism":
            continue
        rep = run(ExperimentSpec(exp.name, seed=seed), timing=timing)
        reports.append(rep)
        if log is not None:
            tail = f" ({rep['wall_time']:.1f}s)" if timing else ""
            print(f"C{exp.criterion} {exp.name}: {'PASS' if rep['passed'] else 'FAIL'}{tail}", file=log, flush=True)
    return reports


def suite_bytes(seed: int) -> bytes:
    return canonical({"schema_version": SCHEMA_VERSION, "seed": seed, "reports": suite_reports(seed)}).encode()


# -- module subcommands ------------------------------------------------------------------------------

def _int(s: str) -> int:
    return int(s, 0)


def cmd_gf(a) -> dict:
    from .gf import field_of_order, self_dual_basis
    f = field_of_order(a.q)
    x = [_int(v) for v in a.args]
    ops = {
        "add": lambda: f.add(*x), "mul": lambda: f.mul(*x), "inv": lambda: f.inv(*x),
        "pow": lambda: f.pow(*x), "trace": lambda: f.trace(*x),
        "self-dual": lambda: list(self_dual_basis(f).elements),
    }
    if a.op not in ops:
        raise CliError(f"unknown gf operation {a.op}")
    try:
        return {"field": f.to_string(), "op": a.op, "args": x, "result": ops[a.op]()}
    except TypeError:
        raise CliError(f"wrong number of operands for {a.op}") from None


def cmd_poly(a) -> dict:
    from .poly import LdParams, ld_encode
    bits = [int(c) for c in a.message]
    p = LdParams(len(bits), a.h, a.q, a.m)
    g = ld_encode(bits, p)
    return {"params": {"n": p.n, "h": p.h, "q": p.q, "m": p.m, "d": p.d}, "message": bits,
            "degree": g.degree(), "encoding": g.serialize(), "pi": [list(p.pi(i)) for i in range(p.n)]}


def cmd_ldt(a) -> dict:
    from .games import exact_value, mc_value
    from .ldt import SurfaceTestConfig, oracle_strategy, surface_vs_point_game, HonestOracle
    from .poly import MultiPoly
    cfg = SurfaceTestConfig(a.m, a.d, a.q, a.k)
    rng = make_rng(a.seed, 7)
    terms = {}
    for _ in range(4):
        e = tuple(int(v) for v in rng.integers(0, a.d + 1, a.m))
        if sum(e) <= a.d:
            terms[e] = int(rng.integers(1, a.q))
    g = MultiPoly(cfg.field, a.m, terms)
    game = surface_vs_point_game(cfg)
    strat = oracle_strategy(HonestOracle([g]))
    out = {"config": {"m": a.m, "d": a.d, "q": a.q, "k": a.k}, "poly": g.serialize()}
    if game.entries is not None and a.trials is None:
        out["exact_value"] = exact_value(game, strat)
    else:
        out["mc"] = mc_value(game, strat, a.trials or 1000, a.seed).report()
    return out


def cmd_sat(a) -> dict:
    from .sat import brute_force_sat, formula_rejection, honest_format_proof, pcp_acceptance, pcp_prove, toy_params
    inst = parse_instance(a.instance)
    out = {"instance": str(a.instance), "n": inst.n, "variables": inst.n_vars, "clauses": len(inst.clauses())}
    sol = brute_force_sat(inst)
    out["satisfiable"] = sol is not None
    if a.pcp:
        p = toy_params(inst, a.q)
        if sol is not None:
            out["pcp_acceptance"] = str(pcp_acceptance(p, pcp_prove(inst, p, sol)))
        else:
            out["min_formula_rejection"] = str(min(
                formula_rejection(p, honest_format_proof(p, [(i >> j) & 1 for j in range(inst.n_vars)]))
                for i in range(2 ** inst.n_vars)))
    if sol is not None:
        out["assignment"] = sol
    return out


def cmd_qsim(a) -> dict:
    from .gf import field_of_order
    from .qsim import epr, pauli
    f = field_of_order(a.q)
    if a.what == "epr":
        st = epr(f, a.n)
        return {"q": a.q, "n": a.n, "dimension": int(st.vector.size), "norm": float(st.norm()), "csv": st.to_csv()}
    v = [_int(x) for x in a.vector]
    P = pauli(f, a.what.upper(), v)
    return {"q": a.q, "W": a.what.upper(), "v": v, "dimension": int(P.shape[0]),
            "trace": [float(P.trace().real), float(P.trace().imag)]}


def _game_cases():
    from .experiments import completeness_cases, toy_poly
    from .protocols import data_hiding_cheater, data_hiding_game, global_poly_prover, intro_surface_sampler
    cases = {name: (g, s) for name, g, s in completeness_cases()}
    regs, roles = [(2, 2), (2, 2)], ((0,), (1,))
    cases["data-hiding-cheater"] = (lambda: data_hiding_game((("H",), "x")), lambda: data_hiding_cheater([(2, 2)]))
    cases["lying-surface"] = (lambda: intro_surface_sampler(regs, roles, 2),
                              lambda: global_poly_prover(regs, toy_poly(), surface_shift=[1, 0]).strategy())
    return cases


def cmd_game(a) -> dict:
    from .games import branch_values, exact_value, mc_value
    cases = _game_cases()
    if a.name not in cases:
        raise CliError(f"unknown game {a.name!r}; known: {', '.join(sorted(cases))}")
    g, s = cases[a.name]
    game, strat = g(), s()
    out = {"game": a.name}
    if a.trials:
        out["mc"] = mc_value(game, strat, a.trials, a.seed).report()
    else:
        out["exact_value"] = exact_value(game, strat)
        out["branches"] = branch_values(game, strat)
    return out


def cmd_anred(a) -> dict:
    from .anred import (
        ReducedStrategy, SerialFormat, answer_reduction_game, exhaustive_pcpp, ld_code, neexp_answer_code,
        oracularized_source, toy_source,
    )
    from .games import exact_value, mc_value
    from .poly import LdParams
    if a.code != "ld" or a.pcpp != "exhaustive":
        raise CliError("only --code ld and --pcpp exhaustive are available")
    if a.source == "toy":
        code = ld_code(LdParams(4, 2, 4, 2))
        src = toy_source()
    else:
        from .protocols import intro_neexp_game, neexp_prover
        from .sat import toy_instance, toy_params
        P = toy_params(toy_instance("sat_toy"))
        code = ld_code(neexp_answer_code(12224))
        src = oracularized_source(intro_neexp_game(P), neexp_prover(P).strategy(), SerialFormat(code.n))
    game = answer_reduction_game(src, code, exhaustive_pcpp, gamma=a.gamma, s=a.s)
    strat = ReducedStrategy(src, code)
    out = {"source": a.source, "code": code.descriptor(), "gamma": a.gamma, "s": a.s}
    if a.trials or game.entries is None:
        out["mc"] = mc_value(game, strat, a.trials or 1000, a.seed).report()
    else:
        out["exact_value"] = exact_value(game, strat)
    return out


# -- argument parsing --------------------------------------------------------------------------------

def _parse_params(items) -> dict:
    out = {}
    for it in items or []:
        k, sep, v = it.partition("=")
        if not sep:
            raise CliError(f"malformed param {it!r}, expected key=value")
        try:
            out[k.replace("-", "_")] = json.loads(v)
        except json.JSONDecodeError:
            out[k.replace("-", "_")] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="introspect", description="Introspective MIP* protocol laboratory")
    ap.add_argument("--dim-cap", type=int, help="statevector dimension cap (sets INTROSPECT_DIM_CAP)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gf", help="finite field arithmetic")
    p.add_argument("op", help="add | mul | inv | pow | trace | self-dual")
    p.add_argument("args", nargs="*")
    p.add_argument("--q", type=int, default=16)

    p = sub.add_parser("poly", help="low-degree encoding of a bit string")
    p.add_argument("message")
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--m", type=int, default=2)

    p = sub.add_parser("ldt", help="surface-vs-point test on a random honest polynomial")
    for k, v in (("m", 2), ("d", 2), ("q", 4), ("k", 2)):
        p.add_argument(f"--{k}", type=int, default=v)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sat", help="parse and solve a succinct instance")
    p.add_argument("instance", help="circuit file or bundled toy name")
    p.add_argument("--pcp", action="store_true")
    p.add_argument("--q", type=int, default=16)

    p = sub.add_parser("qsim", help="EPR states and Pauli operators")
    p.add_argument("what", choices=["epr", "x", "z"])
    p.add_argument("vector", nargs="*")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--n", type=int, default=1)

    p = sub.add_parser("game", help="value of a shipped game and strategy")
    p.add_argument("name")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("anred", help="answer reduction")
    p.add_argument("--source", choices=["toy", "intro-neexp"], default="toy")
    p.add_argument("--code", default="ld")
    p.add_argument("--pcpp", default="exhaustive")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run one registered experiment")
    p.add_argument("experiment")
    p.add_argument("--param", action="append", metavar="KEY=JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--timing", action="store_true")
    for k in ("q", "instance"):
        p.add_argument(f"--{k}")

    p = sub.add_parser("suite", help="run every acceptance experiment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the combined report here")
    p.add_argument("--timing", action="store_true", help="also record wall times (in --timing-out)")
    p.add_argument("--timing-out")

    sub.add_parser("list", help="list registered experiments")
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    if a.dim_cap is not None:
        os.environ["INTROSPECT_DIM_CAP"] = str(a.dim_cap)
    try:
        if a.cmd == "run":
            params = _parse_params(a.param)
            for k in ("q", "instance"):
                v = getattr(a, k)
                if v is not None:
                    params[k] = _parse_params([f"{k}={v}"])[k]
            rep = run(ExperimentSpec(a.experiment, params, a.seed, a.trials, a.out), timing=a.timing)
            if not a.out:
                sys.stdout.write(canonical(rep))
            print(f"{rep['experiment']}: {'PASS' if rep['passed'] else 'FAIL'}", file=sys.stderr)
            return 0 if rep["passed"] else 1
        if a.cmd == "suite":
            reports = suite_reports(a.seed, timing=a.timing, log=sys.stderr)
            timings = {r["experiment"]: r.pop("wall_time") for r in reports if "wall_time" in r}
            text = canonical({"schema_version": SCHEMA_VERSION, "seed": a.seed, "reports": reports})
            if a.out:
                Path(a.out).write_text(text)
            else:
                sys.stdout.write(text)
            if a.timing and a.timing_out:
                Path(a.timing_out).write_text(canonical(timings))
            return 0 if all(r["passed"] for r in reports) else 1
        if a.cmd == "list":
            from .experiments import by_criterion
            for e in by_criterion():
                print(f"C{e.criterion}\t{e.name}\t{e.title}")
            return 0
        handler = {"gf": cmd_gf, "poly": cmd_poly, "ldt": cmd_ldt, "sat": cmd_sat, "qsim": cmd_qsim,
                   "game": cmd_game, "anred": cmd_anred}[a.cmd]
        sys.stdout.write(canonical({"schema_version": SCHEMA_VERSION, "command": a.cmd, **handler(a)}))
        return 0
    except (CliError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Two-player one-round games, strategies, exact and sampled values, oracularization."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .gf import field_of_order
from .poly import AffineSubspace, MultiPoly
from .qsim import (
    BipartiteState, HiddenEPR, Layout, Measurement, approx_delta, descriptor_measurement, epr,
    hide, sim_delta,
)
from .rng import as_rng


class GameError(ValueError):
    pass


Pred = Callable[[Any, Any], bool]


@dataclass
class Entry:
    prob: float
    x0: Any
    x1: Any
    pred: Pred
    branch: str = ""


class Game:
    """Question distribution with per-entry acceptance predicates.

    Enumerable games list every (prob, x0, x1, pred); others supply `sampler(rng) -> Entry`.
    """

    def __init__(self, name: str, entries: Sequence[Entry] | None = None, sampler: Callable | None = None,
                 params: dict | None = None, qlength: int | None = None, alength: int | None = None):
        if entries is None and sampler is None:
            raise GameError("a game needs entries or a sampler")
        self.name = name
        self.entries = list(entries) if entries is not None else None
        self._sampler = sampler
        self.params = dict(params or {})
        self.qlength = qlength
        self.alength = alength
        if self.entries is not None:
            tot = math.fsum(e.prob for e in self.entries)
            if abs(tot - 1) > 1e-12:
                raise GameError(f"probabilities of {name} sum to {tot}")
            self._cum = np.cumsum([e.prob for e in self.entries])

    @property
    def enumerable(self) -> bool:
        return self.entries is not None

    def sample(self, rng) -> Entry:
        if self._sampler is not None:
            return self._sampler(rng)
        i = int(np.searchsorted(self._cum, rng.random() * self._cum[-1], side="right"))
        return self.entries[min(i, len(self.entries) - 1)]

    def questions(self, side: int) -> list:
        if not self.enumerable:
            raise GameError("question set of a sampled game is not enumerable")
        seen = {}
        for e in self.entries:
            seen.setdefault(e.x0 if side == 0 else e.x1, True)
        return list(seen)

    def question_distribution(self) -> dict:
        out: dict = {}
        for e in self.entries:
            out[(e.x0, e.x1)] = out.get((e.x0, e.x1), 0.0) + e.prob
        return out

    def descriptor(self) -> dict:
        return {"name": self.name, "params": to_jsonable(self.params), "enumerable": self.enumerable,
                "qlength": self.qlength, "alength": self.alength}


def mixture(name: str, parts: Sequence[tuple[float, Game, str]], params: dict | None = None) -> Game:
    """Play part i with probability weight_i; branch names are prefixed."""
    tot = math.fsum(w for w, _, _ in parts)
    if abs(tot - 1) > 1e-12:
        raise GameError(f"mixture weights sum to {tot}")
    if all(g.enumerable for _, g, _ in parts):
        entries = []
        for w, g, label in parts:
            for e in g.entries:
                entries.append(Entry(w * e.prob, e.x0, e.x1, e.pred, _join(label, e.branch)))
        return Game(name, entries, params=params)
    cum = np.cumsum([w for w, _, _ in parts])

    def sampler(rng):
        i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        w, g, label = parts[min(i, len(parts) - 1)]
        e = g.sample(rng)
        return Entry(e.prob, e.x0, e.x1, e.pred, _join(label, e.branch))

    return Game(name, sampler=sampler, params=params)


def _join(a: str, b: str) -> str:
    return f"{a}/{b}" if a and b else (a or b)


def always_accept_game(question=("q",)) -> Game:
    return Game("trivial", [Entry(1.0, question, question, lambda a, b: True, "trivial")])


def consistency_game(questions: Sequence[Hashable], name: str = "consistency") -> Game:
    """Both players get the same uniformly random question and must answer equally."""
    p = 1.0 / len(questions)
    return Game(name, [Entry(p, x, x, _eq, "consistency") for x in questions])


def _eq(a, b) -> bool:
    return a == b


# -- strategies ------------------------------------------------------------------------

class Strategy:
    symmetric = False

    def answer_distribution(self, x0, x1) -> list[tuple[float, Any, Any]]:
        raise NotImplementedError

    def sample(self, x0, x1, rng) -> tuple[Any, Any]:
        dist = self.answer_distribution(x0, x1)
        probs = np.array([p for p, _, _ in dist])
        i = int(rng.choice(len(dist), p=probs / probs.sum()))
        return dist[i][1], dist[i][2]


class DeterministicStrategy(Strategy):
    """Classical answer functions."""

    def __init__(self, fa: Callable, fb: Callable | None = None):
        self.fa = fa
        self.fb = fb or fa
        self.symmetric = fb is None

    def answer_distribution(self, x0, x1):
        return [(1.0, self.fa(x0), self.fb(x1))]

    def sample(self, x0, x1, rng):
        return self.fa(x0), self.fb(x1)


class QuantumStrategy(Strategy):
    """Shared state plus per-question measurements; meas_b defaults to meas_a (symmetric)."""

    def __init__(self, state: BipartiteState, meas_a: Callable[[Any], Measurement],
                 meas_b: Callable[[Any], Measurement] | None = None):
        self.state = state
        self._ma = meas_a
        self._mb = meas_b or meas_a
        self.symmetric = meas_b is None
        self._cache: dict = {}
        self._gram_cache: dict = {}

    def measurement(self, side: int, x) -> Measurement:
        key = (side if not self.symmetric else 0, x)
        if key not in self._cache:
            self._cache[key] = (self._ma if key[0] == 0 else self._mb)(x)
        return self._cache[key]

    def _left(self, x):
        if x not in self._gram_cache:
            M = self.measurement(0, x)
            psi = self.state.psi
            G = np.stack([np.conj(psi.T) @ A @ psi for A in M.ops])
            self._gram_cache[x] = (M.labels, G.reshape(len(M.ops), -1))
        return self._gram_cache[x]

    def answer_distribution(self, x0, x1):
        la, GA = self._left(x0)
        MB = self.measurement(1, x1)
        GB = np.stack([B.reshape(-1) for B in MB.ops])
        P = np.real(GA @ GB.T)
        out = []
        for i, a in enumerate(la):
            for j, b in enumerate(MB.labels):
                if P[i, j] > 1e-15:
                    out.append((float(P[i, j]), a, b))
        return out


@dataclass
class Plan:
    """Measurement recipe for one question on EPR registers.

    steps: (register, descriptor) pairs; a descriptor may be a callable of the outcomes
    so far (dict register -> outcome). answer maps the final outcome dict to an answer.
    """

    steps: list
    answer: Callable[[dict], Any]


class RecipeStrategy(Strategy):
    """Commuting EPR strategy given by per-question Pauli-type recipes.

    Both players share EPR pairs on `registers` (list of (n, q)). `plan_a(x)` and
    `plan_b(x)` return Plans; symmetric strategies give a single plan function.
    Sampling uses the hidden-variable EPR model; `to_quantum` builds the statevector
    strategy used for exact values.
    """

    def __init__(self, registers: Sequence[tuple[int, int]], plan_a: Callable[[Any], Plan],
                 plan_b: Callable[[Any], Plan] | None = None):
        self.registers = [tuple(r) for r in registers]
        self.fields = [field_of_order(q) for _, q in self.registers]
        self.plan_a = plan_a
        self.plan_b = plan_b or plan_a
        self.symmetric = plan_b is None
        self._quantum = None

    @property
    def layout(self) -> Layout:
        return Layout(self.registers)

    def plan(self, side: int, x) -> Plan:
        return (self.plan_a if side == 0 or self.symmetric else self.plan_b)(x)

    @staticmethod
    def run_plan(plan: Plan, hv: HiddenEPR, side: int):
        outcomes: dict = {}
        for reg, desc in plan.steps:
            d = desc(outcomes) if callable(desc) else desc
            outcomes[reg] = hv.outcome(side, reg, d)
        return plan.answer(outcomes)

    def hidden(self, rng) -> HiddenEPR:
        return HiddenEPR(self.registers, rng)

    def sample(self, x0, x1, rng):
        hv = self.hidden(rng)
        return self.run_plan(self.plan(0, x0), hv, 0), self.run_plan(self.plan(1, x1), hv, 1)

    def measurement(self, side: int, x) -> Measurement:
        return plan_measurement(self.registers, self.fields, self.plan(side, x))

    def to_quantum(self) -> QuantumStrategy:
        if self._quantum is None:
            self.layout.check_cap()
            state = epr(self.fields[0], self.registers[0][0])
            for f, (n, _) in zip(self.fields[1:], self.registers[1:]):
                state = state.kron(epr(f, n))
            ma = lambda x: self.measurement(0, x)
            mb = None if self.symmetric else (lambda x: self.measurement(1, x))
            self._quantum = QuantumStrategy(state, ma, mb)
        return self._quantum

    def answer_distribution(self, x0, x1):
        return self.to_quantum().answer_distribution(x0, x1)


def sampler_distribution(strategy: RecipeStrategy, x0, x1, cap: int = 1 << 16) -> dict:
    """Exact answer law of the hidden-variable sampler, by enumerating every hidden string."""
    regs = strategy.registers
    size = 1
    for n, q in regs:
        size *= q ** (2 * n)
    if size > cap:
        raise GameError(f"{size} hidden configurations exceed the cap {cap}")
    spaces = [list(itertools.product(range(q), repeat=n)) for n, q in regs]
    out: dict = {}
    p = 1.0 / size
    for uZ in itertools.product(*spaces):
        for uX in itertools.product(*spaces):
            hv = HiddenEPR.fixed(regs, uZ, uX)
            key = (strategy.run_plan(strategy.plan(0, x0), hv, 0), strategy.run_plan(strategy.plan(1, x1), hv, 1))
            out[key] = out.get(key, 0.0) + p
    return out


def plan_measurement(registers, fields, plan: Plan) -> Measurement:
    """Enumerate a plan's outcomes and assemble the answer-labelled projectors."""
    dims = [q ** n for n, q in registers]
    acc: dict = {}
    order: list = []

    def embed(reg: int, op: np.ndarray) -> np.ndarray:
        out = np.ones((1, 1), dtype=np.complex128)
        for i, d in enumerate(dims):
            out = np.kron(out, op if i == reg else np.eye(d))
        return out

    def rec(step: int, outcomes: dict, factors: dict):
        if step == len(plan.steps):
            op = np.ones((1, 1), dtype=np.complex128)
            for i, d in enumerate(dims):
                op = np.kron(op, factors.get(i, np.eye(d)))
            label = plan.answer(dict(outcomes))
            if label not in acc:
                acc[label] = np.zeros_like(op)
                order.append(label)
            acc[label] = acc[label] + op
            return
        reg, desc = plan.steps[step]
        if isinstance(reg, tuple):
            raise GameError("superregister steps are supported by the sampler only")
        d = desc(outcomes) if callable(desc) else desc
        M = descriptor_measurement(fields[reg], registers[reg][0], d)
        for a, P in M.items():
            outcomes[reg] = a
            prev = factors.get(reg)
            factors[reg] = P if prev is None else prev @ P
            rec(step + 1, outcomes, factors)
            if prev is None:
                del factors[reg]
            else:
                factors[reg] = prev
            del outcomes[reg]

    rec(0, {}, {})
    return Measurement(order, [acc[a] for a in order])


def build_honest_commuting_strategy(registers, plan_a, plan_b=None) -> RecipeStrategy:
    return RecipeStrategy(registers, plan_a, plan_b)


class MixedStrategy(Strategy):
    """Shared classical randomness over strategies: list of (prob, strategy)."""

    def __init__(self, parts: Sequence[tuple[float, Strategy]]):
        self.parts = list(parts)

    def answer_distribution(self, x0, x1):
        out = []
        for w, s in self.parts:
            out.extend((w * p, a, b) for p, a, b in s.answer_distribution(x0, x1))
        return out

    def sample(self, x0, x1, rng):
        ws = np.array([w for w, _ in self.parts])
        i = int(rng.choice(len(ws), p=ws / ws.sum()))
        return self.parts[i][1].sample(x0, x1, rng)


# -- values ---------------------------------------------------------------------------------

def exact_value(game: Game, strategy: Strategy) -> float:
    """Sum over entries and answer pairs of prob * Pr[a, b] * [accepted]."""
    if not game.enumerable:
        raise GameError(f"{game.name} is not enumerable; use mc_value")
    if isinstance(strategy, RecipeStrategy):
        strategy = strategy.to_quantum()
    tot = 0.0
    for e in game.entries:
        acc = 0.0
        for p, a, b in strategy.answer_distribution(e.x0, e.x1):
            if e.pred(a, b):
                acc += p
        tot += e.prob * acc
    return tot


def branch_values(game: Game, strategy: Strategy) -> dict:
    """Acceptance probability conditioned on each branch label."""
    if isinstance(strategy, RecipeStrategy):
        strategy = strategy.to_quantum()
    num: dict = {}
    den: dict = {}
    for e in game.entries:
        acc = sum(p for p, a, b in strategy.answer_distribution(e.x0, e.x1) if e.pred(a, b))
        num[e.branch] = num.get(e.branch, 0.0) + e.prob * acc
        den[e.branch] = den.get(e.branch, 0.0) + e.prob
    return {k: num[k] / den[k] for k in num}


@dataclass
class McResult:
    estimate: float
    stderr: float
    trials: int
    rejections: int
    seed: int
    transcript: list = dc_field(default_factory=list)

    def report(self) -> dict:
        return {"value": self.estimate, "stderr": self.stderr, "method": "mc", "trials": self.trials,
                "seed": self.seed, "rejections": self.rejections}


def mc_value(game: Game, strategy: Strategy, trials: int, seed: int, transcript: bool = False,
             rng=None) -> McResult:
    if trials < 1:
        raise GameError("trials must be positive")
    rng = rng if rng is not None else as_rng(seed)
    acc = 0
    log = []
    for _ in range(trials):
        e = game.sample(rng)
        a, b = strategy.sample(e.x0, e.x1, rng)
        ok = bool(e.pred(a, b))
        acc += ok
        if transcript:
            log.append({"branch": e.branch, "queries": [to_jsonable(e.x0), to_jsonable(e.x1)],
                        "answers": [to_jsonable(a), to_jsonable(b)], "verdict": ok})
    est = acc / trials
    se = math.sqrt(max(est * (1 - est), 0.0) / trials)
    return McResult(est, se, trials, trials - acc, seed, log)


# -- diagnostics ------------------------------------------------------------------------------

def distance_diagnostics(A: dict, B: dict, state: BipartiteState, dist) -> dict:
    for x in A:
        if set(A[x].labels) != set(B[x].labels):
            raise GameError(f"outcome labels differ on question {x!r}")
    return {"sim_delta": sim_delta(state, A, B, dist), "approx_delta": approx_delta(state, A, B, dist)}


@dataclass
class RegisterParams:
    k: int
    n: tuple
    q: tuple

    def __post_init__(self):
        if len(self.n) != self.k or len(self.q) != self.k:
            raise GameError("register parameter lists must have length k")
        for q in self.q:
            if q < 2 or q & (q - 1):
                raise GameError("register field sizes must be powers of two")

    @property
    def registers(self) -> list[tuple[int, int]]:
        return list(zip(self.n, self.q))


@dataclass
class ValidationReport:
    ok: bool
    violations: list

    def __bool__(self) -> bool:
        return self.ok


def validate_register_strategy(strategy: RecipeStrategy | QuantumStrategy, lam: RegisterParams, kind: str,
                               questions: Iterable, tol: float = 1e-9) -> ValidationReport:
    """Check EPR structure, Pauli-block marginals and untouched hidden registers.

    Questions have the form (W, x2) with W a tuple of "X"/"Z"/"H" of length k; answers
    have the form (u, a2) with u a tuple of per-register strings (None where W_i = H).
    The side layout is the k EPR registers followed by any auxiliary registers.
    """
    if kind not in ("register", "semiregister"):
        raise GameError("kind must be register or semiregister")
    viol = []
    if isinstance(strategy, RecipeStrategy):
        side_layout = strategy.layout
        q_strategy = strategy.to_quantum()
    else:
        side_layout = strategy.state.layout_a
        q_strategy = strategy
    regs = lam.registers
    if list(side_layout.registers[: lam.k]) != regs:
        viol.append(("layout", None, "leading registers do not match the register parameters"))
        return ValidationReport(False, viol)
    # (i) EPR structure
    state = q_strategy.state
    DE = int(np.prod([q ** n for n, q in regs]))
    Da = state.layout_a.dim // DE
    Db = state.layout_b.dim // DE
    T = state.psi.reshape(DE, Da, DE, Db)
    phi = np.einsum("eaeb->ab", T) / np.sqrt(DE)
    fid = float(np.linalg.norm(phi) ** 2)
    if fid < 1 - tol:
        viol.append(("epr", None, f"fidelity with EPR registers is {fid:.3g}"))
    fields = [field_of_order(q) for _, q in regs]
    dims = list(side_layout.dims)
    for x in questions:
        W, _ = x
        M = q_strategy.measurement(0, x)
        # (ii) Pauli-block marginals
        blocks: dict = {}
        for a, A in M.items():
            u = a[0]
            blocks[u] = blocks.get(u, 0) + A
        for u, A in blocks.items():
            expect = np.ones((1, 1), dtype=np.complex128)
            for i, (Wi, (n, q)) in enumerate(zip(W, regs)):
                if Wi == "H":
                    expect = np.kron(expect, np.eye(q ** n))
                else:
                    expect = np.kron(expect, descriptor_measurement(fields[i], n, (Wi,))[u[i]])
            expect = np.kron(expect, np.eye(Da))
            if np.linalg.norm(A - expect) > tol:
                viol.append(("marginal", x, f"first-block marginal differs for outcome {u!r}"))
        # (iii) hidden registers
        hidden = [i for i, Wi in enumerate(W) if Wi == "H"]
        if kind == "semiregister":
            hidden = [i for i in hidden if i != lam.k - 1]
        for i in hidden:
            for a, A in M.items():
                if np.linalg.norm(A - hide(A, side_layout, i)) > tol:
                    viol.append(("hidden", x, f"register {i} is measured"))
                    break
    return ValidationReport(not viol, viol)


# -- oracularization ---------------------------------------------------------------------------

def oracularize(game: Game) -> Game:
    """Verify branch (pair to player b, x_c to the other) and consistency branch, 1/2 each.

    Pair questions are ("P", x0, x1), single questions ("S", x).
    """
    def verify_pred(pred, b, c):
        if b == 0:
            return lambda aA, aB: _pair_ok(aA) and aB == aA[c] and bool(pred(aA[0], aA[1]))
        return lambda aA, aB: _pair_ok(aB) and aA == aB[c] and bool(pred(aB[0], aB[1]))

    def expand(e: Entry) -> list[Entry]:
        out = []
        pair = ("P", e.x0, e.x1)
        for b in (0, 1):
            for c in (0, 1):
                single = ("S", e.x0 if c == 0 else e.x1)
                x0, x1 = (pair, single) if b == 0 else (single, pair)
                out.append(Entry(e.prob / 8, x0, x1, verify_pred(e.pred, b, c), _join("verify", e.branch)))
        out.append(Entry(e.prob / 2, pair, pair, _eq, _join("consistency", e.branch)))
        return out

    params = {"source": game.name}
    if game.enumerable:
        entries = [x for e in game.entries for x in expand(e)]
        return Game(f"oracle({game.name})", entries, params=params)

    def sampler(rng):
        e = game.sample(rng)
        opts = expand(e)
        r = rng.random()
        if r < 0.5:
            return opts[4]
        return opts[int(rng.integers(0, 4))]

    return Game(f"oracle({game.name})", sampler=sampler, params=params)


def _pair_ok(a) -> bool:
    return isinstance(a, tuple) and len(a) == 2


class OracleStrategy(Strategy):
    """Honest oracularized strategy from a symmetric commuting strategy.

    A pair question is answered by measuring both questions' measurements on the same half.
    """

    def __init__(self, base: Strategy):
        if not getattr(base, "symmetric", False):
            raise GameError("oracularized honest strategies need a symmetric base strategy")
        self.base = base
        self.symmetric = True
        self._quantum = None

    def _classical(self, x):
        f = self.base.fa
        return (f(x[1]), f(x[2])) if x[0] == "P" else f(x[1])

    def sample(self, x0, x1, rng):
        base = self.base
        if isinstance(base, RecipeStrategy):
            hv = base.hidden(rng)
            return self._run(x0, hv, 0), self._run(x1, hv, 1)
        if isinstance(base, DeterministicStrategy):
            return self._classical(x0), self._classical(x1)
        return self.to_quantum().sample(x0, x1, rng)

    def _run(self, x, hv, side):
        base = self.base
        if x[0] == "P":
            return (base.run_plan(base.plan(side, x[1]), hv, side), base.run_plan(base.plan(side, x[2]), hv, side))
        return base.run_plan(base.plan(side, x[1]), hv, side)

    def measurement(self, x) -> Measurement:
        base = self.base
        if x[0] == "S":
            return base.measurement(0, x[1])
        M0 = base.measurement(0, x[1])
        M1 = base.measurement(0, x[2])
        labels, ops = [], []
        for a, A in M0.items():
            for b, B in M1.items():
                P = A @ B
                if np.linalg.norm(P) > 1e-12:
                    labels.append((a, b))
                    ops.append(P)
        return Measurement(labels, ops)

    def to_quantum(self) -> QuantumStrategy:
        if self._quantum is None:
            base = self.base.to_quantum() if isinstance(self.base, RecipeStrategy) else self.base
            self._quantum = QuantumStrategy(base.state, self.measurement)
        return self._quantum

    def answer_distribution(self, x0, x1):
        if isinstance(self.base, DeterministicStrategy):
            return [(1.0, self._classical(x0), self._classical(x1))]
        return self.to_quantum().answer_distribution(x0, x1)


# -- JSON helpers -------------------------------------------------------------------------------

def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, AffineSubspace):
        return {"surface": obj.wire()}
    if isinstance(obj, MultiPoly):
        return {"poly": obj.serialize()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (tuple, list)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return repr(obj)


def transcript_lines(records: Sequence[dict], header: dict | None = None) -> str:
    lines = []
    if header is not None:
        lines.append(json.dumps({"header": to_jsonable(header)}, sort_keys=True))
    lines.extend(json.dumps(r, sort_keys=True) for r in records)
    return "\n".join(lines) + ("\n" if lines else "")

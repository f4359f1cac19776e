"""Register-level games: Pauli basis test, data hiding, introspective tests, NEEXP game, compilers.

Register questions have the form (W, aux): W gives one symbol per register ("X", "Z" for a
basis read, "H" for untouched, "B" for a register measured by the auxiliary query) and aux is
the rest of the question. Answers are (u, a2) or (u, a2, xvals) with u one entry per register
(None where nothing was read). Compiled games carry stripped registers inside aux as
("semi", W_k, aux) and Pauli basis questions as ("pauli", x).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import wraps
from typing import Any, Callable, Sequence

import numpy as np

from .games import DeterministicStrategy, Entry, Game, Plan, QuantumStrategy, RecipeStrategy, mixture
from .gf import FieldSpec, field_of_order, rref
from .poly import AffineSubspace, LdParams, MultiPoly, PolyBank, grid_points, ld_encode
from .qsim import Measurement, basis_measurement, descriptor_measurement, epr
from .sat import (
    SatParams, SuccinctInstance, brute_force_sat, honest_format_proof, pcp_prove, sat_value, violated_clause,
    zero_value,
)


class ProtocolError(ValueError):
    pass


def _safe(pred: Callable) -> Callable:
    """Malformed answers reject instead of raising."""
    @wraps(pred)
    def inner(a, b):
        try:
            return bool(pred(a, b))
        except (TypeError, ValueError, IndexError, KeyError, AttributeError):
            return False
    return inner


def _tuple(v) -> tuple:
    return tuple(int(c) for c in v)


def _poly_ok(p, arity: int, d: int) -> bool:
    return isinstance(p, MultiPoly) and p.arity == arity and p.degree() <= d


# -- Pauli basis test ---------------------------------------------------------------------------

@dataclass
class PauliBasisConfig:
    """Pauli basis test on n qudits over F_q with low-degree parameters (h, m, d).

    h is the least power of two at least sqrt(q). The admissibility condition
    64 log(n)^2 / eta^2 <= q is enforced unless `desk` is set, in which case a failure is
    recorded in `waived`.
    """

    n: int
    q: int
    eta: float = 0.5
    desk: bool = False
    waived: list = dc_field(default_factory=list)

    def __post_init__(self):
        if self.q < 2 or self.q & (self.q - 1):
            raise ProtocolError("q must be a power of two")
        if not 0 < self.eta <= 0.5:
            raise ProtocolError("eta must lie in (0, 1/2]")
        if self.n < 2:
            raise ProtocolError("inadmissible derived params: m = 0 for n < 2")
        t = self.q.bit_length() - 1
        self.h = 2 ** ((t + 1) // 2)
        self.m = 2 * math.ceil(math.log(self.n) / math.log(self.q) - 1e-12)
        self.d = self.m * (self.h - 1)
        if self.h ** self.m < self.n:
            raise ProtocolError(f"inadmissible derived params h={self.h}, m={self.m}")
        if self.d >= self.q:
            if not self.desk:
                raise ProtocolError(f"degree d = {self.d} is not below q = {self.q}")
            self.waived.append(f"d = {self.d} >= q = {self.q}")
        bound = 64 * math.log2(self.n) ** 2 / self.eta ** 2
        if bound > self.q:
            if not self.desk:
                raise ProtocolError(f"q = {self.q} is below 64 log(n)^2 / eta^2 = {bound:.1f}")
            self.waived.append(f"q = {self.q} < 64 log(n)^2/eta^2 = {bound:.1f}")
        self.ld = LdParams(self.n, self.h, self.q, self.m)
        self.field = self.ld.field
        self._enc: dict = {}

    def encode(self, u) -> MultiPoly:
        key = _tuple(u)
        if key not in self._enc:
            self._enc[key] = ld_encode(list(key), self.ld)
        return self._enc[key]

    def descriptor(self) -> dict:
        return {"n": self.n, "q": self.q, "eta": self.eta, "h": self.h, "m": self.m, "d": self.d,
                "desk": self.desk, "waived": list(self.waived)}


def basis_answer(cfg: PauliBasisConfig, xb: tuple, u) -> Any:
    """Answer of the low-degree Pauli strategy given the W-basis string u."""
    kind = xb[0]
    if kind == "basis":
        return None if u is None else _tuple(u)
    g = cfg.encode(u)
    if kind == "ldpoint":
        return g.eval(list(xb[2]))
    if kind == "ldplane":
        return g.restrict(xb[2])
    raise ProtocolError(f"unknown basis question {kind!r}")


def _plane_point_pred(s: AffineSubspace, w: tuple, d: int, plane_first: bool):
    lam = [int(c) for c in s.coords(w)]

    def pred(a, b):
        f, val = (a, b) if plane_first else (b, a)
        return _poly_ok(f, s.dim, d) and f.eval(lam) == val
    return _safe(pred)


def ld_pauli_subgame(cfg: PauliBasisConfig, max_entries: int = 200_000) -> Game:
    """W in {X, Z}, a random plane s in F_q^m and a point w on it; plane answer vs point answer."""
    f, q, m, d = cfg.field, cfg.q, cfg.m, cfg.d
    params = {"cfg": cfg.descriptor()}

    def entries_for(W, v, w, prob):
        s = AffineSubspace(f, w, v)
        wt = _tuple(w)
        xs, xp = ("ldplane", W, s), ("ldpoint", W, wt)
        return [Entry(prob / 2, xs, xp, _plane_point_pred(s, wt, d, True), f"ld/{W}"),
                Entry(prob / 2, xp, xs, _plane_point_pred(s, wt, d, False), f"ld/{W}")]

    total = 2 * q ** (3 * m) * 2
    if total <= max_entries:
        pts = grid_points(f, m)
        p = 1.0 / (2 * q ** (3 * m))
        entries = []
        for W in ("X", "Z"):
            for i, j in itertools.product(range(len(pts)), repeat=2):
                for w in pts:
                    entries.extend(entries_for(W, pts[[i, j]], w, p))
        return Game("ld-pauli", entries, params=params)

    def sampler(rng):
        W = ("X", "Z")[int(rng.integers(0, 2))]
        es = entries_for(W, rng.integers(0, q, (2, m)), rng.integers(0, q, m), 2.0)
        return es[int(rng.integers(0, 2))]

    return Game("ld-pauli", sampler=sampler, params=params)


def _cross_pred(cfg: PauliBasisConfig, w: tuple, basis_first: bool):
    def pred(a, b):
        u, val = (a, b) if basis_first else (b, a)
        if not isinstance(u, tuple) or len(u) != cfg.n or any(not 0 <= c < cfg.q for c in u):
            return False
        return cfg.encode(u).eval(list(w)) == val
    return _safe(pred)


def pauli_basis_game(cfg: PauliBasisConfig, core: Game | None = None) -> Game:
    """Half the self-test core, half the cross-check of basis strings against the core's points."""
    core = core if core is not None else ld_pauli_subgame(cfg)
    f, q, m = cfg.field, cfg.q, cfg.m
    entries = []
    p = 1.0 / (2 * q ** m * 2)
    for W in ("X", "Z"):
        for w in grid_points(f, m):
            wt = _tuple(w)
            xb, xp = ("basis", W), ("ldpoint", W, wt)
            entries.append(Entry(p, xb, xp, _cross_pred(cfg, wt, True), f"cross/{W}"))
            entries.append(Entry(p, xp, xb, _cross_pred(cfg, wt, False), f"cross/{W}"))
    cross = Game("basis-cross", entries)
    return mixture("pauli-basis", [(0.5, core, "core"), (0.5, cross, "cross-check")],
                   params={"cfg": cfg.descriptor()})


def pauli_basis_strategy(cfg: PauliBasisConfig, cheat: str | None = None, shift=None) -> RecipeStrategy:
    """Honest low-degree Pauli strategy on one EPR register.

    cheat="wrong-basis": X-basis string queries are answered from a Z-basis read.
    cheat="shift": player 0 answers every query from the string u + shift.
    """
    regs = [(cfg.n, cfg.q)]
    f = cfg.field

    def plan(shift_by=None, swap=False):
        def make(x):
            W = x[1]
            if swap and x[0] == "basis" and W == "X":
                W = "Z"

            def answer(o):
                u = o[0]
                if shift_by is not None:
                    u = f.add_arr(np.asarray(u), np.asarray(shift_by))
                return basis_answer(cfg, x, u)
            return Plan([(0, (W,))], answer)
        return make

    if cheat is None:
        return RecipeStrategy(regs, plan())
    if cheat == "wrong-basis":
        return RecipeStrategy(regs, plan(swap=True))
    if cheat == "shift":
        return RecipeStrategy(regs, plan(shift_by=shift), plan())
    raise ProtocolError(f"unknown cheat {cheat!r}")


# -- data hiding ------------------------------------------------------------------------------

def _second_equal(a, b) -> bool:
    return isinstance(a, tuple) and isinstance(b, tuple) and len(a) >= 2 and len(b) >= 2 and a[1] == b[1]


def data_hiding_game(x: tuple) -> Game:
    """Player b gets x (last register hidden); the other gets x with it replaced by X or Z."""
    if not (isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], tuple) and x[0]):
        raise ProtocolError("data hiding needs a question (W, x2)")
    W, x2 = x
    if W[-1] != "H":
        raise ProtocolError("data hiding needs W_k = H")
    entries = []
    for Wn in ("X", "Z"):
        xp = (W[:-1] + (Wn,), x2)
        entries.append(Entry(0.25, x, xp, _second_equal, f"hide/{Wn}"))
        entries.append(Entry(0.25, xp, x, _second_equal, f"hide/{Wn}"))
    return Game("data-hiding", entries, params={"x": x})


def _register_basis_measurement(field: FieldSpec, n: int, W: str) -> Measurement:
    if W == "H":
        return Measurement([None], [np.eye(field.q ** n)])
    return basis_measurement(field, W, n)


def _kron_all(ms: Sequence[Measurement]) -> Measurement:
    out = Measurement([()], [np.eye(1)])
    for m in ms:
        out = out.kron(m, lambda a, b: a + (b,))
    return out


def data_hiding_cheater(registers: Sequence[tuple[int, int]]) -> QuantumStrategy:
    """Reads the hidden last register in the Z basis and answers that string as a2.

    Asked X on that register, it first reads X (reported in u) and then Z (reported as a2).
    """
    fields = [field_of_order(q) for _, q in registers]
    n_k = registers[-1][0]
    fk = fields[-1]
    Zk = basis_measurement(fk, "Z", n_k)
    Xk = basis_measurement(fk, "X", n_k)

    def last(W):
        if W == "Z":
            return Measurement([(a, a) for a in Zk.labels], Zk.ops)
        if W == "H":
            return Measurement([(None, a) for a in Zk.labels], Zk.ops)
        labels, ops = [], []
        for u, P in Xk.items():
            for a, Q in Zk.items():
                labels.append((u, a))
                ops.append(P @ Q @ P)
        return Measurement(labels, ops, kind="povm")

    def meas(x):
        W, _ = x
        head = _kron_all([_register_basis_measurement(f, n, Wi) for f, (n, _), Wi in zip(fields, registers, W[:-1])])
        M = head.kron(last(W[-1]))
        labels = [(h + (t[0],), t[1]) for h, t in M.labels]
        return Measurement(labels, M.ops, kind=M.kind)

    state = epr(fields[0], registers[0][0])
    for f, (n, _) in zip(fields[1:], registers[1:]):
        state = state.kron(epr(f, n))
    return QuantumStrategy(state, meas)


def data_hiding_cheater_value(n: int, q: int) -> float:
    """Analytic value of the Z-reading cheater: the X branch matches with probability q^-n."""
    return 0.5 * (1 + q ** -n)


# -- auxiliary queries on registers -------------------------------------------------------------

@dataclass(frozen=True)
class Aux:
    """Auxiliary part of a register question.

    x: hidden query tag ("surface", "point", any label, or None for the empty query);
    point: register indices forming the (super)register read by the query;
    dirs: registers holding the direction strings (introspected), or
    v: classical direction tuple (partial data hiding);
    want_x: also report the X-values u . v_i of the point register.
    """

    x: Any = None
    point: tuple = ()
    dirs: tuple = ()
    v: tuple | None = None
    want_x: bool = False

    def to_json(self) -> dict:
        return {"x": self.x, "point": list(self.point), "dirs": list(self.dirs),
                "v": None if self.v is None else [list(r) for r in self.v], "want_x": self.want_x}


def _word(R: int, marks: dict) -> tuple:
    return tuple(marks.get(i, "H") for i in range(R))


def _point_string(a, point: tuple) -> tuple:
    return tuple(c for i in point for c in a[0][i])


def _dirs(a, dirs: tuple) -> list:
    return [a[0][j] for j in dirs]


def _xvals(a):
    return a[2]


def _dot(f: FieldSpec, u, v) -> int:
    acc = 0
    for x, y in zip(u, v):
        acc = f.add(acc, f.mul(int(x), int(y)))
    return acc


def _hide_questions(R: int, point: tuple, dirs: tuple, x) -> dict:
    hide = _word(R, {**{i: "B" for i in point}, **{j: "Z" for j in dirs}})
    zread = _word(R, {**{i: "Z" for i in point}, **{j: "Z" for j in dirs}})
    xread = _word(R, {**{i: "X" for i in point}, **{j: "Z" for j in dirs}})
    return {
        "hide": (hide, Aux(x, point, dirs)),
        "zread": (zread, Aux(x, point, dirs)),
        "hide_x": (hide, Aux(x, point, dirs, want_x=True)),
        "xread": (xread, Aux(None, point, dirs)),
        "x_only": (hide, Aux(None, point, dirs, want_x=True)),
    }


def _four_tests(qs: dict, field: FieldSpec, dirs_of: Callable, point_of: Callable, a2_ok: Callable,
                correct_surface: Callable | None, prefix: str) -> list[Entry]:
    """Entries of the four hiding subtests, 1/4 each, both coin values."""
    def t1(a, b):
        ok = a2_ok(a[1]) and a[1] == b[1]
        if ok and correct_surface is not None:
            ok = correct_surface(a, b)
        return ok

    def t2(a, b):
        return a2_ok(a[1]) and a[1] == b[1]

    def t3(a, b):
        v, v2 = dirs_of(a), dirs_of(b)
        if [tuple(r) for r in v] != [tuple(r) for r in v2]:
            return False
        a1 = point_of(a)
        vv = v
        xv = _xvals(b)
        return len(xv) == len(vv) and all(int(c) == _dot(field, r, a1) for c, r in zip(xv, vv))

    def t4(a, b):
        xa, xb = _xvals(a), _xvals(b)
        return xa is not None and tuple(xa) == tuple(xb)

    tests = [("t1", qs["hide"], qs["zread"], t1), ("t2", qs["hide"], qs["hide_x"], t2),
             ("t3", qs["xread"], qs["x_only"], t3), ("t4", qs["hide_x"], qs["x_only"], t4)]
    out = []
    for label, xb, xo, pred in tests:
        sp = _safe(pred)
        out.append(Entry(1 / 8, xb, xo, sp, f"{prefix}/{label}"))
        out.append(Entry(1 / 8, xo, xb, _safe(lambda a, b, p=pred: p(b, a)), f"{prefix}/{label}"))
    return out


def partial_data_hiding_game(S: Sequence, x, n: int, q: int) -> Game:
    """Partial data hiding on one register of n qudits; v uniform from S, four subtests."""
    f = field_of_order(q)
    tuples = []
    for v in S:
        vt = tuple(_tuple(r) for r in v)
        if any(len(r) != n for r in vt):
            raise ProtocolError("directions must lie in F_q^n")
        _, piv = rref(f, np.array(vt, dtype=np.int64).reshape(len(vt), n))
        if len(piv) != len(vt):
            raise ProtocolError("direction tuples must be linearly independent")
        tuples.append(vt)
    if not tuples:
        raise ProtocolError("S is empty")
    entries = []
    for vt in tuples:
        qs = {}
        for key, (W, aux) in _hide_questions(1, (0,), (), x).items():
            qs[key] = (W, Aux(aux.x, aux.point, (), vt, aux.want_x))
        for e in _four_tests(qs, f, lambda a, vt=vt: vt, lambda a: _point_string(a, (0,)),
                             lambda a2: True, None, "partial-hide"):
            entries.append(Entry(e.prob / len(tuples), e.x0, e.x1, e.pred, e.branch))
    return Game("partial-data-hiding", entries, params={"n": n, "q": q, "x": x, "S": [list(map(list, v)) for v in tuples]})


# -- honest register strategies ----------------------------------------------------------------

def unwrap_question(x) -> tuple[tuple, Any, int]:
    """Strip compiler layers: returns the full W, the core aux and the number of layers."""
    W, aux = x
    layers = 0
    while isinstance(aux, tuple) and len(aux) == 3 and aux[0] == "semi":
        W = tuple(W) + (aux[1],)
        aux = aux[2]
        layers += 1
    return tuple(W), aux, layers


def lift_question(x) -> tuple:
    W, aux = x
    return (tuple(W[:-1]), ("semi", W[-1], aux))


def lift_answer(a) -> tuple:
    return (tuple(a[0][:-1]), (a[0][-1],) + tuple(a[1:]))


def unlift_answer(a) -> tuple:
    return (tuple(a[0]) + (a[1][0],),) + tuple(a[1][1:])


class RegisterProver:
    """Honest commuting EPR prover for register questions.

    functions(point) gives the global polynomials (over the concatenated point registers)
    answered by surface and point queries; basis maps a register index to the Pauli basis
    config used when that register is compiled away. Other aux values are echoed as a2.
    """

    def __init__(self, registers: Sequence[tuple[int, int]], functions: Callable | None = None,
                 basis: dict | None = None, swap_basis: bool = False, surface_shift=None):
        self.registers = [tuple(r) for r in registers]
        self.fields = [field_of_order(q) for _, q in self.registers]
        self.functions = functions
        self.basis = dict(basis or {})
        self.swap_basis = swap_basis
        self.surface_shift = surface_shift
        self._restrictions: dict = {}
        self._banks: dict = {}

    def _values(self, point: tuple, pt) -> tuple:
        bank = self._banks.get(point)
        if bank is None:
            bank = self._banks[point] = PolyBank(self.functions(point))
        return tuple(bank.eval(pt))

    def strategy(self, other: "RegisterProver | None" = None) -> RecipeStrategy:
        return RecipeStrategy(self.registers, self.plan, None if other is None else other.plan)

    def _restrict(self, point: tuple, s: AffineSubspace) -> tuple:
        key = (point, s.key())
        hit = self._restrictions.get(key)
        if hit is None:
            if len(self._restrictions) > 20_000:
                self._restrictions.clear()
            hit = tuple(g.restrict(s) for g in self.functions(point))
            self._restrictions[key] = hit
        return hit

    def plan(self, x) -> Plan:
        W, aux, layers = unwrap_question(x)
        if isinstance(aux, tuple) and len(aux) == 2 and aux[0] == "pauli":
            return self._pauli_plan(W, aux[1], layers + 1)
        steps = [(i, (Wi,)) for i, Wi in enumerate(W) if Wi in ("X", "Z")]
        if not isinstance(aux, Aux):
            def echo(o):
                return _wrap(((*_reads(W, o),), aux), layers)
            return Plan(steps, echo)
        return self._aux_plan(W, aux, steps, layers)

    def _pauli_plan(self, W: tuple, xb: tuple, wraps: int) -> Plan:
        r = len(W)
        cfg = self.basis[r]
        steps = [(i, (Wi,)) for i, Wi in enumerate(W) if Wi in ("X", "Z")]
        Wb = xb[1]
        if self.swap_basis and xb[0] == "basis" and Wb == "X":
            Wb = "Z"
        if Wb in ("X", "Z"):
            steps.append((r, (Wb,)))

        def answer(o):
            ub = o.get(r)
            ans = basis_answer(cfg, xb, ub) if xb[1] != "H" else None
            u = _reads(W, o) + ((_tuple(ub) if xb[0] == "basis" and ub is not None else None),)
            return _wrap((u, ans), wraps)
        return Plan(steps, answer)

    def _aux_plan(self, W: tuple, aux: Aux, steps: list, layers: int) -> Plan:
        point = aux.point
        hidden = bool(point) and W[point[0]] == "B"
        preg = point[0] if len(point) == 1 else tuple(point)
        field = self.fields[point[0]] if point else None

        def directions(o):
            if aux.v is not None:
                return aux.v
            return tuple(_tuple(o[j]) for j in aux.dirs)

        if hidden:
            if aux.x is not None and aux.want_x:
                kind = "PIPX"
            elif aux.x is not None:
                kind = "PI"
            elif aux.want_x:
                kind = "PX"
            else:
                kind = None
            if kind is not None:
                steps = steps + [(preg, lambda o, k=kind: (k, directions(o)))]

        def answer(o):
            v = directions(o) if (aux.dirs or aux.v is not None) else ()
            xv = None
            s = None
            if hidden:
                res = o.get(preg)
                if isinstance(res, tuple) and len(res) == 2 and isinstance(res[0], AffineSubspace):
                    s, xv = res
                elif isinstance(res, AffineSubspace):
                    s = res
                elif res is not None:
                    xv = res
                pt = None
            else:
                pt = tuple(c for i in point for c in o[i]) if point else None
                if pt is not None and aux.x is not None and aux.x != "point":
                    s = AffineSubspace(field, pt, v)
            if s is not None and self.surface_shift is not None:
                s = AffineSubspace(field, field.add_arr(s.intercept, np.asarray(self.surface_shift)), s.directions)
            if aux.x is None:
                a2 = None
            elif aux.x == "surface":
                a2 = (s, self._restrict(point, s))
            elif aux.x == "point":
                a2 = self._values(point, pt)
            else:
                a2 = (aux.x, s)
            ans = (_reads(W, o), a2, None if xv is None else _tuple(xv))
            return _wrap(ans, layers)
        return Plan(steps, answer)


def _reads(W: tuple, o: dict) -> tuple:
    return tuple(_tuple(o[i]) if Wi in ("X", "Z") else None for i, Wi in enumerate(W))


def _wrap(a, times: int):
    for _ in range(times):
        a = lift_answer(a)
    return a


class ZReadCheater(RegisterProver):
    """Partial data hiding cheater: reads the hidden register fully in Z and reports the string.

    Without the X request it answers (x, Z string); with it, it reads the X-values first and
    then the Z string (a non-commuting sequence, so statevector only).
    """

    def measurement_strategy(self) -> QuantumStrategy:
        strat = self.strategy().to_quantum()
        field = self.fields[0]
        n = self.registers[0][0]
        Z = basis_measurement(field, "Z", n)

        def meas(x):
            W, aux = x
            if not isinstance(aux, Aux) or W[0] not in ("B", "Z") or aux.x is None:
                return strat.measurement(0, x)
            if W[0] == "Z":
                return Measurement([((a,), (aux.x, a), None) for a in Z.labels], Z.ops)
            if not aux.want_x:
                return Measurement([((None,), (aux.x, a), None) for a in Z.labels], Z.ops)
            PX = descriptor_measurement(field, n, ("PX", aux.v))
            labels, ops = [], []
            for val, P in PX.items():
                for a, Q in Z.items():
                    labels.append(((None,), (aux.x, a), _tuple(val)))
                    ops.append(P @ Q @ P)
            return Measurement(labels, ops, kind="povm")

        return QuantumStrategy(strat.state, meas)


def partial_hiding_cheater_value(k: int, q: int) -> float:
    """Only subtest 2 fails, and it passes when the disturbed Z string is unchanged (q^-k)."""
    return 0.75 + 0.25 * q ** -k


# -- introspective games ---------------------------------------------------------------------------

def _surface_fmt(n_point: int, d: int, ell: int) -> Callable:
    def ok(a2) -> bool:
        if not (isinstance(a2, tuple) and len(a2) == 2 and isinstance(a2[0], AffineSubspace)):
            return False
        s, fs = a2
        return s.ambient == n_point and len(fs) == ell and all(_poly_ok(p, s.dim, d) for p in fs)
    return ok


def _layout(registers, roles) -> tuple[int, tuple, tuple, FieldSpec, int]:
    point, dirs = roles
    field = field_of_order(registers[point[0]][1])
    n_point = sum(registers[i][0] for i in point)
    for j in dirs:
        if registers[j] != (n_point, field.q):
            raise ProtocolError("register-size mismatch: direction registers must match the point register")
    for i in point:
        if registers[i][1] != field.q:
            raise ProtocolError("register-size mismatch: point registers need a common field")
    return len(registers), tuple(point), tuple(dirs), field, n_point


def intro_hide_game(registers: Sequence[tuple[int, int]], roles: tuple, x, name: str = "intro-hide",
                    a2_ok: Callable | None = None, correct_surface: bool = False, n_point: int | None = None) -> Game:
    """Introspected partial data hiding: directions are read from the dirs registers in Z."""
    registers = [tuple(r) for r in registers]
    R, point, dirs, field, npt = _layout(registers, roles)
    qs = _hide_questions(R, point, dirs, x)

    def cs(a, b):
        s = a[1][0]
        return s == AffineSubspace(field, _point_string(b, point), _dirs(b, dirs))

    entries = _four_tests(qs, field, lambda a: _dirs(a, dirs), lambda a: _point_string(a, point),
                          a2_ok or (lambda a2: True), cs if correct_surface else None, name)
    return Game(name, entries, params={"registers": registers, "roles": [list(point), list(dirs)], "x": x})


def intro_surface_sampler(registers, roles, d: int, ell: int = 1) -> Game:
    """Introspected hiding with x = "surface" and the correct surface check on subtest 1."""
    _, _, _, _, npt = _layout(registers, roles)
    return intro_hide_game(registers, roles, "surface", "intro-surface", _surface_fmt(npt, d, ell), True)


def point_question(registers, point: tuple) -> tuple:
    return (_word(len(registers), {i: "Z" for i in point}), Aux("point", tuple(point)))


def surface_question(registers, roles) -> tuple:
    point, dirs = roles
    return (_word(len(registers), {**{i: "B" for i in point}, **{j: "Z" for j in dirs}}), Aux("surface", tuple(point), tuple(dirs)))


def intro_cross_check(registers, roles, d: int, ell: int = 1) -> Game:
    """Surface prover against points prover: accept iff f(u) = nu."""
    registers = [tuple(r) for r in registers]
    R, point, dirs, field, npt = _layout(registers, roles)
    xs = surface_question(registers, (point, dirs))
    xp = point_question(registers, point)
    fmt = _surface_fmt(npt, d, ell)

    def pred(a, b):
        if not fmt(a[1]):
            return False
        s, fs = a[1]
        u = _point_string(b, point)
        nu = b[1]
        if not s.contains(u) or len(nu) != ell:
            return False
        lam = [int(c) for c in s.coords(u)]
        return all(p.eval(lam) == int(v) for p, v in zip(fs, nu))

    p = _safe(pred)
    entries = [Entry(0.5, xs, xp, p, "intro-cross"), Entry(0.5, xp, xs, _safe(lambda a, b: pred(b, a)), "intro-cross")]
    return Game("intro-cross", entries, params={"registers": registers, "roles": [list(point), list(dirs)], "d": d, "ell": ell})


def intro_low_degree(registers, roles, d: int, ell: int = 1) -> Game:
    """Half the surface sampler, half the cross-check; ell > 1 is the simultaneous variant."""
    return mixture("intro-ldt", [(0.5, intro_surface_sampler(registers, roles, d, ell), "sampler"),
                                 (0.5, intro_cross_check(registers, roles, d, ell), "cross")],
                   params={"registers": [list(r) for r in registers], "roles": [list(roles[0]), list(roles[1])], "d": d, "ell": ell})


def intersecting_lines_game(n: int, q: int, d: int) -> Game:
    """u, v uniform; Alice gets (u + span v, v), Bob (v + span u, u); compare at u + v."""
    f = field_of_order(q)
    pts = grid_points(f, n)
    p = 1.0 / len(pts) ** 2
    entries = []
    for u in pts:
        for v in pts:
            l1, l2 = AffineSubspace(f, u, [v]), AffineSubspace(f, v, [u])
            w = f.add_arr(u, v)
            c1, c2 = [int(c) for c in l1.coords(w)], [int(c) for c in l2.coords(w)]

            def pred(a, b, l1=l1, l2=l2, c1=c1, c2=c2):
                return _poly_ok(a, l1.dim, d) and _poly_ok(b, l2.dim, d) and a.eval(c1) == b.eval(c2)
            entries.append(Entry(p, ("line", l1, _tuple(v)), ("line", l2, _tuple(u)), _safe(pred), "intersect"))
    return Game("intersecting-lines", entries, params={"n": n, "q": q, "d": d})


def lines_strategy(g: MultiPoly, g2: MultiPoly | None = None):
    return DeterministicStrategy(lambda x: g.restrict(x[1]), None if g2 is None else (lambda x: g2.restrict(x[1])))


def intersection_conditional(n: int, q: int) -> dict:
    """Exact law of u + v given (l', u): maps (l', u) to {point: probability}."""
    f = field_of_order(q)
    pts = grid_points(f, n)
    joint: dict = {}
    for u in pts:
        for v in pts:
            key = (AffineSubspace(f, v, [u]), _tuple(u))
            w = _tuple(f.add_arr(u, v))
            d = joint.setdefault(key, {})
            d[w] = d.get(w, 0) + 1
    out = {}
    for key, d in joint.items():
        tot = sum(d.values())
        out[key] = {w: c / tot for w, c in d.items()}
    return out


def intro_intersect_game(registers, regs: tuple, d: int) -> Game:
    """Two line-vs-point tests with swapped roles, the intersecting lines check and a points check."""
    registers = [tuple(r) for r in registers]
    r1, r2 = regs
    roles1, roles2 = ((r1,), (r2,)), ((r2,), (r1,))
    field = field_of_order(registers[r1][1])
    g1 = intro_low_degree(registers, roles1, d)
    g2 = intro_low_degree(registers, roles2, d)
    xl1, xl2 = surface_question(registers, roles1), surface_question(registers, roles2)
    fmt = _surface_fmt(registers[r1][0], d, 1)

    def inter(a, b):
        if not (fmt(a[1]) and fmt(b[1])):
            return False
        l1, (f1,) = a[1]
        l2, (f2,) = b[1]
        v = a[0][r2]
        u = b[0][r1]
        w = field.add_arr(np.asarray(u), np.asarray(v))
        if not (l1.contains(w) and l2.contains(w)):
            return False
        return f1.eval([int(c) for c in l1.coords(w)]) == f2.eval([int(c) for c in l2.coords(w)])

    inter_g = Game("intersect", [Entry(0.5, xl1, xl2, _safe(inter), "intersect"),
                                 Entry(0.5, xl2, xl1, _safe(lambda a, b: inter(b, a)), "intersect")])
    xp1 = point_question(registers, (r1,))
    cons = Game("points-consistency", [Entry(1.0, xp1, xp1, _safe(lambda a, b: a[1] == b[1]), "points")])
    return mixture("intro-intersect", [(0.25, g1, "ld1"), (0.25, g2, "ld2"), (0.25, inter_g, "lines"),
                                       (0.25, cons, "consistency")],
                   params={"registers": [list(r) for r in registers], "regs": list(regs), "d": d})


def global_poly_prover(registers, g: MultiPoly, **kw) -> RegisterProver:
    """Every surface and point query answered from the same global polynomial g."""
    return RegisterProver(registers, lambda point: [g], **kw)


# -- formula and NEEXP games ----------------------------------------------------------------------

def neexp_registers(params: SatParams) -> list[tuple[int, int]]:
    m, q = params.m, params.q
    return [(m, q)] * 3 + [(3 + params.s, q)] + [(params.m_prime, q)] * 2


FORMULA_POINT = (0, 1, 2, 3)


def formula_question(registers) -> tuple:
    return point_question(registers, FORMULA_POINT)


def idle_question(registers) -> tuple:
    return (("H",) * len(registers), None)


def formula_game(params: SatParams, registers=None) -> Game:
    """Player b reads (x1, x2, x3, (b, w)) in Z and reports nu_1..3, mu_1..m'; check sat = zero."""
    registers = [tuple(r) for r in (registers or neexp_registers(params)[:4])]
    xf, xi = formula_question(registers), idle_question(registers)
    mp = params.m_prime

    def pred(a, _):
        vals = a[1]
        if len(vals) != 3 + mp:
            return False
        pt = _point_string(a, FORMULA_POINT)
        return sat_value(params, pt, vals[:3]) == zero_value(params, pt, vals[3:])

    entries = [Entry(0.5, xf, xi, _safe(pred), "formula"),
               Entry(0.5, xi, xf, _safe(lambda a, b: pred(b, a)), "formula")]
    return Game("formula", entries, params=params.descriptor())


def intro_neexp_game(params: SatParams) -> Game:
    """Nine tests at 1/9: LD, two intersecting lines tests, simultaneous LD, formula, four consistency tests."""
    regs = neexp_registers(params)
    d = params.d
    g_ld = intro_low_degree(regs, ((0,), (1, 2)), d)
    g_il1 = intro_intersect_game(regs, (0, 1), d)
    g_il2 = intro_intersect_game(regs, (0, 2), d)
    g_sup = intro_low_degree(regs, (FORMULA_POINT, (4, 5)), d, 3 + params.m_prime)
    g_f = formula_game(params, regs)
    xf = formula_question(regs)
    parts = [(1 / 9, g_ld, "ld"), (1 / 9, g_il1, "il1"), (1 / 9, g_il2, "il2"), (1 / 9, g_sup, "ldsup"),
             (1 / 9, g_f, "formula")]
    for i in range(3):
        xp = point_question(regs, (i,))

        def pred(a, b, i=i):
            return len(a[1]) == 1 and int(a[1][0]) == int(b[1][i])
        cons = Game(f"consistency{i + 1}", [Entry(0.5, xp, xf, _safe(pred), "points-formula"),
                                            Entry(0.5, xf, xp, _safe(lambda a, b, p=pred: p(b, a)), "points-formula")])
        parts.append((1 / 9, cons, f"cons{i + 1}"))
    parts.append((1 / 9, Game("consistency4", [Entry(1.0, xf, xf, _safe(lambda a, b: tuple(a[1]) == tuple(b[1])), "formula-formula")]), "cons4"))
    desc = params.descriptor()
    desc["registers"] = [list(r) for r in regs]
    return mixture("intro-neexp", parts, params=desc)


def neexp_functions(params: SatParams, g: MultiPoly, c: Sequence[MultiPoly]) -> Callable:
    """Point role -> polynomials: g on a single register, (g(x1), g(x2), g(x3), c_1..c_m') on the superregister."""
    mp, m = params.m_prime, params.m
    sup = [g.embed(mp, list(range(i * m, (i + 1) * m))) for i in range(3)] + list(c)

    def functions(point):
        return sup if tuple(point) == FORMULA_POINT else [g]
    return functions


def neexp_prover(params: SatParams, assignment: Sequence[int] | None = None, honest_format: bool = False) -> RegisterProver:
    """Honest prover from a satisfying assignment (brute-forced when omitted).

    honest_format=True builds the same-shaped prover from any assignment (the low-degree
    encoding of it plus the coefficient polynomials of sat - residual), which is how the
    unsatisfiable instance is exercised.
    """
    inst = params.inst
    if assignment is None:
        assignment = brute_force_sat(inst)
        if assignment is None:
            witness = violated_clause(inst, [0] * inst.n_vars)
            raise ProtocolError(f"instance is unsatisfiable; the all-zero assignment violates clause {witness}")
    proof = honest_format_proof(params, assignment) if honest_format else pcp_prove(inst, params, assignment)
    return RegisterProver(neexp_registers(params), neexp_functions(params, proof.g, proof.c))


def formula_rejection_of(params: SatParams, assignment: Sequence[int]):
    from .sat import formula_rejection
    return formula_rejection(params, honest_format_proof(params, assignment))


# -- register compilers ---------------------------------------------------------------------------

def compile_k_to_semi(game: Game, k: int | None = None) -> Game:
    """Half data hiding on the first question when its last register is hidden, half the game."""
    if not game.enumerable:
        raise ProtocolError("compilers need an enumerable game")
    hide = []
    for e in game.entries:
        W = e.x0[0]
        if k is not None and len(W) != k:
            raise ProtocolError("format mismatch between the game and the register parameters")
        if W and W[-1] == "H":
            for h in data_hiding_game(e.x0).entries:
                hide.append(Entry(e.prob * h.prob, h.x0, h.x1, h.pred, h.branch))
        else:
            hide.append(Entry(e.prob, e.x0, e.x1, lambda a, b: True, "hide/skip"))
    return mixture(f"semi({game.name})", [(0.5, Game("hide", hide), "hide"), (0.5, game, "play")])


def _unlifted(pred: Callable) -> Callable:
    return _safe(lambda a, b: pred(unlift_answer(a), unlift_answer(b)))


def compile_semi_to_k_minus_1(game: Game, cfg: PauliBasisConfig, k: int | None = None) -> Game:
    """Pauli basis test on register k, cross-check against it, consistency and play; 1/4 each."""
    if not game.enumerable:
        raise ProtocolError("compilers need an enumerable game")
    k = k if k is not None else len(game.entries[0].x0[0])
    pre = ("H",) * (k - 1)
    for e in game.entries:
        if len(e.x0[0]) != k or len(e.x1[0]) != k:
            raise ProtocolError("format mismatch between the game and the register parameters")

    def pq(xb):
        return (pre, ("pauli", xb))

    basis = [Entry(e.prob, pq(e.x0), pq(e.x1), _safe(lambda a, b, p=e.pred: p(unlift_answer(a)[1], unlift_answer(b)[1])),
                   e.branch) for e in pauli_basis_game(cfg).entries]

    cross = []
    for e in game.entries:
        Wk = e.x0[0][-1]
        xo = pq(("basis", Wk if Wk in ("X", "Z") else "H"))

        def pred(a, b, Wk=Wk):
            ua, ub = unlift_answer(a)[0][-1], unlift_answer(b)[0][-1]
            return ua == ub if Wk in ("X", "Z") else ua is None
        cross.append(Entry(e.prob / 2, lift_question(e.x0), xo, _safe(pred), "cross"))
        cross.append(Entry(e.prob / 2, xo, lift_question(e.x0), _safe(lambda a, b, p=pred: p(b, a)), "cross"))

    cons = [Entry(e.prob, lift_question(e.x0), lift_question(e.x0), _safe(lambda a, b: a == b), "consistency")
            for e in game.entries]
    play = [Entry(e.prob, lift_question(e.x0), lift_question(e.x1), _unlifted(e.pred), e.branch) for e in game.entries]
    return mixture(f"drop({game.name})", [(0.25, Game("basis", basis), "basis"), (0.25, Game("cross", cross), "cross"),
                                          (0.25, Game("consistency", cons), "consistency"), (0.25, Game("play", play), "play")],
                   params={"k": k, "cfg": cfg.descriptor()})


def compile_full(game: Game, cfgs: Sequence[PauliBasisConfig]) -> Game:
    """Alternate the two compilers, stripping registers k, k-1, ..., 1."""
    k = len(cfgs)
    for r in range(k, 0, -1):
        game = compile_semi_to_k_minus_1(compile_k_to_semi(game, r), cfgs[r - 1], r)
    return game


def uniform_compile(family: Callable[[Any], Game], params_machine: Callable[[Any], Sequence[PauliBasisConfig]]) -> Callable[[Any], Game]:
    """Compile every member of a game family with the register parameters its machine reports."""
    def compiled(instance):
        return compile_full(family(instance), params_machine(instance))
    return compiled


def compiled_prover(registers, cfgs: Sequence[PauliBasisConfig], swap_basis: bool = False, **kw) -> RegisterProver:
    return RegisterProver(registers, basis={i: c for i, c in enumerate(cfgs)}, swap_basis=swap_basis, **kw)


def cross_check_question_law(game: Game, strategy) -> dict:
    """Law of the (surface query, point query) pairs an honest run of the cross-check induces,
    keyed like the classical surface-vs-point questions."""
    out: dict = {}
    for e in game.entries:
        if not (isinstance(e.x0[1], Aux) and e.x0[1].x == "surface"):
            continue
        roles = e.x0[1].point, e.x0[1].dirs
        for p, a, b in strategy.answer_distribution(e.x0, e.x1):
            vt = tuple(tuple(a[0][j]) for j in roles[1])
            ut = _point_string(b, roles[0])
            key = (("surface", vt, a[1][0]), ("point", ut))
            out[key] = out.get(key, 0.0) + p * e.prob
    tot = sum(out.values())
    return {k: v / tot for k, v in out.items()}

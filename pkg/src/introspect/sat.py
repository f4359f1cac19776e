"""Circuits, Tseitin formulas, arithmetization, succinct 3SAT and the classical PCP built on them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from importlib import resources
from typing import Callable, Sequence

import numpy as np

from .gf import FieldSpec
from .ldt import AnswerOracle, SurfaceTestConfig, sample_surface_point, surface_point_check
from .poly import AffineSubspace, LdParams, MultiPoly, grid_points, ld_encode, subcube_decompose, zero_poly_coeffs
from .rng import as_rng


class SatError(ValueError):
    pass


GATE_ARITY = {"INPUT": 0, "TRUE": 0, "FALSE": 0, "AND": 2, "OR": 2, "NOT": 1}


# -- circuits ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    args: tuple[int, ...] = ()
    index: int | None = None


class Circuit:
    """Boolean circuit over six gate types; internal gates are everything except INPUT."""

    def __init__(self, n_inputs: int, gates: Sequence[Gate], output: int):
        self.n_inputs = n_inputs
        self.gates = {g.id: g for g in gates}
        if len(self.gates) != len(gates):
            raise SatError("duplicate gate id")
        self.output = output
        self._validate()
        self.order = self._topo()
        self.internal = [i for i in self.order if self.gates[i].kind != "INPUT"]
        self.wire_index = {g: j for j, g in enumerate(self.internal)}

    def _validate(self) -> None:
        for g in self.gates.values():
            if g.kind not in GATE_ARITY:
                raise SatError(f"unknown gate type {g.kind}")
            if len(g.args) != GATE_ARITY[g.kind]:
                raise SatError(f"gate {g.id}: {g.kind} takes {GATE_ARITY[g.kind]} inputs")
            if g.kind == "INPUT" and not (g.index is not None and 0 <= g.index < self.n_inputs):
                raise SatError(f"gate {g.id}: input index out of range")
            for a in g.args:
                if a not in self.gates:
                    raise SatError(f"gate {g.id} references missing gate {a}")
        if self.output not in self.gates:
            raise SatError("output gate missing")

    def _topo(self) -> list[int]:
        state: dict[int, int] = {}
        order: list[int] = []
        for root in sorted(self.gates):
            stack = [(root, False)]
            while stack:
                g, done = stack.pop()
                if done:
                    state[g] = 2
                    order.append(g)
                    continue
                if state.get(g) == 2:
                    continue
                if state.get(g) == 1:
                    self._cycle_error(g)
                state[g] = 1
                stack.append((g, True))
                for a in self.gates[g].args:
                    if state.get(a) == 1:
                        self._cycle_error(a)
                    if state.get(a) != 2:
                        stack.append((a, False))
        return order

    def _cycle_error(self, start: int) -> None:
        # depth-first search for a path from start back to itself
        path, seen = [start], set()
        iters = [iter(self.gates[start].args)]
        while iters:
            a = next(iters[-1], None)
            if a is None:
                iters.pop()
                path.pop()
                continue
            if a == start:
                cyc = " -> ".join(map(str, path + [start]))
                raise SatError(f"circuit is cyclic: {cyc}")
            if a not in seen:
                seen.add(a)
                path.append(a)
                iters.append(iter(self.gates[a].args))
        raise SatError(f"circuit is cyclic through gate {start}")

    @property
    def size(self) -> int:
        return len(self.internal)

    def wires(self, bits: Sequence[int]) -> dict[int, int]:
        if len(bits) != self.n_inputs:
            raise SatError(f"expected {self.n_inputs} input bits")
        val: dict[int, int] = {}
        for i in self.order:
            g = self.gates[i]
            if g.kind == "INPUT":
                val[i] = int(bits[g.index]) & 1
            elif g.kind == "TRUE":
                val[i] = 1
            elif g.kind == "FALSE":
                val[i] = 0
            elif g.kind == "AND":
                val[i] = val[g.args[0]] & val[g.args[1]]
            elif g.kind == "OR":
                val[i] = val[g.args[0]] | val[g.args[1]]
            else:
                val[i] = 1 - val[g.args[0]]
        return val

    def evaluate(self, bits: Sequence[int]) -> int:
        return self.wires(bits)[self.output]

    def wire_values(self, bits: Sequence[int]) -> list[int]:
        """Values of the internal gates in Tseitin variable order."""
        v = self.wires(bits)
        return [v[g] for g in self.internal]

    def serialize(self) -> str:
        lines = [f"inputs {self.n_inputs}"]
        for i in self.order:
            g = self.gates[i]
            if g.kind == "INPUT":
                lines.append(f"gate {g.id} INPUT {g.index}")
            else:
                lines.append(" ".join(["gate", str(g.id), g.kind, *map(str, g.args)]))
        lines.append(f"output {self.output}")
        return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    n_inputs = None
    output = None
    gates = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "inputs":
                n_inputs = int(tok[1])
            elif tok[0] == "output":
                output = int(tok[1])
            elif tok[0] == "gate":
                gid, kind = int(tok[1]), tok[2].upper()
                if kind == "INPUT":
                    if len(tok) != 4:
                        raise SatError(f"line {ln}: INPUT takes one index")
                    gates.append(Gate(gid, kind, (), int(tok[3])))
                else:
                    args = tuple(int(t) for t in tok[3:])
                    if kind in GATE_ARITY and len(args) != GATE_ARITY[kind]:
                        raise SatError(f"line {ln}: {kind} takes {GATE_ARITY[kind]} inputs, got {len(args)}")
                    gates.append(Gate(gid, kind, args))
            else:
                raise SatError(f"line {ln}: unknown directive {tok[0]}")
        except (IndexError, ValueError) as e:
            if isinstance(e, SatError):
                raise
            raise SatError(f"line {ln}: malformed: {raw!r}") from None
    if n_inputs is None or output is None:
        raise SatError("missing inputs or output header")
    return Circuit(n_inputs, gates, output)


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read())


TOY_CORPUS = ("sat_toy", "unsat_toy", "false_toy", "neg_toy", "ortrue_toy")


def bundled_circuit(name: str) -> Circuit:
    text = resources.files("introspect").joinpath("data", f"{name}.circ").read_text()
    return parse_circuit(text)


# -- formulas ---------------------------------------------------------------------------------
# Nodes: ("var", i) | ("const", b) | ("not", a) | ("and", a, b) | ("or", a, b)

class Formula:
    def __init__(self, n_vars: int, root: tuple):
        self.n_vars = n_vars
        self.root = root

    def _walk(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node[1:] if node[0] in ("not", "and", "or") else ())

    @cached_property
    def gate_count(self) -> int:
        return sum(1 for nd in self._walk() if nd[0] in ("not", "and", "or"))

    @cached_property
    def size(self) -> int:
        """Number of leaves; bounds the degree of the arithmetization."""
        return sum(1 for nd in self._walk() if nd[0] in ("var", "const"))

    def evaluate(self, bits: Sequence[int]) -> int:
        def ev(nd):
            k = nd[0]
            if k == "var":
                return int(bits[nd[1]]) & 1
            if k == "const":
                return nd[1]
            if k == "not":
                return 1 - ev(nd[1])
            if k == "and":
                return ev(nd[1]) & ev(nd[2])
            return ev(nd[1]) | ev(nd[2])
        return ev(self.root)


def tseitin(c: Circuit) -> Formula:
    """Formula over (x, w), w indexed by internal gates, true iff w are the wires and the output is 1.

    Each gate contributes z_i = (g_i and w_i) or (not g_i and not w_i); the output literal is
    conjoined last, so the formula has 7s + (s - 1) + 1 gates for AND/OR/NOT circuits.
    """
    n = c.n_inputs

    def ref(gid: int) -> tuple:
        g = c.gates[gid]
        if g.kind == "INPUT":
            return ("var", g.index)
        return ("var", n + c.wire_index[gid])

    def gate_expr(g: Gate) -> tuple:
        if g.kind == "TRUE":
            return ("const", 1)
        if g.kind == "FALSE":
            return ("const", 0)
        if g.kind == "NOT":
            return ("not", ref(g.args[0]))
        return (g.kind.lower(), ref(g.args[0]), ref(g.args[1]))

    out = ref(c.output)
    zs = []
    for gid in c.internal:
        gi = gate_expr(c.gates[gid])
        w = ref(gid)
        zs.append(("or", ("and", gi, w), ("and", ("not", gi), ("not", w))))
    root = out
    for z in reversed(zs):
        root = ("and", z, root)
    return Formula(n + c.size, root)


# -- arithmetization --------------------------------------------------------------------------

class ArithFormula:
    """F_q formula with and -> *, not b -> 1 - b, or a b -> 1 - (1 - a)(1 - b)."""

    def __init__(self, formula: Formula, field: FieldSpec):
        self.formula = formula
        self.field = field
        self.n_vars = formula.n_vars

    def eval_many(self, X) -> np.ndarray:
        f = self.field
        X = np.asarray(X, dtype=np.int64).reshape(-1, self.n_vars)
        one = np.ones(len(X), dtype=np.int64)

        def ev(nd):
            k = nd[0]
            if k == "var":
                return X[:, nd[1]]
            if k == "const":
                return one * nd[1]
            if k == "not":
                return f.sub_arr(one, ev(nd[1]))
            a, b = ev(nd[1]), ev(nd[2])
            if k == "and":
                return f.mul_arr(a, b)
            return f.sub_arr(one, f.mul_arr(f.sub_arr(one, a), f.sub_arr(one, b)))

        return ev(self.formula.root)

    def eval(self, x: Sequence[int]) -> int:
        return int(self.eval_many([list(x)])[0])

    def compose(self, leaves: Sequence[MultiPoly]) -> MultiPoly:
        """Symbolic evaluation with variable i replaced by leaves[i]."""
        f = self.field
        ar = leaves[0].arity
        one = MultiPoly.const(f, ar, 1)

        def ev(nd):
            k = nd[0]
            if k == "var":
                return leaves[nd[1]]
            if k == "const":
                return MultiPoly.const(f, ar, nd[1])
            if k == "not":
                return one - ev(nd[1])
            a, b = ev(nd[1]), ev(nd[2])
            if k == "and":
                return a * b
            return one - (one - a) * (one - b)

        return ev(self.formula.root)

    def to_poly(self, max_vars: int = 12) -> MultiPoly:
        if self.n_vars > max_vars:
            raise SatError(f"symbolic expansion limited to {max_vars} variables")
        return self.compose([MultiPoly.var(self.field, self.n_vars, i) for i in range(self.n_vars)])


def arithmetize(formula: Formula, field: FieldSpec) -> ArithFormula:
    if not isinstance(formula, Formula):
        raise SatError("arithmetization needs a formula (fan-out one); run tseitin on circuits first")
    return ArithFormula(formula, field)


# -- succinct instances -------------------------------------------------------------------------

class SuccinctInstance:
    """Circuit on 3n+3 inputs (u1, u2, u3 big-endian, b1, b2, b3) encoding a 3SAT formula on 2^n variables."""

    def __init__(self, circuit: Circuit, n: int):
        if circuit.n_inputs != 3 * n + 3:
            raise SatError(f"circuit has {circuit.n_inputs} inputs, expected {3 * n + 3}")
        self.circuit = circuit
        self.n = n

    @property
    def n_vars(self) -> int:
        return 2 ** self.n

    @property
    def s(self) -> int:
        return self.circuit.size

    def input_bits(self, i: int, j: int, k: int, b: Sequence[int]) -> list[int]:
        n = self.n
        bits = []
        for u in (i, j, k):
            if not 0 <= u < 2 ** n:
                raise SatError(f"index {u} does not fit in {n} bits")
            bits.extend((u >> (n - 1 - t)) & 1 for t in range(n))
        if len(b) != 3:
            raise SatError("need three literal bits")
        return bits + [int(x) & 1 for x in b]

    def clauses(self) -> list[tuple[int, int, int, int, int, int]]:
        N = self.n_vars
        out = []
        for i, j, k in itertools.product(range(N), repeat=3):
            for b in itertools.product((0, 1), repeat=3):
                if clause_oracle(self, i, j, k, b):
                    out.append((i, j, k, *b))
        return out

    @cached_property
    def formula(self) -> Formula:
        return tseitin(self.circuit)


def clause_oracle(inst: SuccinctInstance, i: int, j: int, k: int, b: Sequence[int]) -> int:
    return inst.circuit.evaluate(inst.input_bits(i, j, k, b))


def violated_clause(inst: SuccinctInstance, a: Sequence[int]):
    """First clause falsified by the assignment, or None."""
    for cl in inst.clauses():
        i, j, k, b1, b2, b3 = cl
        if a[i] != b1 and a[j] != b2 and a[k] != b3:
            return cl
    return None


def brute_force_sat(inst: SuccinctInstance):
    """A satisfying assignment (lexicographically first) or None."""
    cls = inst.clauses()
    for a in itertools.product((0, 1), repeat=inst.n_vars):
        if all(a[i] == b1 or a[j] == b2 or a[k] == b3 for i, j, k, b1, b2, b3 in cls):
            return list(a)
    return None


def pad_circuit(c: Circuit, n: int, N: int) -> Circuit:
    """Circuit on 3N+3 inputs: 0 if any high-order index bit is set, else c on the low bits; exactly 4N gates."""
    if N < n:
        raise SatError("padded width must be at least n")
    S = 4 * N
    gates: list[Gate] = []
    nid = 0

    def new(kind, args=(), index=None):
        nonlocal nid
        gates.append(Gate(nid, kind, tuple(args), index))
        nid += 1
        return nid - 1

    inputs = [new("INPUT", index=t) for t in range(3 * N + 3)]
    remap = {}
    for v in range(3):
        for t in range(n):
            remap[v * n + t] = inputs[v * N + (N - n) + t]
    for t in range(3):
        remap[3 * n + t] = inputs[3 * N + t]
    ids = {}
    for gid in c.order:
        g = c.gates[gid]
        if g.kind == "INPUT":
            ids[gid] = remap[g.index]
        else:
            ids[gid] = new(g.kind, [ids[a] for a in g.args])
    high = [inputs[v * N + t] for v in range(3) for t in range(N - n)]
    body = ids[c.output]
    if high:
        acc = high[0]
        for h in high[1:]:
            acc = new("OR", (acc, h))
        body = new("AND", (new("NOT", (acc,)), body))
    internal = len(gates) - len(inputs)
    if internal > S:
        raise SatError(f"padded circuit needs {internal} gates, more than {S}")
    for _ in range(S - internal):
        new("TRUE")
    return Circuit(3 * N + 3, gates, body)


def pad_instance(inst: SuccinctInstance, N: int) -> SuccinctInstance:
    return SuccinctInstance(pad_circuit(inst.circuit, inst.n, N), N)


# -- parameters and the encoded formula --------------------------------------------------------

class SatParams:
    """Exactly admissible (n, h, q, m) plus derived m' = 3m + 3 + s."""

    def __init__(self, inst: SuccinctInstance, h: int, q: int, m: int, d: int | None = None):
        if h ** m != 2 ** inst.n:
            raise SatError("parameters are not exactly admissible: need h^m = 2^n")
        self.inst = inst
        self.ld = LdParams(2 ** inst.n, h, q, m)
        self.field = self.ld.field
        self.h, self.q, self.m = h, q, m
        self.s = inst.s
        self.m_prime = 3 * m + 3 + self.s
        self.n_prime = 3 * inst.n + 3 + self.s
        self.cube = [list(self.ld.H)] * (3 * m) + [[0, 1]] * (3 + self.s)
        self._d = d

    @cached_property
    def arith(self) -> ArithFormula:
        return arithmetize(self.inst.formula, self.field)

    @cached_property
    def g_psi_poly(self) -> MultiPoly:
        """F_arith(nu(x1), nu(x2), nu(x3), b, w) as a polynomial on F_q^{m'}."""
        f, mp, m, t1 = self.field, self.m_prime, self.m, self.ld.t1
        leaves = []
        for blk in range(3):
            for bit in range(self.inst.n):
                coord = blk * m + bit // t1
                leaves.append(self.ld.mu_polys[bit % t1].embed(mp, [coord]))
        for t in range(3 + self.s):
            leaves.append(MultiPoly.var(f, mp, 3 * m + t))
        return self.arith.compose(leaves)

    @cached_property
    def deg_g_psi(self) -> int:
        return self.g_psi_poly.degree()

    @property
    def d(self) -> int:
        """Low-degree test parameter: bounds deg g and deg c_i when g has degree m(h-1)."""
        if self._d is not None:
            return self._d
        hmin = min(len(H) for H in self.cube)
        return max(self.ld.d, self.deg_g_psi + 3 * max(self.ld.d, 1) - hmin)

    def split(self, point: Sequence[int]):
        m = self.m
        p = [int(v) for v in point]
        if len(p) != self.m_prime:
            raise SatError(f"point has {len(p)} coordinates, expected {self.m_prime}")
        return p[:m], p[m:2 * m], p[2 * m:3 * m], p[3 * m:3 * m + 3], p[3 * m + 3:]

    def descriptor(self) -> dict:
        return {"n": self.inst.n, "h": self.h, "q": self.q, "m": self.m, "s": self.s, "m_prime": self.m_prime, "d": self.d}


def g_psi_eval(inst: SuccinctInstance, params: SatParams, x1, x2, x3, b, w) -> int:
    if len(b) != 3 or len(w) != inst.s or any(len(x) != params.m for x in (x1, x2, x3)):
        raise SatError("argument widths do not match the parameters")
    ld = params.ld
    vals = list(ld.nu(x1)) + list(ld.nu(x2)) + list(ld.nu(x3)) + [int(v) for v in b] + [int(v) for v in w]
    return params.arith.eval(vals)


def sat_value(params: SatParams, point, nu_vals: Sequence[int]) -> int:
    f = params.field
    x1, x2, x3, b, w = params.split(point)
    acc = g_psi_eval(params.inst, params, x1, x2, x3, b, w)
    for v, bi in zip(nu_vals, b):
        acc = f.mul(acc, f.sub(int(v), bi))
    return acc


def zero_value(params: SatParams, point, mu_vals: Sequence[int]) -> int:
    f = params.field
    if len(mu_vals) != params.m_prime:
        raise SatError(f"need {params.m_prime} coefficient values")
    acc = 0
    for H, xi, mu in zip(params.cube, point, mu_vals):
        z = 0
        for c in reversed(zero_poly_coeffs(f, tuple(H))):
            z = f.add(f.mul(z, int(xi)), c)
        acc = f.add(acc, f.mul(z, int(mu)))
    return acc


def sat_and_zero_eval(inst: SuccinctInstance, params: SatParams, point, nu=None, mu=None, g=None, c=None) -> tuple[int, int]:
    """(sat, zero) at a point, from values (nu, mu) or from functions (g, c)."""
    x1, x2, x3, _, _ = params.split(point)
    if nu is None:
        if g is None:
            raise SatError("need nu values or g")
        nu = [g.eval(x) if isinstance(g, MultiPoly) else g(x) for x in (x1, x2, x3)]
    if mu is None:
        if c is None:
            raise SatError("need mu values or c")
        mu = [ci.eval(list(point)) if isinstance(ci, MultiPoly) else ci(point) for ci in c]
    if len(nu) != 3:
        raise SatError("need three nu values")
    return sat_value(params, point, nu), zero_value(params, point, mu)


def sat_poly(params: SatParams, g: MultiPoly) -> MultiPoly:
    f, mp, m = params.field, params.m_prime, params.m
    out = params.g_psi_poly
    for j in range(3):
        gj = g.embed(mp, list(range(j * m, (j + 1) * m)))
        out = out * (gj - MultiPoly.var(f, mp, 3 * m + j))
    return out


def zero_poly_combination(params: SatParams, c: Sequence[MultiPoly]) -> MultiPoly:
    f, mp = params.field, params.m_prime
    out = MultiPoly.zero(f, mp)
    for i, (H, ci) in enumerate(zip(params.cube, c)):
        out = out + MultiPoly.univariate(f, zero_poly_coeffs(f, tuple(H)), mp, i) * ci
    return out


# -- exact measure of nonzero points -------------------------------------------------------------

def nonzero_fraction(p: MultiPoly, order: Sequence[int] | None = None) -> Fraction:
    """Exact Pr_x[p(x) != 0] over all of F_q^k by eliminating one variable at a time.

    The state is the coefficient tensor in the remaining variables, normalized up to a scalar;
    identical states are merged, which keeps structured polynomials tractable.
    """
    f, k, q = p.field, p.arity, p.field.q
    if p.is_zero():
        return Fraction(0)
    order = list(range(k)) if order is None else list(order)
    degs = [max(p.degree_in(i), 0) for i in order]
    T = np.zeros([d + 1 for d in degs], dtype=np.int64)
    for e, c in p.terms.items():
        T[tuple(e[i] for i in order)] = c
    xs = np.arange(q, dtype=np.int64)
    states = {T.tobytes(): (T, 1)}
    for ax, D in enumerate(degs):
        P = np.stack([f.pow_arr(xs, e) for e in range(D + 1)], axis=1)
        new: dict = {}
        for Tc, cnt in states.values():
            rest = Tc.shape[1:]
            R = f.matmul(P, Tc.reshape(D + 1, -1)).reshape((q,) + rest)
            flat = R.reshape(q, -1)
            for x in range(q):
                row = flat[x]
                nz = np.flatnonzero(row)
                if len(nz) == 0:
                    continue
                row = f.mul_arr(row, f.inv(int(row[nz[0]])))
                key = row.tobytes()
                if key in new:
                    new[key] = (new[key][0], new[key][1] + cnt)
                else:
                    new[key] = (row.reshape(rest), cnt)
        states = new
    return Fraction(sum(cnt for _, cnt in states.values()), q ** k)


def nonzero_fraction_brute(p: MultiPoly) -> Fraction:
    pts = grid_points(p.field, p.arity)
    return Fraction(int(np.count_nonzero(p.eval_many(pts))), len(pts))


def interleaved_order(params: SatParams) -> list[int]:
    """Variables of x_j next to b_j, then w; keeps elimination states small."""
    m = params.m
    order = []
    for j in range(3):
        order.extend(range(j * m, (j + 1) * m))
        order.append(3 * m + j)
    order.extend(range(3 * m + 3, params.m_prime))
    return order


# -- the PCP ----------------------------------------------------------------------------------------

class PlanesTable:
    """Lazy planes table: restrictions of fixed polynomials, optionally tampered per plane."""

    def __init__(self, polys: Sequence[MultiPoly]):
        self.polys = list(polys)
        self.overrides: dict = {}
        self._cache: dict = {}

    def __call__(self, s: AffineSubspace) -> list[MultiPoly]:
        key = s.key()
        if key in self.overrides:
            return self.overrides[key][1]
        if key not in self._cache:
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = [p.restrict(s) for p in self.polys]
        return self._cache[key]

    def tamper(self, s: AffineSubspace, answer: list[MultiPoly]) -> None:
        self.overrides[s.key()] = (s, answer)


@dataclass
class PcpProof:
    g: MultiPoly
    c: list[MultiPoly]
    g_planes: PlanesTable
    c_planes: PlanesTable
    residual: MultiPoly | None = None
    assignment: list[int] | None = None

    def g_oracle(self) -> AnswerOracle:
        return _TableOracle(self.g_planes, lambda u: [self.g.eval(list(u))])

    def c_oracle(self) -> AnswerOracle:
        return _TableOracle(self.c_planes, lambda u: [ci.eval(list(u)) for ci in self.c])


class _TableOracle(AnswerOracle):
    def __init__(self, table: PlanesTable, point: Callable):
        self.table, self._point = table, point

    def surface(self, s, v=None):
        return self.table(s)

    def point(self, u):
        return self._point(u)


def honest_format_proof(params: SatParams, assignment: Sequence[int]) -> PcpProof:
    """g = low-degree encoding of the assignment; c = coefficient polynomials of sat_{psi,g}."""
    a = [int(v) & 1 for v in assignment]
    if len(a) != params.inst.n_vars:
        raise SatError(f"assignment must have {params.inst.n_vars} bits")
    g = ld_encode(a, params.ld)
    dec = subcube_decompose(sat_poly(params, g), params.cube)
    return PcpProof(g, dec.coeffs, PlanesTable([g]), PlanesTable(dec.coeffs), dec.residual, a)


def pcp_prove(inst: SuccinctInstance, params: SatParams, assignment: Sequence[int]) -> PcpProof:
    bad = violated_clause(inst, assignment)
    if bad is not None:
        raise SatError(f"assignment violates clause {bad}")
    proof = honest_format_proof(params, assignment)
    assert proof.residual.is_zero()
    return proof


def formula_check(params: SatParams, proof: PcpProof, point) -> bool:
    x1, x2, x3, _, _ = params.split(point)
    nu = [proof.g.eval(x) for x in (x1, x2, x3)]
    mu = [ci.eval(list(point)) for ci in proof.c]
    return sat_value(params, point, nu) == zero_value(params, point, mu)


def pcp_verify(inst: SuccinctInstance, params: SatParams, proof: PcpProof, rng, record: bool = False):
    """Plane-vs-point test on g, simultaneous plane-vs-point on c, and the formula check; accept iff all pass."""
    rng = as_rng(rng)
    d = params.d
    results = {}
    cfg_g = SurfaceTestConfig(params.m, d, params.q, 2, 1)
    _, s, u = sample_surface_point(cfg_g, rng)
    go = proof.g_oracle()
    results["low-degree-g"] = surface_point_check(s, u, go.surface(s), go.point(u), d, 1)[0]
    cfg_c = SurfaceTestConfig(params.m_prime, d, params.q, 2, params.m_prime)
    _, s2, u2 = sample_surface_point(cfg_c, rng)
    co = proof.c_oracle()
    results["low-degree-c"] = surface_point_check(s2, u2, co.surface(s2), co.point(u2), d, params.m_prime)[0]
    pt = rng.integers(0, params.q, params.m_prime)
    results["formula"] = formula_check(params, proof, pt)
    ok = all(results.values())
    if record:
        return ok, {"verdict": ok, "branches": results, "point": [int(v) for v in pt]}
    return ok


def formula_rejection(params: SatParams, proof: PcpProof) -> Fraction:
    """Exact Pr over F_q^{m'} that the formula check rejects."""
    r = proof.residual
    if r is None:
        r = sat_poly(params, proof.g) - zero_poly_combination(params, proof.c)
    return nonzero_fraction(r, interleaved_order(params))


def flat_probability(s: AffineSubspace, k: int) -> Fraction:
    """Pr that u + span(v_1..v_k), v_i iid uniform and u uniform, equals the flat s."""
    q, m, j = s.field.q, s.ambient, s.dim
    if j > k:
        return Fraction(0)
    spanning = 1
    for i in range(j):
        spanning *= q ** k - q ** i
    return Fraction(spanning, q ** (m * k)) * Fraction(q ** j, q ** m)


def low_degree_rejection(table: PlanesTable, d: int, k: int = 2) -> Fraction:
    """Exact rejection of the plane-vs-point test for a planes table over honest point values.

    Untampered entries are restrictions of the table polynomials and always pass when
    those polynomials have degree at most d.
    """
    if any(p.degree() > d for p in table.polys):
        raise SatError("table polynomials exceed the test degree")
    rej = Fraction(0)
    for s, ans in table.overrides.values():
        pts = s.points()
        bad = 0
        for u in pts:
            lam = [int(c) for c in s.coords(u)]
            ok = len(ans) == len(table.polys) and all(
                isinstance(a, MultiPoly) and a.arity == s.dim and a.degree() <= d and a.eval(lam) == p.eval(list(u))
                for a, p in zip(ans, table.polys))
            bad += not ok
        rej += flat_probability(s, k) * Fraction(bad, len(pts))
    return rej


def pcp_acceptance(params: SatParams, proof: PcpProof) -> Fraction:
    """Exact acceptance probability of pcp_verify (its three subtests use independent samples)."""
    d = params.d
    a = 1 - low_degree_rejection(proof.g_planes, d)
    b = 1 - low_degree_rejection(proof.c_planes, d)
    return a * b * (1 - formula_rejection(params, proof))


def agreement_threshold(params: SatParams, d1: int, d2: int) -> Fraction:
    hmax = max(len(H) for H in params.cube)
    return Fraction(max(params.deg_g_psi + 3 * d1, hmax + d2), params.q)


def threshold_check(params: SatParams, proof: PcpProof) -> dict:
    """If sat and zero agree on more than the degree threshold, brute force must find the formula satisfiable."""
    agree = 1 - formula_rejection(params, proof)
    d1 = proof.g.degree()
    d2 = max(ci.degree() for ci in proof.c)
    thr = agreement_threshold(params, max(d1, 0), max(d2, 0))
    satisfiable = brute_force_sat(params.inst) is not None
    return {"agreement": agree, "threshold": thr, "above": agree > thr, "satisfiable": satisfiable,
            "consistent": (not agree > thr) or satisfiable}


def toy_instance(name: str) -> SuccinctInstance:
    c = bundled_circuit(name)
    return SuccinctInstance(c, (c.n_inputs - 3) // 3)


def toy_params(inst: SuccinctInstance, q: int = 16) -> SatParams:
    return SatParams(inst, 2, q, inst.n)

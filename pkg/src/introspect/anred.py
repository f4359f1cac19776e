"""Answer reduction: low-degree code, verifier-code composition, an exhaustive PCPP and the reduced game.

Codewords are symbol strings indexed by F_q^m in grid order. They are carried as `Word`
objects: the coefficient tensor of the unique polynomial of per-variable degree < q with that
evaluation table, so arbitrary strings are representable and low-degree ones stay small.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .games import (
    DeterministicStrategy, Entry, Game, OracleStrategy, RecipeStrategy, Strategy, mixture, oracularize,
)
from .gf import FieldSpec
from .ldt import SurfaceTestConfig, sample_surface_point, subspaces_containing, surface_point_check, surface_vs_point_game
from .poly import AffineSubspace, LdParams, MultiPoly, axis_transform, grid_points


class AnredError(ValueError):
    pass


ALL = "*"


# -- words ---------------------------------------------------------------------------------------

class Word:
    """Function F_q^m -> F_q stored as a coefficient tensor of shape (b,)*m, b minimal."""

    __slots__ = ("field", "m", "C", "_key", "_deg", "_tab")
    TABLE_CAP = 1 << 12  # small words answer point queries from a cached value table

    def __init__(self, field: FieldSpec, m: int, C):
        C = np.asarray(C, dtype=np.int64)
        if C.ndim != m:
            raise AnredError(f"coefficient tensor has {C.ndim} axes, expected {m}")
        if m and len(set(C.shape)) > 1:
            raise AnredError("coefficient tensor must be cubical")
        if m and C.shape[0] > field.q:
            raise AnredError("per-variable degree must stay below q")
        self.field, self.m = field, m
        nz = np.argwhere(C != 0)
        b = int(nz.max()) + 1 if len(nz) else 1
        self.C = C[(slice(0, b),) * m].copy() if m else C.copy()
        self._key = self._deg = self._tab = None

    @property
    def b(self) -> int:
        return self.C.shape[0] if self.m else 1

    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.field.q, self.m, self.C.shape, self.C.tobytes())
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Word(q={self.field.q}, m={self.m}, b={self.b})"

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "Word":
        q = p.field.q
        b = max([max(e) + 1 for e in p.terms if e] + [1])
        if b > q:
            raise AnredError("polynomial is not reduced")
        C = np.zeros((b,) * p.arity, dtype=np.int64)
        for e, c in p.terms.items():
            C[e] = c
        return cls(p.field, p.arity, C)

    @classmethod
    def from_table(cls, field: FieldSpec, m: int, table) -> "Word":
        from .poly import interpolate_grid
        return cls.from_poly(interpolate_grid(field, np.asarray(table, dtype=np.int64).reshape((field.q,) * m)))

    def poly(self) -> MultiPoly:
        nz = np.argwhere(self.C != 0)
        return MultiPoly(self.field, self.m, {tuple(int(x) for x in idx): int(self.C[tuple(idx)]) for idx in nz})

    def degree(self) -> int:
        if self._deg is None:
            nz = np.argwhere(self.C != 0)
            self._deg = int(nz.sum(axis=1).max()) if len(nz) else -1
        return self._deg

    def _powers(self, xs: np.ndarray) -> np.ndarray:
        f = self.field
        P = np.ones(xs.shape + (self.b,), dtype=np.int64)
        for e in range(1, self.b):
            P[..., e] = f.mul_arr(P[..., e - 1], xs)
        return P

    def eval_points(self, X) -> np.ndarray:
        f = self.field
        X = np.asarray(X, dtype=np.int64).reshape(-1, self.m)
        if self.m == 0:
            return np.full(len(X), int(self.C))
        R = np.broadcast_to(self.C.reshape(1, self.b, -1), (len(X), self.b, self.b ** (self.m - 1)))
        for ax in range(self.m):
            P = self._powers(X[:, ax])
            R = f.sum_arr(f.mul_arr(R, P[:, :, None]), axis=1)
            if ax < self.m - 1:
                R = R.reshape(len(X), self.b, -1)
        return R.reshape(len(X))

    def eval(self, x) -> int:
        if self.field.q ** self.m <= self.TABLE_CAP:
            return int(self.table()[point_index(self.field, x)])
        return int(self.eval_points([x])[0])

    def table(self) -> np.ndarray:
        """Values on F_q^m in point_index order (read-only, cached for small words)."""
        if self._tab is not None:
            return self._tab
        f = self.field
        if self.m == 0:
            return np.array([int(self.C)], dtype=np.int64)
        V = np.array([[f.pow(x, e) for e in range(self.b)] for x in range(f.q)], dtype=np.int64)
        T = self.C
        for ax in range(self.m):
            T = axis_transform(f, T, V, ax)
        T = T.reshape(-1)
        T.flags.writeable = False
        if T.size <= self.TABLE_CAP:
            self._tab = T
        return T

    def at(self, idx: Sequence[int]) -> tuple:
        pts = np.array([index_point(self.field, self.m, i) for i in idx], dtype=np.int64).reshape(-1, self.m)
        return tuple(int(v) for v in self.eval_points(pts))

    @property
    def arity(self) -> int:
        return self.m

    def restrict(self, s: AffineSubspace):
        """Restriction to a flat in the flat's coordinates; the whole space in standard
        coordinates returns the word itself."""
        f, k = self.field, s.dim
        if s.ambient != self.m:
            raise AnredError("flat lives in the wrong space")
        if k == self.m and not s.intercept.any() and np.array_equal(s.directions, np.eye(self.m, dtype=np.int64)):
            return self
        if k == 0:
            return MultiPoly.const(f, 0, self.eval(s.intercept))
        D = self.m * (self.b - 1)
        if D < f.q:
            return self._restrict_symbolic(s, D)
        return self._restrict_by_values(s)

    def _restrict_symbolic(self, s: AffineSubspace, D: int) -> MultiPoly:
        """Horner along each axis with coefficients kept as polynomials in the flat coordinates;
        the coefficient grid grows by b - 1 per axis, up to the total degree bound D."""
        f, k, b = self.field, s.dim, self.b
        acc = self.C.reshape((-1,) + (1,) * k)
        size = 1
        for ax in range(self.m - 1, -1, -1):
            c0 = int(s.intercept[ax])
            cs = [int(row[ax]) for row in s.directions]
            size += b - 1
            pad = [(0, 0), (0, 0)] + [(0, b - 1)] * k
            coeffs = np.pad(acc.reshape((-1, b) + acc.shape[1:]), pad)
            out = coeffs[:, b - 1]
            for e in range(b - 2, -1, -1):
                out = f.add_arr(self._times_affine(out, c0, cs), coeffs[:, e])
            acc = out
        acc = acc.reshape(acc.shape[1:])
        nz = np.argwhere(acc != 0)
        return MultiPoly(f, k, {tuple(int(x) for x in idx): int(acc[tuple(idx)]) for idx in nz})

    def _times_affine(self, P: np.ndarray, c0: int, cs: list[int]) -> np.ndarray:
        f = self.field
        out = f.mul_arr(P, c0) if c0 else np.zeros_like(P)
        for i, c in enumerate(cs):
            if not c:
                continue
            sh = np.zeros_like(P)
            src = [slice(None)] * P.ndim
            dst = [slice(None)] * P.ndim
            src[1 + i] = slice(0, -1)
            dst[1 + i] = slice(1, None)
            sh[tuple(dst)] = P[tuple(src)]
            out = f.add_arr(out, f.mul_arr(sh, c))
        return out

    def _restrict_by_values(self, s: AffineSubspace) -> MultiPoly:
        f, k = self.field, s.dim
        lam = grid_points(f, k)
        pts = np.broadcast_to(s.intercept, (len(lam), self.m)).copy()
        for i, row in enumerate(s.directions):
            pts = f.add_arr(pts, f.mul_arr(lam[:, i:i + 1], row[None, :]))
        from .poly import interpolate_grid
        return interpolate_grid(f, self.eval_points(pts).reshape((f.q,) * k))


def index_point(field: FieldSpec, m: int, i: int) -> tuple:
    q = field.q
    return tuple((i // q ** (m - 1 - j)) % q for j in range(m))


def point_index(field: FieldSpec, x) -> int:
    i = 0
    for c in x:
        i = i * field.q + int(c)
    return i


def symbols_at(word: Word, I) -> Any:
    """Symbols of a word on an index set; ALL returns the word itself."""
    if I == ALL:
        return word
    return word.at(I)


# -- codes ---------------------------------------------------------------------------------------

@dataclass
class EfficientCode:
    """Enc, Dec (None for strings off the code), Sub membership and the message embedding mu."""

    enc: Callable[[Sequence[int]], Word]
    dec: Callable[[Any], list | None]
    sub: Callable[[Any], bool]
    mu: Callable[[int], int]
    n: int
    m: int
    q: int
    eta: float
    d: int
    field: FieldSpec

    @property
    def length(self) -> int:
        return self.q ** self.m

    def descriptor(self) -> dict:
        return {"n": self.n, "m": self.m, "q": self.q, "d": self.d, "eta": self.eta}

    def tester(self, F: Sequence, k: int | None = None) -> Game:
        from .ldt import subset_tester_game
        return subset_tester_game(self.m, self.q, self.d, F, k)


def ld_code(params: LdParams) -> EfficientCode:
    """Low-degree code: g_a on F_q^m; Sub is the degree-d polynomials with d = m(h - 1)."""
    f, h, m = params.field, params.h, params.m
    pos = {x: i for i, x in enumerate(params.H)}
    cube = np.array([[pos[c] for c in params.pi(i)] for i in range(params.n)], dtype=np.int64).reshape(params.n, m)
    flat = np.ravel_multi_index(cube.T, (h,) * m) if m else np.zeros(params.n, dtype=np.int64)
    unused = np.setdiff1d(np.arange(h ** m), flat)
    I = params.indicator_matrix
    E = np.array([[f.pow(x, e) for e in range(h)] for x in params.H], dtype=np.int64)
    mu_idx = [point_index(f, params.pi(i)) for i in range(params.n)]

    def enc(a) -> Word:
        a = np.asarray(a, dtype=np.int64).reshape(-1)
        if a.size != params.n or np.any((a != 0) & (a != 1)):
            raise AnredError(f"Enc takes {params.n} bits")
        T = np.zeros(h ** m, dtype=np.int64)
        T[flat] = a
        C = T.reshape((h,) * m)
        for ax in range(m):
            C = axis_transform(f, C, I.T, ax)
        return Word(f, m, C)

    def as_word(w) -> Word | None:
        if isinstance(w, Word):
            return w if w.field == f and w.m == m else None
        if isinstance(w, MultiPoly):
            return Word.from_poly(w) if w.field == f and w.arity == m else None
        arr = np.asarray(w)
        if arr.size != f.q ** m:
            return None
        return Word.from_table(f, m, arr)

    def dec(w):
        w = as_word(w)
        if w is None or w.b > h:
            return None
        C = np.zeros((h,) * m, dtype=np.int64)
        C[(slice(0, w.b),) * m] = w.C
        V = C
        for ax in range(m):
            V = axis_transform(f, V, E, ax)
        V = V.reshape(-1)
        bits = V[flat]
        # per-variable degree < h means w is pinned by its values on H^m, so w is a codeword
        # exactly when those values are bits on the message cells and zero elsewhere
        if np.any((bits != 0) & (bits != 1)) or np.any(V[unused]):
            return None
        return bits.astype(np.uint8)

    def sub(w) -> bool:
        w = as_word(w)
        return w is not None and w.degree() <= params.d

    return EfficientCode(enc, dec, sub, lambda i: mu_idx[i], params.n, m, params.q, params.d / params.q,
                         params.d, f)


# -- answer formats --------------------------------------------------------------------------------

class BitFormat:
    """Answers that are already n-bit tuples."""

    def __init__(self, n: int):
        self.n = n

    def to_bits(self, a) -> list[int]:
        a = [int(v) for v in a]
        if len(a) != self.n or any(v not in (0, 1) for v in a):
            raise AnredError(f"answer is not a {self.n}-bit string")
        return a

    def from_bits(self, bits):
        return None if bits is None else tuple(int(v) for v in bits)


class EnumFormat:
    """Answers from a finite list, encoded by their index in binary."""

    def __init__(self, values: Sequence, n: int | None = None):
        self.values = list(values)
        self._index = {v: i for i, v in enumerate(self.values)}
        need = max(1, math.ceil(math.log2(max(len(self.values), 2))))
        self.n = need if n is None else n
        if self.n < need:
            raise AnredError("too few bits for the answer alphabet")

    def to_bits(self, a) -> list[int]:
        i = self._index[a]
        return [(i >> (self.n - 1 - j)) & 1 for j in range(self.n)]

    def from_bits(self, bits):
        if bits is None:
            return None
        i = 0
        for b in bits:
            i = 2 * i + int(b)
        return self.values[i] if i < len(self.values) else None


class SerialFormat:
    """Structured answers (ints, strings, tuples, flats, polynomials) in a fixed number of bits.

    Layout: 32-bit byte count, the tagged byte encoding, zero padding.
    """

    def __init__(self, n: int, fields: Callable[[int], FieldSpec] | None = None):
        from .gf import field_of_order
        self.n = n
        self.fields = fields or field_of_order

    def to_bits(self, a) -> np.ndarray:
        body = bytes(_ser(a))
        total = 32 + 8 * len(body)
        if total > self.n:
            raise AnredError(f"answer needs {total} bits, the format has {self.n}")
        head = np.unpackbits(np.frombuffer(len(body).to_bytes(4, "big"), dtype=np.uint8))
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8))
        out = np.zeros(self.n, dtype=np.uint8)
        out[:32] = head
        out[32:total] = bits
        return out

    def from_bits(self, bits):
        if bits is None:
            return None
        bits = np.asarray(bits, dtype=np.uint8)
        if len(bits) != self.n:
            return None
        L = int.from_bytes(np.packbits(bits[:32]).tobytes(), "big")
        end = 32 + 8 * L
        if end > self.n or bits[end:].any():
            return None
        data = np.packbits(bits[32:end]).tobytes()
        try:
            obj, pos = _deser(data, 0, self.fields)
        except (IndexError, ValueError, KeyError):
            return None
        return obj if pos == len(data) else None


def _varint(v: int) -> list[int]:
    out = []
    while True:
        b = v & 0x7F
        v >>= 7
        if v:
            out.append(b | 0x80)
        else:
            out.append(b)
            return out


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    v, shift = 0, 0
    while True:
        b = data[pos]
        pos += 1
        v |= (b & 0x7F) << shift
        shift += 7
        if not b & 0x80:
            if b == 0 and shift > 7:
                raise ValueError("non-canonical varint")
            return v, pos


def _ser(a) -> list[int]:
    if a is None:
        return [0]
    if isinstance(a, (bool, np.bool_)):
        return [2 if a else 1]
    if isinstance(a, (int, np.integer)):
        v = int(a)
        return [3] + _varint(2 * v if v >= 0 else -2 * v - 1)
    if isinstance(a, str):
        b = a.encode()
        return [4] + _varint(len(b)) + list(b)
    if isinstance(a, (tuple, list)):
        out = [5] + _varint(len(a))
        for x in a:
            out += _ser(x)
        return out
    if isinstance(a, AffineSubspace):
        out = [6] + _varint(a.field.q) + _varint(a.ambient) + _varint(a.dim)
        for c in a.intercept:
            out += _varint(int(c))
        for row in a.directions:
            for c in row:
                out += _varint(int(c))
        return out
    if isinstance(a, MultiPoly):
        out = [7] + _varint(a.field.q) + _varint(a.arity) + _varint(len(a.terms))
        for e in sorted(a.terms):
            for x in e:
                out += _varint(x)
            out += _varint(a.terms[e])
        return out
    raise AnredError(f"cannot serialize {type(a).__name__}")


def _deser(data: bytes, pos: int, fields):
    tag = data[pos]
    pos += 1
    if tag == 0:
        return None, pos
    if tag in (1, 2):
        return tag == 2, pos
    if tag == 3:
        z, pos = _read_varint(data, pos)
        return (z // 2 if z % 2 == 0 else -(z + 1) // 2), pos
    if tag == 4:
        n, pos = _read_varint(data, pos)
        return data[pos:pos + n].decode(), pos + n
    if tag == 5:
        n, pos = _read_varint(data, pos)
        items = []
        for _ in range(n):
            x, pos = _deser(data, pos, fields)
            items.append(x)
        return tuple(items), pos
    if tag == 6:
        q, pos = _read_varint(data, pos)
        amb, pos = _read_varint(data, pos)
        dim, pos = _read_varint(data, pos)
        vals = []
        for _ in range(amb * (dim + 1)):
            v, pos = _read_varint(data, pos)
            vals.append(v)
        f = fields(q)
        s = AffineSubspace(f, vals[:amb], [vals[amb * (i + 1):amb * (i + 2)] for i in range(dim)])
        if s.dim != dim or list(s.intercept) != vals[:amb]:
            raise ValueError("non-canonical flat")
        return s, pos
    if tag == 7:
        q, pos = _read_varint(data, pos)
        ar, pos = _read_varint(data, pos)
        nt, pos = _read_varint(data, pos)
        terms = {}
        for _ in range(nt):
            e = []
            for _ in range(ar):
                x, pos = _read_varint(data, pos)
                e.append(x)
            c, pos = _read_varint(data, pos)
            if not 0 < c < q:
                raise ValueError("bad coefficient")
            terms[tuple(e)] = c
        if len(terms) != nt:
            raise ValueError("repeated monomial")
        return MultiPoly(fields(q), ar, terms), pos
    raise ValueError(f"unknown tag {tag}")


# -- composition and PCPP ---------------------------------------------------------------------------

def compose_verifier(decider: Callable, code: EfficientCode, fmt) -> Callable:
    """V'(x0, x1, w0, w1): decode both words, then delegate; total (never raises)."""
    def composed(x0, x1, w0, w1) -> bool:
        try:
            b0, b1 = code.dec(w0), code.dec(w1)
            if b0 is None or b1 is None:
                return False
            a0, a1 = fmt.from_bits(b0), fmt.from_bits(b1)
            return bool(decider(x0, x1, a0, a1))
        except (TypeError, ValueError, IndexError, KeyError, AttributeError):
            return False
    return composed


@dataclass
class PcppVerifier:
    """Query planner and decision procedure with declared parameters."""

    plan: Callable[[Any, int, int], tuple]
    decide: Callable[[Any, tuple], bool]
    randomness: int
    queries: int
    proof_length: int

    def descriptor(self) -> dict:
        return {"randomness": self.randomness, "queries": self.queries, "proof_length": self.proof_length}

    def acceptance(self, explicit, implicit: tuple) -> float:
        """Exact acceptance probability of honest query answering, over all randomness."""
        acc = 0
        for r in range(2 ** self.randomness):
            I0, I1, J = self.plan(explicit, self.queries, r)
            acc += bool(self.decide(explicit, (symbols_at(implicit[0], I0), symbols_at(implicit[1], I1), ())))
        return acc / 2 ** self.randomness


def exhaustive_pcpp(composed: Callable, code: EfficientCode) -> PcppVerifier:
    """Reads both implicit words in full and no proof; accepts iff the composed decider does."""
    def plan(explicit, implicit_len, r):
        return ALL, ALL, ()

    def decide(explicit, answered):
        z0, z1, _ = answered
        if not isinstance(z0, Word) or not isinstance(z1, Word):
            return False
        return composed(explicit[0], explicit[1], z0, z1)

    return PcppVerifier(plan, decide, 0, 2 * code.length, 0)


# -- sources --------------------------------------------------------------------------------------

@dataclass
class ArSource:
    """Game to reduce, its honest strategy, answer format and (for quantum sources) the join map.

    join(x0, x1) returns (x, split) where one player asked x can produce both answers via split.
    """

    game: Game
    strategy: Strategy
    fmt: Any
    join: Callable | None = None
    name: str = "source"


def toy_source() -> ArSource:
    """Two one-bit questions, four-bit answers: a_c[0] = x_c, equal tails of even parity."""
    def pred(x0, x1):
        def p(a, b):
            return (isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b) == 4 and a[0] == x0
                    and b[0] == x1 and a[1:] == b[1:] and sum(a[1:]) % 2 == 0)
        return p
    entries = [Entry(0.25, x0, x1, pred(x0, x1), "toy") for x0 in (0, 1) for x1 in (0, 1)]
    honest = DeterministicStrategy(lambda x: (x, 1, 1, 0))
    return ArSource(Game("toy", entries), honest, BitFormat(4), name="toy")


def _oracle_join(x0, x1):
    if x0 == x1 and x0[0] == "P":
        return x0, lambda a: (a, a)
    if x0[0] == "P" and x1[0] == "S":
        c = 0 if x0[1] == x1[1] else 1
        return x0, lambda a, c=c: (a, a[c])
    if x0[0] == "S" and x1[0] == "P":
        c = 0 if x1[1] == x0[1] else 1
        return x1, lambda a, c=c: (a[c], a)
    raise AnredError("question pair has no joint question")


def oracularized_source(game: Game, strategy: Strategy, fmt) -> ArSource:
    """Oracularize the game; its entry predicates act as the decider V(x0, x1, a0, a1)."""
    return ArSource(oracularize(game), OracleStrategy(strategy), fmt, _oracle_join, f"oracle({game.name})")


# -- the reduced game ----------------------------------------------------------------------------

LEAVES = ("verify", "consistency", "answer-cross", "proof-cross", "answer-code", "proof-code")


def _safe(pred: Callable) -> Callable:
    def inner(a, b):
        try:
            return bool(pred(a, b))
        except (TypeError, ValueError, IndexError, KeyError, AttributeError):
            return False
    return inner


def _flip(pred: Callable) -> Callable:
    return lambda a, b: pred(b, a)


def _agree_on(full, part, I) -> bool:
    """`full` answers the verify query on I; `part` answers a superset query T = I + {i}."""
    if I == ALL:
        return isinstance(full, Word) and full == part
    return tuple(full) == tuple(part)[:len(I)]


class _CodeCheck:
    """Subset tester on the word answering ("answer", x, T), plus the low-degree test."""

    def __init__(self, code: EfficientCode, max_entries: int = 2 * 10 ** 5):
        self.code = code
        self.max_entries = max_entries
        self.cfg = SurfaceTestConfig(code.m, code.d, code.q, 2, 1)
        total = code.q ** (code.m * 3)
        self.ld = surface_vs_point_game(self.cfg, max_entries) if total <= max_entries else None
        self.whole = AffineSubspace(code.field, [0] * code.m, np.eye(code.m, dtype=np.int64))

    @property
    def enumerable(self) -> bool:
        return self.ld is not None and self.code.length <= self.max_entries

    def _subspaces(self, T) -> list[AffineSubspace]:
        code, f = self.code, self.code.field
        if T == ALL:
            return [self.whole]
        F = [index_point(f, code.m, i) for i in T]
        return subspaces_containing(f, F, min(len(F) + 1, code.m), code.m)

    def _cross_point(self, tag, x, s: AffineSubspace, w, p: float) -> list[Entry]:
        d = self.code.d
        wt = tuple(int(c) for c in w)
        lam = [int(c) for c in s.coords(w)]

        def pa(g, y):
            g = g[0]
            return isinstance(g, (MultiPoly, Word)) and g.arity == s.dim and g.degree() <= d and g.eval(lam) == y[0]
        sq, pq = ("code", tag, x, ("subspace", s)), ("code", tag, x, ("point", wt))
        return [Entry(p / 2, sq, pq, _safe(pa), "answer-code/cross-point"),
                Entry(p / 2, pq, sq, _safe(_flip(pa)), "answer-code/cross-point")]

    def _cross_subset(self, tag, x, s: AffineSubspace, T, p: float) -> list[Entry]:
        code, f, d = self.code, self.code.field, self.code.d

        def pb(g, ans):
            g = g[0]
            if not (isinstance(g, (MultiPoly, Word)) and g.arity == s.dim and g.degree() <= d):
                return False
            if T == ALL:
                return isinstance(ans, Word) and (g if isinstance(g, Word) else Word.from_poly(g)) == ans
            lam = [[int(c) for c in s.coords(index_point(f, code.m, i))] for i in T]
            return len(ans) == len(T) and all(g.eval(l) == v for l, v in zip(lam, ans))
        sq, aq = ("code", tag, x, ("subspace", s)), ("answer", tag, x, T)
        return [Entry(p / 2, sq, aq, _safe(pb), "answer-code/cross-subset"),
                Entry(p / 2, aq, sq, _safe(_flip(pb)), "answer-code/cross-subset")]

    def cross_game(self, tag, x, T) -> Game:
        """Half a point of the subspace against the subspace, half the answer query against it."""
        subs = self._subspaces(T)
        if self.enumerable:
            out = []
            for s in subs:
                pts = s.points()
                for w in pts:
                    out += self._cross_point(tag, x, s, w, 1.0 / (2 * len(subs) * len(pts)))
                out += self._cross_subset(tag, x, s, T, 1.0 / (2 * len(subs)))
            return Game("cross", out)

        def sampler(rng):
            s = subs[int(rng.integers(0, len(subs)))]
            if rng.random() < 0.5:
                lam = rng.integers(0, self.code.q, s.dim)
                es = self._cross_point(tag, x, s, s.point(lam), 2.0)
            else:
                es = self._cross_subset(tag, x, s, T, 2.0)
            return es[int(rng.integers(0, 2))]
        return Game("cross", sampler=sampler)

    def _ld_entry(self, e: Entry, tag, x) -> Entry:
        return Entry(e.prob, ("code", tag, x, e.x0), ("code", tag, x, e.x1), _safe(e.pred), "answer-code/low-degree")

    def game(self, tag, x, T) -> Game:
        cross = self.cross_game(tag, x, T)
        if self.ld is not None:
            ld = Game("low-degree", [self._ld_entry(e, tag, x) for e in self.ld.entries])
        else:
            def sampler(rng, tag=tag, x=x):
                v, s, u = sample_surface_point(self.cfg, rng)
                vt = tuple(tuple(int(c) for c in r) for r in v)
                ut = tuple(int(c) for c in u)
                e = Entry(1.0, ("surface", vt, s), ("point", ut),
                          lambda a, b, s=s, ut=ut: surface_point_check(s, ut, a, b, self.cfg.d, 1)[0])
                return self._ld_entry(e, tag, x)
            ld = Game("low-degree", sampler=sampler)
        return mixture("code-check", [(0.5, ld, "low-degree"), (0.5, cross, "cross")])


def answer_reduction_game(source: ArSource, code: EfficientCode, pcpp: Callable | None = None,
                          gamma: float = 0.1, s: float = 0.1) -> Game:
    """Six leaf tests with weight 1/6 each over the source's question distribution.

    Questions: ("verify", x0, x1, I0, I1, J), ("answer", c, x, T), ("proof", x0, x1, J'),
    ("code", c, x, inner) and ("idle",). `pcpp(composed, code)` builds the PCPP verifier for
    each question pair; index sets are ALL under the exhaustive PCPP.
    """
    if not 0 < gamma < 1 or not 0 <= s < 1:
        raise AnredError("gamma must lie in (0, 1) and s in [0, 1)")
    if 1 - code.eta < 2 * gamma:
        raise AnredError(f"parameter hypothesis violated: 1 - eta = {1 - code.eta:.3f} < 2 gamma = {2 * gamma:.3f}")
    fmt = source.fmt
    if fmt.n != code.n:
        raise AnredError("answer format and code disagree on the message length")
    pcpp = pcpp or exhaustive_pcpp
    probe = pcpp(compose_verifier(lambda *a: True, code, fmt), code)
    checker = _CodeCheck(code)
    L = code.length

    def extra(I, i):
        return ALL if I == ALL else tuple(I) + (i,)

    def expand(e: Entry) -> list[tuple[float, Game | list, str]]:
        x0, x1 = e.x0, e.x1
        P = pcpp(compose_verifier(lambda y0, y1, a0, a1: e.pred(a0, a1), code, fmt), code)
        if P.randomness:
            raise AnredError("randomized PCPP plans are not enumerated")
        I0, I1, J = P.plan((x0, x1), L, 0)
        vq = ("verify", x0, x1, I0, I1, J)

        def verify(a, _):
            return P.decide((x0, x1), tuple(a))

        leaves: dict[str, list[Entry]] = {k: [] for k in LEAVES}
        idle = ("idle",)
        leaves["verify"] = [Entry(0.5, vq, idle, _safe(verify), "verify"),
                            Entry(0.5, idle, vq, _safe(_flip(verify)), "verify")]
        leaves["consistency"] = [Entry(1.0, vq, vq, _safe(lambda a, b: a == b), "consistency")]
        idx = range(L) if I0 != ALL else [None]
        for c, (xc, Ic) in enumerate(((x0, I0), (x1, I1))):
            for i in idx:
                aq = ("answer", c, xc, extra(Ic, i))
                pred = _safe(lambda a, b, c=c, Ic=Ic: _agree_on(a[c], b, Ic))
                w = 0.5 / len(idx)
                leaves["answer-cross"] += [Entry(w / 2, vq, aq, pred, "answer-cross"),
                                           Entry(w / 2, aq, vq, _flip(pred), "answer-cross")]
        jdx = range(P.proof_length) if P.proof_length else [None]
        for j in jdx:
            Jp = tuple(J) + ((j,) if j is not None else ())
            pq = ("proof", x0, x1, Jp)
            pred = _safe(lambda a, b: tuple(a[2]) == tuple(b)[:len(J)])
            leaves["proof-cross"] += [Entry(0.5 / len(jdx), vq, pq, pred, "proof-cross"),
                                      Entry(0.5 / len(jdx), pq, vq, _flip(pred), "proof-cross")]
        parts = [(1 / 6, Game(k, leaves[k]), k) for k in ("verify", "consistency", "answer-cross", "proof-cross")]
        code_parts = []
        for c, (xc, Ic) in enumerate(((x0, I0), (x1, I1))):
            for i in idx:
                code_parts.append((0.5 / len(idx), checker.game(c, xc, extra(Ic, i)), f"c{c}"))
        parts.append((1 / 6, mixture("answer-code", code_parts), "answer-code"))
        if P.proof_length == 0:
            pc = Game("proof-code", [Entry(1.0, idle, idle, lambda a, b: True, "proof-code")])
        else:
            raise AnredError("proof code checks need a PCPP with a proof")
        parts.append((1 / 6, pc, "proof-code"))
        return parts

    params = {"source": source.name, "code": code.descriptor(), "pcpp": probe.descriptor(), "gamma": gamma, "s": s,
              "leaves": list(LEAVES)}
    if source.game.enumerable and checker.enumerable:
        parts = []
        for e in source.game.entries:
            parts.append((e.prob, mixture("round", expand(e)), e.branch))
        return mixture(f"anred({source.name})", parts, params=params)

    def sampler(rng):
        e = source.game.sample(rng)
        return mixture("round", expand(e)).sample(rng)
    return Game(f"anred({source.name})", sampler=sampler, params=params)


class ReducedStrategy(Strategy):
    """Honest reduced prover: answer the source question(s), encode, serve symbols.

    tamper(word, x) may replace the word served for code-check and answer questions;
    verify_override(x0, x1, a0, a1) may replace the answer pair encoded in verify answers.
    """

    def __init__(self, source: ArSource, code: EfficientCode, proof: Callable | None = None,
                 tamper: Callable | None = None, verify_override: Callable | None = None):
        self.source = source
        self.code = code
        self.proof = proof or (lambda x0, x1, a0, a1: ())
        self.tamper = tamper
        self.verify_override = verify_override
        self.symmetric = True
        self._enc: dict = {}
        self._restrict: dict = {}

    def encode(self, a) -> Word:
        bits = self.source.fmt.to_bits(a)
        key = np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()
        hit = self._enc.get(key)
        if hit is None:
            if len(self._enc) > 4096:
                self._enc.clear()
            hit = self._enc[key] = self.code.enc(bits)
        return hit

    def _route(self, x):
        """Source question to ask and how to turn its answer into the reduced answer."""
        kind = x[0]
        if kind == "idle":
            return None, lambda a: None
        if kind in ("verify", "proof"):
            x0, x1 = x[1], x[2]
            if self.source.join is None:
                q = ("both", x0, x1)
                split = lambda a: a
            else:
                q, split = self.source.join(x0, x1)
            if kind == "proof":
                J = x[3]
                return q, lambda a: tuple(self.proof(x0, x1, *split(a)))[:len(J)]

            def post(a):
                a0, a1 = split(a)
                if self.verify_override is not None:
                    a0, a1 = self.verify_override(x0, x1, a0, a1)
                return (symbols_at(self.encode(a0), x[3]), symbols_at(self.encode(a1), x[4]),
                        tuple(self.proof(x0, x1, a0, a1))[:len(x[5])])
            return q, post
        if kind == "answer":
            _, c, xc, T = x
            return ("one", c, xc), lambda a: symbols_at(self._word(a, x), T)
        if kind == "code":
            _, c, xc, inner = x
            return ("one", c, xc), lambda a: self._code_answer(self._word(a, x), inner)
        raise AnredError(f"unknown question {kind!r}")

    def _word(self, a, x) -> Word:
        w = self.encode(a)
        return self.tamper(w, x) if self.tamper is not None else w

    def _code_answer(self, w: Word, inner):
        kind = inner[0]
        if kind == "point":
            return [w.eval(inner[1])]
        s = inner[2] if kind == "surface" else inner[1]
        key = (w, s.key())
        hit = self._restrict.get(key)
        if hit is None:
            if len(self._restrict) > 4096:
                self._restrict.clear()
            hit = self._restrict[key] = [w.restrict(s)]
        return hit

    def _ask(self, q, side: int, ctx):
        if q is None:
            return None
        base = self.source.strategy
        if q[0] == "both":
            return (ctx(0, q[1]), ctx(1, q[2]))
        if q[0] == "one":
            return ctx(q[1], q[2]) if self.source.join is None else ctx(side, q[2])
        return ctx(side, q)

    def sample(self, x0, x1, rng):
        base = self.source.strategy
        r0, r1 = self._route(x0), self._route(x1)
        if isinstance(base, DeterministicStrategy):
            ctx = lambda side, x: (base.fa if side == 0 else base.fb)(x)
        elif isinstance(base, OracleStrategy) and isinstance(base.base, RecipeStrategy):
            hv = base.base.hidden(rng)
            ctx = lambda side, x: base._run(x, hv, side)
        elif isinstance(base, RecipeStrategy):
            hv = base.hidden(rng)
            ctx = lambda side, x: base.run_plan(base.plan(side, x), hv, side)
        else:
            raise AnredError("sampling needs a deterministic or recipe-based source strategy")
        return r0[1](self._ask(r0[0], 0, ctx)), r1[1](self._ask(r1[0], 1, ctx))

    def answer_distribution(self, x0, x1):
        base = self.source.strategy
        r0, r1 = self._route(x0), self._route(x1)
        if isinstance(base, DeterministicStrategy):
            ctx = lambda side, x: (base.fa if side == 0 else base.fb)(x)
            return [(1.0, r0[1](self._ask(r0[0], 0, ctx)), r1[1](self._ask(r1[0], 1, ctx)))]
        q0, q1 = self._source_q(r0[0]), self._source_q(r1[0])
        out = []
        if q0 is None and q1 is None:
            return [(1.0, r0[1](None), r1[1](None))]
        if q0 is None or q1 is None:
            q = q1 if q0 is None else q0
            for p, a, b in base.answer_distribution(q, q):
                out.append((p, r0[1](a if q0 is not None else None), r1[1](b if q1 is not None else None)))
            return out
        for p, a, b in base.answer_distribution(q0, q1):
            out.append((p, r0[1](a), r1[1](b)))
        return out

    def _source_q(self, q):
        if q is None:
            return None
        if q[0] == "one":
            return q[2]
        if q[0] == "both":
            raise AnredError("quantum sources need a join map")
        return q


def non_codeword_tamper(code: EfficientCode, index: int = 0) -> Callable:
    """Serve the honest word with one symbol changed, which leaves the code."""
    memo: dict = {}

    def tamper(w: Word, x) -> Word:
        hit = memo.get(w)
        if hit is None:
            t = w.table().copy()
            t[index] = code.field.add(int(t[index]), 1)
            hit = memo[w] = Word.from_table(code.field, code.m, t)
        return hit
    return tamper


def neexp_answer_code(n_bits: int, q: int = 32) -> LdParams:
    """Binary low-degree code (h = 2) long enough for n_bits, over F_q."""
    m = max(1, math.ceil(math.log2(n_bits)))
    return LdParams(2 ** m, 2, q, m)

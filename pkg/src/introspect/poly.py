"""Sparse multivariate polynomials over GF(q), affine flats and the low-degree encoding."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .gf import FieldError, FieldSpec, inverse, rref, self_dual_basis


class PolyError(ValueError):
    pass


Exp = tuple[int, ...]


class MultiPoly:
    """Polynomial in `arity` variables stored as {exponent tuple: nonzero coefficient}."""

    __slots__ = ("field", "arity", "terms", "_arrays")

    def __init__(self, field: FieldSpec, arity: int, terms: Mapping[Exp, int] | None = None):
        self.field = field
        self.arity = arity
        clean: dict[Exp, int] = {}
        for e, c in (terms or {}).items():
            if len(e) != arity:
                raise PolyError(f"exponent {e} does not match arity {arity}")
            c = int(c)
            if c:
                clean[tuple(int(x) for x in e)] = c
        self.terms = clean
        self._arrays = None

    # -- constructors ------------------------------------------------------------
    @classmethod
    def zero(cls, field: FieldSpec, arity: int) -> "MultiPoly":
        return cls(field, arity)

    @classmethod
    def const(cls, field: FieldSpec, arity: int, c: int) -> "MultiPoly":
        return cls(field, arity, {(0,) * arity: c})

    @classmethod
    def var(cls, field: FieldSpec, arity: int, i: int) -> "MultiPoly":
        e = [0] * arity
        e[i] = 1
        return cls(field, arity, {tuple(e): 1})

    @classmethod
    def univariate(cls, field: FieldSpec, coeffs: Sequence[int], arity: int = 1, var: int = 0) -> "MultiPoly":
        terms = {}
        for d, c in enumerate(coeffs):
            e = [0] * arity
            e[var] = d
            terms[tuple(e)] = c
        return cls(field, arity, terms)

    # -- basic structure -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def variables(self) -> set[int]:
        return {i for e in self.terms for i, x in enumerate(e) if x}

    def _check(self, other: "MultiPoly") -> None:
        if other.field != self.field or other.arity != self.arity:
            raise PolyError("field or arity mismatch")

    def __eq__(self, other) -> bool:
        return (isinstance(other, MultiPoly) and self.field == other.field
                and self.arity == other.arity and self.terms == other.terms)

    def __hash__(self) -> int:
        return hash((self.arity, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key):
            mono = "*".join(f"x{i}^{d}" if d > 1 else f"x{i}" for i, d in enumerate(e) if d)
            c = format(self.terms[e], "x")
            parts.append(c if not mono else (mono if c == "1" else f"{c}*{mono}"))
        return " + ".join(parts)

    # -- arithmetic ------------------------------------------------------------------
    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        f = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = f.add(out.get(e, 0), c)
        return MultiPoly(f, self.arity, out)

    def __neg__(self) -> "MultiPoly":
        f = self.field
        return MultiPoly(f, self.arity, {e: f.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def scale(self, c: int) -> "MultiPoly":
        f = self.field
        return MultiPoly(f, self.arity, {e: f.mul(v, c) for e, v in self.terms.items()})

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        f = self.field
        out: dict[Exp, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = f.add(out.get(e, 0), f.mul(c1, c2))
        return MultiPoly(f, self.arity, out)

    def __pow__(self, n: int) -> "MultiPoly":
        result = MultiPoly.const(self.field, self.arity, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def add_const(self, c: int) -> "MultiPoly":
        return self + MultiPoly.const(self.field, self.arity, c)

    def embed(self, arity: int, positions: Sequence[int]) -> "MultiPoly":
        """Rename variable i to variable positions[i] inside a larger arity."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * arity
            for i, d in enumerate(e):
                ne[positions[i]] += d
            out[tuple(ne)] = c
        return MultiPoly(self.field, arity, out)

    def normalize(self) -> "MultiPoly":
        """Reduce exponents with x^q = x; the result agrees with self as a function."""
        f = self.field
        q = f.q
        out: dict[Exp, int] = {}
        for e, c in self.terms.items():
            ne = tuple(d if d < q else ((d - 1) % (q - 1)) + 1 for d in e)
            out[ne] = f.add(out.get(ne, 0), c)
        return MultiPoly(f, self.arity, out)

    # -- evaluation ----------------------------------------------------------------
    def _term_arrays(self):
        if self._arrays is None:
            keys = list(self.terms)
            E = np.array(keys, dtype=np.int64).reshape(len(keys), self.arity)
            C = np.array([self.terms[k] for k in keys], dtype=np.int64)
            self._arrays = (E, C)
        return self._arrays

    def eval(self, x: Sequence[int]) -> int:
        if len(x) != self.arity:
            raise PolyError(f"point of length {len(x)} for arity {self.arity}")
        f = self.field
        acc = 0
        for e, c in self.terms.items():
            v = c
            for xi, d in zip(x, e):
                if d:
                    v = f.mul(v, f.pow(int(xi), d))
            acc = f.add(acc, v)
        return acc

    def __call__(self, *x) -> int:
        if len(x) == 1 and not isinstance(x[0], (int, np.integer)):
            x = tuple(x[0])
        return self.eval([int(v) for v in x])

    def eval_many(self, X) -> np.ndarray:
        """Evaluate at every row of an (N, arity) integer array."""
        f = self.field
        X = np.asarray(X, dtype=np.int64).reshape(-1, self.arity)
        if not self.terms:
            return np.zeros(len(X), dtype=np.int64)
        E, C = self._term_arrays()
        qm1 = f.q - 1
        logs = f.log[X] % qm1 if qm1 else np.zeros_like(X)
        S = (logs @ E.T + f.log[C][None, :]) % max(qm1, 1)
        vals = f.exp[S]
        vanish = ((X == 0).astype(np.int64) @ (E > 0).T.astype(np.int64)) > 0
        vals = np.where(vanish, 0, vals)
        return f.sum_arr(vals, axis=1)

    # -- restriction to flats ----------------------------------------------------------
    def restrict(self, s: "AffineSubspace", method: str = "auto") -> "MultiPoly":
        """f'(lam) = f(u + sum lam_i w_i), a polynomial in dim(s) variables.

        `symbolic` expands the substitution exactly. `interp` evaluates on the flat and
        interpolates, which is exact when deg f < q. `auto` picks interpolation when valid.
        """
        if s.ambient != self.arity:
            raise PolyError("ambient dimension mismatch")
        if method == "auto":
            method = "interp" if self.degree() < self.field.q and self.field.q ** s.dim <= 1 << 16 else "symbolic"
        if method == "interp":
            return interpolate_grid(self.field, self.eval_many(s.points()).reshape((self.field.q,) * s.dim))
        return self._restrict_symbolic(s.intercept, s.directions)

    def restrict_raw(self, u: Sequence[int], dirs: Sequence[Sequence[int]]) -> "MultiPoly":
        """Restriction along a raw (possibly dependent) direction tuple."""
        return self._restrict_symbolic(np.asarray(u), np.asarray(dirs, dtype=np.int64).reshape(len(dirs), self.arity))

    def _restrict_symbolic(self, u, W) -> "MultiPoly":
        f = self.field
        k = len(W)
        lin = []
        for j in range(self.arity):
            terms = {(0,) * k: int(u[j])}
            for i in range(k):
                e = [0] * k
                e[i] = 1
                terms[tuple(e)] = int(W[i][j])
            lin.append(MultiPoly(f, k, terms))
        powers: dict[tuple[int, int], MultiPoly] = {}

        def lpow(j: int, d: int) -> MultiPoly:
            if (j, d) not in powers:
                powers[(j, d)] = lin[j] ** d
            return powers[(j, d)]

        out = MultiPoly.zero(f, k)
        for e, c in self.terms.items():
            term = MultiPoly.const(f, k, c)
            for j, d in enumerate(e):
                if d:
                    term = term * lpow(j, d)
            out = out + term
        return out

    # -- division by a monic univariate polynomial in one variable -------------------------
    def divmod_univariate(self, divisor: Sequence[int], var: int) -> tuple["MultiPoly", "MultiPoly"]:
        """Divide by a monic polynomial in x_var given by coefficients (low first)."""
        f = self.field
        dv = [int(c) for c in divisor]
        h = len(dv) - 1
        if h < 1 or dv[-1] != 1:
            raise PolyError("divisor must be monic of positive degree")
        rem = dict(self.terms)
        quo: dict[Exp, int] = {}
        while True:
            high = [e for e in rem if e[var] >= h]
            if not high:
                break
            e = max(high, key=lambda x: x[var])
            c = rem.pop(e)
            qe = list(e)
            qe[var] -= h
            qe = tuple(qe)
            quo[qe] = f.add(quo.get(qe, 0), c)
            for d, dc in enumerate(dv[:-1]):
                if dc:
                    te = list(qe)
                    te[var] += d
                    te = tuple(te)
                    rem[te] = f.sub(rem.get(te, 0), f.mul(c, dc))
                    if rem[te] == 0:
                        del rem[te]
        return MultiPoly(f, self.arity, quo), MultiPoly(f, self.arity, rem)

    # -- serialization -------------------------------------------------------------------
    def coeff_vector(self, degree: int) -> list[int]:
        """Coefficients of all monomials of total degree <= degree, in graded lex order."""
        if self.degree() > degree:
            raise PolyError("polynomial degree exceeds the declared degree")
        return [self.terms.get(e, 0) for e in monomials(self.arity, degree)]

    @classmethod
    def from_coeff_vector(cls, field: FieldSpec, arity: int, degree: int, coeffs: Sequence[int]) -> "MultiPoly":
        mons = monomials(arity, degree)
        if len(coeffs) != len(mons):
            raise PolyError(f"expected {len(mons)} coefficients, got {len(coeffs)}")
        return cls(field, arity, dict(zip(mons, coeffs)))

    def serialize(self, degree: int | None = None) -> dict:
        d = self.degree() if degree is None else degree
        d = max(d, 0)
        return {"arity": self.arity, "degree": d,
                "coeffs": [format(c, "x") for c in self.coeff_vector(d)]}

    @classmethod
    def deserialize(cls, field: FieldSpec, data: Mapping) -> "MultiPoly":
        coeffs = [field.element_from_hex(c) for c in data["coeffs"]]
        return cls.from_coeff_vector(field, int(data["arity"]), int(data["degree"]), coeffs)


def _grlex_key(e: Exp):
    return (sum(e), tuple(-x for x in e))


@lru_cache(maxsize=None)
def monomials(arity: int, degree: int) -> tuple[Exp, ...]:
    """Exponent vectors of total degree <= degree, graded then lexicographic (x0 first)."""
    out = []
    for total in range(degree + 1):
        for e in _compositions(total, arity):
            out.append(e)
    return tuple(out)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# -- interpolation on full grids --------------------------------------------------------------

@lru_cache(maxsize=None)
def _vandermonde_inverse(field: FieldSpec) -> np.ndarray:
    q = field.q
    V = np.array([[field.pow(a, e) if (a or e) else 1 for e in range(q)] for a in range(q)], dtype=np.int64)
    return inverse(field, V)


def axis_transform(field: FieldSpec, T: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    """out[..., j, ...] = sum_i M[j, i] * T[..., i, ...] along one axis."""
    T = np.moveaxis(np.asarray(T, dtype=np.int64), axis, -1)
    M = np.asarray(M, dtype=np.int64)
    if field.p == 2 and field.q <= 1024 and M.shape[0] * M.shape[1] <= 64:
        # small matrices: one table lookup per matrix entry, accumulated by xor
        mt = field.mul_table
        out = np.zeros(T.shape[:-1] + (M.shape[0],), dtype=np.int64)
        for j in range(M.shape[0]):
            for i in range(M.shape[1]):
                c = int(M[j, i])
                if c == 1:
                    out[..., j] ^= T[..., i]
                elif c:
                    out[..., j] ^= mt[c][T[..., i]]
        return np.moveaxis(out, -1, axis)
    prod = field.mul_arr(T[..., None, :], M)
    out = field.sum_arr(prod, axis=-1)
    return np.moveaxis(out, -1, axis)


def interpolate_grid(field: FieldSpec, values: np.ndarray) -> MultiPoly:
    """Unique polynomial of per-variable degree < q with the given values on F_q^k."""
    values = np.asarray(values, dtype=np.int64)
    k = values.ndim
    if k == 0:
        return MultiPoly.const(field, 0, int(values))
    Vinv = _vandermonde_inverse(field)
    C = values
    for ax in range(k):
        C = axis_transform(field, C, Vinv, ax)
    nz = np.argwhere(C != 0)
    return MultiPoly(field, k, {tuple(int(x) for x in idx): int(C[tuple(idx)]) for idx in nz})


def grid_points(field: FieldSpec, k: int) -> np.ndarray:
    """All of F_q^k as rows, ordered so that reshape((q,)*k) indexes by coordinates."""
    q = field.q
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(q), repeat=k)), dtype=np.int64)


# -- affine subspaces ---------------------------------------------------------------------

class AffineSubspace:
    """Flat u + span(rows) with rows in RREF and u the lex-min point."""

    __slots__ = ("field", "ambient", "intercept", "directions", "pivots", "raw")

    def __init__(self, field: FieldSpec, point: Sequence[int], directions: Sequence[Sequence[int]] = ()):
        self.field = field
        u = np.array(point, dtype=np.int64).ravel()
        self.ambient = len(u)
        raw = np.array(directions, dtype=np.int64).reshape(len(directions), self.ambient)
        self.raw = raw
        if len(raw):
            R, piv = rref(field, raw)
        else:
            R, piv = np.zeros((0, self.ambient), dtype=np.int64), []
        for row, c in zip(R, piv):
            if u[c]:
                u = field.sub_arr(u, field.mul_arr(row, int(u[c])))
        self.intercept = u
        self.directions = R
        self.pivots = list(piv)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def key(self) -> tuple:
        return (tuple(int(x) for x in self.intercept), tuple(tuple(int(x) for x in r) for r in self.directions))

    def __eq__(self, other) -> bool:
        return isinstance(other, AffineSubspace) and self.field == other.field and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"AffineSubspace(u={list(self.intercept)}, dirs={self.directions.tolist()})"

    def coords(self, x: Sequence[int]) -> np.ndarray:
        """lam with x = point(lam); only meaningful for members."""
        return np.asarray(x, dtype=np.int64)[self.pivots]

    def point(self, lam: Sequence[int]) -> np.ndarray:
        f = self.field
        x = self.intercept.copy()
        for c, row in zip(lam, self.directions):
            if c:
                x = f.add_arr(x, f.mul_arr(row, int(c)))
        return x

    def contains(self, x: Sequence[int]) -> bool:
        x = np.asarray(x, dtype=np.int64)
        if len(x) != self.ambient:
            return False
        return bool(np.array_equal(self.point(self.coords(x)), x))

    def points(self) -> np.ndarray:
        """All q^k points, in the order of grid_points(k) over lam."""
        f = self.field
        lam = grid_points(f, self.dim)
        pts = np.broadcast_to(self.intercept, (len(lam), self.ambient)).copy()
        for i, row in enumerate(self.directions):
            pts = f.add_arr(pts, f.mul_arr(lam[:, i:i + 1], row[None, :]))
        return pts

    def parallel_through(self, x: Sequence[int]) -> "AffineSubspace":
        return AffineSubspace(self.field, x, self.directions)

    def wire(self) -> dict:
        return {"u": [format(int(v), "x") for v in self.intercept],
                "w": [[format(int(v), "x") for v in r] for r in self.directions]}

    @classmethod
    def from_wire(cls, field: FieldSpec, data: Mapping) -> "AffineSubspace":
        u = [field.element_from_hex(v) for v in data["u"]]
        w = [[field.element_from_hex(v) for v in r] for r in data["w"]]
        s = cls(field, u, w)
        if s.key() != (tuple(u), tuple(tuple(r) for r in w)):
            raise PolyError("wire subspace is not in canonical form")
        return s


def surfaces(field: FieldSpec, dirs: Sequence[Sequence[int]], n: int) -> list[AffineSubspace]:
    """All flats parallel to span(dirs) in F_q^n, ordered by intercept."""
    base = AffineSubspace(field, [0] * n, dirs)
    free = [c for c in range(n) if c not in base.pivots]
    out = []
    for vals in itertools.product(range(field.q), repeat=len(free)):
        u = [0] * n
        for c, v in zip(free, vals):
            u[c] = v
        out.append(AffineSubspace(field, u, base.directions))
    return out


def surface_containing(field: FieldSpec, dirs: Sequence[Sequence[int]], x: Sequence[int]) -> AffineSubspace:
    return AffineSubspace(field, x, dirs)


# -- indicator and zero polynomials -------------------------------------------------------

def zero_poly(field: FieldSpec, S: Iterable[int], arity: int = 1, var: int = 0) -> MultiPoly:
    """prod_{b in S} (x_var - b)."""
    coeffs = zero_poly_coeffs(field, tuple(S))
    return MultiPoly.univariate(field, coeffs, arity, var)


def zero_poly_coeffs(field: FieldSpec, S: tuple[int, ...]) -> list[int]:
    coeffs = [1]
    for b in S:
        nb = field.neg(b)
        new = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            new[i + 1] = field.add(new[i + 1], c)
            new[i] = field.add(new[i], field.mul(c, nb))
        coeffs = new
    return coeffs


def indicator_coeffs(field: FieldSpec, H: Sequence[int], x: int) -> list[int]:
    """Coefficients of the univariate polynomial of degree |H|-1 that is [y = x] on H."""
    if x not in H:
        raise PolyError(f"{x} is not in H")
    others = tuple(b for b in H if b != x)
    num = zero_poly_coeffs(field, others)
    den = 1
    for b in others:
        den = field.mul(den, field.sub(x, b))
    inv = field.inv(den)
    return [field.mul(c, inv) for c in num]


def indicator(field: FieldSpec, H: Sequence[int], x: int, arity: int = 1, var: int = 0) -> MultiPoly:
    return MultiPoly.univariate(field, indicator_coeffs(field, H, x), arity, var)


def indicator_nd(field: FieldSpec, H: Sequence[int], point: Sequence[int]) -> MultiPoly:
    m = len(point)
    out = MultiPoly.const(field, m, 1)
    for j, x in enumerate(point):
        out = out * indicator(field, H, x, m, j)
    return out


def zero_combination(field: FieldSpec, cube: Sequence[Sequence[int]], coeffs: Sequence) -> Callable:
    """Evaluator x -> sum_i zero_{H_i}(x_i) c_i(x); coeffs are MultiPolys or callables."""
    zs = [zero_poly_coeffs(field, tuple(H)) for H in cube]

    def zeval(i: int, xi: int) -> int:
        acc = 0
        for c in reversed(zs[i]):
            acc = field.add(field.mul(acc, xi), c)
        return acc

    def evaluate(x: Sequence[int]) -> int:
        acc = 0
        for i, c in enumerate(coeffs):
            z = zeval(i, int(x[i]))
            if z:
                cv = c.eval(x) if isinstance(c, MultiPoly) else c(x)
                acc = field.add(acc, field.mul(z, cv))
        return acc

    return evaluate


@dataclass
class Decomposition:
    coeffs: list[MultiPoly]
    residual: MultiPoly
    witness: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def telescoping_decompose(f: MultiPoly, cube: Sequence[Sequence[int]]) -> tuple[list[MultiPoly], MultiPoly]:
    """f = sum_i zero_{H_i}(x_i) c_i + r with deg_{x_i} r < |H_i| for every i."""
    if len(cube) != f.arity:
        raise PolyError("cube dimension must equal arity")
    rem = f
    coeffs = []
    for i, H in enumerate(cube):
        c, rem = rem.divmod_univariate(zero_poly_coeffs(f.field, tuple(H)), i)
        coeffs.append(c)
    return coeffs, rem


def subcube_decompose(f: MultiPoly, cube: Sequence[Sequence[int]]) -> Decomposition:
    """Coefficient polynomials for f on the cube; a witness point if f is not zero there."""
    coeffs, rem = telescoping_decompose(f, cube)
    witness = None
    if not rem.is_zero():
        # rem is reduced in every variable, so it is nonzero somewhere on the cube
        pts = np.array(list(itertools.product(*cube)), dtype=np.int64)
        vals = rem.eval_many(pts)
        witness = tuple(int(v) for v in pts[int(np.argmax(vals != 0))])
    return Decomposition(coeffs, rem, witness)


# -- products of variable-disjoint factors --------------------------------------------------

class ProductPoly:
    """Product of MultiPolys (same arity) whose variable sets are pairwise disjoint."""

    def __init__(self, factors: Sequence[MultiPoly]):
        if not factors:
            raise PolyError("empty product")
        self.factors = list(factors)
        self.field = factors[0].field
        self.arity = factors[0].arity
        seen: set[int] = set()
        for g in self.factors:
            vs = g.variables()
            if vs & seen:
                raise PolyError("factors share variables")
            seen |= vs

    def degree(self) -> int:
        if any(g.is_zero() for g in self.factors):
            return -1
        return sum(g.degree() for g in self.factors)

    def is_zero(self) -> bool:
        return any(g.is_zero() for g in self.factors)

    def eval(self, x: Sequence[int]) -> int:
        acc = 1
        for g in self.factors:
            acc = self.field.mul(acc, g.eval(x))
            if acc == 0:
                break
        return acc

    def eval_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64).reshape(-1, self.arity)
        acc = np.ones(len(X), dtype=np.int64)
        for g in self.factors:
            acc = self.field.mul_arr(acc, g.eval_many(X))
        return acc

    def expand(self) -> MultiPoly:
        out = self.factors[0]
        for g in self.factors[1:]:
            out = out * g
        return out

    def restrict(self, s: AffineSubspace) -> MultiPoly:
        f = self.field
        if self.degree() < f.q:
            return interpolate_grid(f, self.eval_many(s.points()).reshape((f.q,) * s.dim))
        out = MultiPoly.const(f, s.dim, 1)
        for g in self.factors:
            out = out * g.restrict(s, "symbolic")
        return out


def product_decompose(P: ProductPoly, cube: Sequence[Sequence[int]]) -> tuple[list[ProductPoly | MultiPoly], list[MultiPoly]]:
    """Telescoping decomposition of a product, keeping every coefficient in product form.

    Writing each factor as P_a = D_a + R_a with D_a = sum_{j in a} zero_j Q_j gives
    prod P_a = sum_a D_a prod_{b<a} R_b prod_{b>a} P_b + prod R_a, so
    c_j = Q_j prod_{b<a} R_b prod_{b>a} P_b for j a variable of factor a.
    Returns (coefficients per variable, reduced factors R_a).
    """
    f = P.field
    m = P.arity
    per_factor = []
    for g in P.factors:
        cs, r = telescoping_decompose(g, cube)
        per_factor.append((cs, r))
    reduced = [r for _, r in per_factor]
    coeffs: list = [MultiPoly.zero(f, m) for _ in range(m)]
    for a, g in enumerate(P.factors):
        cs, _ = per_factor[a]
        others = reduced[:a] + P.factors[a + 1:]
        for j in g.variables():
            if cs[j].is_zero():
                continue
            coeffs[j] = ProductPoly([cs[j]] + others) if others else cs[j]
    return coeffs, reduced


# -- low-degree code parameters and canonical maps -----------------------------------------

class LdParams:
    """Parameters (n, h = 2^t1, q = 2^t2, m) of the canonical low-degree encoding."""

    def __init__(self, n: int, h: int, q: int, m: int):
        from .gf import field_of_order

        if h < 1 or h & (h - 1) or q < 2 or q & (q - 1):
            raise PolyError("h and q must be powers of two")
        self.n, self.h, self.q, self.m = n, h, q, m
        self.t1 = h.bit_length() - 1
        self.t2 = q.bit_length() - 1
        if self.t1 > self.t2:
            raise PolyError("inadmissible parameters: h exceeds q")
        if h ** m < n:
            raise PolyError("inadmissible parameters: h^m < n")
        self.field = field_of_order(q)
        self.basis = self_dual_basis(self.field).elements
        self.H = tuple(self.sigma_block(bits) for bits in itertools.product((0, 1), repeat=self.t1))
        self.d = m * (h - 1)

    @property
    def exact(self) -> bool:
        return self.h ** self.m == self.n

    @property
    def ell(self) -> int:
        return self.t1 * self.m

    def __repr__(self) -> str:
        return f"LdParams(n={self.n}, h={self.h}, q={self.q}, m={self.m})"

    def sigma_block(self, bits: Sequence[int]) -> int:
        acc = 0
        for b, e in zip(bits, self.basis):
            if b:
                acc = self.field.add(acc, e)
        return acc

    def sigma(self, bits: Sequence[int]) -> tuple[int, ...]:
        """Map t1*m bits, block by block, to a point of H^m."""
        t1 = self.t1
        return tuple(self.sigma_block(bits[j * t1:(j + 1) * t1]) for j in range(self.m))

    def bits(self, i: int) -> list[int]:
        """Big-endian binary expansion of an index, length t1*m."""
        if not 0 <= i < self.h ** self.m:
            raise PolyError(f"index {i} out of range")
        ell = self.ell
        return [(i >> (ell - 1 - j)) & 1 for j in range(ell)]

    def pi(self, i: int) -> tuple[int, ...]:
        return self.sigma(self.bits(i))

    @cached_property
    def mu_polys(self) -> list[MultiPoly]:
        """mu_i(y) = sum over x in H with tr(e_i x) = 1 of ind_H(x, y)."""
        f = self.field
        out = []
        for e in self.basis[: self.t1]:
            p = MultiPoly.zero(f, 1)
            for x in self.H:
                if f.trace(f.mul(e, x)) == 1:
                    p = p + indicator(f, self.H, x)
            out.append(p)
        return out

    @cached_property
    def _mu_table(self) -> np.ndarray:
        grid = np.arange(self.q).reshape(-1, 1)
        return np.stack([p.eval_many(grid) for p in self.mu_polys], axis=1).reshape(self.q, self.t1)

    def mu(self, y: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._mu_table[y])

    def nu(self, x: Sequence[int]) -> tuple[int, ...]:
        out: list[int] = []
        for y in x:
            out.extend(self.mu(int(y)))
        return tuple(out)

    def nu_index(self, x: Sequence[int]) -> int:
        v = 0
        for b in self.nu(x):
            if b not in (0, 1):
                raise PolyError("point is not in H^m")
            v = 2 * v + b
        return v

    def canonical_maps(self) -> dict:
        return {"sigma": self.sigma, "pi": self.pi, "nu": self.nu, "mu": self.mu}

    @cached_property
    def indicator_matrix(self) -> np.ndarray:
        """I[z, e]: coefficient of y^e in ind_H(H[z], y)."""
        return np.array([indicator_coeffs(self.field, self.H, x) + [0] * (self.h - len(indicator_coeffs(self.field, self.H, x)))
                         for x in self.H], dtype=np.int64)

    def index_tensor(self, a: Sequence[int]) -> np.ndarray:
        """Place message values on the H^m grid (indexed by positions in H)."""
        T = np.zeros((self.h,) * self.m, dtype=np.int64)
        pos = {x: i for i, x in enumerate(self.H)}
        for i, v in enumerate(a):
            T[tuple(pos[c] for c in self.pi(i))] = v
        return T


def canonical_maps(params: LdParams) -> dict:
    return params.canonical_maps()


def ld_encode(a: Sequence[int], params: LdParams) -> MultiPoly:
    """g_a = sum_i a_i ind_{H^m}(pi(i), .), built as a tensor transform of the values."""
    if len(a) > params.h ** params.m:
        raise PolyError("message longer than h^m")
    f = params.field
    T = params.index_tensor([int(v) for v in a])
    I = params.indicator_matrix
    C = T
    for ax in range(params.m):
        C = axis_transform(f, C, I.T, ax)
    nz = np.argwhere(C != 0)
    return MultiPoly(f, params.m, {tuple(int(x) for x in idx): int(C[tuple(idx)]) for idx in nz})


def ld_encode_batch(A, params: LdParams) -> np.ndarray:
    """Coefficient tensors of g_a for every row a of A, shape (N,) + (h,)*m; entry [e] is the
    coefficient of y^e."""
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[1] > params.h ** params.m:
        raise PolyError("messages must be rows no longer than h^m")
    pos = {x: i for i, x in enumerate(params.H)}
    cells = [tuple(pos[c] for c in params.pi(i)) for i in range(A.shape[1])]
    C = np.zeros((len(A),) + (params.h,) * params.m, dtype=np.int64)
    for i, cell in enumerate(cells):
        C[(slice(None),) + cell] = A[:, i]
    I = params.indicator_matrix
    for ax in range(params.m):
        C = axis_transform(params.field, C, I.T, ax + 1)
    return C


def agreement_fraction(f: MultiPoly, g: MultiPoly) -> float:
    pts = grid_points(f.field, f.arity)
    return float(np.mean(f.eval_many(pts) == g.eval_many(pts)))


class PolyBank:
    """Several polynomials of one arity evaluated together at a single point."""

    def __init__(self, polys: Sequence[MultiPoly]):
        self.polys = list(polys)
        if not self.polys:
            raise PolyError("empty polynomial bank")
        self.field = self.polys[0].field
        self.arity = self.polys[0].arity
        if any(p.arity != self.arity or p.field != self.field for p in self.polys):
            raise PolyError("bank polynomials need a common field and arity")
        live = [i for i, p in enumerate(self.polys) if p.terms]
        self.live = np.array(live, dtype=np.int64)
        arrays = [self.polys[i]._term_arrays() for i in live]
        self.E = np.concatenate([E for E, _ in arrays]) if arrays else np.zeros((0, self.arity), dtype=np.int64)
        C = np.concatenate([C for _, C in arrays]) if arrays else np.zeros(0, dtype=np.int64)
        self.logC = self.field.log[C]
        self.starts = np.cumsum([0] + [len(c) for _, c in arrays[:-1]]).astype(np.int64)
        self.uses = self.E > 0

    def eval(self, x: Sequence[int]) -> list[int]:
        f = self.field
        x = np.asarray(x, dtype=np.int64).ravel()
        if len(x) != self.arity:
            raise PolyError(f"point of length {len(x)} for arity {self.arity}")
        out = np.zeros(len(self.polys), dtype=np.int64)
        if not len(self.live):
            return [0] * len(self.polys)
        qm1 = max(f.q - 1, 1)
        vals = f.exp[(self.E @ (f.log[x] % qm1) + self.logC) % qm1]
        vals = np.where(self.uses[:, x == 0].any(axis=1), 0, vals)
        if f.p == 2:
            sums = np.bitwise_xor.reduceat(vals, self.starts)
        else:
            sums = f._vec_from_digits(np.add.reduceat(f.digits[vals], self.starts, axis=0) % f.p)
        out[self.live] = sums
        return [int(v) for v in out]

"""Finite fields GF(p^t) with log/exp tables, trace, self-dual bases and characters.

Elements are encoded as integers in [0, q): the base-p digits of the code are the
coefficients of the power-basis representation (little-endian). For p = 2 the code
is simply the bit pattern, so addition is XOR.
"""
from __future__ import annotations

import cmath
import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class FieldError(ValueError):
    pass


# Irreducible moduli for GF(2^t), written as bit patterns (bit i = coefficient of x^i).
BUILTIN_MODULI = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}

MAX_ORDER = 1 << 16


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for d in range(2, int(p ** 0.5) + 1):
        if p % d == 0:
            return False
    return True


# -- polynomials over GF(p) as coefficient lists, low degree first --------------

def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _ptrim(list(a))
    b = _ptrim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _ptrim(a)
    return a


def _all_monic(deg: int, p: int) -> Iterable[list[int]]:
    for low in itertools.product(range(p), repeat=deg):
        yield list(low) + [1]


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    f = _ptrim([c % p for c in coeffs])
    deg = len(f) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for g in _all_monic(d, p):
            if not _pmod(f, g, p):
                return False
    return True


def _digits(v: int, p: int, t: int) -> list[int]:
    out = []
    for _ in range(t):
        out.append(v % p)
        v //= p
    return out


def _undigits(ds: Sequence[int], p: int) -> int:
    v = 0
    for d in reversed(ds):
        v = v * p + d
    return v


class FieldSpec:
    """GF(p^t) with precomputed tables; element values are plain ints."""

    def __init__(self, p: int, t: int, modulus: tuple[int, ...]):
        self.p = p
        self.t = t
        self.q = p ** t
        self.modulus = modulus
        q = self.q
        self.digits = np.array([_digits(v, p, t) for v in range(q)], dtype=np.int64).reshape(q, t)
        self._weights = np.array([p ** i for i in range(t)], dtype=np.int64)
        self._build_tables()
        # trace is GF(p)-linear, so it is fixed by its values on the power basis
        basis_tr = np.array([self._trace_slow(p ** i) for i in range(t)], dtype=np.int64)
        self.trace_table = (self.digits @ basis_tr) % p
        self.neg_table = self._vec_from_digits((-self.digits) % p)

    # -- construction helpers ------------------------------------------------
    def _vec_from_digits(self, d: np.ndarray) -> np.ndarray:
        return (d * self._weights).sum(axis=-1)

    def _mul_slow(self, a: int, b: int) -> int:
        p, t = self.p, self.t
        if p == 2:
            mod = self.modulus_code()
            r = 0
            while b:
                if b & 1:
                    r ^= a
                b >>= 1
                a <<= 1
                if a >> t:
                    a ^= mod
            return r
        da, db = _digits(a, p, t), _digits(b, p, t)
        prod = [0] * (2 * t - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        r = _pmod(prod, self.modulus, p) if t > 1 else [prod[0] % p]
        r = r + [0] * (t - len(r))
        return _undigits(r[:t], p)

    def _pow_slow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._mul_slow(r, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return r

    def _build_tables(self) -> None:
        q = self.q
        if q == 2:
            self.generator = 1
        else:
            n = q - 1
            factors = [r for r in range(2, n + 1) if n % r == 0 and is_prime(r)]
            self.generator = None
            for g in range(2, q):
                if all(self._pow_slow(g, n // r) != 1 for r in factors):
                    self.generator = g
                    break
            if self.generator is None:  # pragma: no cover - every finite field is cyclic
                raise FieldError("no generator found")
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = self._mul_slow(x, self.generator)
        exp[q - 1:] = exp[: q - 1]
        self.exp = exp
        self.log = log

    def _trace_slow(self, a: int) -> int:
        acc, x = 0, a
        for _ in range(self.t):
            acc = self._add_scalar(acc, x)
            x = self.pow(x, self.p)
        if acc >= self.p:
            raise FieldError("trace left the prime field")
        return acc

    # -- scalar operations -----------------------------------------------------
    def _add_scalar(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        return int(self._vec_from_digits((self.digits[a] + self.digits[b]) % self.p))

    def add(self, a: int, b: int) -> int:
        return self._add_scalar(a, b)

    def neg(self, a: int) -> int:
        return a if self.p == 2 else int(self.neg_table[a])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("inverse of zero")
            return 0
        return int(self.exp[(int(self.log[a]) * e) % (self.q - 1)])

    def trace(self, a: int) -> int:
        return int(self.trace_table[a])

    def dot(self, u: Sequence[int], v: Sequence[int]) -> int:
        acc = 0
        for a, b in zip(u, v):
            acc = self.add(acc, self.mul(a, b))
        return acc

    # -- vectorised operations on integer arrays ---------------------------------
    def add_arr(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        return self._vec_from_digits((self.digits[a] + self.digits[b]) % self.p)

    def neg_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return a if self.p == 2 else self.neg_table[a]

    def sub_arr(self, a, b) -> np.ndarray:
        return self.add_arr(a, self.neg_arr(b))

    def mul_arr(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, r)

    @property
    def mul_table(self) -> np.ndarray:
        """Full q x q product table, built on first use."""
        t = self.__dict__.get("_mul_table")
        if t is None:
            e = np.arange(self.q, dtype=np.int64)
            t = self.mul_arr(e[:, None], e[None, :])
            self.__dict__["_mul_table"] = t
        return t

    def inv_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    def pow_arr(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        r = self.exp[(self.log[a] * e) % (self.q - 1)]
        return np.where(a == 0, 0, r)

    def sum_arr(self, a, axis: int = -1) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return np.bitwise_xor.reduce(a, axis=axis)
        d = self.digits[a].sum(axis=axis if axis >= 0 else axis - 1) % self.p
        return self._vec_from_digits(d)

    def trace_arr(self, a) -> np.ndarray:
        return self.trace_table[np.asarray(a, dtype=np.int64)]

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product over the field for small integer matrices."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        prod = self.mul_arr(A[:, :, None], B[None, :, :])
        return self.sum_arr(prod, axis=1)

    # -- elements and serialization ---------------------------------------------
    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def elements(self) -> range:
        return range(self.q)

    def element_to_hex(self, a: int) -> str:
        return format(a, "x")

    def element_from_hex(self, s: str) -> int:
        v = int(s, 16)
        if not 0 <= v < self.q:
            raise FieldError(f"element {s} out of range for {self}")
        return v

    def modulus_code(self) -> int:
        return _undigits(list(self.modulus), self.p)

    def to_string(self) -> str:
        return f"GF({self.p}^{self.t})/{format(self.modulus_code(), 'x')}"

    def __repr__(self) -> str:
        return self.to_string()

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and (self.p, self.t, self.modulus) == (other.p, other.t, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.t, self.modulus))

    def omega_power(self, k: int) -> complex:
        """omega^k with omega = exp(2 pi i / p)."""
        k %= self.p
        if self.p == 2:
            return 1.0 if k == 0 else -1.0
        return cmath.exp(2j * cmath.pi * k / self.p)


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.spec.q:
            raise FieldError(f"value {self.value} out of range for {self.spec}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise FieldError("field mismatch")
            return other.value
        if isinstance(other, int):
            if other in (0, 1):
                return other
        raise FieldError(f"cannot combine {other!r} with a field element")

    def __add__(self, other):
        return FieldElement(self.spec, self.spec.add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.spec, self.spec.sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return FieldElement(self.spec, self.spec.sub(self._coerce(other), self.value))

    def __mul__(self, other):
        return FieldElement(self.spec, self.spec.mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.spec, self.spec.div(self.value, self._coerce(other)))

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.spec, self.spec.pow(self.value, e))

    def inv(self):
        return FieldElement(self.spec, self.spec.inv(self.value))

    def trace(self) -> int:
        return self.spec.trace(self.value)

    def coeffs(self) -> list[int]:
        return _digits(self.value, self.spec.p, self.spec.t)

    def hex(self) -> str:
        return self.spec.element_to_hex(self.value)

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.spec.p}^{self.spec.t}:{self.hex()}"


def _normalize_modulus(modulus, p: int, t: int) -> tuple[int, ...]:
    if isinstance(modulus, int):
        coeffs = _digits(modulus, p, t + 1)
        if modulus >= p ** (t + 1):
            raise FieldError("modulus degree exceeds t")
    else:
        coeffs = [int(c) % p for c in modulus]
    coeffs = _ptrim(coeffs)
    if len(coeffs) != t + 1:
        raise FieldError(f"modulus must have degree {t}")
    if coeffs[-1] != 1:
        inv = pow(coeffs[-1], p - 2, p)
        coeffs = [(c * inv) % p for c in coeffs]
    return tuple(coeffs)


@functools.lru_cache(maxsize=None)
def _make_field_cached(p: int, t: int, modulus: tuple[int, ...]) -> FieldSpec:
    return FieldSpec(p, t, modulus)


def make_field(p: int, t: int, modulus=None) -> FieldSpec:
    """Return GF(p^t). The modulus is a coefficient sequence (low first) or an int code."""
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if t < 1:
        raise FieldError("extension degree must be positive")
    if p ** t > MAX_ORDER:
        raise FieldError("fields beyond order 2^16 are unsupported")
    if modulus is None:
        if p == 2:
            mod = _normalize_modulus(BUILTIN_MODULI[t], p, t)
        elif t == 1:
            mod = (0, 1)
        else:
            mod = None
            for low in itertools.product(range(p), repeat=t):
                cand = tuple(reversed(low)) + (1,)
                if is_irreducible(cand, p):
                    mod = cand
                    break
    else:
        mod = _normalize_modulus(modulus, p, t)
        if not is_irreducible(mod, p):
            raise FieldError(f"modulus {mod} is reducible over GF({p})")
    return _make_field_cached(p, t, mod)


def gf2(t: int) -> FieldSpec:
    return make_field(2, t)


def field_of_order(q: int) -> FieldSpec:
    for p in range(2, q + 1):
        if q % p == 0:
            break
    t, r = 0, q
    while r % p == 0:
        r //= p
        t += 1
    if r != 1:
        raise FieldError(f"{q} is not a prime power")
    return make_field(p, t)


def parse_field(s: str) -> FieldSpec:
    """Inverse of FieldSpec.to_string: 'GF(p^t)/modulus-hex'."""
    head, _, mod = s.partition("/")
    inner = head.strip()[3:-1]
    p, t = (int(x) for x in inner.split("^"))
    return make_field(p, t, int(mod, 16) if mod else None)


# -- self-dual bases ------------------------------------------------------------

@dataclass(frozen=True)
class SelfDualBasis:
    spec: FieldSpec
    elements: tuple[int, ...]

    def gram(self) -> np.ndarray:
        f = self.spec
        return np.array([[f.trace(f.mul(a, b)) for b in self.elements] for a in self.elements], dtype=np.int64)

    def coords(self, u: int) -> list[int]:
        """c_j = tr(u * alpha_j); u = sum_j c_j alpha_j."""
        f = self.spec
        return [f.trace(f.mul(u, a)) for a in self.elements]

    def combine(self, coeffs: Sequence[int]) -> int:
        acc = 0
        for c, a in zip(coeffs, self.elements):
            if c:
                acc = self.spec.add(acc, a)
        return acc


@functools.lru_cache(maxsize=None)
def self_dual_basis(spec: FieldSpec) -> SelfDualBasis:
    """Depth-first search for an orthonormal basis of the trace form.

    Candidates are tried in increasing integer order, so the result is canonical.
    Each chosen element must have trace 1 and be orthogonal to the previous ones.
    """
    if spec.p != 2:
        raise FieldError("self-dual basis construction requires characteristic 2")
    f = spec
    t = f.t
    cands = [a for a in range(1, f.q) if f.trace(f.mul(a, a)) == 1]

    def span_contains(basis: list[int], x: int) -> bool:
        # F_2-span membership via Gaussian elimination on bit patterns
        rows = []
        for b in basis:
            for r in rows:
                b = min(b, b ^ r)
            if b:
                rows.append(b)
        for r in sorted(rows, reverse=True):
            x = min(x, x ^ r)
        return x == 0

    def dfs(chosen: list[int]) -> list[int] | None:
        if len(chosen) == t:
            return chosen
        for a in cands:
            if chosen and a <= chosen[-1]:
                continue
            if any(f.trace(f.mul(a, b)) for b in chosen):
                continue
            if span_contains(chosen, a):
                continue
            res = dfs(chosen + [a])
            if res is not None:
                return res
        return None

    found = dfs([])
    if found is None:  # pragma: no cover - a self-dual basis always exists in characteristic 2
        raise FieldError("no self-dual basis found")
    return SelfDualBasis(spec, tuple(found))


# -- characters -------------------------------------------------------------------

def character_sum(spec: FieldSpec, a: int) -> complex:
    """(1/q) sum_u omega^{tr(u a)}; equals [a == 0]."""
    tr = spec.trace_arr(spec.mul_arr(np.arange(spec.q), a))
    if spec.p == 2:
        return complex(np.mean(1.0 - 2.0 * tr))
    return complex(np.mean(np.exp(2j * np.pi * tr / spec.p)))


def span_points(spec: FieldSpec, vectors: Sequence[Sequence[int]], n: int) -> np.ndarray:
    """All F_q-linear combinations of the given vectors (with repetition if dependent)."""
    vecs = np.asarray(vectors, dtype=np.int64).reshape(len(vectors), n)
    k = len(vecs)
    if k == 0:
        return np.zeros((1, n), dtype=np.int64)
    lam = np.array(list(itertools.product(range(spec.q), repeat=k)), dtype=np.int64)
    pts = np.zeros((len(lam), n), dtype=np.int64)
    for i in range(k):
        pts = spec.add_arr(pts, spec.mul_arr(lam[:, i:i + 1], vecs[i][None, :]))
    return pts


def character_sum_subspace(spec: FieldSpec, vectors: Sequence[Sequence[int]], a: Sequence[int]) -> complex:
    """E_{u in V} omega^{tr(u . a)} for V = span(vectors); equals [a in V-perp]."""
    a = np.asarray(a, dtype=np.int64)
    pts = span_points(spec, vectors, len(a))
    dots = spec.sum_arr(spec.mul_arr(pts, a[None, :]), axis=1)
    tr = spec.trace_arr(dots)
    if spec.p == 2:
        return complex(np.mean(1.0 - 2.0 * tr))
    return complex(np.mean(np.exp(2j * np.pi * tr / spec.p)))


# -- linear algebra over the field ----------------------------------------------------

def rref(spec: FieldSpec, M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form (zero rows dropped) and pivot columns."""
    A = np.array(M, dtype=np.int64).reshape(len(M), -1) if len(M) else np.zeros((0, 0), dtype=np.int64)
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = [i for i in range(r, rows) if A[i, c] != 0]
        if not nz:
            continue
        i = nz[0]
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = spec.mul_arr(A[r], spec.inv(int(A[r, c])))
        for i2 in range(rows):
            if i2 != r and A[i2, c] != 0:
                A[i2] = spec.sub_arr(A[i2], spec.mul_arr(A[r], int(A[i2, c])))
        pivots.append(c)
        r += 1
    return A[:r].copy(), pivots


def rank(spec: FieldSpec, M) -> int:
    if len(M) == 0:
        return 0
    return len(rref(spec, M)[1])


def inverse(spec: FieldSpec, M) -> np.ndarray:
    A = np.asarray(M, dtype=np.int64)
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    R, piv = rref(spec, aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise FieldError("matrix is singular")
    return R[:, n:]


def solve(spec: FieldSpec, A, b) -> np.ndarray | None:
    """One solution x of A x = b, or None."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    aug = np.concatenate([A, b], axis=1)
    R, piv = rref(spec, aug)
    n = A.shape[1]
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for row, c in zip(R, piv):
        x[c] = row[n]
    return x

"""Statevector simulation of qudit registers over F_q: Paulis, EPR pairs, measurements, twirls.

Basis strings of an n-qudit register are points of F_q^n, indexed big-endian (the
first qudit is the most significant digit). A side of a bipartite system is a list of
registers whose basis indices combine in the same mixed-radix way.
"""
from __future__ import annotations

import io
import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .gf import FieldSpec, field_of_order
from .poly import AffineSubspace, grid_points, surfaces

DEFAULT_DIM_CAP = 4096
TOL_VALID = 1e-10


class QsimError(ValueError):
    pass


def dim_cap() -> int:
    return int(os.environ.get("INTROSPECT_DIM_CAP", DEFAULT_DIM_CAP))


@dataclass(frozen=True)
class Layout:
    """Registers [(n_i, q_i)] on one side."""

    registers: tuple[tuple[int, int], ...]

    def __init__(self, registers: Iterable[tuple[int, int]]):
        object.__setattr__(self, "registers", tuple((int(n), int(q)) for n, q in registers))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(q ** n for n, q in self.registers)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.registers else 1

    def check_cap(self) -> None:
        if self.dim > dim_cap():
            raise QsimError(f"side dimension {self.dim} exceeds cap {dim_cap()}")

    def serialize(self) -> str:
        return "[" + ",".join(f"({n},{q})" for n, q in self.registers) + "]"

    def __add__(self, other: "Layout") -> "Layout":
        return Layout(self.registers + other.registers)


# -- single register Pauli machinery ------------------------------------------------

@lru_cache(maxsize=None)
def _strings(field: FieldSpec, n: int) -> np.ndarray:
    return grid_points(field, n)


def index_of(field: FieldSpec, u: Sequence[int]) -> int:
    v = 0
    for x in u:
        v = v * field.q + int(x)
    return v


def _omega_of_trace(field: FieldSpec, tr: np.ndarray) -> np.ndarray:
    if field.p == 2:
        return (1.0 - 2.0 * tr).astype(np.complex128)
    return np.exp(2j * np.pi * tr / field.p)


@lru_cache(maxsize=None)
def char_matrix(field: FieldSpec, n: int) -> np.ndarray:
    """C[u, v] = omega^{tr(u . v)} over all strings u, v."""
    S = _strings(field, n)
    dots = field.sum_arr(field.mul_arr(S[:, None, :], S[None, :, :]), axis=-1) if n else np.zeros((1, 1), dtype=np.int64)
    return _omega_of_trace(field, field.trace_arr(dots))


def _dot_vec(field: FieldSpec, S: np.ndarray, v: Sequence[int]) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    if len(v) == 0:
        return np.zeros(len(S), dtype=np.int64)
    return field.sum_arr(field.mul_arr(S, v[None, :]), axis=1)


def pauli_X(field: FieldSpec, x: Sequence[int]) -> np.ndarray:
    """X(x)|j> = |j + x>."""
    n = len(x)
    S = _strings(field, n)
    dst = [index_of(field, r) for r in field.add_arr(S, np.asarray(x, dtype=np.int64)[None, :])]
    M = np.zeros((len(S), len(S)), dtype=np.complex128)
    M[dst, np.arange(len(S))] = 1.0
    return M


def pauli_Z(field: FieldSpec, z: Sequence[int]) -> np.ndarray:
    """Z(z)|j> = omega^{tr(z . j)}|j>."""
    S = _strings(field, len(z))
    return np.diag(_omega_of_trace(field, field.trace_arr(_dot_vec(field, S, z))))


def pauli(field: FieldSpec, W: str, v: Sequence[int]) -> np.ndarray:
    if W == "X":
        return pauli_X(field, v)
    if W == "Z":
        return pauli_Z(field, v)
    raise QsimError(f"unknown Pauli basis {W}")


@lru_cache(maxsize=None)
def basis_vectors(field: FieldSpec, W: str, n: int) -> np.ndarray:
    """Columns are |tau^W_u> for u in string order; |tau^X_u> = q^{-n/2} sum_v omega^{-tr(u.v)}|v>."""
    D = field.q ** n
    if W == "Z":
        return np.eye(D, dtype=np.complex128)
    if W == "X":
        return np.conj(char_matrix(field, n)) / np.sqrt(D)
    raise QsimError(f"unknown Pauli basis {W}")


def tau(field: FieldSpec, W: str, u: Sequence[int]) -> np.ndarray:
    B = basis_vectors(field, W, len(u))
    col = B[:, index_of(field, u)]
    return np.outer(col, np.conj(col))


def subspace_projector(field: FieldSpec, v: Sequence[Sequence[int]], s: AffineSubspace) -> np.ndarray:
    """Sum of |w><w| over the points of s; s must be parallel to span(v)."""
    n = s.ambient
    par = AffineSubspace(field, [0] * n, v)
    if not np.array_equal(par.directions, s.directions):
        raise QsimError("surface is not parallel to span(v)")
    P = np.zeros((field.q ** n,) * 2, dtype=np.complex128)
    for w in s.points():
        i = index_of(field, w)
        P[i, i] = 1.0
    return P


def partial_x_projector(field: FieldSpec, v: Sequence[Sequence[int]], a: Sequence[int], n: int) -> np.ndarray:
    """Projector onto X-basis strings u with u . v_i = a_i for all i."""
    S = _strings(field, n)
    mask = np.ones(len(S), dtype=bool)
    for vi, ai in zip(v, a):
        mask &= _dot_vec(field, S, vi) == int(ai)
    B = basis_vectors(field, "X", n)[:, mask]
    return B @ np.conj(B.T)


# -- operators, states, measurements -------------------------------------------------

class LinOp:
    """Dense operator on one side, tagged with its layout."""

    def __init__(self, mat: np.ndarray, layout: Layout | None = None):
        self.mat = np.asarray(mat, dtype=np.complex128)
        D = self.mat.shape[0]
        self.layout = layout or Layout([(1, D)])
        if self.mat.shape != (self.layout.dim, self.layout.dim):
            raise QsimError("operator shape does not match layout")

    def __matmul__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.mat @ other.mat, self.layout)

    def kron(self, other: "LinOp") -> "LinOp":
        return LinOp(np.kron(self.mat, other.mat), self.layout + other.layout)

    def dagger(self) -> "LinOp":
        return LinOp(np.conj(self.mat.T), self.layout)

    def is_hermitian(self, tol: float = TOL_VALID) -> bool:
        return bool(np.linalg.norm(self.mat - np.conj(self.mat.T)) <= tol)

    def is_projector(self, tol: float = TOL_VALID) -> bool:
        return self.is_hermitian(tol) and bool(np.linalg.norm(self.mat @ self.mat - self.mat) <= tol)

    def is_unitary(self, tol: float = TOL_VALID) -> bool:
        return bool(np.linalg.norm(self.mat @ np.conj(self.mat.T) - np.eye(len(self.mat))) <= tol)

    def to_csv(self, field: FieldSpec | None = None) -> str:
        return _matrix_csv(self.mat, self.layout)


class Measurement:
    """Outcome-labelled list of PSD operators summing to the identity."""

    def __init__(self, labels: Sequence[Hashable], ops: Sequence[np.ndarray], kind: str = "projective"):
        if len(labels) != len(ops):
            raise QsimError("labels and ops differ in length")
        if len(set(labels)) != len(labels):
            raise QsimError("duplicate outcome labels")
        self.labels = list(labels)
        self.ops = [np.asarray(o, dtype=np.complex128) for o in ops]
        self.kind = kind
        self._index = {a: i for i, a in enumerate(self.labels)}

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __getitem__(self, label) -> np.ndarray:
        i = self._index.get(label)
        if i is None:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return self.ops[i]

    def items(self):
        return zip(self.labels, self.ops)

    def validate(self, tol: float = TOL_VALID) -> None:
        D = self.dim
        total = np.zeros((D, D), dtype=np.complex128)
        for a, M in self.items():
            if np.linalg.norm(M - np.conj(M.T)) > tol:
                raise QsimError(f"element {a!r} is not Hermitian")
            if np.linalg.eigvalsh((M + np.conj(M.T)) / 2).min() < -tol:
                raise QsimError(f"element {a!r} is not PSD")
            total += M
        if np.linalg.norm(total - np.eye(D)) > tol:
            raise QsimError("elements do not sum to the identity")
        if self.kind == "projective":
            for a, M in self.items():
                if np.linalg.norm(M @ M - M) > tol:
                    raise QsimError(f"element {a!r} is not idempotent")

    def is_projective(self, tol: float = TOL_VALID) -> bool:
        return all(np.linalg.norm(M @ M - M) <= tol for M in self.ops)

    def kron(self, other: "Measurement", combine: Callable = lambda a, b: (a, b)) -> "Measurement":
        labels, ops = [], []
        for a, A in self.items():
            for b, B in other.items():
                labels.append(combine(a, b))
                ops.append(np.kron(A, B))
        kind = "projective" if self.kind == other.kind == "projective" else "povm"
        return Measurement(labels, ops, kind)


def trivial_measurement(D: int, label: Hashable = None) -> Measurement:
    return Measurement([label], [np.eye(D, dtype=np.complex128)])


def basis_measurement(field: FieldSpec, W: str, n: int) -> Measurement:
    S = _strings(field, n)
    B = basis_vectors(field, W, n)
    ops = [np.outer(B[:, i], np.conj(B[:, i])) for i in range(len(S))]
    return Measurement([tuple(int(x) for x in r) for r in S], ops)


class BipartiteState:
    """Amplitudes psi[a, b] over Alice basis index a and Bob basis index b."""

    def __init__(self, psi: np.ndarray, layout_a: Layout, layout_b: Layout | None = None):
        self.psi = np.asarray(psi, dtype=np.complex128)
        self.layout_a = layout_a
        self.layout_b = layout_b or layout_a
        if self.psi.shape != (self.layout_a.dim, self.layout_b.dim):
            raise QsimError("amplitude shape does not match layouts")

    @property
    def vector(self) -> np.ndarray:
        return self.psi.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def kron(self, other: "BipartiteState") -> "BipartiteState":
        # |psi>_{A1 B1} |phi>_{A2 B2} regrouped as (A1 A2)(B1 B2)
        da1, db1 = self.psi.shape
        da2, db2 = other.psi.shape
        T = np.einsum("ab,cd->acbd", self.psi, other.psi).reshape(da1 * da2, db1 * db2)
        return BipartiteState(T, self.layout_a + other.layout_a, self.layout_b + other.layout_b)

    def apply(self, op: np.ndarray, side: int) -> "BipartiteState":
        op = op.mat if isinstance(op, LinOp) else op
        if side == 0:
            return BipartiteState(op @ self.psi, self.layout_a, self.layout_b)
        return BipartiteState(self.psi @ op.T, self.layout_a, self.layout_b)

    def expect(self, A: np.ndarray, B: np.ndarray) -> complex:
        """<psi| A (x) B |psi> = tr(psi^dag A psi B^T)."""
        return complex(np.sum(np.conj(self.psi) * (A @ self.psi @ B.T)))

    def joint_distribution(self, MA: Measurement, MB: Measurement) -> dict:
        out = {}
        for a, A in MA.items():
            left = A @ self.psi
            for b, B in MB.items():
                p = float(np.real(np.sum(np.conj(self.psi) * (left @ B.T))))
                if p > 1e-15:
                    out[(a, b)] = p
        return out

    def to_csv(self, field: FieldSpec | None = None) -> str:
        buf = io.StringIO()
        buf.write("index,real,imag\n")
        names_a = _index_names(self.layout_a)
        names_b = _index_names(self.layout_b)
        for i, na in enumerate(names_a):
            for j, nb in enumerate(names_b):
                v = self.psi[i, j]
                if abs(v) > 0:
                    buf.write(f"{na}|{nb},{v.real!r},{v.imag!r}\n")
        return buf.getvalue()


def _index_names(layout: Layout) -> list[str]:
    parts = []
    for n, q in layout.registers:
        width = len(format(q - 1, "x"))
        parts.append(["".join(format(int(c), f"0{width}x") for c in s) for s in itertools.product(range(q), repeat=n)])
    return ["/".join(p) for p in itertools.product(*parts)] if parts else [""]


def _matrix_csv(M: np.ndarray, layout: Layout) -> str:
    names = _index_names(layout)
    buf = io.StringIO()
    buf.write("index,real,imag\n")
    for i, j in zip(*np.nonzero(np.abs(M) > 0)):
        v = M[i, j]
        buf.write(f"{names[i]}|{names[j]},{v.real!r},{v.imag!r}\n")
    return buf.getvalue()


def epr(field: FieldSpec, n: int) -> BipartiteState:
    D = field.q ** n
    lay = Layout([(n, field.q)])
    lay.check_cap()
    return BipartiteState(np.eye(D, dtype=np.complex128) / np.sqrt(D), lay)


def product_state(vec: Sequence[complex], layout: Layout) -> BipartiteState:
    """A state on one side only; the other side is one-dimensional."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1, 1)
    return BipartiteState(v, layout, Layout([]))


# -- measurement operations ------------------------------------------------------------

def _sqrt_psd(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((M + np.conj(M.T)) / 2)
    if w.min() < -TOL_VALID:
        raise QsimError("measurement element is not PSD")
    return (V * np.sqrt(np.clip(w, 0, None))) @ np.conj(V.T)


def measure(state: BipartiteState, side: int, m: Measurement, rng) -> tuple[Hashable, float, BipartiteState]:
    """Born-rule sample with the Luders post-state sqrt(M_a) psi / norm."""
    probs, posts = [], []
    for a, M in m.items():
        K = M if m.kind == "projective" else _sqrt_psd(M)
        post = state.apply(K, side)
        p = post.norm() ** 2
        probs.append(p)
        posts.append(post)
    probs = np.array(probs)
    if abs(probs.sum() - 1) > 1e-8:
        raise QsimError("measurement probabilities do not sum to one")
    i = int(rng.choice(len(probs), p=probs / probs.sum()))
    post = posts[i]
    return m.labels[i], float(probs[i]), BipartiteState(post.psi / np.sqrt(probs[i]), post.layout_a, post.layout_b)


def outcome_probabilities(state: BipartiteState, side: int, m: Measurement) -> dict:
    out = {}
    I_other = np.eye(state.layout_b.dim if side == 0 else state.layout_a.dim)
    for a, M in m.items():
        p = state.expect(M, I_other) if side == 0 else state.expect(np.eye(state.layout_a.dim), M)
        out[a] = float(np.real(p))
    return out


def marginalize(m: Measurement, discard: Callable[[Hashable], Hashable]) -> Measurement:
    groups: dict = {}
    order = []
    for a, M in m.items():
        b = discard(a)
        if b not in groups:
            groups[b] = np.zeros_like(M)
            order.append(b)
        groups[b] = groups[b] + M
    return Measurement(order, [groups[b] for b in order], m.kind)


def pauli_twirl(op: np.ndarray, field: FieldSpec, n: int, aux_dim: int = 1) -> np.ndarray:
    """Average of P A P^dag over all P = X(x) Z(z) on an n-qudit register (tensor identity on aux)."""
    op = np.asarray(op, dtype=np.complex128)
    S = _strings(field, n)
    Ia = np.eye(aux_dim)
    acc = np.zeros_like(op)
    Zs = [np.kron(pauli_Z(field, z), Ia) for z in S]
    for x in S:
        Xm = np.kron(pauli_X(field, x), Ia)
        for Zm in Zs:
            P = Xm @ Zm
            acc += P @ op @ np.conj(P.T)
    return acc / len(S) ** 2


def subspace_twirl(op: np.ndarray, field: FieldSpec, n: int, v: Sequence[Sequence[int]], aux_dim: int = 1) -> np.ndarray:
    """Z-twirl over all of F_q^n followed by the X-twirl over span(v)."""
    op = np.asarray(op, dtype=np.complex128)
    S = _strings(field, n)
    Ia = np.eye(aux_dim)
    acc = np.zeros_like(op)
    for z in S:
        P = np.kron(pauli_Z(field, z), Ia)
        acc += P @ op @ np.conj(P.T)
    acc /= len(S)
    V = AffineSubspace(field, [0] * n, v).points() if len(v) else np.zeros((1, n), dtype=np.int64)
    out = np.zeros_like(op)
    for x in V:
        P = np.kron(pauli_X(field, x), Ia)
        out += P @ acc @ np.conj(P.T)
    return out / len(V)


def partial_trace(op: np.ndarray, dims: Sequence[int], i: int) -> np.ndarray:
    k = len(dims)
    T = np.asarray(op).reshape(tuple(dims) + tuple(dims))
    R = np.trace(T, axis1=i, axis2=i + k)
    rest = [d for j, d in enumerate(dims) if j != i]
    D = int(np.prod(rest)) if rest else 1
    return R.reshape(D, D)


def hide(op, layout: Layout, i: int) -> np.ndarray:
    """(1 / d_i) I_i (x) tr_i(op), with the identity placed back on register i."""
    mat = op.mat if isinstance(op, LinOp) else np.asarray(op, dtype=np.complex128)
    dims = list(layout.dims)
    if not 0 <= i < len(dims):
        raise QsimError(f"no register {i}")
    R = partial_trace(mat, dims, i)
    k = len(dims)
    rest = [d for j, d in enumerate(dims) if j != i]
    Rt = R.reshape(tuple(rest) + tuple(rest))
    full = np.multiply.outer(np.eye(dims[i]) / dims[i], Rt)
    # axes now: (i_row, i_col, rest_rows..., rest_cols...); move i into place
    order_rows = list(range(2, 2 + len(rest)))
    order_cols = list(range(2 + len(rest), 2 + 2 * len(rest)))
    rows = order_rows[:i] + [0] + order_rows[i:]
    cols = order_cols[:i] + [1] + order_cols[i:]
    D = layout.dim
    return np.transpose(full, rows + cols).reshape(D, D)


def naimark_dilate(m: Measurement) -> tuple[Measurement, np.ndarray]:
    """Projective measurement on system (x) C^N reproducing m on psi (x) |0>."""
    if m.kind == "projective" and m.is_projective():
        return m, np.ones(1, dtype=np.complex128)
    D, N = m.dim, len(m.ops)
    V = np.zeros((D * N, D), dtype=np.complex128)
    for a, M in enumerate(m.ops):
        S = _sqrt_psd(M)
        V[a::N, :] = S
    # complete the isometry to a unitary whose columns (j, 0) are V
    U = np.zeros((D * N, D * N), dtype=np.complex128)
    cols0 = np.arange(D) * N
    U[:, cols0] = V
    Q, _ = np.linalg.qr(np.concatenate([V, np.eye(D * N)], axis=1))
    comp = Q[:, D:D * N]
    # the first D columns of Q span range(V); the next D*N - D are orthonormal to it
    others = np.setdiff1d(np.arange(D * N), cols0)
    U[:, others] = comp
    ops = []
    for a in range(N):
        Pa = np.zeros((D * N, D * N), dtype=np.complex128)
        Pa[a::N, a::N] = np.eye(D)
        ops.append(np.conj(U.T) @ Pa @ U)
    aux = np.zeros(N, dtype=np.complex128)
    aux[0] = 1.0
    return Measurement(m.labels, ops, "projective"), aux


# -- distances ---------------------------------------------------------------------

def sim_delta(state: BipartiteState, A: dict, B: dict, dist: Sequence[tuple[float, Hashable]]) -> float:
    """1 - E_x sum_a <psi| A^x_a (x) B^x_a |psi> for families A[x], B[x] of Measurements."""
    tot = 0.0
    for px, x in dist:
        for a, Aop in A[x].items():
            tot += px * float(np.real(state.expect(Aop, B[x][a])))
    return 1.0 - tot


def approx_delta(state: BipartiteState, A: dict, B: dict, dist: Sequence[tuple[float, Hashable]]) -> float:
    """E_x sum_a || (A^x_a - B^x_a) (x) I psi ||^2."""
    tot = 0.0
    for px, x in dist:
        labels = list(dict.fromkeys(list(A[x].labels) + list(B[x].labels)))
        for a in labels:
            diff = A[x][a] - B[x][a]
            tot += px * float(np.linalg.norm(diff @ state.psi) ** 2)
    return tot


# -- Pauli-type measurement descriptors ----------------------------------------------
#
# A descriptor names a projective measurement on one n-qudit register:
#   ("Z",) / ("X",)         full basis measurement, outcome a string
#   ("PI", v)               subspace measurement, outcome the surface parallel to span(v)
#   ("PX", v)               partial X measurement, outcome (u . v_i)_i
#   ("PIPX", v)             both of the above (they commute), outcome (surface, values)
#   ("H",)                  nothing measured, outcome None
#   ("M", Measurement)      an arbitrary measurement (statevector only)

def descriptor_measurement(field: FieldSpec, n: int, desc: tuple) -> Measurement:
    kind = desc[0]
    if kind in ("Z", "X"):
        return _cached_basis_measurement(field, kind, n)
    if kind == "H":
        return trivial_measurement(field.q ** n)
    if kind == "M":
        return desc[1]
    v = tuple(tuple(int(c) for c in r) for r in desc[1])
    if kind == "PI":
        return _pi_measurement(field, n, v)
    if kind == "PX":
        return _px_measurement(field, n, v)
    if kind == "PIPX":
        PI = _pi_measurement(field, n, v)
        PX = _px_measurement(field, n, v)
        labels, ops = [], []
        for s, A in PI.items():
            for a, B in PX.items():
                P = A @ B
                if np.linalg.norm(P) > 1e-12:
                    labels.append((s, a))
                    ops.append(P)
        return Measurement(labels, ops)
    raise QsimError(f"unknown descriptor {desc!r}")


@lru_cache(maxsize=None)
def _cached_basis_measurement(field: FieldSpec, W: str, n: int) -> Measurement:
    return basis_measurement(field, W, n)


@lru_cache(maxsize=None)
def _pi_measurement(field: FieldSpec, n: int, v: tuple) -> Measurement:
    ss = surfaces(field, [list(r) for r in v], n)
    return Measurement(ss, [subspace_projector(field, v, s) for s in ss])


@lru_cache(maxsize=None)
def _px_measurement(field: FieldSpec, n: int, v: tuple) -> Measurement:
    S = _strings(field, n)
    vals = {}
    for u in S:
        a = tuple(int(_dot_vec(field, u[None, :], r)[0]) for r in v)
        vals.setdefault(a, True)
    labels = sorted(vals)
    return Measurement(labels, [partial_x_projector(field, v, a, n) for a in labels])


def descriptor_outcome(field: FieldSpec, desc: tuple, uZ: np.ndarray, uX: np.ndarray):
    """Outcome of a Pauli-type descriptor given the register's hidden strings."""
    kind = desc[0]
    if kind == "Z":
        return tuple(int(x) for x in uZ)
    if kind == "X":
        return tuple(int(x) for x in uX)
    if kind == "H":
        return None
    if kind == "M":
        raise QsimError("arbitrary measurements are not supported by the sampler")
    v = desc[1]
    if kind == "PI":
        return AffineSubspace(field, uZ, v)
    px = tuple(int(_dot_vec(field, uX[None, :], r)[0]) for r in v)
    if kind == "PX":
        return px
    if kind == "PIPX":
        return (AffineSubspace(field, uZ, v), px)
    raise QsimError(f"unsupported descriptor {desc!r}")


class HiddenEPR:
    """Hidden-variable model of EPR registers for Pauli-type descriptors.

    Each register carries a uniform Z string u and an independent uniform X string x;
    Alice's Z-type outcomes read u, her X-type outcomes read x, and Bob's read u and -x.
    For descriptors built from commuting Z(.) and X(.) subgroups this reproduces the
    quantum joint distribution exactly (checked against the statevector in the tests).
    """

    def __init__(self, registers: Sequence[tuple[int, int]], rng):
        self.registers = list(registers)
        self.fields = [field_of_order(q) for _, q in self.registers]
        self.uZ = [rng.integers(0, q, n) for n, q in self.registers]
        self.uX = [rng.integers(0, q, n) for n, q in self.registers]

    @classmethod
    def fixed(cls, registers: Sequence[tuple[int, int]], uZ: Sequence, uX: Sequence) -> "HiddenEPR":
        hv = cls.__new__(cls)
        hv.registers = list(registers)
        hv.fields = [field_of_order(q) for _, q in hv.registers]
        hv.uZ = [np.asarray(u, dtype=np.int64) for u in uZ]
        hv.uX = [np.asarray(u, dtype=np.int64) for u in uX]
        return hv

    def outcome(self, side: int, reg, desc: tuple):
        """`reg` may be a tuple of registers over one field, read as their concatenation."""
        if isinstance(reg, tuple):
            f = self.fields[reg[0]]
            if any(self.fields[r] != f for r in reg):
                raise QsimError("a superregister needs a common field")
            uZ = np.concatenate([self.uZ[r] for r in reg])
            uX = np.concatenate([self.uX[r] for r in reg])
        else:
            f = self.fields[reg]
            uZ, uX = self.uZ[reg], self.uX[reg]
        if side == 1:
            uX = f.neg_arr(uX)
        return descriptor_outcome(f, desc, uZ, uX)


def epr_sampler(registers: Sequence[tuple[int, int]], desc_a: Sequence[tuple], desc_b: Sequence[tuple], rng) -> tuple[list, list]:
    """Joint outcomes of per-register descriptors on a product of EPR registers."""
    hv = HiddenEPR(registers, rng)
    out_a = [hv.outcome(0, i, d) for i, d in enumerate(desc_a)]
    out_b = [hv.outcome(1, i, d) for i, d in enumerate(desc_b)]
    return out_a, out_b


def exact_descriptor_distribution(field: FieldSpec, n: int, desc_a: tuple, desc_b: tuple) -> dict:
    """Exact sampler distribution, by enumerating the hidden strings."""
    S = _strings(field, n)
    out: dict = {}
    w = 1.0 / len(S) ** 2
    for uZ in S:
        for uX in S:
            a = descriptor_outcome(field, desc_a, uZ, uX)
            b = descriptor_outcome(field, desc_b, uZ, field.neg_arr(uX))
            out[(a, b)] = out.get((a, b), 0.0) + w
    return out


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)

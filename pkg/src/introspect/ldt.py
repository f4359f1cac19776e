"""Classical low-degree tests: surface-vs-point, its simultaneous variant, and the subset tester."""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .games import DeterministicStrategy, Entry, Game, mixture, to_jsonable
from .gf import FieldSpec, field_of_order, rank
from .poly import AffineSubspace, MultiPoly, grid_points
from .rng import as_rng


class LdtError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceTestConfig:
    m: int
    d: int
    q: int
    k: int = 2
    ell: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.ell < 1:
            raise LdtError("k and ell must be positive")

    @property
    def field(self) -> FieldSpec:
        return field_of_order(self.q)


# -- oracles ---------------------------------------------------------------------------

class AnswerOracle:
    """Prover model: surface queries return polynomials on the flat, point queries values."""

    def surface(self, s: AffineSubspace, v=None) -> list[MultiPoly]:
        raise NotImplementedError

    def point(self, u) -> list[int]:
        raise NotImplementedError

    def subset(self, F) -> list[int]:
        return [self.point(x)[0] for x in F]


class HonestOracle(AnswerOracle):
    """Answers every query from fixed global polynomials g_1..g_ell."""

    def __init__(self, gs: Sequence[MultiPoly]):
        self.gs = list(gs)

    def surface(self, s, v=None):
        return [g.restrict(s) for g in self.gs]

    def point(self, u):
        return [g.eval(list(u)) for g in self.gs]

    def subset(self, F):
        return [self.gs[0].eval(list(x)) for x in F]


class FunctionOracle(AnswerOracle):
    """Wraps callables; convenient for cheating provers."""

    def __init__(self, surface: Callable | None = None, point: Callable | None = None, subset: Callable | None = None):
        self._s, self._p, self._f = surface, point, subset

    def surface(self, s, v=None):
        return self._s(s, v)

    def point(self, u):
        return self._p(u)

    def subset(self, F):
        return self._f(F) if self._f else super().subset(F)


class SerializedOracle(AnswerOracle):
    """Serializes access to an oracle that is not safe for concurrent calls."""

    def __init__(self, inner: AnswerOracle):
        self.inner = inner
        self._lock = threading.Lock()

    def surface(self, s, v=None):
        with self._lock:
            return self.inner.surface(s, v)

    def point(self, u):
        with self._lock:
            return self.inner.point(u)

    def subset(self, F):
        with self._lock:
            return self.inner.subset(F)


# -- sampling -------------------------------------------------------------------------------

def sample_surface_point(config: SurfaceTestConfig, rng, m: int | None = None):
    """Directions v_i iid uniform (possibly dependent), uniform parallel flat, uniform point on it."""
    f = config.field
    m = config.m if m is None else m
    v = rng.integers(0, f.q, (config.k, m))
    u = rng.integers(0, f.q, m)
    s = AffineSubspace(f, u, v)
    return v, s, u


def _poly_ok(p, arity: int, d: int) -> bool:
    # any polynomial-like answer (arity, degree, eval) is fine, e.g. a coefficient-tensor word
    if isinstance(p, MultiPoly):
        return p.arity == arity and p.degree() <= d
    return (callable(getattr(p, "eval", None)) and callable(getattr(p, "degree", None))
            and getattr(p, "arity", None) == arity and p.degree() <= d)


def _single(answer):
    if isinstance(answer, (list, tuple)) and len(answer) == 1:
        return answer[0]
    return answer


def surface_point_check(s: AffineSubspace, u, fs, bs, d: int, ell: int) -> tuple[bool, str]:
    if not isinstance(fs, (list, tuple)) or len(fs) != ell:
        return False, "surface answer has the wrong number of polynomials"
    if not isinstance(bs, (list, tuple)) or len(bs) != ell:
        return False, "point answer has the wrong number of values"
    lam = [int(c) for c in s.coords(u)]
    for fi, bi in zip(fs, bs):
        if not _poly_ok(fi, s.dim, d):
            return False, "surface polynomial has the wrong arity or degree"
        if fi.eval(lam) != bi:
            return False, "mismatch"
    return True, ""


def run_surface_vs_point(config: SurfaceTestConfig, alice: AnswerOracle, bob: AnswerOracle, rng) -> tuple[bool, dict]:
    v, s, u = sample_surface_point(config, rng)
    fs = alice.surface(s, v)
    bs = bob.point(u)
    ok, why = surface_point_check(s, u, fs, bs, config.d, config.ell)
    rec = {"branch": "surface-vs-point", "queries": [{"v": to_jsonable(v), "s": s.wire()}, to_jsonable(u)],
           "answers": [to_jsonable(fs), to_jsonable(bs)], "verdict": ok}
    if why and not ok:
        rec["diagnostic"] = why
    return ok, rec


def surface_vs_point_game(config: SurfaceTestConfig, max_entries: int = 10 ** 6) -> Game:
    """Surface-vs-point test as a Game; enumerable when q^{m(k+1)} is small enough.

    Alice's question is ("surface", v, s) and Bob's ("point", u).
    """
    f = config.field
    q, m, k, d, ell = config.q, config.m, config.k, config.d, config.ell

    def make(v, u) -> Entry:
        vt = tuple(tuple(int(c) for c in r) for r in v)
        s = AffineSubspace(f, u, vt)
        ut = tuple(int(c) for c in u)
        return Entry(0.0, ("surface", vt, s), ("point", ut), lambda a, b: surface_point_check(s, ut, a, b, d, ell)[0],
                     "surface-vs-point")

    params = {"m": m, "d": d, "q": q, "k": k, "ell": ell}
    total = q ** (m * (k + 1))
    if total <= max_entries:
        pts = grid_points(f, m)
        entries = []
        for vs in itertools.product(range(len(pts)), repeat=k):
            v = pts[list(vs)]
            for u in pts:
                e = make(v, u)
                e.prob = 1.0 / total
                entries.append(e)
        return Game("surface-vs-point", entries, params=params)

    def sampler(rng):
        v, s, u = sample_surface_point(config, rng)
        e = make(v, u)
        e.prob = 1.0
        return e

    return Game("surface-vs-point", sampler=sampler, params=params)


def oracle_strategy(alice: AnswerOracle, bob: AnswerOracle | None = None) -> DeterministicStrategy:
    """Deterministic strategy answering test questions from oracles."""
    bob = bob or alice

    def answer(oracle):
        def f(x):
            kind = x[0]
            if kind == "surface":
                return oracle.surface(x[2], x[1])
            if kind == "point":
                return oracle.point(x[1])
            if kind == "subspace":
                return oracle.surface(x[1], None)
            if kind == "subset":
                return oracle.subset(x[1])
            raise LdtError(f"unknown query kind {kind}")
        return f

    return DeterministicStrategy(answer(alice), answer(bob))


# -- combine machinery ----------------------------------------------------------------------

def combine_poly(gs: Sequence[MultiPoly]) -> MultiPoly:
    """combine_g(x, y) = sum_i x_i g_i(y) on F_q^{ell + m} (x first)."""
    ell = len(gs)
    m = gs[0].arity
    f = gs[0].field
    out = MultiPoly.zero(f, ell + m)
    for i, g in enumerate(gs):
        out = out + MultiPoly.var(f, ell + m, i) * g.embed(ell + m, list(range(ell, ell + m)))
    return out


def combine_values(field: FieldSpec, bs: Sequence[int], x: Sequence[int]) -> int:
    acc = 0
    for xi, bi in zip(x, bs):
        acc = field.add(acc, field.mul(int(xi), int(bi)))
    return acc


def proj(s: AffineSubspace, ell: int) -> AffineSubspace:
    """Image of a flat in F_q^{ell + m} under (x, y) -> y."""
    return AffineSubspace(s.field, s.intercept[ell:], s.directions[:, ell:] if s.dim else [])


def random_subspace_containing(field: FieldSpec, F: Sequence[Sequence[int]], dim: int, m: int, rng) -> AffineSubspace:
    """Uniformly random linear subspace of the given dimension containing the points F."""
    base = [list(map(int, x)) for x in F]
    r = rank(field, base) if base else 0
    if dim < r:
        raise LdtError("requested dimension is below the span of F")
    vecs = list(base)
    cur = r
    while cur < dim:
        y = rng.integers(0, field.q, m)
        if rank(field, vecs + [list(y)]) > cur:
            vecs.append(list(y))
            cur += 1
    return AffineSubspace(field, [0] * m, vecs)


def lift_sample(field: FieldSpec, s: AffineSubspace, ell: int, k: int, rng) -> AffineSubspace:
    """Uniform dimension-k linear extension of proj(s) after translating it through zero."""
    p = proj(s, ell)
    m = p.ambient
    dirs = [list(r) for r in p.directions]
    cur = p.dim
    while cur < min(k, m):
        y = rng.integers(0, field.q, m)
        if rank(field, dirs + [list(y)]) > cur:
            dirs.append(list(y))
            cur += 1
    return AffineSubspace(field, p.intercept, dirs)


def subspaces_containing(field: FieldSpec, F: Sequence[Sequence[int]], dim: int, m: int) -> list[AffineSubspace]:
    """All linear subspaces of the given dimension containing F (each listed once)."""
    base = AffineSubspace(field, [0] * m, [list(map(int, x)) for x in F])
    r = base.dim
    if dim < r:
        raise LdtError("requested dimension is below the span of F")
    pts = grid_points(field, m)
    found = {}
    for ys in itertools.product(range(len(pts)), repeat=dim - r):
        dirs = [list(row) for row in base.directions] + [list(pts[i]) for i in ys]
        s = AffineSubspace(field, [0] * m, dirs)
        if s.dim == dim:
            found.setdefault(s.key(), s)
    return [found[k] for k in sorted(found)]


def exactly_linear(f: MultiPoly, ell: int) -> bool:
    """f(x, y) = sum_i x_i f_i(y): every monomial has x-degree exactly one."""
    return all(sum(e[:ell]) == 1 for e in f.terms)


def restrict_y(f: MultiPoly, y: Sequence[int], ell: int) -> MultiPoly:
    """f|_y as a polynomial in the first ell variables."""
    field = f.field
    out: dict = {}
    for e, c in f.terms.items():
        v = c
        for yi, d in zip(y, e[ell:]):
            if d:
                v = field.mul(v, field.pow(int(yi), d))
        if v:
            key = e[:ell]
            out[key] = field.add(out.get(key, 0), v)
    return MultiPoly(field, ell, out)


def linear_restriction_fraction(f: MultiPoly, ell: int) -> float:
    """Fraction of y in F_q^m for which f|_y is exactly linear."""
    m = f.arity - ell
    pts = grid_points(f.field, m)
    return float(np.mean([exactly_linear(restrict_y(f, y, ell), ell) for y in pts]))


# -- the low-degree subset tester ------------------------------------------------------------

def subset_tester_game(m: int, q: int, d: int, F: Sequence[Sequence[int]], k: int | None = None,
                       max_entries: int = 2 * 10 ** 5) -> Game:
    """Low-degree branch 1/2 (surface test, k = 2) and cross-check 1/2 with coin b and sub-branches 1/4 each.

    Cross-check subspaces are uniform linear subspaces of dimension min(k + 1, m) containing F.
    """
    f = field_of_order(q)
    F = tuple(tuple(int(c) for c in x) for x in F)
    k = len(F) if k is None else k
    if len(F) > k:
        raise LdtError("|F| exceeds k")
    dim = min(k + 1, m)
    ld = surface_vs_point_game(SurfaceTestConfig(m, d, q, 2, 1), max_entries=max_entries)
    subs = subspaces_containing(f, F, dim, m)
    entries = []
    ps = 1.0 / len(subs)
    for s in subs:
        sq = ("subspace", s)
        lam_F = [tuple(int(c) for c in s.coords(x)) for x in F]
        pts = s.points()
        pw = 1.0 / len(pts)
        for b in (0, 1):
            for w in pts:
                wt = tuple(int(c) for c in w)
                lam_w = tuple(int(c) for c in s.coords(w))
                pointq = ("point", wt)

                def pred_a(y, g, lam_w=lam_w, b=b, dim=s.dim):
                    if b == 1:
                        g, y = y, g
                    g = _single(g)
                    if not _poly_ok(g, dim, d) or not isinstance(y, (list, tuple)) or len(y) != 1:
                        return False
                    return g.eval(list(lam_w)) == y[0]

                x0, x1 = (pointq, sq) if b == 0 else (sq, pointq)
                entries.append(Entry(0.5 * 0.5 * ps * pw, x0, x1, pred_a, f"cross-point/b{b}"))

            def pred_b(g, fv, lam_F=lam_F, b=b, dim=s.dim):
                if b == 1:
                    g, fv = fv, g
                g = _single(g)
                if not _poly_ok(g, dim, d) or not isinstance(fv, (list, tuple)) or len(fv) != len(lam_F):
                    return False
                return all(g.eval(list(l)) == v for l, v in zip(lam_F, fv))

            subq = ("subset", F)
            x0, x1 = (sq, subq) if b == 0 else (subq, sq)
            entries.append(Entry(0.5 * 0.5 * ps, x0, x1, pred_b, f"cross-subset/b{b}"))
    cross = Game("cross-check", entries)
    return mixture("ld-subset", [(0.5, ld, "low-degree"), (0.5, cross, "cross")],
                   params={"m": m, "q": q, "d": d, "k": k, "F": F})


def run_subset_tester(m: int, q: int, d: int, F, oracles: tuple[AnswerOracle, AnswerOracle], rng) -> tuple[bool, dict]:
    """One sampled round of the subset tester."""
    rng = as_rng(rng)
    g = subset_tester_game(m, q, d, F, max_entries=0)
    e = g.sample(rng)
    strat = oracle_strategy(*oracles)
    a, b = strat.sample(e.x0, e.x1, rng)
    ok = bool(e.pred(a, b))
    return ok, {"branch": e.branch, "queries": [to_jsonable(e.x0), to_jsonable(e.x1)],
                "answers": [to_jsonable(a), to_jsonable(b)], "verdict": ok}


def two_step_distribution(field: FieldSpec, F, k: int, m: int) -> dict:
    """Exact distribution of a uniform point of a uniform (k+1)-dim subspace containing F."""
    subs = subspaces_containing(field, F, min(k + 1, m), m)
    out: dict = {}
    for s in subs:
        pts = s.points()
        for w in pts:
            key = tuple(int(c) for c in w)
            out[key] = out.get(key, 0.0) + 1.0 / (len(subs) * len(pts))
    return out


def tv_from_uniform(dist: dict, field: FieldSpec, m: int) -> float:
    u = 1.0 / field.q ** m
    tot = sum(abs(dist.get(tuple(int(c) for c in x), 0.0) - u) for x in grid_points(field, m))
    return 0.5 * tot

"""Exact H-representation polytopes: vertices, volume, LP and slices.

A :class:`Polytope` is a list of constraints ``normal . x <= bound``.  The
heavy lifting happens in :mod:`bllab.kernel` on an integer "row form": every
normal is rewritten as a positive multiple of a primitive integer row, parallel
constraints are merged into two-sided bounds, and the coordinates are scaled by
the common denominator of the bounds so that all data is integral.

Exhaustive vertex enumeration is sized for desk-scale problems (at most 16
distinct rows, dimension at most 8).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Optional, Sequence

from . import kernel, linalg
from .core import Configuration, Interval, as_rational
from .errors import ColinearFunctionalsError, InfeasibleError, UnboundedError
from .simplex import linprog

Vector = tuple[Fraction, ...]


@dataclass(frozen=True)
class Polytope:
    dim: int
    constraints: tuple[tuple[Vector, Fraction], ...]

    def __post_init__(self):
        cons = tuple((tuple(as_rational(v) for v in a), as_rational(b)) for a, b in self.constraints)
        object.__setattr__(self, "constraints", cons)
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")
        for a, _ in cons:
            if len(a) != self.dim:
                raise ValueError("constraint normal has wrong length")
            if self.dim and not any(a):
                raise ValueError("constraint normal is zero")

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(_dot(a, x) <= b for a, b in self.constraints)


@dataclass(frozen=True)
class Vertex:
    point: Vector
    active: frozenset[int]


def _dot(a, x) -> Fraction:
    return sum((ai * xi for ai, xi in zip(a, x)), Fraction(0))


@lru_cache(maxsize=4096)
def _bases(rows: tuple[tuple[int, ...], ...]):
    return linalg.bases_table(rows)


@dataclass(frozen=True)
class RowForm:
    """Integer row form of a polytope: lo[r] <= rows[r] . y <= hi[r], y = scale * x."""

    rows: tuple[tuple[int, ...], ...]
    lo: tuple[Optional[int], ...]
    hi: tuple[Optional[int], ...]
    scale: int

    def volume(self) -> Fraction:
        m = len(self.rows[0])
        v = kernel.volume(self.rows, _bases(self.rows), self.lo, self.hi)
        return v / Fraction(self.scale) ** m

    def vertices(self) -> list[Vector]:
        out = []
        for X, d, _ in kernel.vertices(self.rows, _bases(self.rows), self.lo, self.hi):
            den = d * self.scale
            out.append(tuple(Fraction(v, den) for v in X))
        return out


def row_form(rows: Sequence[tuple[tuple[int, ...], Optional[Fraction], Optional[Fraction]]]) -> Optional[RowForm]:
    """Merge (primitive row, lower, upper) triples; None when trivially empty."""
    merged: dict[tuple[int, ...], list] = {}
    for p, lo, hi in rows:
        cur = merged.setdefault(p, [None, None])
        if lo is not None and (cur[0] is None or lo > cur[0]):
            cur[0] = lo
        if hi is not None and (cur[1] is None or hi < cur[1]):
            cur[1] = hi
    keys = list(merged)
    for k in keys:
        lo, hi = merged[k]
        if lo is not None and hi is not None and lo > hi:
            return None
    dens = [v.denominator for k in keys for v in merged[k] if v is not None]
    scale = lcm(*dens) if dens else 1
    lo = tuple(None if merged[k][0] is None else int(merged[k][0] * scale) for k in keys)
    hi = tuple(None if merged[k][1] is None else int(merged[k][1] * scale) for k in keys)
    return RowForm(tuple(keys), lo, hi, scale)


def _to_row_form(P: Polytope) -> Optional[RowForm]:
    triples = []
    for a, b in P.constraints:
        p, g = linalg.integer_row(a)
        # a = g * p up to sign of the first nonzero entry
        lead = next(v for v in p if v != 0)
        if lead > 0:
            triples.append((p, None, b / g))
        else:
            triples.append((tuple(-v for v in p), -b / g, None))
    return row_form(triples)


def build_box_polytope(config: Configuration, boxes: Sequence[Interval]) -> Polytope:
    """{x : lo_j <= L_j(x) <= hi_j}; constraints 2j (upper) and 2j+1 (lower)."""
    if len(boxes) != config.n:
        raise ValueError("one box per row required")
    cons = []
    for row, box in zip(config.rows, boxes):
        cons.append((row, box.hi))
        cons.append((tuple(-v for v in row), -box.lo))
    return Polytope(config.m, tuple(cons))


def lp_maximize(P: Polytope, objective: Sequence) -> tuple[Fraction, Vector]:
    """Exact maximum of objective . x over P and a vertex attaining it."""
    A = [a for a, _ in P.constraints]
    b = [bd for _, bd in P.constraints]
    res = linprog(list(map(as_rational, objective)), A, b)
    return res.value, res.x


def is_bounded(P: Polytope) -> bool:
    """Bounded iff every ±coordinate LP has a finite optimum (empty counts as bounded)."""
    try:
        for i in range(P.dim):
            for s in (1, -1):
                c = [0] * P.dim
                c[i] = s
                lp_maximize(P, c)
    except UnboundedError:
        return False
    except InfeasibleError:
        return True
    return True


def _check_bounded(P: Polytope):
    if not is_bounded(P):
        raise UnboundedError("unbounded polytope")


def enumerate_vertices(P: Polytope, check: bool = True) -> list[Vertex]:
    """All vertices of a bounded polytope, each with its full active set."""
    if check:
        _check_bounded(P)
    if P.dim == 0:
        return [Vertex((), frozenset(range(len(P.constraints))))] if _point_feasible(P) else []
    rf = _to_row_form(P)
    if rf is None:
        return []
    out = []
    for pt in rf.vertices():
        active = frozenset(i for i, (a, b) in enumerate(P.constraints) if _dot(a, pt) == b)
        out.append(Vertex(pt, active))
    out.sort(key=lambda v: v.point)
    return out


def _point_feasible(P: Polytope) -> bool:
    return all(b >= 0 for _, b in P.constraints)


def volume(P: Polytope, check: bool = True) -> Fraction:
    """Exact dim-dimensional volume; 0 for empty or lower-dimensional polytopes.

    A zero-dimensional polytope is a point and has volume 1 when feasible.
    """
    if P.dim == 0:
        return Fraction(int(_point_feasible(P)))
    if check:
        _check_bounded(P)
    rf = _to_row_form(P)
    if rf is None:
        return Fraction(0)
    return rf.volume()


def affine_section(P: Polytope, functionals: Sequence[Sequence], levels: Sequence) -> tuple[Fraction, Polytope]:
    """Restrict P to {F x = levels}; return (Jacobian factor, reduced polytope).

    With pivot columns whose minor G of F is invertible, the remaining
    coordinates y parametrize the section and the Fubini factor is 1/|det G|.
    """
    F = [[as_rational(v) for v in f] for f in functionals]
    lv = [as_rational(v) for v in levels]
    r = len(F)
    m = P.dim
    _, piv = linalg.row_echelon(F)
    if len(piv) < r:
        raise ColinearFunctionalsError("colinear functionals")
    free = [c for c in range(m) if c not in piv]
    G = [[F[i][c] for c in piv] for i in range(r)]
    # x_piv = G^{-1} (levels - F_free y)
    base = linalg.solve(G, lv)
    # dependence of x_piv on each free coordinate
    dep = []
    for c in free:
        col = [F[i][c] for i in range(r)]
        dep.append(linalg.solve(G, col))
    cons = []
    for a, b in P.constraints:
        a_piv = [a[c] for c in piv]
        shift = _dot(a_piv, base)
        new = tuple(a[c] - _dot(a_piv, dep[k]) for k, c in enumerate(free))
        if any(new):
            cons.append((new, b - shift))
        elif b - shift < 0:
            # constraint violated everywhere on the section
            cons.append(None)
    factor = 1 / abs(linalg.det(G))
    if any(c is None for c in cons):
        return factor, _EMPTY(m - r)
    return factor, Polytope(m - r, tuple(cons))


def _EMPTY(dim):
    if dim == 0:
        return Polytope(0, (((), Fraction(-1)),))
    z = tuple(Fraction(int(i == 0)) for i in range(dim))
    return Polytope(dim, ((z, Fraction(-1)), (tuple(-v for v in z), Fraction(0))))


def slice_volume(P: Polytope, functional: Sequence, level) -> Fraction:
    """(dim-1)-volume of P ∩ {functional . x = level}, Fubini-normalized.

    Integrating over the level reproduces volume(P).  P must be bounded.
    """
    f = [as_rational(v) for v in functional]
    if not any(f):
        raise ValueError("functional is zero")
    factor, Q = affine_section(P, [f], [level])
    return factor * volume(Q, check=False)


def double_slice_volume(P: Polytope, f1, f2, l1, l2) -> Fraction:
    """(dim-2)-volume of P ∩ {f1 . x = l1, f2 . x = l2}, Fubini-normalized."""
    if P.dim < 2:
        raise ValueError("double slices need dim >= 2")
    factor, Q = affine_section(P, [f1, f2], [l1, l2])
    return factor * volume(Q, check=False)

"""Exact two-phase simplex method on rational tableaux (Bland's rule)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InfeasibleError, UnboundedError


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple[Fraction, ...]


def _pivot(T, basis, r, c):
    row = T[r]
    piv = row[c]
    if piv != 1:
        inv = 1 / piv
        row[:] = [v * inv for v in row]
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                other[:] = [a - f * b for a, b in zip(other, row)]
    basis[r] = c


def _run(T, basis, ncols, allowed):
    """Maximize the objective stored in the last row (as -c); Bland's rule."""
    obj = T[-1]
    while True:
        enter = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if enter is None:
            return
        best = None
        for i in range(len(T) - 1):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise UnboundedError("LP objective is unbounded")
        _pivot(T, basis, best[1], enter)


def linprog(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
            A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LPResult:
    """Maximize c.x over free variables x subject to A_ub x <= b_ub, A_eq x = b_eq.

    The returned point is a basic optimal solution, i.e. a vertex of the
    feasible region whenever that region has vertices.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    rows = [([Fraction(v) for v in a], Fraction(b), True) for a, b in zip(A_ub, b_ub)]
    rows += [([Fraction(v) for v in a], Fraction(b), False) for a, b in zip(A_eq, b_eq)]
    nrows = len(rows)
    nslack = sum(1 for r in rows if r[2])
    # columns: p (n), q (n), slacks, artificials, rhs
    nart = nrows
    ncols = 2 * n + nslack + nart
    T = []
    basis = []
    s = 0
    for i, (a, b, is_ub) in enumerate(rows):
        line = a + [-v for v in a] + [Fraction(0)] * (nslack + nart) + [b]
        if is_ub:
            line[2 * n + s] = Fraction(1)
            s += 1
        if b < 0:
            line = [-v for v in line]
        line[2 * n + nslack + i] = Fraction(1)
        T.append(line)
        basis.append(2 * n + nslack + i)
    # phase 1: maximize -sum(artificials)
    obj = [Fraction(0)] * (ncols + 1)
    for i in range(nrows):
        obj = [o - t for o, t in zip(obj, T[i])]
    for i in range(nrows):
        obj[2 * n + nslack + i] = Fraction(0)
    T.append(obj)
    allowed = [True] * ncols
    _run(T, basis, ncols, allowed)
    if T[-1][-1] != 0:
        raise InfeasibleError("LP is infeasible")
    # drive artificials out of the basis
    art0 = 2 * n + nslack
    for i in range(nrows - 1, -1, -1):
        if basis[i] >= art0:
            col = next((j for j in range(art0) if T[i][j] != 0), None)
            if col is None:
                del T[i]
                del basis[i]
            else:
                _pivot(T, basis, i, col)
    for j in range(art0, ncols):
        allowed[j] = False
    # phase 2
    obj = [Fraction(0)] * (ncols + 1)
    for j in range(n):
        obj[j] = -c[j]
        obj[n + j] = c[j]
    for i, bj in enumerate(basis):
        f = obj[bj]
        if f:
            obj = [o - f * t for o, t in zip(obj, T[i])]
    T[-1] = obj
    _run(T, basis, ncols, allowed)
    val = [Fraction(0)] * ncols
    for i, bj in enumerate(basis):
        val[bj] = T[i][-1]
    x = tuple(val[j] - val[n + j] for j in range(n))
    value = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(value, x)

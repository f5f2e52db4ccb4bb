"""Exact linear algebra over the rationals (small dense matrices)."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Optional, Sequence

Matrix = list[list[Fraction]]


def _copy(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in r] for r in rows]


def row_echelon(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = _copy(rows)
    if not a:
        return a, []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_echelon(rows)[1])


def det(rows: Sequence[Sequence]) -> Fraction:
    a = _copy(rows)
    n = len(a)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        result *= piv
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / piv
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[c])]
    return sign * result


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[list[Fraction]]:
    """Unique solution of a square system, or None when singular."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    red, piv = row_echelon(aug)
    if piv != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def solve_any(a: Sequence[Sequence], b: Sequence) -> Optional[list[Fraction]]:
    """Some solution of a (possibly non-square) system, or None if inconsistent."""
    if not a:
        return []
    ncols = len(a[0])
    aug = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    red, piv = row_echelon(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(piv):
        x[c] = red[i][ncols]
    return x


def integer_row(row: Sequence) -> tuple[tuple[int, ...], Fraction]:
    """Return (p, g) with row == g * p, p a primitive integer vector, g > 0."""
    fr = [Fraction(v) for v in row]
    den = lcm(*(v.denominator for v in fr)) if fr else 1
    ints = [int(v * den) for v in fr]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g == 0:
        raise ValueError("zero row")
    return tuple(v // g for v in ints), Fraction(g, den)


def bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix (modifies a copy)."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def int_adjugate(m: list[list[int]]) -> list[list[int]]:
    """Adjugate of a small integer matrix via cofactors."""
    n = len(m)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = bareiss_det(minor)
            adj[j][i] = c if (i + j) % 2 == 0 else -c
    return adj


def int_rank(rows: Sequence[Sequence[int]]) -> int:
    return rank(rows)


def bases_table(rows: Sequence[Sequence[int]]) -> list[tuple[tuple[int, ...], list[list[int]], int]]:
    """All m-subsets of integer rows with nonzero determinant, with adjugates.

    Each entry is (row indices, adjugate, determinant) so that the solution of
    rows[S] x = b is adjugate @ b / determinant.
    """
    if not rows:
        return []
    m = len(rows[0])
    out = []
    for s in combinations(range(len(rows)), m):
        mat = [list(rows[i]) for i in s]
        d = bareiss_det(mat)
        if d != 0:
            out.append((s, int_adjugate(mat), d))
    return out


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows @ x = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, piv = row_echelon(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -red[i][f]
        basis.append(v)
    return basis

"""Pure-Python polytope kernel: vertex enumeration and exact volume.

Polytopes arrive in integer "row form": primitive integer rows ``R[r]`` with
optional integer bounds ``lo[r] <= R[r] . x <= hi[r]`` (``None`` = absent).
Vertices are kept in homogeneous integer coordinates ``(X, d)`` meaning
``x = X / d`` with ``d > 0`` and ``gcd(X, d) = 1``.  Each vertex carries an
activity mask: bit ``2r`` set when ``R[r] . x == hi[r]``, bit ``2r + 1`` when
``R[r] . x == lo[r]``.

Volume uses a pulling triangulation: a face is coned from its first vertex
over those of its facets that avoid that vertex, recursively.  A simplex with
homogeneous vertices ``(d_i, X_i)`` has volume ``|det[d_i, X_i]| / (m! prod d_i)``.

The compiled backend ``_kernel_c`` implements the same two functions.
"""

from fractions import Fraction
from itertools import product
from math import factorial, gcd

from .linalg import bareiss_det, rank


def vertices(rows, bases, lo, hi):
    """Return the list of (X, d, mask) vertices of the polytope."""
    n = len(rows)
    seen = {}
    for S, adj, det in bases:
        choices = []
        for i in S:
            opts = []
            if hi[i] is not None:
                opts.append(hi[i])
            if lo[i] is not None and lo[i] != hi[i]:
                opts.append(lo[i])
            if not opts:
                break
            choices.append(opts)
        else:
            sgn = 1 if det > 0 else -1
            d0 = det * sgn
            for rhs in product(*choices):
                X = [sgn * sum(a * b for a, b in zip(adj_row, rhs)) for adj_row in adj]
                mask = 0
                for r in range(n):
                    v = 0
                    for a, b in zip(rows[r], X):
                        v += a * b
                    h = hi[r]
                    if h is not None:
                        hd = h * d0
                        if v > hd:
                            break
                        if v == hd:
                            mask |= 1 << (2 * r)
                    lw = lo[r]
                    if lw is not None:
                        ld = lw * d0
                        if v < ld:
                            break
                        if v == ld:
                            mask |= 2 << (2 * r)
                else:
                    g = d0
                    for v in X:
                        g = gcd(g, v)
                    key = (d0 // g,) + tuple(v // g for v in X)
                    if key not in seen:
                        seen[key] = (key[1:], key[0], mask)
    return list(seen.values())


def _row_mask(mask, n):
    out = 0
    for r in range(n):
        if (mask >> (2 * r)) & 3:
            out |= 1 << r
    return out


def volume(rows, bases, lo, hi):
    """Exact volume of the polytope in the given (integer-scaled) coordinates."""
    n = len(rows)
    m = len(rows[0])
    verts = vertices(rows, bases, lo, hi)
    nv = len(verts)
    if nv < m + 1:
        return Fraction(0)
    masks = [v[2] for v in verts]
    rank_cache = {}

    def face_dim(tight):
        rm = _row_mask(tight, n)
        r = rank_cache.get(rm)
        if r is None:
            r = rank([rows[i] for i in range(n) if (rm >> i) & 1]) if rm else 0
            rank_cache[rm] = r
        return m - r

    full = ~0
    for mk in masks:
        full &= mk
    if face_dim(full) < m:
        return Fraction(0)

    acc = {}
    nbits = 2 * n

    def emit(simplex):
        mat = [[verts[v][1]] + list(verts[v][0]) for v in simplex]
        dt = abs(bareiss_det(mat))
        if dt:
            den = 1
            for v in simplex:
                den *= verts[v][1]
            acc[den] = acc.get(den, 0) + dt

    def tri(face, k, chain):
        apex = face[0]
        if k == 0:
            emit(chain + [apex])
            return
        tight = ~0
        for v in face:
            tight &= masks[v]
        apex_mask = masks[apex]
        seen = set()
        for bit in range(nbits):
            if (tight >> bit) & 1 or (apex_mask >> bit) & 1:
                continue
            sub = [v for v in face if (masks[v] >> bit) & 1]
            if not sub:
                continue
            t = ~0
            for v in sub:
                t &= masks[v]
            if t in seen:
                continue
            seen.add(t)
            if face_dim(t) == k - 1:
                tri(sub, k - 1, chain + [apex])

    tri(list(range(nv)), m, [])
    total = sum((Fraction(num, den) for den, num in acc.items()), Fraction(0))
    return total / factorial(m)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled polytope kernel (int64 with checked arithmetic).

Same contract as ``bllab._kernel_py``.  Any intermediate that leaves the
int64 range raises OverflowError; the dispatcher in ``bllab.kernel`` then
reruns the call on the big-integer Python backend.
"""

from fractions import Fraction
from math import factorial

from libc.string cimport memset

cdef extern from *:
    """
    static inline int bll_mul(long long a, long long b, long long *r) { return __builtin_mul_overflow(a, b, r); }
    static inline int bll_add(long long a, long long b, long long *r) { return __builtin_add_overflow(a, b, r); }
    static inline int bll_sub(long long a, long long b, long long *r) { return __builtin_sub_overflow(a, b, r); }
    """
    int bll_mul(long long a, long long b, long long *r) nogil
    int bll_add(long long a, long long b, long long *r) nogil
    int bll_sub(long long a, long long b, long long *r) nogil

ctypedef unsigned long long u64

cdef enum:
    MAXM = 8
    MAXN = 32
    MAXV = 1024
    RANK_CACHE_BITS = 12


cdef inline long long _mul(long long a, long long b) except? -1:
    cdef long long r
    if bll_mul(a, b, &r):
        raise OverflowError("int64 overflow")
    return r


cdef inline long long _fma(long long acc, long long a, long long b) except? -1:
    cdef long long p, r
    if bll_mul(a, b, &p) or bll_add(acc, p, &r):
        raise OverflowError("int64 overflow")
    return r


cdef inline long long _gcd(long long a, long long b) noexcept nogil:
    cdef long long t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef class _Poly:
    cdef int n, m, nv
    cdef long long R[MAXN][MAXM]
    cdef long long LO[MAXN]
    cdef long long HI[MAXN]
    cdef char HAS_LO[MAXN]
    cdef char HAS_HI[MAXN]
    cdef long long VX[MAXV][MAXM]
    cdef long long VD[MAXV]
    cdef u64 VMASK[MAXV]
    cdef signed char RCACHE[1 << RANK_CACHE_BITS]
    cdef object acc

    def __cinit__(self, rows, lo, hi):
        cdef int r, c
        self.n = len(rows)
        self.m = len(rows[0])
        if self.n > MAXN or self.m > MAXM:
            raise OverflowError("polytope too large for the compiled kernel")
        for r in range(self.n):
            row = rows[r]
            for c in range(self.m):
                self.R[r][c] = row[c]
            self.HAS_LO[r] = lo[r] is not None
            self.HAS_HI[r] = hi[r] is not None
            self.LO[r] = lo[r] if lo[r] is not None else 0
            self.HI[r] = hi[r] if hi[r] is not None else 0
        self.nv = 0
        if self.n <= RANK_CACHE_BITS:
            memset(self.RCACHE, -1, sizeof(self.RCACHE))

    cdef int _add_vertex(self, long long* X, long long d, u64 mask) except -1:
        cdef int i, c, same
        cdef long long g = d
        for c in range(self.m):
            g = _gcd(g, X[c])
        if g > 1:
            d //= g
            for c in range(self.m):
                X[c] //= g
        for i in range(self.nv):
            if self.VD[i] != d:
                continue
            same = 1
            for c in range(self.m):
                if self.VX[i][c] != X[c]:
                    same = 0
                    break
            if same:
                return 0
        if self.nv >= MAXV:
            raise OverflowError("too many vertices for the compiled kernel")
        for c in range(self.m):
            self.VX[self.nv][c] = X[c]
        self.VD[self.nv] = d
        self.VMASK[self.nv] = mask
        self.nv += 1
        return 0

    cdef int enumerate(self, bases) except -1:
        cdef long long adj[MAXM][MAXM]
        cdef long long opt[MAXM][2]
        cdef int nopt[MAXM]
        cdef int cnt[MAXM]
        cdef long long rhs[MAXM]
        cdef long long X[MAXM]
        cdef int a, b, t, r, feasible, usable, done
        cdef long long det, sgn, d0, v, bd
        cdef u64 mask
        cdef int m = self.m
        for S, adjm, det_obj in bases:
            det = det_obj
            sgn = 1 if det > 0 else -1
            d0 = det * sgn
            usable = 1
            for t in range(m):
                r = S[t]
                nopt[t] = 0
                if self.HAS_HI[r]:
                    opt[t][nopt[t]] = self.HI[r]
                    nopt[t] += 1
                if self.HAS_LO[r] and not (self.HAS_HI[r] and self.LO[r] == self.HI[r]):
                    opt[t][nopt[t]] = self.LO[r]
                    nopt[t] += 1
                if nopt[t] == 0:
                    usable = 0
                cnt[t] = 0
                row = adjm[t]
                for b in range(m):
                    adj[t][b] = row[b]
            if not usable:
                continue
            done = 0
            while not done:
                for t in range(m):
                    rhs[t] = opt[t][cnt[t]]
                for a in range(m):
                    v = 0
                    for b in range(m):
                        v = _fma(v, adj[a][b], rhs[b])
                    X[a] = _mul(sgn, v)
                feasible = 1
                mask = 0
                for r in range(self.n):
                    v = 0
                    for b in range(m):
                        v = _fma(v, self.R[r][b], X[b])
                    if self.HAS_HI[r]:
                        bd = _mul(self.HI[r], d0)
                        if v > bd:
                            feasible = 0
                            break
                        if v == bd:
                            mask |= (<u64>1) << (2 * r)
                    if self.HAS_LO[r]:
                        bd = _mul(self.LO[r], d0)
                        if v < bd:
                            feasible = 0
                            break
                        if v == bd:
                            mask |= (<u64>2) << (2 * r)
                if feasible:
                    self._add_vertex(X, d0, mask)
                # mixed-radix increment over the bound choices
                t = 0
                while t < m:
                    cnt[t] += 1
                    if cnt[t] < nopt[t]:
                        break
                    cnt[t] = 0
                    t += 1
                if t == m:
                    done = 1
        return 0

    cdef int rank_of(self, u64 tight) except -1:
        cdef long long a[MAXN][MAXM]
        cdef int rows_sel[MAXN]
        cdef int k = 0, r, c, i, j, p, rk
        cdef unsigned int rm = 0
        cdef long long prev, piv, aic, t1, t2
        for r in range(self.n):
            if (tight >> (2 * r)) & 3:
                rm |= 1u << r
                rows_sel[k] = r
                k += 1
        if self.n <= RANK_CACHE_BITS and self.RCACHE[rm] >= 0:
            return self.RCACHE[rm]
        for i in range(k):
            for c in range(self.m):
                a[i][c] = self.R[rows_sel[i]][c]
        rk = 0
        prev = 1
        for c in range(self.m):
            if rk == k:
                break
            p = -1
            for i in range(rk, k):
                if a[i][c] != 0:
                    p = i
                    break
            if p < 0:
                continue
            if p != rk:
                for j in range(self.m):
                    a[p][j], a[rk][j] = a[rk][j], a[p][j]
            piv = a[rk][c]
            for i in range(rk + 1, k):
                aic = a[i][c]
                for j in range(self.m):
                    t1 = _mul(a[i][j], piv)
                    t2 = _mul(aic, a[rk][j])
                    if bll_sub(t1, t2, &t1):
                        raise OverflowError("int64 overflow")
                    a[i][j] = t1 // prev
            prev = piv
            rk += 1
        if self.n <= RANK_CACHE_BITS:
            self.RCACHE[rm] = rk
        return rk

    cdef int emit(self, int* simplex) except -1:
        cdef long long a[MAXM + 1][MAXM + 1]
        cdef int n1 = self.m + 1
        cdef int i, j, k, p
        cdef long long prev = 1, akk, t1, t2, den = 1
        cdef int sign = 1
        for i in range(n1):
            a[i][0] = self.VD[simplex[i]]
            for j in range(self.m):
                a[i][j + 1] = self.VX[simplex[i]][j]
            den = _mul(den, self.VD[simplex[i]])
        for k in range(n1 - 1):
            if a[k][k] == 0:
                p = -1
                for i in range(k + 1, n1):
                    if a[i][k] != 0:
                        p = i
                        break
                if p < 0:
                    return 0
                for j in range(n1):
                    a[p][j], a[k][j] = a[k][j], a[p][j]
                sign = -sign
            akk = a[k][k]
            for i in range(k + 1, n1):
                for j in range(k + 1, n1):
                    t1 = _mul(a[i][j], akk)
                    t2 = _mul(a[i][k], a[k][j])
                    if bll_sub(t1, t2, &t1):
                        raise OverflowError("int64 overflow")
                    a[i][j] = t1 // prev
            prev = akk
        t1 = a[n1 - 1][n1 - 1]
        if t1 < 0:
            t1 = -t1
        if t1:
            key = den
            self.acc[key] = self.acc.get(key, 0) + t1
        return 0

    cdef int tri(self, int* face, int nf, int k, int* chain, int depth) except -1:
        cdef int sub[MAXV]
        cdef u64 seen[2 * MAXN]
        cdef int nseen = 0, ns, i, bit, dup
        cdef int apex = face[0]
        cdef u64 tight = ~(<u64>0), t, apex_mask
        chain[depth] = apex
        if k == 0:
            self.emit(chain)
            return 0
        for i in range(nf):
            tight &= self.VMASK[face[i]]
        apex_mask = self.VMASK[apex]
        for bit in range(2 * self.n):
            if (tight >> bit) & 1 or (apex_mask >> bit) & 1:
                continue
            ns = 0
            t = ~(<u64>0)
            for i in range(nf):
                if (self.VMASK[face[i]] >> bit) & 1:
                    sub[ns] = face[i]
                    t &= self.VMASK[face[i]]
                    ns += 1
            if ns == 0:
                continue
            dup = 0
            for i in range(nseen):
                if seen[i] == t:
                    dup = 1
                    break
            if dup:
                continue
            seen[nseen] = t
            nseen += 1
            if self.m - self.rank_of(t) == k - 1:
                self.tri(sub, ns, k - 1, chain, depth + 1)
        return 0

    def vertex_list(self):
        out = []
        cdef int i, c
        for i in range(self.nv):
            out.append((tuple(self.VX[i][c] for c in range(self.m)), self.VD[i], self.VMASK[i]))
        return out

    def volume(self):
        cdef int face[MAXV]
        cdef int chain[MAXM + 1]
        cdef int i
        cdef u64 full = ~(<u64>0)
        if self.nv < self.m + 1:
            return Fraction(0)
        for i in range(self.nv):
            face[i] = i
            full &= self.VMASK[i]
        if self.rank_of(full) > 0:
            return Fraction(0)
        self.acc = {}
        self.tri(face, self.nv, self.m, chain, 0)
        total = Fraction(0)
        for den, num in self.acc.items():
            total += Fraction(num, den)
        return total / factorial(self.m)


def vertices(rows, bases, lo, hi):
    p = _Poly(rows, lo, hi)
    p.enumerate(bases)
    return p.vertex_list()


def volume(rows, bases, lo, hi):
    p = _Poly(rows, lo, hi)
    p.enumerate(bases)
    return p.volume()

"""Exact evaluation of the form, its slice kernels and the expansion terms.

Phi is a sum of box-polytope volumes, one per tuple of components.  The
kernels are slice volumes of the body with one (or two) constraints removed;
they are piecewise polynomial of degree at most m - 1 with breakpoints at the
projections of the slice body's vertices.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import lcm
from typing import Optional, Sequence

from . import linalg
from .conditions import require_nondegenerate
from .core import (Configuration, Interval, IntervalUnion, as_rational, centered,
                   format_decimal, format_rational, measure, translate)
from .errors import BLLError, BreakpointCongestionError, MeasureMismatchError
from .polytope import (Polytope, _bases, build_box_polytope, double_slice_volume,
                       enumerate_vertices, slice_volume, volume)

SetTuple = tuple[IntervalUnion, ...]

DERIVATIVE_RETRIES = 20


def as_set_tuple(config: Configuration, E) -> SetTuple:
    out = []
    for s in E:
        out.append(s if isinstance(s, IntervalUnion) else IntervalUnion.from_pairs(s))
    if len(out) != config.n:
        raise ValueError(f"expected {config.n} sets, got {len(out)}")
    return tuple(out)


def star_tuple(e: Sequence[Fraction]) -> SetTuple:
    return tuple(centered(ej) for ej in e)


def symmetrized_tuple(E: SetTuple) -> SetTuple:
    return tuple(centered(measure(s)) for s in E)


def orbit_tuple(config: Configuration, E: SetTuple, v: Sequence) -> SetTuple:
    """(E_j + L_j(v))_j."""
    v = [as_rational(x) for x in v]
    return tuple(translate(s, config.apply(j, v)) for j, s in enumerate(E))


# ---------------------------------------------------------------- phi


@dataclass(frozen=True)
class _PhiPlan:
    rows: tuple[tuple[int, ...], ...]   # primitive rows, first nonzero entry positive
    gain: tuple[Fraction, ...]          # L_j = gain_j * rows_j, gain_j may be negative
    bases: tuple


@lru_cache(maxsize=256)
def _plan(config: Configuration) -> _PhiPlan:
    require_nondegenerate(config)
    rows, gain = [], []
    for r in config.rows:
        p, g = linalg.integer_row(r)
        if next(v for v in p if v) < 0:
            p, g = tuple(-v for v in p), -g
        rows.append(p)
        gain.append(Fraction(g))
    rows = tuple(rows)
    return _PhiPlan(rows, tuple(gain), tuple(_bases(rows)))


def _slot_bounds(gain: Fraction, E: IntervalUnion) -> list[tuple[Fraction, Fraction]]:
    if gain > 0:
        return [(c.lo / gain, c.hi / gain) for c in E.components]
    return [(c.hi / gain, c.lo / gain) for c in E.components]


def phi(config: Configuration, E) -> Fraction:
    """Exact value of the form on a tuple of interval unions."""
    from . import kernel

    plan = _plan(config)
    E = as_set_tuple(config, E)
    if any(not s.components for s in E):
        return Fraction(0)
    slots = [_slot_bounds(g, s) for g, s in zip(plan.gain, E)]
    D = lcm(*(v.denominator for slot in slots for pair in slot for v in pair))
    islots = [[(int(lo * D), int(hi * D)) for lo, hi in slot] for slot in slots]
    total = Fraction(0)
    for choice in product(*islots):
        lo = tuple(c[0] for c in choice)
        hi = tuple(c[1] for c in choice)
        total += kernel.volume(plan.rows, plan.bases, lo, hi)
    return total / Fraction(D) ** config.m


def phi_star(config: Configuration, E) -> Fraction:
    return phi(config, symmetrized_tuple(as_set_tuple(config, E)))


def basis_subset_bounds(config: Configuration, E) -> list[tuple[tuple[int, ...], Fraction]]:
    """For each invertible m-subset J' of rows: |det M_J'|^-1 * prod_{i in J'} |E_i|."""
    from itertools import combinations

    E = as_set_tuple(config, E)
    out = []
    for S in combinations(range(config.n), config.m):
        d = linalg.det([config.rows[i] for i in S])
        if d == 0:
            continue
        bound = 1 / abs(d)
        for i in S:
            bound *= measure(E[i])
        out.append((S, bound))
    return out


# ------------------------------------------------------------ kernels


def _boxes(e: Sequence[Fraction], boxes: Optional[Sequence[Interval]]) -> list[Interval]:
    if boxes is None:
        return [Interval.centered(ej) for ej in e]
    return [b if isinstance(b, Interval) else Interval(*b) for b in boxes]


@lru_cache(maxsize=1024)
def _body_without(config: Configuration, boxes: tuple[Interval, ...], drop: tuple[int, ...]) -> Polytope:
    cons = []
    for k, (row, box) in enumerate(zip(config.rows, boxes)):
        if k in drop:
            continue
        cons.append((row, box.hi))
        cons.append((tuple(-v for v in row), -box.lo))
    return Polytope(config.m, tuple(cons))


def kernel_K(config: Configuration, e: Sequence, j: int, s, boxes=None) -> Fraction:
    """Slice volume of {L_i(x) in box_i, i != j} on the level set L_j(x) = s.

    With the default centered boxes of lengths e_i this is K_j; e_j itself is
    never used.  Non-centered boxes give the shifted-interval kernel.
    """
    require_nondegenerate(config)
    bx = tuple(_boxes(e, boxes))
    P = _body_without(config, bx, (j,))
    return slice_volume(P, config.rows[j], as_rational(s))


@lru_cache(maxsize=1024)
def _kernel_breakpoints(config: Configuration, bx: tuple[Interval, ...], j: int) -> tuple[Fraction, ...]:
    P = _body_without(config, bx, (j,))
    levels = {config.apply(j, v.point) for v in enumerate_vertices(P, check=False)}
    return tuple(sorted(levels))


def kernel_breakpoints(config: Configuration, e: Sequence, j: int, boxes=None) -> tuple[Fraction, ...]:
    """Levels L_j(p) over vertices p of the slice body; K_j is polynomial between them."""
    require_nondegenerate(config)
    return _kernel_breakpoints(config, tuple(_boxes(e, boxes)), j)


def poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_derivative(coeffs: Sequence[Fraction]) -> list[Fraction]:
    return [k * c for k, c in enumerate(coeffs)][1:] or [Fraction(0)]


def poly_antiderivative(coeffs: Sequence[Fraction]) -> list[Fraction]:
    return [Fraction(0)] + [c / (k + 1) for k, c in enumerate(coeffs)]


def interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients (constant term first) of the interpolating polynomial."""
    n = len(xs)
    V = [[x ** k for k in range(n)] for x in xs]
    sol = linalg.solve(V, ys)
    if sol is None:
        raise ValueError("interpolation nodes must be distinct")
    return sol


@dataclass(frozen=True)
class KernelPiece:
    lo: Fraction
    hi: Fraction
    coeffs: tuple[Fraction, ...]

    def __call__(self, s: Fraction) -> Fraction:
        return poly_eval(self.coeffs, s)

    def integral(self, a: Fraction, b: Fraction) -> Fraction:
        F = poly_antiderivative(self.coeffs)
        return poly_eval(F, b) - poly_eval(F, a)


def kernel_pieces(config: Configuration, e: Sequence, j: int, boxes=None) -> list[KernelPiece]:
    """Exact polynomial pieces of K_j; the kernel vanishes outside their union."""
    bps = kernel_breakpoints(config, e, j, boxes)
    m = config.m
    pieces = []
    for a, b in zip(bps, bps[1:]):
        xs = [a + (b - a) * Fraction(k + 1, m + 1) for k in range(m)]
        ys = [kernel_K(config, e, j, x, boxes) for x in xs]
        coeffs = interpolate(xs, ys)
        check = a + (b - a) / (2 * (m + 1))
        if poly_eval(coeffs, check) != kernel_K(config, e, j, check, boxes):
            raise BLLError(f"kernel K_{j} is not polynomial on [{a}, {b}]")
        pieces.append(KernelPiece(a, b, tuple(coeffs)))
    return pieces


def integrate_K(config: Configuration, e: Sequence, j: int, A: IntervalUnion, boxes=None) -> Fraction:
    """Exact integral of K_j over A, piece by piece between breakpoints."""
    total = Fraction(0)
    for piece in kernel_pieces(config, e, j, boxes):
        for c in A.components:
            lo, hi = max(c.lo, piece.lo), min(c.hi, piece.hi)
            if lo < hi:
                total += piece.integral(lo, hi)
    return total


def kernel_K_left_derivative(config: Configuration, e: Sequence, j: int, s) -> Fraction:
    """Exact D^- K_j(s) by local polynomial reconstruction on (s - h, s).

    h starts at the distance to the nearest breakpoint below s and is halved
    whenever an extra sample disagrees with the reconstruction.
    """
    s = as_rational(s)
    if s <= 0:
        raise ValueError("left derivative is defined here for s > 0")
    m = config.m
    below = [b for b in kernel_breakpoints(config, e, j) if b < s]
    h = min(Fraction(1), s - below[-1]) if below else Fraction(1)
    for _ in range(DERIVATIVE_RETRIES):
        xs = [s - h * Fraction(k, m + 1) for k in range(1, m + 2)]
        ys = [kernel_K(config, e, j, x) for x in xs]
        coeffs = interpolate(xs, ys)
        extra = s - h / (2 * (m + 1))
        if poly_eval(coeffs, extra) == kernel_K(config, e, j, extra):
            return poly_eval(poly_derivative(coeffs), s)
        h /= 2
    raise BreakpointCongestionError(f"breakpoint congestion near s = {s}", h * 2)


def kernel_L(config: Configuration, e: Sequence, i: int, j: int, s, t) -> Fraction:
    """Double-slice volume of {|L_k(x)| <= e_k/2, k not in {i, j}} at L_i = s, L_j = t."""
    if i == j:
        raise ValueError("kernel_L needs two distinct slots")
    require_nondegenerate(config)
    bx = tuple(_boxes(e, None))
    P = _body_without(config, bx, (i, j))
    return double_slice_volume(P, config.rows[i], config.rows[j], as_rational(s), as_rational(t))


@dataclass(frozen=True)
class KernelTable:
    slot: int
    samples: tuple[tuple[Fraction, Fraction], ...]
    pieces: tuple[KernelPiece, ...] = ()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "K", "K_exact"])
        for s, k in self.samples:
            w.writerow([format_rational(s), format_decimal(k), format_rational(k)])
        return buf.getvalue()


def kernel_table(config: Configuration, e: Sequence, j: int, points: Sequence, with_pieces: bool = True) -> KernelTable:
    samples = tuple((as_rational(s), kernel_K(config, e, j, s)) for s in points)
    pieces = tuple(kernel_pieces(config, e, j)) if with_pieces else ()
    return KernelTable(j, samples, pieces)


# ---------------------------------------------------- expansion terms


def _require_measures(E: SetTuple, e: Sequence[Fraction], slots):
    for j in slots:
        if measure(E[j]) != e[j]:
            raise MeasureMismatchError(f"|E_{j}| ≠ e_{j}: {measure(E[j])} vs {e[j]}")


def _with(base: SetTuple, repl: dict) -> SetTuple:
    return tuple(repl.get(k, s) for k, s in enumerate(base))


def first_order_term(config: Configuration, e: Sequence, E, j: int) -> Fraction:
    """<K_j, 1_{E_j} - 1_{E_j*}> as an exact difference of two form values."""
    E = as_set_tuple(config, E)
    _require_measures(E, e, [j])
    star = star_tuple(e)
    return phi(config, _with(star, {j: E[j]})) - phi(config, star)


def second_order_term(config: Configuration, e: Sequence, E, i: int, j: int) -> Fraction:
    """<L_ij, f_i ⊗ f_j> by inclusion-exclusion over four form values."""
    if i == j:
        raise ValueError("second-order term needs two distinct slots")
    E = as_set_tuple(config, E)
    _require_measures(E, e, [i, j])
    star = star_tuple(e)
    if E[i] == star[i] or E[j] == star[j]:
        return Fraction(0)
    return (phi(config, _with(star, {i: E[i], j: E[j]}))
            - phi(config, _with(star, {i: E[i]}))
            - phi(config, _with(star, {j: E[j]}))
            + phi(config, star))


@dataclass(frozen=True)
class Expansion:
    phi: Fraction
    phi_star: Fraction
    first: tuple[Fraction, ...]
    second: dict
    residual: Fraction


def expansion(config: Configuration, e: Sequence, E) -> Expansion:
    E = as_set_tuple(config, E)
    _require_measures(E, e, range(config.n))
    star = star_tuple(e)
    p, p0 = phi(config, E), phi(config, star)
    first = tuple(first_order_term(config, e, E, j) for j in range(config.n))
    second = {(i, j): second_order_term(config, e, E, i, j)
              for i in range(config.n) for j in range(i + 1, config.n)}
    res = p - p0 - sum(first) - sum(second.values())
    return Expansion(p, p0, first, second, res)


def expansion_residual(config: Configuration, e: Sequence, E) -> Fraction:
    """Phi(E) - Phi(E*) minus all first- and second-order terms, exactly."""
    return expansion(config, e, E).residual


def shell_perturbation(length, eta, side: str = "right", gap=0) -> IntervalUnion:
    """Move a block of measure eta from inside one end of [-a, a] to just outside.

    ``side`` is "right" or "left"; the relocated block starts ``gap`` past the
    endpoint.  Measure is preserved.
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', not {side!r}")
    return relocation_perturbation(length, eta, side, side, gap)


def relocation_perturbation(length, eta, take: str, put: str, gap=0) -> IntervalUnion:
    """[-a, a] with a block of measure eta removed and re-attached outside.

    ``take`` is "right", "left" (inside that end) or "center" (a centered
    hole); ``put`` is "right" or "left", with the block ``gap`` past that end.
    """
    length, eta, gap = as_rational(length), as_rational(eta), as_rational(gap)
    a = length / 2
    if not 0 < eta < length:
        raise ValueError("block size must lie in (0, length)")
    if gap < 0:
        raise ValueError("gap must be nonnegative")
    if take == "right":
        core = [(-a, a - eta)]
    elif take == "left":
        core = [(-a + eta, a)]
    elif take == "center":
        core = [(-a, -eta / 2), (eta / 2, a)]
    else:
        raise ValueError(f"take must be 'right', 'left' or 'center', not {take!r}")
    if put == "right":
        block = (a + gap, a + gap + eta)
    elif put == "left":
        block = (-a - gap - eta, -a - gap)
    else:
        raise ValueError(f"put must be 'right' or 'left', not {put!r}")
    return IntervalUnion.from_pairs(core + [block])


# ---------------------------------------------------------------- psi


def psi(config: Configuration, e: Sequence, v: Sequence) -> Fraction:
    """|K(v)| for K(v) = {x : L_j(x) in I_j + v_j}, I_j centered of length e_j.

    Computed as a single polytope volume and cross-checked against phi on the
    shifted interval tuple.
    """
    require_nondegenerate(config)
    v = [as_rational(x) for x in v]
    if len(v) != config.n:
        raise ValueError(f"shift vector needs {config.n} entries")
    boxes = [Interval.centered(ej, vj) for ej, vj in zip(e, v)]
    val = volume(build_box_polytope(config, boxes), check=False)
    via_phi = phi(config, [IntervalUnion((b,)) for b in boxes])
    if val != via_phi:
        raise BLLError(f"psi mismatch: polytope volume {val} vs form value {via_phi}")
    return val

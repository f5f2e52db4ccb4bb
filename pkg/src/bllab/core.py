"""Exact scalars, interval unions on the line, and configuration presets.

Every quantity is a :class:`fractions.Fraction`; floats are rejected at the
boundary so that equality cases and sign tests stay bit-exact.
"""

from __future__ import annotations

import random
from decimal import Context, Decimal
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence, Union

from .errors import BLLError, DegenerateSetError

RationalLike = Union[int, Fraction, str]

RANDOM_ENTRY_RANGE = 3
RANDOM_RETRY_BUDGET = 1000


def as_rational(value: RationalLike) -> Fraction:
    """Convert ints, Fractions and rational/decimal literals to a Fraction.

    Accepted literals: ``"3"``, ``"-7/2"`` (ASCII or Unicode minus), ``"0.25"``.
    Floats are refused because their binary expansion is rarely what was meant.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip().replace("−", "-")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a string or Fraction")
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_DECIMAL = Context(prec=12)


def format_decimal(q: RationalLike, digits: int = 12) -> str:
    """Round to ``digits`` significant digits; plain notation for moderate magnitudes."""
    q = as_rational(q)
    ctx = _DECIMAL if digits == 12 else Context(prec=digits)
    d = ctx.divide(Decimal(q.numerator), Decimal(q.denominator)).normalize(ctx)
    if d == 0:
        return "0"
    if Decimal("1e-6") <= abs(d) < Decimal("1e12"):
        return format(d, "f")
    return format(d, "e")


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def center(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def shifted(self, s: Fraction) -> "Interval":
        return Interval(self.lo + s, self.hi + s)

    @classmethod
    def centered(cls, length: RationalLike, center: RationalLike = 0) -> "Interval":
        half = as_rational(length) / 2
        c = as_rational(center)
        return cls(c - half, c + half)


@dataclass(frozen=True)
class IntervalUnion:
    """A finite union of disjoint closed intervals separated by positive gaps.

    Build instances with :func:`normalize` or :meth:`from_pairs`; the
    constructor trusts its input.
    """

    components: tuple[Interval, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[RationalLike]]) -> "IntervalUnion":
        return normalize([Interval(lo, hi) for lo, hi in pairs])

    @property
    def measure(self) -> Fraction:
        return measure(self)

    @property
    def lo(self) -> Fraction:
        return self.components[0].lo

    @property
    def hi(self) -> Fraction:
        return self.components[-1].hi

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def pairs(self) -> list[tuple[Fraction, Fraction]]:
        return [(c.lo, c.hi) for c in self.components]

    def __str__(self):
        inner = ",".join(f"[{format_rational(c.lo)},{format_rational(c.hi)}]" for c in self.components)
        return f"[{inner}]"


def normalize(intervals: Iterable[Interval]) -> IntervalUnion:
    """Sort and merge; touching or overlapping intervals become one component.

    Zero-length pieces that do not touch anything are dropped: sets are only
    meaningful up to null sets.
    """
    items = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    merged: list[list[Fraction]] = []
    for iv in items:
        if merged and iv.lo <= merged[-1][1]:
            if iv.hi > merged[-1][1]:
                merged[-1][1] = iv.hi
        else:
            merged.append([iv.lo, iv.hi])
    return IntervalUnion(tuple(Interval(lo, hi) for lo, hi in merged if hi > lo))


def measure(E: IntervalUnion) -> Fraction:
    return sum((c.length for c in E.components), Fraction(0))


def _boundary_events(*sets: IntervalUnion):
    events = []
    for k, s in enumerate(sets):
        for c in s.components:
            events.append((c.lo, k, 1))
            events.append((c.hi, k, -1))
    events.sort(key=lambda ev: ev[0])
    return events


def _sweep(a: IntervalUnion, b: IntervalUnion, keep) -> Fraction:
    """Measure of {x : keep(x in a, x in b)} by a sweep over all endpoints."""
    total = Fraction(0)
    inside = [0, 0]
    prev = None
    for x, k, delta in _boundary_events(a, b):
        if prev is not None and x > prev and keep(inside[0] > 0, inside[1] > 0):
            total += x - prev
        inside[k] += delta
        prev = x
    return total


def symmetric_difference_measure(A: IntervalUnion, B: IntervalUnion) -> Fraction:
    return _sweep(A, B, lambda a, b: a != b)


def intersection_measure(A: IntervalUnion, B: IntervalUnion) -> Fraction:
    return _sweep(A, B, lambda a, b: a and b)


def union(A: IntervalUnion, B: IntervalUnion) -> IntervalUnion:
    return normalize(A.components + B.components)


def intersection(A: IntervalUnion, B: IntervalUnion) -> IntervalUnion:
    out = []
    i = j = 0
    a, b = A.components, B.components
    while i < len(a) and j < len(b):
        lo = max(a[i].lo, b[j].lo)
        hi = min(a[i].hi, b[j].hi)
        if lo < hi:
            out.append(Interval(lo, hi))
        if a[i].hi < b[j].hi:
            i += 1
        else:
            j += 1
    return normalize(out)


def is_subset(A: IntervalUnion, B: IntervalUnion) -> bool:
    """A ⊆ B up to null sets."""
    return _sweep(A, B, lambda a, b: a and not b) == 0


def symmetrize(E: IntervalUnion) -> IntervalUnion:
    mu = measure(E)
    if mu <= 0:
        raise DegenerateSetError("degenerate set: symmetrization needs positive measure")
    return IntervalUnion((Interval(-mu / 2, mu / 2),))


def translate(E: IntervalUnion, s: RationalLike) -> IntervalUnion:
    s = as_rational(s)
    return IntervalUnion(tuple(c.shifted(s) for c in E.components))


def centered(length: RationalLike) -> IntervalUnion:
    length = as_rational(length)
    if length <= 0:
        raise DegenerateSetError("degenerate set: centered interval needs positive length")
    return IntervalUnion((Interval.centered(length),))


@dataclass(frozen=True)
class Configuration:
    """The family (L_j) of linear functionals on R^m, one rational row each."""

    m: int
    rows: tuple[tuple[Fraction, ...], ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        rows = tuple(tuple(as_rational(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if self.m < 1:
            raise ValueError("dimension m must be positive")
        for j, r in enumerate(rows):
            if len(r) != self.m:
                raise ValueError(f"row {j} has length {len(r)}, expected {self.m}")
            if all(v == 0 for v in r):
                raise ValueError(f"row {j} is zero")

    @property
    def n(self) -> int:
        return len(self.rows)

    def apply(self, j: int, x: Sequence[Fraction]) -> Fraction:
        return sum((a * b for a, b in zip(self.rows[j], x)), Fraction(0))

    def image(self, x: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """(L_j(x))_j."""
        return tuple(self.apply(j, x) for j in range(self.n))


def measure_vector(values: Iterable[RationalLike]) -> tuple[Fraction, ...]:
    e = tuple(as_rational(v) for v in values)
    for j, v in enumerate(e):
        if v <= 0:
            raise ValueError(f"measure e[{j}] = {v} is not strictly positive")
    return e


def _riesz_sobolev():
    cfg = Configuration(2, ((1, 0), (0, 1), (-1, -1)), name="riesz-sobolev")
    return cfg, measure_vector((2, 2, 2))


def _gowers(k: int):
    if k < 1:
        raise ValueError("gowers preset needs k >= 1")
    # alpha in {0,1}^k with the first coordinate varying fastest
    alphas = [tuple(reversed(a)) for a in product((0, 1), repeat=k)]
    rows = tuple((1,) + a for a in alphas)
    cfg = Configuration(k + 1, rows, name=f"gowers({k})")
    return cfg, measure_vector([1] * len(rows))


def _random(n: int, m: int, seed: int):
    from .conditions import check_nondegenerate

    rng = random.Random(seed)
    r = RANDOM_ENTRY_RANGE
    for _ in range(RANDOM_RETRY_BUDGET):
        rows = []
        while len(rows) < n:
            row = tuple(rng.randint(-r, r) for _ in range(m))
            if any(row):
                rows.append(row)
        cfg = Configuration(m, tuple(rows), name=f"random({n},{m},{seed})")
        if check_nondegenerate(cfg).ok:
            return cfg, measure_vector([1] * n)
    raise BLLError(f"random({n},{m},seed={seed}): no nondegenerate draw in {RANDOM_RETRY_BUDGET} tries")


def builtin_config(preset: str, e: Sequence[RationalLike] | None = None, **params):
    """Return (Configuration, e) for a named preset.

    Presets: ``riesz-sobolev`` (default e = (2,2,2)); ``gowers`` with ``k``
    (default e all ones); ``random`` with ``n``, ``m``, ``seed`` (entries drawn
    uniformly from {-3..3}, zero rows redrawn, whole draws rejected until
    nondegenerate, at most 1000 draws; default e all ones).
    """
    key = preset.lower().replace("_", "-")
    if key in ("riesz-sobolev", "rs"):
        cfg, default_e = _riesz_sobolev()
    elif key.startswith("gowers"):
        k = int(params.get("k", 2))
        cfg, default_e = _gowers(k)
    elif key == "random":
        cfg, default_e = _random(int(params["n"]), int(params["m"]), int(params.get("seed", 0)))
    else:
        raise ValueError(f"unknown preset {preset!r}")
    if e is None:
        return cfg, default_e
    e = measure_vector(e)
    if len(e) != cfg.n:
        raise ValueError(f"e has {len(e)} entries, configuration has {cfg.n} rows")
    return cfg, e

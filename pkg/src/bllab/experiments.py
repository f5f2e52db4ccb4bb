"""Orbit distance, deficits and the empirical stability campaigns."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Optional, Sequence, Union

from . import linalg
from .conditions import check_generic, check_strictly_admissible, check_admissible
from .core import (Configuration, Interval, IntervalUnion, as_rational, centered,
                   format_decimal, format_rational, measure, measure_vector,
                   symmetric_difference_measure)
from .errors import (BLLError, CounterexampleError, HypothesisFailure, InfeasibleError,
                     MeasureMismatchError)
from .functional import (as_set_tuple, kernel_K, kernel_breakpoints, orbit_tuple, phi, psi,
                         shell_perturbation, star_tuple, expansion)
from .simplex import linprog

EXACT_DIST_MAX_DIM = 3
PATTERN_MIN_STEP_EXP = 20
SAMPLE_RADIUS = Fraction(1, 5)  # samplers keep dist <= SAMPLE_RADIUS * min(e)


# ------------------------------------------------------ orbit distance


@dataclass(frozen=True)
class _PL:
    """s -> |E Δ (E* + s)| as a piecewise linear function."""

    breaks: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    outside: Fraction

    def __call__(self, s: Fraction) -> Fraction:
        b, v = self.breaks, self.values
        if s <= b[0] or s >= b[-1]:
            return self.outside
        lo, hi = 0, len(b) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if b[mid] <= s:
                lo = mid
            else:
                hi = mid
        return v[lo] + (v[hi] - v[lo]) * (s - b[lo]) / (b[hi] - b[lo])

    def pieces(self):
        """(lo, hi, value at lo, slope); None marks an unbounded side."""
        b, v = self.breaks, self.values
        out = [(None, b[0], self.outside, Fraction(0))]
        for k in range(len(b) - 1):
            out.append((b[k], b[k + 1], v[k], (v[k + 1] - v[k]) / (b[k + 1] - b[k])))
        out.append((b[-1], None, self.outside, Fraction(0)))
        return out


def _sym_diff_profile(E: IntervalUnion) -> _PL:
    mu = measure(E)
    star = centered(mu)
    h = mu / 2
    bps = sorted({a + sgn * h for c in E.components for a in (c.lo, c.hi) for sgn in (1, -1)})
    vals = tuple(symmetric_difference_measure(E, IntervalUnion(tuple(c.shifted(s) for c in star.components)))
                 for s in bps)
    return _PL(tuple(bps), vals, 2 * mu)


@dataclass(frozen=True)
class OrbitDistance:
    dist: Fraction
    witness: tuple[Fraction, ...]
    certified: bool
    method: str


def _objective(config, profiles, v) -> Fraction:
    return max(g(config.apply(j, v)) for j, g in enumerate(profiles))


def _seed_points(config: Configuration, profiles) -> list[tuple[Fraction, ...]]:
    m = config.m
    targets = []
    for g in profiles:
        best = min(g.values)
        targets.append([s for s, val in zip(g.breaks, g.values) if val == best][:2])
    pts = [tuple(Fraction(0) for _ in range(m))]
    for S in combinations(range(config.n), m):
        M = [config.rows[i] for i in S]
        if linalg.det(M) == 0:
            continue
        for rhs in product(*(targets[i] for i in S)):
            x = linalg.solve(M, list(rhs))
            pts.append(tuple(x))
    return pts


def _cell_lp(config, choice, m):
    # variables (v_1..v_m, z); maximize -z
    A, b = [], []
    for j, (lo, hi, val, slope) in enumerate(choice):
        row = list(config.rows[j])
        if slope == 0:
            A.append([0] * m + [-1])
            b.append(-val)
        else:
            A.append([slope * r for r in row] + [-1])
            b.append(slope * lo - val)
        if hi is not None:
            A.append(row + [0])
            b.append(hi)
        if lo is not None:
            A.append([-r for r in row] + [0])
            b.append(-lo)
    res = linprog([0] * m + [-1], A, b)
    return -res.value, res.x[:m]


def _exact_dist(config, profiles, best, witness):
    piece_lists = []
    for g in profiles:
        ps = sorted((p for p in g.pieces() if _piece_min(p) < best), key=_piece_min)
        piece_lists.append(ps)
    m = config.m
    chosen = [None] * config.n

    def rec(k, lb):
        nonlocal best, witness
        if lb >= best:
            return
        if k == config.n:
            try:
                val, x = _cell_lp(config, chosen, m)
            except InfeasibleError:
                return
            if val < best:
                best, witness = val, tuple(x)
            return
        for p in piece_lists[k]:
            pm = _piece_min(p)
            if pm >= best:
                break
            chosen[k] = p
            rec(k + 1, max(lb, pm))

    if best > 0:
        rec(0, Fraction(0))
    return best, witness


def _piece_min(p) -> Fraction:
    lo, hi, val, slope = p
    if lo is None or hi is None:
        return val
    return min(val, val + slope * (hi - lo))


def _pattern_search(config, profiles, start, scale):
    x = list(start)
    fx = _objective(config, profiles, x)
    step = scale
    floor = scale / 2 ** PATTERN_MIN_STEP_EXP
    while step >= floor and fx > 0:
        improved = False
        for i in range(config.m):
            for sgn in (1, -1):
                y = list(x)
                y[i] += sgn * step
                fy = _objective(config, profiles, y)
                if fy < fx:
                    x, fx, improved = y, fy, True
        if not improved:
            step /= 2
    return fx, tuple(x)


def dist_to_orbit(config: Configuration, E, method: Optional[str] = None) -> OrbitDistance:
    """min over v of max_j |E_j Δ (E_j* + L_j(v))|.

    ``method`` defaults to "exact" for m <= 3 (branch and bound over products of
    linear pieces, one exact LP per cell) and to "local" above (compass search
    from the same seeds, uncertified).
    """
    E = as_set_tuple(config, E)
    if any(measure(s) <= 0 for s in E):
        raise ValueError("orbit distance needs sets of positive measure")
    method = method or ("exact" if config.m <= EXACT_DIST_MAX_DIM else "local")
    profiles = [_sym_diff_profile(s) for s in E]
    seeds = _seed_points(config, profiles)
    scored = sorted(((_objective(config, profiles, v), v) for v in seeds), key=lambda t: t[0])
    best, witness = scored[0]
    if method == "exact":
        best, witness = _exact_dist(config, profiles, best, witness)
        return OrbitDistance(best, witness, True, "exact")
    if method != "local":
        raise ValueError(f"unknown method {method!r}")
    scale = max(measure(s) for s in E) / 4
    for val, v in scored[:4]:
        fv, xv = _pattern_search(config, profiles, v, scale)
        if fv < best:
            best, witness = fv, xv
    return OrbitDistance(best, witness, False, "local, uncertified")


# -------------------------------------------------------------- deficit


@dataclass(frozen=True)
class DeficitReport:
    phi: Fraction
    phi_star: Fraction
    deficit: Fraction
    dist: Fraction
    witness_v: tuple[Fraction, ...]
    certified: bool

    @property
    def ratio(self) -> Optional[Fraction]:
        return self.deficit / self.dist ** 2 if self.dist > 0 else None

    def to_json(self):
        r = self.ratio
        return {
            "phi": format_rational(self.phi), "phi_star": format_rational(self.phi_star),
            "deficit": format_rational(self.deficit), "dist": format_rational(self.dist),
            "witness_v": [format_rational(x) for x in self.witness_v],
            "dist_certified": self.certified,
            "ratio": None if r is None else format_rational(r),
        }


def deficit(config: Configuration, e: Sequence, E, with_dist: bool = True) -> DeficitReport:
    E = as_set_tuple(config, E)
    e = measure_vector(e)
    for j, s in enumerate(E):
        if measure(s) != e[j]:
            raise MeasureMismatchError(f"|E_{j}| ≠ e_{j}: {measure(s)} vs {e[j]}")
    p = phi(config, E)
    p0 = phi(config, star_tuple(e))
    d = p0 - p
    if d < 0:
        raise CounterexampleError(f"negative deficit {d}", E)
    if with_dist:
        od = dist_to_orbit(config, E)
        return DeficitReport(p, p0, d, od.dist, od.witness, od.certified)
    return DeficitReport(p, p0, d, Fraction(-1), (), False)


# ------------------------------------------------------------ samplers


def _tuple_text(E) -> str:
    return " ".join(str(s) for s in E)


def _pick(rng: random.Random, seq):
    return seq[rng.randrange(len(seq))]


class Sampler:
    """Deterministic perturbation generator near the orbit of the centered tuple.

    Magnitudes come from a fixed rational grid scaled by min(e), so every
    sample is exact and small denominators keep the compiled kernel in range.
    """

    families = ("shell", "shift", "mixed", "orbit")

    def __init__(self, config: Configuration, e: Sequence[Fraction], kind: str = "default"):
        if kind not in self.families + ("default",):
            raise ValueError(f"unknown sampler {kind!r}")
        self.config, self.e, self.kind = config, tuple(e), kind
        self.unit = min(e) / 160

    def family_for(self, index: int) -> str:
        if self.kind == "default":
            return ("shell", "shift", "mixed")[index % 3]
        return self.kind

    def _shell(self, rng, j):
        eta = self.unit * rng.randint(1, 16)
        gap = eta * _pick(rng, (0, Fraction(1, 4), Fraction(1, 2), 1))
        return shell_perturbation(self.e[j], eta, _pick(rng, ("left", "right")), gap)

    def _shift(self, rng):
        return self.unit * rng.randint(-16, 16)

    def draw(self, rng: random.Random, family: str):
        n = self.config.n
        star = star_tuple(self.e)
        if family == "orbit":
            v = [Fraction(rng.randint(-8, 8), 16) for _ in range(self.config.m)]
            return orbit_tuple(self.config, star, v)
        if family == "shell":
            slots = rng.sample(range(n), rng.randint(1, n))
            return tuple(self._shell(rng, j) if j in slots else star[j] for j in range(n))
        if family == "shift":
            return tuple(IntervalUnion(tuple(c.shifted(self._shift(rng)) for c in star[j].components))
                         for j in range(n))
        out = []
        for j in range(n):
            s = self._shell(rng, j) if rng.random() < 0.5 else star[j]
            u = self._shift(rng)
            out.append(IntervalUnion(tuple(c.shifted(u) for c in s.components)))
        return tuple(out)


# --------------------------------------------------------- stability scan


@dataclass(frozen=True)
class SampleRecord:
    index: int
    family: str
    report: DeficitReport
    sets: tuple[IntervalUnion, ...]


@dataclass
class ScanReport:
    config: str
    seed: int
    n: int
    sampler: str
    samples: list[SampleRecord]
    csv_path: Optional[str] = None
    exponent_fits: dict = field(default_factory=dict)

    def ratios(self, family: Optional[str] = None) -> list[Fraction]:
        return [s.report.ratio for s in self.samples
                if s.report.ratio is not None and (family is None or s.family == family)]

    @property
    def min_ratio(self) -> Optional[Fraction]:
        r = self.ratios()
        return min(r) if r else None

    @property
    def argmin(self) -> Optional[SampleRecord]:
        cand = [s for s in self.samples if s.report.ratio is not None]
        return min(cand, key=lambda s: (s.report.ratio, s.index)) if cand else None

    @property
    def family_minima(self) -> dict:
        out = {}
        for fam in sorted({s.family for s in self.samples}):
            r = self.ratios(fam)
            out[fam] = min(r) if r else None
        return out

    @property
    def counterexamples(self) -> list[SampleRecord]:
        """Samples off the orbit with zero deficit."""
        return [s for s in self.samples if s.report.dist > 0 and s.report.deficit == 0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample", "family", "dist", "dist_exact", "deficit", "deficit_exact",
                    "ratio", "ratio_exact", "sets"])
        for s in self.samples:
            r = s.report
            ratio = r.ratio
            w.writerow([s.index, s.family, format_decimal(r.dist), format_rational(r.dist),
                        format_decimal(r.deficit), format_rational(r.deficit),
                        "" if ratio is None else format_decimal(ratio),
                        "" if ratio is None else format_rational(ratio), _tuple_text(s.sets)])
        return buf.getvalue()

    def to_json(self):
        am = self.argmin
        return {
            "config": self.config, "seed": self.seed, "samples": self.n, "sampler": self.sampler,
            "min_ratio": None if self.min_ratio is None else format_rational(self.min_ratio),
            "min_ratio_decimal": None if self.min_ratio is None else format_decimal(self.min_ratio),
            "argmin": None if am is None else {"sample": am.index, "family": am.family,
                                               "sets": _tuple_text(am.sets)},
            "family_minima": {k: None if v is None else format_rational(v)
                              for k, v in self.family_minima.items()},
            "counterexamples": [s.index for s in self.counterexamples],
            "exponent_fits": self.exponent_fits,
            "csv": self.csv_path,
        }


def require_stability_hypotheses(config: Configuration, e: Sequence):
    strict = check_strictly_admissible(config, e)
    gen = check_generic(config, e)
    if not (strict.ok and gen.ok):
        raise HypothesisFailure("stability scan needs a strictly admissible generic configuration",
                                {"strictly_admissible": strict.to_json(), "generic": gen.to_json()})


def stability_scan(config: Configuration, e: Sequence, sampler: str = "default", n: int = 200,
                   seed: int = 0, csv_path: Optional[str] = None, max_tries: int = 50) -> ScanReport:
    """Sample n perturbed tuples with dist <= 0.2 min(e) and record deficit/dist^2.

    Sample i uses its own generator seeded by (seed, i), so a run with 2n
    samples extends the run with n samples.
    """
    e = measure_vector(e)
    require_stability_hypotheses(config, e)
    smp = Sampler(config, e, sampler)
    radius = SAMPLE_RADIUS * min(e)
    records = []
    for i in range(n):
        rng = random.Random(f"{seed}:{i}")
        fam = smp.family_for(i)
        for _ in range(max_tries):
            E = smp.draw(rng, fam)
            rep = deficit(config, e, E)
            if rep.dist <= radius:
                break
        else:
            raise BLLError(f"sample {i}: no draw within the distance radius in {max_tries} tries")
        records.append(SampleRecord(i, fam, rep, E))
    report = ScanReport(config.name, seed, n, sampler, records, csv_path)
    if csv_path:
        from .fileio import atomic_write
        atomic_write(csv_path, report.to_csv())
    return report


# --------------------------------------------------------- exponent fits


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    points: tuple[tuple[Fraction, Fraction, Fraction], ...]  # (delta, x, y)


def loglog_slope(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> tuple[float, float]:
    """Least-squares slope and intercept of log y against log x."""
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    n = len(lx)
    if n < 2:
        raise ValueError("need at least two points to fit a slope")
    mx, my = sum(lx) / n, sum(ly) / n
    sxx = sum((a - mx) ** 2 for a in lx)
    if sxx == 0:
        raise ValueError("all abscissae coincide")
    slope = sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / sxx
    return slope, my - slope * mx


FamilySpec = Union[str, Callable[[Fraction], Sequence[IntervalUnion]]]


def family_tuple(config: Configuration, e: Sequence, family: FamilySpec, delta: Fraction,
                 direction: Optional[Sequence] = None, slots: Sequence[int] = (0,),
                 side: str = "right") -> tuple[IntervalUnion, ...]:
    """Members of the named one-parameter families at size delta.

    "shift": E_j = E_j* + delta * direction_j.  "shell": shell perturbation of
    size delta on each listed slot.  "orbit": E_j* + L_j(delta, ..., delta).
    """
    if callable(family):
        return as_set_tuple(config, family(delta))
    star = star_tuple(e)
    if family == "shift":
        d = [as_rational(x) for x in (direction or [0] * (config.n - 1) + [1])]
        return tuple(IntervalUnion(tuple(c.shifted(delta * dj) for c in s.components))
                     for s, dj in zip(star, d))
    if family == "shell":
        return tuple(shell_perturbation(e[j], delta, side) if j in slots else star[j]
                     for j in range(config.n))
    if family == "orbit":
        return orbit_tuple(config, star, [delta] * config.m)
    raise ValueError(f"unknown family {family!r}")


def exponent_fit(config: Configuration, e: Sequence, family: FamilySpec, deltas: Sequence,
                 **kw) -> FitResult:
    """Slope of log(deficit) against log(dist) along a one-parameter family."""
    e = measure_vector(e)
    pts = []
    for d in deltas:
        d = as_rational(d)
        E = family_tuple(config, e, family, d, **kw)
        rep = deficit(config, e, E)
        if rep.dist > 0 and rep.deficit == 0:
            raise CounterexampleError(f"zero deficit at positive distance (delta = {d})", E)
        if rep.dist > 0:
            pts.append((d, rep.dist, rep.deficit))
    if not pts:
        raise ValueError("family stays on the orbit: every distance is 0")
    slope, icpt = loglog_slope([p[1] for p in pts], [p[2] for p in pts])
    return FitResult(slope, icpt, tuple(pts))


@dataclass(frozen=True)
class ResidualLadder:
    points: tuple[tuple[Fraction, Fraction, Fraction], ...]  # (delta, dist, residual)
    slope: Optional[float]

    @property
    def identically_zero(self) -> bool:
        return all(p[2] == 0 for p in self.points)


def residual_ladder(config: Configuration, e: Sequence, deltas: Sequence, slots: Sequence[int] = (0, 1),
                    side: str = "right") -> ResidualLadder:
    """Exact expansion residual for shell perturbations on the given slots.

    The slope of log|residual| against log(dist) is None when the residual
    vanishes at some ladder point (the remainder is then exactly zero there).
    """
    e = measure_vector(e)
    pts = []
    for d in deltas:
        d = as_rational(d)
        E = family_tuple(config, e, "shell", d, slots=slots, side=side)
        res = expansion(config, e, E).residual
        pts.append((d, dist_to_orbit(config, E).dist, res))
    slope = None
    if all(p[2] != 0 and p[1] > 0 for p in pts):
        slope, _ = loglog_slope([p[1] for p in pts], [abs(p[2]) for p in pts])
    return ResidualLadder(tuple(pts), slope)


# ------------------------------------------------------------ psi scan


def in_row_space(config: Configuration, v: Sequence) -> Optional[tuple[Fraction, ...]]:
    """y with L_j(y) = v_j for all j, or None."""
    y = linalg.solve_any([list(r) for r in config.rows], [as_rational(x) for x in v])
    return None if y is None else tuple(y)


@dataclass
class PsiScanReport:
    psi0: Fraction
    rows: list  # (v, psi(v), in_row_space, ratio or None)
    violations: list
    quadratic_constant: Optional[Fraction]

    def to_json(self):
        return {
            "psi0": format_rational(self.psi0),
            "samples": [{"v": [format_rational(x) for x in v], "psi": format_rational(p),
                         "in_row_space": r, "ratio": None if q is None else format_rational(q)}
                        for v, p, r, q in self.rows],
            "violations": self.violations,
            "quadratic_constant": None if self.quadratic_constant is None
            else format_rational(self.quadratic_constant),
        }


def psi_scan(config: Configuration, e: Sequence, directions: Sequence[Sequence], values: Sequence) -> PsiScanReport:
    """Check Psi(v) <= Psi(0), with equality exactly on the row space, along rays.

    The quadratic constant min (Psi(0) - Psi(v)) / dist^2 over off-orbit
    samples is attached when the configuration is strictly admissible and generic.
    """
    e = measure_vector(e)
    adm = check_admissible(config, e)
    if not adm.ok:
        raise HypothesisFailure("psi scan needs an admissible configuration", adm.to_json())
    quad = check_strictly_admissible(config, e).ok and check_generic(config, e).ok
    p0 = psi(config, e, [0] * config.n)
    rows, bad, ratios = [], [], []
    for d in directions:
        for r in values:
            v = tuple(as_rational(r) * as_rational(x) for x in d)
            pv = psi(config, e, v)
            member = in_row_space(config, v) is not None
            ratio = None
            if pv > p0:
                bad.append({"v": [format_rational(x) for x in v], "issue": "psi(v) > psi(0)"})
            if (pv == p0) != member:
                bad.append({"v": [format_rational(x) for x in v],
                            "issue": "equality does not match row-space membership"})
            if quad and not member:
                I = tuple(IntervalUnion((Interval.centered(ej, vj),)) for ej, vj in zip(e, v))
                dd = dist_to_orbit(config, I).dist
                if dd > 0:
                    ratio = (p0 - pv) / dd ** 2
                    ratios.append(ratio)
            rows.append((v, pv, member, ratio))
    return PsiScanReport(p0, rows, bad, min(ratios) if ratios else None)


# ------------------------------------------------- shifted-kernel bound


@dataclass(frozen=True)
class ShiftedKernelReport:
    sup_diff: Fraction
    argmax: Optional[Fraction]
    offset: Fraction
    ratio: Optional[Fraction]

    def to_json(self):
        return {"sup_diff": format_rational(self.sup_diff),
                "argmax": None if self.argmax is None else format_rational(self.argmax),
                "offset": format_rational(self.offset),
                "ratio": None if self.ratio is None else format_rational(self.ratio)}


def shifted_kernel_bound(config: Configuration, e: Sequence, intervals: Sequence, j: int,
                         samples: Optional[Sequence] = None) -> ShiftedKernelReport:
    """sup_s |K_{j,I}(s) - K_j(s)| over samples, divided by the largest center offset.

    The default sample set is every breakpoint of either kernel; both kernels
    are piecewise polynomial between them, so for m = 2 this sup is exact.
    """
    e = measure_vector(e)
    boxes = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals]
    if boxes[j].length != e[j] or boxes[j].center != 0:
        raise ValueError("slot j must carry the centered interval of length e_j")
    for k, b in enumerate(boxes):
        if b.length != e[k]:
            raise MeasureMismatchError(f"|I_{k}| ≠ e_{k}")
    if samples is None:
        pts = set(kernel_breakpoints(config, e, j)) | set(kernel_breakpoints(config, e, j, boxes))
        pts = sorted(pts)
        mids = [(a + b) / 2 for a, b in zip(pts, pts[1:])]
        samples = sorted(set(pts) | set(mids))
    best, arg = Fraction(0), None
    for s in samples:
        s = as_rational(s)
        diff = abs(kernel_K(config, e, j, s, boxes) - kernel_K(config, e, j, s))
        if diff > best:
            best, arg = diff, s
    offset = max(abs(b.center) for b in boxes)
    ratio = best / offset if offset > 0 else None
    return ShiftedKernelReport(best, arg, offset, ratio)

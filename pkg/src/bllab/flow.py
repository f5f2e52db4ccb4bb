"""Measure-preserving symmetrization flow on interval unions.

Between events every component keeps its length while its center contracts
proportionally towards 0: c(t) = c(t0) (1 - t) / (1 - t0).  Relative center
distances all shrink at the same rate, so the next contact is the adjacent
pair maximizing (r_k + r_{k+1}) / (c_{k+1} - c_k); touching components merge
into their union and the flow continues from the merged state.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .core import (Configuration, Interval, IntervalUnion, as_rational, format_decimal,
                   format_rational, measure, symmetrize)
from .errors import DegenerateSetError


@dataclass(frozen=True)
class FlowEvent:
    time: Fraction
    # groups of pre-event component indices that became one component
    merged: tuple[tuple[int, ...], ...]
    state: IntervalUnion


def _next_merge(comps: Sequence[Interval]):
    best, groups = None, []
    for k in range(len(comps) - 1):
        a, b = comps[k], comps[k + 1]
        rho = (a.length + b.length) / 2 / (b.center - a.center)
        if best is None or rho > best:
            best, groups = rho, [k]
        elif rho == best:
            groups.append(k)
    return best, groups


def _contract(comps: Sequence[Interval], factor: Fraction) -> tuple[Interval, ...]:
    return tuple(Interval.centered(c.length, c.center * factor) for c in comps)


@lru_cache(maxsize=4096)
def flow_events(E: IntervalUnion) -> tuple[FlowEvent, ...]:
    """All merge events of the flow started at E, in increasing time order."""
    if measure(E) <= 0:
        raise DegenerateSetError("degenerate set: the flow needs positive measure")
    t0 = Fraction(0)
    comps = E.components
    events = []
    while len(comps) > 1:
        rho, pairs = _next_merge(comps)
        t = 1 - (1 - t0) * rho
        comps = _contract(comps, (1 - t) / (1 - t0))
        # chains of simultaneously touching pairs merge into one component
        groups, cur = [], [0]
        for k in range(1, len(comps)):
            if k - 1 in pairs:
                cur.append(k)
            else:
                groups.append(tuple(cur))
                cur = [k]
        groups.append(tuple(cur))
        comps = tuple(Interval(comps[g[0]].lo, comps[g[-1]].hi) for g in groups)
        events.append(FlowEvent(t, tuple(g for g in groups if len(g) > 1), IntervalUnion(comps)))
        t0 = t
    return tuple(events)


def flow_state(E: IntervalUnion, t) -> IntervalUnion:
    """E(t); E(0) = E and E(1) is the centered interval of the same measure."""
    t = as_rational(t)
    if not 0 <= t <= 1:
        raise ValueError(f"flow time {t} outside [0, 1]")
    events = flow_events(E)
    t0, comps = Fraction(0), E.components
    for ev in events:
        if ev.time > t:
            break
        t0, comps = ev.time, ev.state.components
    if t == 1:
        return symmetrize(E)
    return IntervalUnion(_contract(comps, (1 - t) / (1 - t0)))


def flow_tuple(E: Sequence[IntervalUnion], t) -> tuple[IntervalUnion, ...]:
    return tuple(flow_state(s, t) for s in E)


@dataclass(frozen=True)
class TracePoint:
    t: Fraction
    phi: Fraction
    event_slots: tuple[int, ...]  # slots with a merge event exactly at t
    on_grid: bool


@dataclass(frozen=True)
class FlowTrace:
    points: tuple[TracePoint, ...]

    def is_nondecreasing(self) -> bool:
        vals = [p.phi for p in self.points]
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def to_csv(self) -> str:
        """Slots in the event column are numbered from 1."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "phi", "phi_exact", "event", "event_slots"])
        for p in self.points:
            w.writerow([format_rational(p.t), format_decimal(p.phi), format_rational(p.phi),
                        int(bool(p.event_slots)), ";".join(str(j + 1) for j in p.event_slots)])
        return buf.getvalue()


def flow_trace(config: Configuration, E, grid: Sequence) -> FlowTrace:
    """Phi along the tuple flow on the grid refined by every slot's merge times."""
    from .functional import as_set_tuple, phi

    E = as_set_tuple(config, E)
    grid = [as_rational(t) for t in grid]
    if any(not 0 <= t <= 1 for t in grid):
        raise ValueError("grid times must lie in [0, 1]")
    if any(a > b for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted")
    on_grid = set(grid)
    event_at: dict[Fraction, list[int]] = {}
    for j, s in enumerate(E):
        for ev in flow_events(s):
            event_at.setdefault(ev.time, []).append(j)
    times = sorted(on_grid | set(event_at))
    pts = tuple(TracePoint(t, phi(config, flow_tuple(E, t)), tuple(event_at.get(t, ())), t in on_grid)
                for t in times)
    return FlowTrace(pts)

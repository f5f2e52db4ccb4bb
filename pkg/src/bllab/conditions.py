"""Decide the structural hypotheses on (L, e) and build the skeleton graph.

All comparisons are exact; every negative verdict carries a witness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

from . import linalg
from .core import Configuration, Interval, format_rational, measure_vector
from .errors import DegenerateConfigurationError, HypothesisFailure
from .polytope import Polytope, build_box_polytope, enumerate_vertices, lp_maximize
from .simplex import linprog


def _fmt(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (tuple, list)):
        return [_fmt(x) for x in v]
    return v


@dataclass(frozen=True)
class NondegeneracyReport:
    zero_rows: tuple[int, ...]
    proportional_pairs: tuple[tuple[int, int], ...]
    # j such that the rows other than j do not span; witness x != 0 in their common kernel
    rank_deficient: tuple[tuple[int, tuple[Fraction, ...]], ...]

    @property
    def ok(self) -> bool:
        return not (self.zero_rows or self.proportional_pairs or self.rank_deficient)

    def to_json(self):
        return {
            "nondegenerate": self.ok,
            "zero_rows": list(self.zero_rows),
            "proportional_pairs": [list(p) for p in self.proportional_pairs],
            "rank_deficient": [{"slot": j, "kernel_vector": _fmt(x)} for j, x in self.rank_deficient],
        }


@lru_cache(maxsize=256)
def check_nondegenerate(config: Configuration) -> NondegeneracyReport:
    rows = config.rows
    zero = tuple(j for j, r in enumerate(rows) if not any(r))
    prop = tuple((i, j) for i, j in combinations(range(config.n), 2)
                 if any(rows[i]) and any(rows[j]) and linalg.rank([rows[i], rows[j]]) < 2)
    deficient = []
    for j in range(config.n):
        others = [r for i, r in enumerate(rows) if i != j]
        ker = linalg.nullspace(others, config.m)
        if ker:
            deficient.append((j, tuple(ker[0])))
    return NondegeneracyReport(zero, prop, tuple(deficient))


def require_nondegenerate(config: Configuration):
    rep = check_nondegenerate(config)
    if not rep.ok:
        raise DegenerateConfigurationError(f"degenerate configuration: {rep.to_json()}")


def body(config: Configuration, e: Sequence[Fraction]) -> Polytope:
    """K_e = {x : |L_j(x)| <= e_j / 2}; constraint 2j is the upper, 2j+1 the lower."""
    e = measure_vector(e)
    return build_box_polytope(config, [Interval(-ej / 2, ej / 2) for ej in e])


def _require_bounded(config: Configuration):
    if linalg.rank(config.rows) < config.m:
        raise DegenerateConfigurationError("degenerate configuration: K_e is unbounded")


@dataclass(frozen=True)
class SlotAdmissibility:
    slot: int
    max_value: Fraction
    target: Fraction
    witness: tuple[Fraction, ...]

    @property
    def admissible(self) -> bool:
        return self.max_value == self.target


@dataclass(frozen=True)
class AdmissibilityReport:
    slots: tuple[SlotAdmissibility, ...]

    @property
    def ok(self) -> bool:
        return all(s.admissible for s in self.slots)

    def to_json(self):
        return {
            "admissible": self.ok,
            "slots": [{"slot": s.slot, "admissible": s.admissible, "max_abs_L": _fmt(s.max_value),
                       "half_e": _fmt(s.target), "witness": _fmt(s.witness)} for s in self.slots],
        }


def check_admissible(config: Configuration, e: Sequence[Fraction]) -> AdmissibilityReport:
    e = measure_vector(e)
    _require_bounded(config)
    K = body(config, e)
    out = []
    for k in range(config.n):
        val, x = lp_maximize(K, config.rows[k])
        out.append(SlotAdmissibility(k, val, e[k] / 2, x))
    return AdmissibilityReport(tuple(out))


@dataclass(frozen=True)
class SlotStrictness:
    slot: int
    slack: Fraction            # optimal delta of the slack LP
    witness: tuple[Fraction, ...]
    left_derivative: Fraction  # D^- K_j(e_j / 2)

    @property
    def interior(self) -> bool:
        return self.slack > 0

    @property
    def negative_derivative(self) -> bool:
        return self.left_derivative < 0

    @property
    def ok(self) -> bool:
        return self.interior and self.negative_derivative


@dataclass(frozen=True)
class StrictAdmissibilityReport:
    slots: tuple[SlotStrictness, ...]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.slots)

    def to_json(self):
        return {
            "strictly_admissible": self.ok,
            "slots": [{"slot": s.slot, "slack": _fmt(s.slack), "witness": _fmt(s.witness),
                       "condition_i": s.interior, "left_derivative": _fmt(s.left_derivative),
                       "condition_ii": s.negative_derivative} for s in self.slots],
        }


def strict_slack(config: Configuration, e: Sequence[Fraction], j: int) -> tuple[Fraction, tuple[Fraction, ...]]:
    """max delta s.t. L_j(x) = e_j/2 and |L_i(x)| <= e_i/2 - delta for i != j."""
    e = measure_vector(e)
    m = config.m
    c = [0] * m + [1]
    A_ub, b_ub = [], []
    for i, row in enumerate(config.rows):
        if i == j:
            continue
        A_ub.append(list(row) + [1])
        b_ub.append(e[i] / 2)
        A_ub.append([-v for v in row] + [1])
        b_ub.append(e[i] / 2)
    res = linprog(c, A_ub, b_ub, [list(config.rows[j]) + [0]], [e[j] / 2])
    return res.value, res.x[:m]


def check_strictly_admissible(config: Configuration, e: Sequence[Fraction]) -> StrictAdmissibilityReport:
    e = measure_vector(e)
    from .functional import kernel_K_left_derivative

    require_nondegenerate(config)
    out = []
    for j in range(config.n):
        slack, x = strict_slack(config, e, j)
        deriv = kernel_K_left_derivative(config, e, j, e[j] / 2)
        out.append(SlotStrictness(j, slack, x, deriv))
    return StrictAdmissibilityReport(tuple(out))


@dataclass(frozen=True)
class VertexInfo:
    point: tuple[Fraction, ...]
    active_slots: frozenset[int]
    active_constraints: frozenset[int]


@dataclass(frozen=True)
class GenericityReport:
    m: int
    vertices: tuple[VertexInfo, ...]

    @property
    def ok(self) -> bool:
        return all(len(v.active_slots) == self.m for v in self.vertices)

    @property
    def non_generic(self) -> tuple[VertexInfo, ...]:
        return tuple(v for v in self.vertices if len(v.active_slots) != self.m)

    def to_json(self):
        return {
            "generic": self.ok,
            "vertex_count": len(self.vertices),
            "vertices": [{"point": _fmt(v.point), "active_slots": sorted(v.active_slots),
                          "count": len(v.active_slots), "generic": len(v.active_slots) == self.m}
                         for v in self.vertices],
        }


def body_vertices(config: Configuration, e: Sequence[Fraction]) -> list[VertexInfo]:
    e = measure_vector(e)
    _require_bounded(config)
    out = []
    for v in enumerate_vertices(body(config, e), check=False):
        slots = frozenset(c // 2 for c in v.active)
        out.append(VertexInfo(v.point, slots, v.active))
    return out


def check_generic(config: Configuration, e: Sequence[Fraction]) -> GenericityReport:
    return GenericityReport(config.m, tuple(body_vertices(config, e)))


@dataclass(frozen=True)
class SkeletonGraph:
    nodes: tuple[VertexInfo, ...]
    edges: tuple[tuple[int, int], ...]

    def degree(self, i: int) -> int:
        return sum(1 for a, b in self.edges if i in (a, b))


def skeleton_graph(config: Configuration, e: Sequence[Fraction]) -> SkeletonGraph:
    rep = check_generic(config, e)
    if not rep.ok:
        raise HypothesisFailure("non-generic configuration: skeleton adjacency undefined here", rep.to_json())
    nodes = rep.vertices
    m = config.m
    edges = []
    for a, b in combinations(range(len(nodes)), 2):
        p, q = nodes[a], nodes[b]
        # shared constraints (same slot, same side) are exactly the equal-valued shared slots
        common = sorted(p.active_constraints & q.active_constraints)
        if len(common) != m - 1:
            continue
        if linalg.rank([config.rows[c // 2] for c in common]) == m - 1:
            edges.append((a, b))
    return SkeletonGraph(nodes, tuple(edges))


def is_connected(g: SkeletonGraph) -> bool:
    """Breadth-first reachability; the empty graph counts as connected."""
    if not g.nodes:
        return True
    adj = {i: [] for i in range(len(g.nodes))}
    for a, b in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(g.nodes)


@dataclass
class ConditionReport:
    nondegenerate: NondegeneracyReport
    admissible: Optional[AdmissibilityReport] = None
    strictly_admissible: Optional[StrictAdmissibilityReport] = None
    generic: Optional[GenericityReport] = None
    errors: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        parts = [self.nondegenerate, self.admissible, self.strictly_admissible, self.generic]
        return all(p is not None and p.ok for p in parts)

    def to_json(self):
        out = {"nondegenerate": self.nondegenerate.to_json()}
        for name in ("admissible", "strictly_admissible", "generic"):
            part = getattr(self, name)
            out[name] = part.to_json() if part is not None else None
        out["errors"] = self.errors
        out["all_ok"] = self.all_ok
        return out


def check_all(config: Configuration, e: Sequence[Fraction]) -> ConditionReport:
    e = measure_vector(e)
    rep = ConditionReport(check_nondegenerate(config))
    try:
        rep.admissible = check_admissible(config, e)
        rep.generic = check_generic(config, e)
    except DegenerateConfigurationError as exc:
        rep.errors["admissible"] = str(exc)
        return rep
    try:
        rep.strictly_admissible = check_strictly_admissible(config, e)
    except DegenerateConfigurationError as exc:
        rep.errors["strictly_admissible"] = str(exc)
    return rep

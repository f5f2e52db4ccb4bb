import json
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from bllab import linalg
from bllab.conditions import (SkeletonGraph, VertexInfo, body, body_vertices, check_admissible, check_all,
                              check_generic, check_nondegenerate, check_strictly_admissible,
                              is_connected, require_nondegenerate, skeleton_graph, strict_slack)
from bllab.core import Configuration, builtin_config
from bllab.errors import DegenerateConfigurationError, HypothesisFailure
from bllab.polytope import lp_maximize

F = Fraction


def cfg_of(*rows):
    return Configuration(len(rows[0]), tuple(tuple(r) for r in rows))


@st.composite
def random_configs(draw, m=None):
    m = m or draw(st.integers(2, 3))
    n = draw(st.integers(m + 1, m + 3))
    seed = draw(st.integers(0, 10 ** 6))
    cfg, _ = builtin_config("random", n=n, m=m, seed=seed)
    e = tuple(F(draw(st.integers(2, 12)), 4) for _ in range(n))
    return cfg, e


@st.composite
def admissible_configs(draw, m=None):
    # tightening every e_j to its LP maximum leaves the body unchanged and makes each slot attained
    cfg, e = draw(random_configs(m))
    rep = check_admissible(cfg, e)
    return cfg, tuple(2 * s.max_value for s in rep.slots)


# rational points near the unit circle; e from their support function makes every constraint a tangent
_ARC = [(1, 0), (0, 1), (F(3, 5), F(4, 5)), (F(4, 5), F(3, 5)), (F(5, 13), F(12, 13)),
        (F(12, 13), F(5, 13)), (F(8, 17), F(15, 17)), (F(15, 17), F(8, 17))]
_DISC = [(sx * x, sy * y) for x, y in _ARC for sx in (1, -1) for sy in (1, -1)]
_BALL = [(x, y, z) for x, y in _DISC for z in (F(1, 2), F(-1, 2))] + [(0, 0, 1), (0, 0, -1)]


@st.composite
def round_configs(draw, m=None):
    cfg, _ = draw(random_configs(m))
    pts = _DISC if cfg.m == 2 else _BALL
    e = tuple(2 * max(abs(sum(a * b for a, b in zip(r, q))) for q in pts) for r in cfg.rows)
    return cfg, e


def lp_bound_without(cfg, e, k):
    rows = tuple(r for i, r in enumerate(cfg.rows) if i != k)
    rest = tuple(x for i, x in enumerate(e) if i != k)
    val, _ = lp_maximize(body(Configuration(cfg.m, rows), rest), cfg.rows[k])
    return val


class TestNondegenerate:
    def test_presets(self, rs, gowers2):
        assert check_nondegenerate(rs[0]).ok
        assert check_nondegenerate(gowers2[0]).ok

    def test_proportional_pair(self):
        rep = check_nondegenerate(cfg_of((1, 0), (2, 0), (0, 1)))
        assert not rep.ok
        assert rep.proportional_pairs == ((0, 1),)

    def test_rank_deficient_has_kernel_witness(self):
        cfg = cfg_of((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0))
        rep = check_nondegenerate(cfg)
        j, x = rep.rank_deficient[0]
        assert j == 2
        others = [r for i, r in enumerate(cfg.rows) if i != j]
        assert any(x) and all(sum(a * b for a, b in zip(r, x)) == 0 for r in others)

    def test_require_raises(self):
        with pytest.raises(DegenerateConfigurationError, match="degenerate configuration"):
            require_nondegenerate(cfg_of((1, 0), (2, 0), (0, 1)))

    def test_report_is_json(self):
        rep = check_nondegenerate(cfg_of((1, 0), (2, 0), (0, 1)))
        assert json.loads(json.dumps(rep.to_json()))["proportional_pairs"] == [[0, 1]]


class TestAdmissible:
    def test_rs(self, rs):
        rep = check_admissible(*rs)
        assert rep.ok
        assert rep.slots[0].max_value == 1

    def test_rs_wide_third_slot(self, rs):
        rep = check_admissible(rs[0], (2, 2, 10))
        assert [s.admissible for s in rep.slots] == [True, True, False]
        assert rep.slots[2].max_value == 2 and rep.slots[2].target == 5

    def test_unbounded(self):
        cfg = cfg_of((1, 0), (2, 0))
        with pytest.raises(DegenerateConfigurationError, match="unbounded"):
            check_admissible(cfg, (1, 1))

    @given(random_configs(), st.data())
    def test_monotone_in_one_slot(self, ce, data):
        cfg, e = ce
        rep = check_admissible(cfg, e)
        k = data.draw(st.integers(0, cfg.n - 1))
        bumped = list(e)
        bumped[k] = 2 * lp_bound_without(cfg, e, k) + 1
        after = check_admissible(cfg, bumped)
        assert not after.slots[k].admissible
        # widening slot k enlarges the body, so an attained constraint stays attained
        for i in range(cfg.n):
            if i != k and rep.slots[i].admissible:
                assert after.slots[i].admissible


class TestStrict:
    def test_rs_slot_one(self, rs):
        rep = check_strictly_admissible(*rs)
        s = rep.slots[0]
        assert s.slack == F(1, 2)
        assert s.witness == (1, F(-1, 2))
        assert s.left_derivative == -1
        assert rep.ok

    def test_borderline(self, rs):
        rep = check_strictly_admissible(rs[0], (2, 2, 4))
        assert rep.slots[2].slack == 0
        assert not rep.slots[2].interior and not rep.ok

    def test_inadmissible_slot_has_negative_slack(self, rs):
        slack, _ = strict_slack(rs[0], (2, 2, 10), 2)
        assert slack < 0

    def test_json(self, rs):
        js = check_strictly_admissible(*rs).to_json()
        assert js["slots"][0]["slack"] == "1/2"


class TestGeneric:
    def test_rs(self, rs):
        rep = check_generic(*rs)
        assert rep.ok and len(rep.vertices) == 6
        assert all(len(v.active_slots) == 2 for v in rep.vertices)

    def test_gowers(self, gowers2):
        rep = check_generic(*gowers2)
        assert not rep.ok
        assert len(rep.non_generic) == len(rep.vertices)
        v = next(v for v in rep.vertices if v.point == (F(1, 2), 0, 0))
        assert v.active_slots == frozenset(range(4))

    @given(st.one_of(admissible_configs(m=2), round_configs(m=2)))
    def test_m2_strict_implies_generic(self, ce):
        cfg, e = ce
        if not check_strictly_admissible(cfg, e).ok:
            return
        assert check_generic(cfg, e).ok


class TestVertexProperties:
    @given(random_configs())
    def test_active_rows_span(self, ce):
        cfg, e = ce
        for v in body_vertices(cfg, e):
            assert linalg.rank([cfg.rows[j] for j in v.active_slots]) == cfg.m

    @given(random_configs())
    def test_small_active_subsets_independent_when_generic(self, ce):
        cfg, e = ce
        assume(check_generic(cfg, e).ok)
        for v in body_vertices(cfg, e):
            rows = [cfg.rows[j] for j in v.active_slots]
            assert linalg.rank(rows) == len(rows)

    @given(admissible_configs())
    def test_every_slot_active_somewhere_when_admissible(self, ce):
        cfg, e = ce
        seen = set()
        for v in body_vertices(cfg, e):
            seen |= v.active_slots
        assert seen == set(range(cfg.n))


class TestSkeleton:
    def test_hexagon_cycle(self, rs):
        g = skeleton_graph(*rs)
        assert len(g.nodes) == 6 and len(g.edges) == 6
        assert all(g.degree(i) == 2 for i in range(6))
        assert is_connected(g)

    def test_cube(self):
        cfg = cfg_of((1, 0, 0), (0, 1, 0), (0, 0, 1))
        g = skeleton_graph(cfg, (2, 2, 2))
        assert len(g.nodes) == 8 and len(g.edges) == 12
        assert all(g.degree(i) == 3 for i in range(8))

    def test_gowers_rejected(self, gowers2):
        with pytest.raises(HypothesisFailure, match="non-generic configuration"):
            skeleton_graph(*gowers2)

    def test_disconnected_synthetic(self):
        nodes = tuple(VertexInfo((F(k),), frozenset(), frozenset()) for k in range(4))
        assert not is_connected(SkeletonGraph(nodes, ((0, 1), (2, 3))))

    def test_single_and_empty(self):
        node = VertexInfo((F(0),), frozenset(), frozenset())
        assert is_connected(SkeletonGraph((node,), ()))
        assert is_connected(SkeletonGraph((), ()))

    @given(round_configs())
    def test_connected_for_generic_strict(self, ce):
        cfg, e = ce
        assume(check_generic(cfg, e).ok)
        assume(check_strictly_admissible(cfg, e).ok)
        assert is_connected(skeleton_graph(cfg, e))


class TestCheckAll:
    def test_rs(self, rs):
        rep = check_all(*rs)
        assert rep.all_ok
        assert json.loads(json.dumps(rep.to_json()))["all_ok"] is True

    def test_gowers(self, gowers2):
        rep = check_all(*gowers2)
        assert rep.nondegenerate.ok and not rep.generic.ok and not rep.all_ok

    def test_float_free_coercion(self, rs):
        assert check_admissible(rs[0], (2, 2, 10)).slots[2].target == 5

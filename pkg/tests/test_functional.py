from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bllab import functional as fn
from bllab.core import Configuration, IntervalUnion, builtin_config, centered, measure, translate
from bllab.errors import BreakpointCongestionError, DegenerateConfigurationError, MeasureMismatchError
from bllab.functional import (basis_subset_bounds, expansion, expansion_residual, first_order_term,
                              integrate_K, kernel_K, kernel_K_left_derivative, kernel_L, kernel_pieces,
                              kernel_table, orbit_tuple, phi, phi_star, psi, second_order_term,
                              shell_perturbation, star_tuple)
from conftest import interval_unions, rationals
import oracles

F = Fraction
SPLIT = IntervalUnion.from_pairs([(F(-3, 2), F(-1, 2)), (F(1, 2), F(3, 2))])
RS_CFG, RS_E = builtin_config("riesz-sobolev")
GW_CFG, GW_E = builtin_config("gowers", k=2)
R3_CFG, _ = builtin_config("random", n=5, m=3, seed=7)


def with_measure(U, target):
    """Rescale an interval union about 0 to the given measure."""
    k = F(target) / measure(U)
    return IntervalUnion.from_pairs([(k * a, k * b) for a, b in U.pairs()])


def tuples_for(cfg, max_components=3):
    return st.tuples(*[interval_unions(max_components=max_components, lo=-2, hi=2) for _ in range(cfg.n)])


def tuples_with_measures(e, max_components=3):
    return st.tuples(*[interval_unions(max_components=max_components, lo=-2, hi=2).map(
        lambda U, ej=ej: with_measure(U, ej)) for ej in e])


class TestPhi:
    def test_rs_centered(self):
        assert phi(RS_CFG, star_tuple(RS_E)) == 3

    def test_rs_split(self):
        assert phi(RS_CFG, (SPLIT, centered(2), centered(2))) == 2

    def test_rs_translated(self):
        E = [translate(centered(2), 1), translate(centered(2), 1), translate(centered(2), -2)]
        assert phi(RS_CFG, E) == 3

    def test_pairs_accepted(self):
        assert phi(RS_CFG, [[(-1, 1)]] * 3) == 3

    def test_wrong_slot_count(self):
        with pytest.raises(ValueError):
            phi(RS_CFG, [centered(2)] * 2)

    def test_degenerate_rejected(self):
        cfg = Configuration(2, ((1, 0), (2, 0), (0, 1)))
        with pytest.raises(DegenerateConfigurationError):
            phi(cfg, [centered(1)] * 3)

    @given(tuples_for(RS_CFG))
    def test_rs_matches_clipping_oracle(self, E):
        assert phi(RS_CFG, E) == oracles.phi_oracle(RS_CFG.rows, E)

    @given(tuples_for(GW_CFG, max_components=2))
    def test_gowers_matches_simpson_oracle(self, E):
        assert phi(GW_CFG, E) == oracles.phi_oracle(GW_CFG.rows, E)

    @given(tuples_for(R3_CFG, max_components=2), st.lists(rationals(-2, 2), min_size=3, max_size=3))
    def test_translation_symmetry(self, E, v):
        assert phi(R3_CFG, orbit_tuple(R3_CFG, E, v)) == phi(R3_CFG, E)

    @given(tuples_for(GW_CFG))
    def test_rearrangement_inequality(self, E):
        assert phi(GW_CFG, E) <= phi_star(GW_CFG, E)

    @given(tuples_for(R3_CFG))
    def test_basis_subset_bound(self, E):
        value = phi(R3_CFG, E)
        bounds = basis_subset_bounds(R3_CFG, E)
        assert bounds
        assert all(value <= b for _, b in bounds)

    def test_basis_subset_bound_values(self):
        bounds = dict(basis_subset_bounds(RS_CFG, star_tuple(RS_E)))
        assert bounds == {(0, 1): 4, (0, 2): 4, (1, 2): 4}


class TestKernelK:
    def test_triangle_values(self):
        assert [kernel_K(RS_CFG, RS_E, 2, s) for s in (0, 1, 3)] == [2, 1, 0]

    def test_slot_measure_ignored(self):
        assert kernel_K(RS_CFG, (2, 2, 100), 2, F(1, 2)) == kernel_K(RS_CFG, RS_E, 2, F(1, 2))

    @pytest.mark.parametrize("cfg,e", [(RS_CFG, RS_E), (GW_CFG, GW_E)])
    def test_integral_is_phi_star(self, cfg, e):
        for j in range(cfg.n):
            assert integrate_K(cfg, e, j, centered(e[j])) == phi(cfg, star_tuple(e))

    @given(rationals(0, 3), st.integers(0, 3))
    def test_even_and_nonincreasing(self, s, j):
        assert kernel_K(GW_CFG, GW_E, j, s) == kernel_K(GW_CFG, GW_E, j, -s)
        assert kernel_K(GW_CFG, GW_E, j, s + F(1, 8)) <= kernel_K(GW_CFG, GW_E, j, s)

    @given(interval_unions(lo=-2, hi=2), st.integers(0, 3))
    def test_defining_identity(self, A, j):
        E = list(star_tuple(GW_E))
        E[j] = A
        assert integrate_K(GW_CFG, GW_E, j, A) == phi(GW_CFG, E)

    @given(interval_unions(lo=-3, hi=3), st.integers(0, 2))
    def test_defining_identity_rs(self, A, j):
        E = list(star_tuple(RS_E))
        E[j] = A
        assert integrate_K(RS_CFG, RS_E, j, A) == phi(RS_CFG, E)

    def test_pieces_match_samples(self):
        for p in kernel_pieces(GW_CFG, GW_E, 0):
            mid = (p.lo + p.hi) / 2
            assert p(mid) == kernel_K(GW_CFG, GW_E, 0, mid)

    def test_table_csv(self):
        t = kernel_table(RS_CFG, RS_E, 2, [0, F(1, 3), 1])
        lines = t.to_csv().splitlines()
        assert lines[0] == "s,K,K_exact"
        assert lines[2] == "1/3,1.66666666667,5/3"


class TestLeftDerivative:
    def test_triangle_slope(self):
        assert kernel_K_left_derivative(RS_CFG, RS_E, 2, 1) == -1

    def test_flat_piece(self):
        # without slot 1 the body is |y| <= 1, |x + y| <= 5: slices along x have length 2 for |x| <= 4
        assert kernel_K_left_derivative(RS_CFG, (2, 2, 10), 0, 1) == 0

    def test_beyond_support(self):
        assert kernel_K_left_derivative(RS_CFG, RS_E, 2, 5) == 0

    def test_at_breakpoint_uses_left_piece(self):
        # K_3 = 2 - |s| has its kink at 0 and the support end at 2
        assert kernel_K_left_derivative(RS_CFG, RS_E, 2, 2) == -1

    def test_needs_positive_s(self):
        with pytest.raises(ValueError):
            kernel_K_left_derivative(RS_CFG, RS_E, 2, 0)

    def test_retry_budget(self, monkeypatch):
        monkeypatch.setattr(fn, "DERIVATIVE_RETRIES", 0)
        with pytest.raises(BreakpointCongestionError, match="breakpoint congestion"):
            kernel_K_left_derivative(RS_CFG, RS_E, 2, 1)

    @given(rationals(0, 3).filter(lambda s: s > 0), st.integers(0, 3))
    def test_matches_piece_derivative(self, s, j):
        piece = next((p for p in kernel_pieces(GW_CFG, GW_E, j) if p.lo < s <= p.hi), None)
        want = fn.poly_eval(fn.poly_derivative(piece.coeffs), s) if piece else 0
        assert kernel_K_left_derivative(GW_CFG, GW_E, j, s) == want


class TestKernelL:
    def test_rs_indicator(self):
        assert kernel_L(RS_CFG, RS_E, 0, 1, 0, 0) == 1
        assert kernel_L(RS_CFG, RS_E, 0, 1, F(1, 2), F(1, 2)) == 1
        assert kernel_L(RS_CFG, RS_E, 0, 1, 1, F(1, 2)) == 0

    def test_gowers_segment(self):
        # x = 0 and x + y = 0 leave |z| <= 1/2 from the remaining two rows
        assert kernel_L(GW_CFG, GW_E, 0, 1, 0, 0) == 1

    def test_far_away(self):
        assert kernel_L(GW_CFG, GW_E, 0, 1, 10, -10) == 0

    def test_same_slot(self):
        with pytest.raises(ValueError):
            kernel_L(RS_CFG, RS_E, 1, 1, 0, 0)

    @pytest.mark.parametrize("i,j", [(0, 1), (0, 3), (1, 2)])
    @pytest.mark.parametrize("sign", [1, -1])
    def test_lipschitz_near_corners(self, i, j, sign):
        s0, t0 = GW_E[i] / 2, sign * GW_E[j] / 2
        base = kernel_L(GW_CFG, GW_E, i, j, s0, t0)
        ratios = []
        for k in range(4, 9):
            h = F(1, 2 ** k)
            ratios.append(max(abs(kernel_L(GW_CFG, GW_E, i, j, s0 + a, t0 + b) - base) / h
                              for a, b in ((h, 0), (-h, 0), (0, h), (0, -h))))
        assert max(ratios) <= 2 * max(ratios[0], 1)


class TestExpansionTerms:
    def test_first_order_zero_at_star(self):
        assert first_order_term(RS_CFG, RS_E, star_tuple(RS_E), 0) == 0

    def test_first_order_split(self):
        E = (SPLIT, centered(2), centered(2))
        assert first_order_term(RS_CFG, RS_E, E, 0) == -1

    def test_measure_mismatch(self):
        E = (centered(1), centered(2), centered(2))
        with pytest.raises(MeasureMismatchError, match="≠"):
            first_order_term(RS_CFG, RS_E, E, 0)

    @given(tuples_with_measures(GW_E), st.integers(0, 3))
    def test_first_order_nonpositive(self, E, j):
        assert first_order_term(GW_CFG, GW_E, E, j) <= 0

    def test_second_order_zero_when_unperturbed(self):
        E = (SPLIT, centered(2), centered(2))
        assert second_order_term(RS_CFG, RS_E, E, 0, 1) == 0

    @given(tuples_with_measures(GW_E, max_components=2))
    def test_second_order_symmetric(self, E):
        assert second_order_term(GW_CFG, GW_E, E, 0, 2) == second_order_term(GW_CFG, GW_E, E, 2, 0)

    @pytest.mark.parametrize("eta,sides", [(F(1, 4), ("right", "left")), (F(1, 8), ("right", "right")),
                                           (F(3, 10), ("left", "left"))])
    def test_second_order_matches_quadrature(self, eta, sides):
        E1 = shell_perturbation(2, eta, sides[0])
        E2 = shell_perturbation(2, eta, sides[1], gap=F(1, 10))
        E = (E1, E2, centered(2))
        exact = second_order_term(RS_CFG, RS_E, E, 0, 1)
        h = 1e-3
        x = np.arange(-2.5 + h / 2, 2.5, h)

        def f(U):
            ind = np.zeros_like(x, dtype=bool)
            for a, b in U.pairs():
                ind |= (x >= float(a)) & (x <= float(b))
            return ind.astype(float) - ((x >= -1) & (x <= 1)).astype(float)

        f1, f2 = f(E1), f(E2)
        # the pinned slice of the hexagon without slots 1, 2 is the indicator of |s + t| <= 1
        kern = (np.abs(x[:, None] + x[None, :]) <= 1).astype(float)
        quad = h * h * (f1 @ kern @ f2)
        assert abs(quad - float(exact)) < 5e-3

    def test_residual_zero_at_star(self):
        assert expansion_residual(RS_CFG, RS_E, star_tuple(RS_E)) == 0

    @given(st.lists(rationals(-1, 1), min_size=3, max_size=3))
    def test_residual_on_orbit(self, v):
        E = orbit_tuple(GW_CFG, star_tuple(GW_E), v)
        ex = expansion(GW_CFG, GW_E, E)
        assert ex.phi == ex.phi_star
        assert ex.residual == -(sum(ex.first) + sum(ex.second.values()))


class TestPerturbations:
    @given(st.integers(1, 15), st.sampled_from(["right", "left"]), st.integers(0, 4))
    def test_shell_preserves_measure(self, k, side, g):
        U = shell_perturbation(2, F(k, 8), side, gap=F(g, 8))
        assert measure(U) == 2

    def test_shell_shape(self):
        assert shell_perturbation(2, F(1, 4)).pairs() == [(-1, F(3, 4)), (1, F(5, 4))]
        assert shell_perturbation(2, F(1, 4), "left", gap=F(1, 4)).pairs() == [(F(-3, 2), F(-5, 4)),
                                                                             (F(-3, 4), 1)]

    def test_center_relocation(self):
        U = fn.relocation_perturbation(2, F(1, 2), "center", "right")
        assert U.pairs() == [(-1, F(-1, 4)), (F(1, 4), F(3, 2))]

    @pytest.mark.parametrize("eta", [0, 2, 3])
    def test_bad_block(self, eta):
        with pytest.raises(ValueError):
            shell_perturbation(2, eta)

    def test_bad_side(self):
        with pytest.raises(ValueError):
            shell_perturbation(2, F(1, 4), "up")


class TestPsi:
    @pytest.mark.parametrize("w", [0, F(1, 10), F(1, 5), F(1, 2), 1, F(-3, 4)])
    def test_rs_shift(self, w):
        assert psi(RS_CFG, RS_E, (0, 0, w)) == 3 - F(w) ** 2 == oracles.rs_psi_clipping(w)

    @given(st.lists(rationals(-1, 1), min_size=4, max_size=4))
    def test_even(self, v):
        assert psi(GW_CFG, GW_E, v) == psi(GW_CFG, GW_E, [-x for x in v])

    @given(st.lists(rationals(-1, 1), min_size=4, max_size=4), st.lists(rationals(-1, 1), min_size=3, max_size=3))
    def test_row_space_invariance(self, v, y):
        shifted = [vj + GW_CFG.apply(j, y) for j, vj in enumerate(v)]
        assert psi(GW_CFG, GW_E, shifted) == psi(GW_CFG, GW_E, v)

    @given(st.lists(rationals(-1, 1), min_size=5, max_size=5))
    def test_maximized_at_zero(self, v):
        e = (1, 1, 1, 1, 1)
        assert psi(builtin_config("random", n=5, m=3, seed=7)[0], e, v) <= psi(R3_CFG, e, [0] * 5)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            psi(RS_CFG, RS_E, (0, 0))

"""Fields, flows, curve geometry and the profile lemmas of the interval-expansion argument."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import fsolve

from dioecious.pde import bump_f0, bump_h, sys10_fixed_points
from dioecious.star import (ETA, L1, R1, R2, R3, R4, FlowError, FlowGeometry, NoIntersection,
                            check_assumption41, check_lemma44, check_lemma45, condition_star_check,
                            eta, flow_xi, heat_kernel, heat_step, phi_theta, plateau_floor,
                            plateau_gain, rate_condition, ratio_condition_exact, ray_hit,
                            region_of, scaled_margin_exact, separable_solution, theta_cap_for_slide,
                            trotter_run, rd_solution, upper_check, verify_domination, xi)

G = FlowGeometry()


class TestConstants:
    def test_ratio_condition_exact(self):
        ok, lhs, rhs = ratio_condition_exact()
        assert ok and lhs == 22
        assert rhs == Fraction(840000, 39601)
        assert float(rhs) == pytest.approx(21.21158556602106, abs=1e-12)

    def test_rate_condition(self):
        ok, margin = rate_condition()
        assert ok
        assert margin == pytest.approx(382.5 / (2 * np.sqrt(17)) - 44, abs=1e-12)
        assert margin == pytest.approx(2.38494, abs=1e-5)

    def test_s0_attained_by_first_term(self):
        a, b = G.s0_terms
        assert a < b
        assert G.s0 == pytest.approx(np.log(12 / 11) / 75, abs=1e-15)
        assert G.s0 == pytest.approx(1.160e-3, abs=1e-6)

    def test_plateau_floor(self):
        assert plateau_floor() == Fraction(1, 2) * Fraction(199, 200) ** 2
        assert float(bump_f0(5.0 + 1.0 / 200, 5.0, 1.0)) == pytest.approx(float(plateau_floor()), abs=1e-15)

    def test_extreme_curve_heights(self):
        assert G.gamma_theta(-0.54)[1, 1] == pytest.approx(0.23, abs=1e-15)
        assert G.gamma_theta(0.2)[1, 1] == pytest.approx(0.6, abs=1e-15)
        assert G.pi_v_A2 == pytest.approx(0.612)
        assert G.pi_v_A1 == pytest.approx(G.pi_v_A2_printed, abs=1e-12)

    def test_plateau_gain(self):
        assert plateau_gain(44.0, 2.0, 0.31) == pytest.approx(0.86484, abs=1e-5)


class TestEta:
    def test_no_pairs(self):
        a, b = eta(0.4, 0.0, 8800.0)
        assert a == pytest.approx(-0.4) and b == 0.0

    @given(st.floats(1.01, 1e4), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_decays_near_full(self, c, fu, fv):
        vmin = 1 - 1 / c
        v = vmin + fv * (1 - vmin) * 0.999 + 1e-9
        u = v + fu * (1 - v)
        assert eta(u, v, c)[1] <= -v + 1e-9

    def test_fixed_points_against_newton(self):
        c = 8800.0
        for P in sys10_fixed_points(c):
            root = fsolve(lambda y: np.array(eta(y[0], y[1], c)), np.array(P) * 1.001, xtol=1e-14)
            np.testing.assert_allclose(root, P, atol=1e-9)
            assert np.hypot(*eta(*P, c)) < 1e-9


class TestXi:
    def test_lower_piece(self):
        assert region_of(0.5, 0.2) == R1
        assert xi(0.5, 0.2) == pytest.approx((200.0, -0.4))

    def test_sliding_segment(self):
        assert region_of(1.1 * 0.4, 0.4) == L1
        assert xi(1.1 * 0.4, 0.4) == pytest.approx((33.0, 30.0))

    def test_trapezoid(self):
        assert region_of(0.7, 0.4) == R3
        assert xi(0.7, 0.4) == pytest.approx((0.0, 30.0))

    def test_other_pieces(self):
        assert region_of(0.5, 0.5) == R2
        assert region_of(0.95, 0.4) == R4
        assert xi(0.95, 0.4) == pytest.approx((-0.95, 30.0))
        assert region_of(0.9, 0.7) == ETA
        assert xi(0.9, 0.7) == pytest.approx(eta(0.9, 0.7, 8800.0))

    def test_vectorised(self):
        a, b = xi(np.array([0.5, 0.7]), np.array([0.2, 0.4]))
        np.testing.assert_allclose(a, [200.0, 0.0])
        np.testing.assert_allclose(b, [-0.4, 30.0])


class TestDomination:
    def test_passes_at_threshold_c(self):
        cert = verify_domination(8800.0, grid_n=400)
        assert cert.passed and cert.worst_margin >= -1e-12

    def test_fails_below(self):
        cert = verify_domination(3400.0, grid_n=200)
        assert not cert.passed
        assert cert.witness_region in ("R1", "R2") and cert.witness_component == 1

    @pytest.mark.parametrize("c", [8800.0, 12000.0, 3400.0])
    def test_scaled_margin_matches_symbolic(self, c):
        # eta1 - 400 u >= ((2c(1 - 0.9) + 1) 0.23 - 401) u with equality at (0.9, 0.23 * 0.9)
        exact = (0.046 * c + 0.23) - 401.0
        assert scaled_margin_exact(c) == pytest.approx(exact, abs=1e-9)
        assert verify_domination(c, grid_n=300).scaled_margin == pytest.approx(exact, abs=1e-6)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            verify_domination(0.5, 200)
        with pytest.raises(ValueError):
            verify_domination(8800.0, 50)


class TestGamma:
    def test_reference_curve(self):
        np.testing.assert_allclose(G.gamma_theta(0.0), [G.A, G.B, G.C, G.D])

    def test_dilation(self):
        V = G.gamma_theta(0.1)
        np.testing.assert_allclose(V[0], 1.1 * np.array(G.A))
        np.testing.assert_allclose(V[2], [0.9, 0.55])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            G.gamma_theta(0.3)

    def test_point_on_gamma_endpoints(self):
        np.testing.assert_allclose(G.point_on_gamma(0.0, 0.0), G.A)
        np.testing.assert_allclose(G.point_on_gamma(0.0, 1.0), G.D)


def _rk4(points, s, n_steps):
    y = np.array(points, dtype=float)
    h = s / n_steps

    def f(y):
        return np.stack(xi(y[:, 0], y[:, 1]), axis=1)

    for _ in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


class TestFlow:
    def test_lower_piece_closed_form(self):
        s = 5e-4
        got = flow_xi(s, (0.3, 0.1))
        np.testing.assert_allclose(got, [0.3 * np.exp(400 * s), 0.1 * np.exp(-2 * s)], rtol=1e-14)

    def test_trapezoid_closed_form(self):
        s = 5e-4
        got = flow_xi(s, (0.7, 0.4))
        np.testing.assert_allclose(got, [0.7, 0.4 * np.exp(75 * s)], rtol=1e-14)

    def test_zero_time(self):
        np.testing.assert_array_equal(flow_xi(0.0, (0.6, 0.3)), [0.6, 0.3])

    def test_slides_on_segment(self):
        path = flow_xi(G.s0, (0.5, 0.5), return_path=True)
        assert path.regions[:2] == ["R2", "L1"]

    def test_matches_rk4_on_smooth_pieces(self):
        rng = np.random.default_rng(7)
        starts = []
        while len(starts) < 100:
            u = rng.uniform(0.05, 1.0)
            v = rng.uniform(0.0, u)
            if region_of(u, v) == ETA:
                continue
            try:
                path = flow_xi(G.s0, (u, v), return_path=True)
            except FlowError:  # chatter on the lower edge, covered below
                continue
            regions = set(path.regions)
            # the field is smooth across R1/R2 and inside R3 or R4
            if regions <= {"R1", "R2"} or regions in ({"R3"}, {"R4"}):
                starts.append((u, v))
        starts = np.array(starts)
        exact = np.array([flow_xi(G.s0, p) for p in starts])
        approx = _rk4(starts, G.s0, int(round(G.s0 / 1e-6)))
        assert np.abs(exact - approx).max() < 1e-8

    def test_chatter_on_lower_edge_is_reported(self):
        # below v = 0.23 u the field is eta, which pushes up across the edge, while
        # inside R1 the ratio v/u falls: a sliding mode that the exact flow refuses
        with pytest.raises(FlowError):
            flow_xi(G.s0, (0.7869014057329339, 0.17721585438476065))

    def test_curve_points_stay_clear_of_lower_edge(self):
        # v/u >= 0.5 on every curve and R1 lowers it by at most e^{-402 s0}
        assert 0.5 * np.exp(-(G.F1 + 2) * G.s0) > G.eps_prime

    def test_rejects_points_outside_triangle(self):
        with pytest.raises(ValueError):
            flow_xi(1e-4, (0.3, 0.5))
        with pytest.raises(ValueError):
            flow_xi(-1.0, (0.3, 0.1))


class TestPhiTheta:
    def test_identity_at_zero(self):
        p = G.point_on_gamma(0.1, 0.3)
        np.testing.assert_allclose(phi_theta(0.0, 0.1, p), p, atol=1e-14)

    def test_flat_part_keeps_height(self):
        p = G.point_on_gamma(0.0, 0.8)
        assert p[1] == pytest.approx(0.5)
        assert phi_theta(5e-4, 0.0, p)[1] == pytest.approx(0.5, abs=1e-14)

    @settings(max_examples=100)
    @given(st.floats(-0.54, 0.2), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_residuals(self, theta, frac, sfrac):
        s = sfrac * G.s0
        p = G.point_on_gamma(theta, frac)
        q = phi_theta(s, theta, p)
        poly = G.gamma_theta(theta)
        dist = min(_segment_distance(q, a, b) for a, b in zip(poly[:-1], poly[1:]))
        assert dist < 1e-12
        f = flow_xi(s, p)
        assert abs(q[0] * f[1] - q[1] * f[0]) < 1e-12

    def test_ray_miss(self):
        with pytest.raises(NoIntersection):
            ray_hit((1.0, 2.0), G.gamma_theta(0.0))


def _segment_distance(q, a, b):
    e = b - a
    w = np.clip(np.dot(q - a, e) / np.dot(e, e), 0.0, 1.0)
    return float(np.linalg.norm(q - (a + w * e)))


class TestAssumption:
    def test_zero_time_is_equality(self):
        cert = check_assumption41([0.0, 0.1], [0.3, 1.0], [0.0], frac_samples=[0.0, 0.5, 1.0])
        assert cert.passed and cert.worst_margin == pytest.approx(0.0, abs=1e-15)

    def test_upper_branch_on_first_segment(self):
        # alpha = 1 and points between A and B
        seg = np.linalg.norm(np.subtract(G.A, G.B))
        total = seg + np.linalg.norm(np.subtract(G.B, G.D))
        fracs = np.linspace(0.0, seg / total, 6)
        cert = check_assumption41([0.0], [1.0], np.linspace(0, G.s0, 6), frac_samples=fracs)
        assert cert.passed and cert.n_upper == cert.n_checks

    def test_small_alpha_lower_piece(self):
        cert = check_assumption41([0.0, 0.1], [0.05, 0.2], np.linspace(0, G.s0, 5),
                                  frac_samples=np.linspace(0, 1, 5))
        assert cert.passed and cert.n_upper == 0
        p = 0.05 * G.point_on_gamma(0.0, 0.5)
        assert region_of(*p) == R1

    def test_passes_below_slide_cap(self):
        cap = theta_cap_for_slide()
        assert cap == pytest.approx(0.6 * np.exp(-75 * G.s0) / 0.51 - 1, abs=1e-15)
        cert = check_assumption41(np.linspace(0, cap, 5), np.linspace(0.2, 1, 5),
                                  np.linspace(0, G.s0, 5), frac_samples=np.linspace(0, 1, 5))
        assert cert.passed

    def test_xi_flow_breaks_scaling_at_top_of_range(self):
        """A_0.2 sits above v = 0.6, where the field is eta; a scaled copy in R2 moves far slower."""
        A = (1.2 * 0.51, 1.2 * 0.51)
        assert region_of(*A) == ETA
        assert region_of(0.95 * A[0], 0.95 * A[1]) == R2
        cert = check_assumption41([0.2], [0.95], [G.s0 / 10], frac_samples=[0.0])
        assert not cert.passed and cert.witness["upper_branch"]

    def test_eta_flow_variant_passes(self):
        cert = check_assumption41([0.0, 0.2], [0.3, 0.95], np.linspace(0, G.s0, 4),
                                  frac_samples=[0.0, 0.5, 1.0], flow="eta")
        assert cert.passed

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            check_assumption41([0.5], [1.0], [0.0])
        with pytest.raises(ValueError):
            check_assumption41([0.0], [0.0], [0.0])
        with pytest.raises(ValueError):
            check_assumption41([0.0], [1.0], [1.0])


class TestProfiles:
    def test_h_anchor_values(self):
        assert bump_h(0.0, 0.7) == 0.5
        assert bump_h(-0.7, 0.7) == 0.0
        assert bump_h(0.7, 0.7) == 1.0

    def test_f0_smooth_and_bounded(self):
        L, l, dx = 5.0, 1.0, 1e-3
        x = np.arange(-8, 8 + dx / 2, dx)
        f = bump_f0(x, L, l)
        assert f.min() >= 0.0 and f.max() <= 1.0
        slope = np.diff(f) / dx
        assert np.abs(np.diff(slope)).max() < 5 * dx / l ** 2  # no jump in f0'
        second = np.diff(f, 2) / dx ** 2
        assert np.abs(second).max() <= 1 / l ** 2 + 1e-6

    def test_f0_validation(self):
        with pytest.raises(ValueError):
            bump_f0(0.0, 1.0, 1.0)


class TestHeat:
    def test_constant_unchanged(self):
        f = np.full(400, 0.37)
        assert np.abs(heat_step(f, 1e-3, 0.01) - f).max() < 1e-12

    def test_mass_and_positivity(self):
        x = np.arange(-10, 10, 0.01)
        f = bump_f0(x, 3.0, 0.5)
        g = heat_step(f, 0.05, 0.01)
        assert abs(g.sum() - f.sum()) < 1e-12 * f.sum()
        assert g.min() >= 0.0

    def test_kernel_normalized(self):
        k = heat_kernel(1e-3, 1e-3)
        assert k.sum() == pytest.approx(1.0, abs=1e-15)
        assert len(k) % 2 == 1

    def test_lower_bound(self):
        L, l, dx = 5.0, 1.0, 2e-3
        x = np.arange(-8, 8, dx)
        f = bump_f0(x, L, l)
        for s in (1e-4, 1e-3, 1e-2):
            assert np.all(heat_step(f, s, dx) >= f - 2 * s / l ** 2 - 1e-12)

    def test_unresolved_kernel(self):
        with pytest.raises(ValueError):
            heat_step(np.ones(10), 1e-6, 0.01)


class TestLemmas:
    def test_shoulder_lift(self):
        chk = check_lemma44(L=5.0, l=2.0)
        assert chk.passed and np.all(chk.worst_ratio >= 1.0)

    def test_dominance_trivial_deltas(self):
        assert check_lemma45(0.5, delta1=0.0, delta2=0.0).passed

    def test_dominance_paper_gain(self):
        m = plateau_gain(44.0, 2.0, 0.31)
        assert check_lemma45(m, delta1=0.1, delta2=0.3).passed

    def test_dominance_absurd_delta2_fails(self):
        s = 1e-3
        assert not check_lemma45(0.5, [s], delta1=0.0, delta2=0.5 * s * 1e6).passed

    def test_dominance_needs_positive_m(self):
        with pytest.raises(ValueError):
            check_lemma45(0.0)


class TestTrotter:
    def test_separable_case(self):
        a0, b0, t = 0.8, 0.6, 1.0
        res = trotter_run(a0, b0, 0.0, t, 8, dx=0.05)
        f0 = bump_f0(res.x, 5.0, 1.0)
        u, v = separable_solution(a0, b0, t, heat_step(f0, t, 0.05))
        assert np.abs(res.u - u).max() < 1e-6
        assert np.abs(res.v - v).max() < 1e-6

    @pytest.mark.slow
    def test_self_convergence_and_cross_solver(self):
        c, t = 10.0, 1.0
        runs = {n: trotter_run(0.8, 0.6, c, t, n, dx=0.05) for n in (1, 32, 64, 128, 256)}
        d = {n: np.abs(runs[n].v - runs[2 * n].v).max() for n in (32, 64, 128)}
        assert np.abs(runs[1].v - runs[64].v).max() > 10 * d[64]
        assert d[64] < d[32] and d[128] < d[64]
        u_fd, v_fd = rd_solution(0.8, 0.6, c, t, runs[256].x)
        assert np.abs(runs[256].v - v_fd).max() < 2e-3
        assert np.abs(runs[256].u - u_fd).max() < 2e-3

    def test_validation(self):
        with pytest.raises(ValueError):
            trotter_run(0.5, 0.5, 1.0, 1.0, 0)


class TestConditionStar:
    def test_upper_check(self):
        chk = upper_check(8800.0, 1 - 0.5 / 8800)
        assert chk.passed and chk.invariant and np.isfinite(chk.T)
        assert not upper_check(10.0, 0.5).invariant

    def test_small_c_fails(self):
        cert = condition_star_check(1.0)
        assert not cert.passed and cert.status.startswith("fail")

    def test_level_validation(self):
        with pytest.raises(ValueError):
            condition_star_check(8800.0, D1=0.6, d1=0.55)

    @pytest.mark.slow
    def test_passes_at_threshold_c(self):
        cert = condition_star_check(8800.0)
        assert cert.passed, cert.status
        assert cert.min_v_lower > cert.d1 and cert.max_v_lower < cert.d2

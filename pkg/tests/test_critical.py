"""Survival classification of plateau bumps and bisection for the critical rate."""
import numpy as np
import pytest

from dioecious.critical import (BracketInvalid, Verdict, bisect_lambda_c, bump_field,
                                classify_survival, front_position, plateau_state, verdicts_monotone)
from dioecious.pde import ReactionSpec, System, sys10_fixed_points, sys11_roots


def sys11(coefficient=None):
    return ReactionSpec(System.SYS11, 1.0, dim_d=2, coefficient=coefficient)


class TestClassify:
    def test_bistable_above_threshold_survives(self):
        v = classify_survival(sys11(), lam=6.0 / 4)
        assert v.verdict is Verdict.SURVIVES
        half = v.front_positions[v.times >= v.t_used / 2]
        assert np.all(np.diff(half) > 0)

    def test_bistable_below_threshold_dies(self):
        v = classify_survival(sys11(), lam=4.2 / 4)
        assert v.verdict is Verdict.DIES
        assert v.sup_norms[-1] < 0.02

    def test_contact_subcritical_dies(self):
        v = classify_survival(ReactionSpec(System.CONTACT, 0.5 / 4, dim_d=2))
        assert v.verdict is Verdict.DIES

    def test_contact_supercritical_survives(self):
        assert classify_survival(ReactionSpec(System.CONTACT, 2.0 / 4, dim_d=2)).survives

    def test_short_horizon_is_undecided(self):
        v = classify_survival(sys11(), lam=4.6 / 4, horizon=2.0, extend_cap=1.0)
        assert v.verdict is Verdict.UNDECIDED

    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            bump_field(sys11(), geometry="spherical")


class TestInitialData:
    def test_sys11_plateau(self):
        amp, thr = plateau_state(sys11().with_lam(1.5))
        r1, r0 = sys11_roots(6.0)
        assert amp[0] == pytest.approx(0.9 * r0)
        assert thr == pytest.approx(0.5 * (r0 + r1))

    def test_sys10_plateau(self):
        spec = ReactionSpec(System.SYS10, 2.0, dim_d=2)
        amp, thr = plateau_state(spec)
        (_, vm), (up, vp) = sys10_fixed_points(8.0)
        np.testing.assert_allclose(amp, [0.9 * up, 0.9 * vp])
        assert thr == pytest.approx(0.5 * (vm + vp))

    def test_four_state_bump_sums_to_one(self):
        fld, _ = bump_field(ReactionSpec(System.SYS12, 0.4, variant="with_deaths"))
        np.testing.assert_allclose(fld.data.sum(axis=0), 1.0, atol=1e-12)

    def test_front_position_interpolates(self):
        x = np.arange(5.0)
        w = np.array([1.0, 1.0, 0.8, 0.2, 0.0])
        assert front_position(x, w, 0.5) == pytest.approx(2.5)
        assert np.isnan(front_position(x, np.zeros(5), 0.5))


class TestBisection:
    def test_contact_bracket(self):
        b = bisect_lambda_c(ReactionSpec(System.CONTACT, 1.0, dim_d=2), 0.5 / 4, 2.0 / 4, 0.02)
        assert b.width <= 0.02
        assert b.lo_verdict.verdict is Verdict.DIES and b.hi_verdict.survives
        assert b.lo < 0.25 + 0.02 and b.hi > 0.25 - 0.02
        assert verdicts_monotone(b)

    def test_width_halves_every_iteration(self):
        b = bisect_lambda_c(sys11(), 4.2 / 4, 5.0 / 4, 0.01)
        widths = [r.hi - r.lo for r in b.transcript if r.iteration > 0]
        assert widths[0] == pytest.approx(0.2)
        np.testing.assert_allclose(np.diff(np.log2(widths)), -1.0)
        assert abs(b.midpoint - 1.125) < 0.01
        assert verdicts_monotone(b)

    def test_invalid_bracket(self):
        with pytest.raises(BracketInvalid):
            bisect_lambda_c(sys11(), 5.0 / 4, 6.0 / 4, 0.01)
        with pytest.raises(BracketInvalid):
            bisect_lambda_c(sys11(), 1.2, 1.1, 0.01)

    @pytest.mark.slow
    def test_grid_robustness(self):
        spec = sys11(coefficient=20.0)
        coarse = bisect_lambda_c(spec, 0.215, 0.235, 1e-3, dx=0.1)
        fine = bisect_lambda_c(spec, 0.215, 0.235, 1e-3, dx=0.05)
        assert abs(coarse.midpoint - fine.midpoint) < 0.005

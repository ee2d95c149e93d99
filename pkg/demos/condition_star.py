"""
Certificates for the interval-expansion argument
================================================

The lily-pad mean-field system in the (u, v) triangle is compared with a
piecewise-linear field xi.  This script checks the componentwise
domination xi <= eta, evaluates the scaling assumption on the flow of the
curves gamma_theta, and runs the interval-expansion check on a coarse grid.

    python3 demos/condition_star.py
"""
import numpy as np

from dioecious.star import (FlowGeometry, check_assumption41, condition_star_check, default_samples,
                            plateau_gain, rate_condition, ratio_condition_exact, theta_cap_for_slide,
                            verify_domination)

geom = FlowGeometry()
ok, lhs, rhs = ratio_condition_exact(int(geom.K1), int(geom.K2))
print(f"K1 / K2 ratio: {lhs} > {rhs} -> {ok}")
ok, margin = rate_condition(geom.F1, geom.F2, geom.K1)
print(f"rate bound margin {margin:.5f} -> {ok}")
print(f"plateau gain m = {plateau_gain(geom.K1, geom.K2, 0.31):.5f}")

# xi <= eta needs a large coefficient; at c = 3400 it fails near the wall.
for c in (3400.0, 8800.0):
    dom = verify_domination(c, 1000, FlowGeometry(c=c))
    print(f"c = {c:g}: xi <= eta {'holds' if dom.passed else 'fails'}, worst margin {dom.worst_margin:.3g}"
          f" in {dom.witness_region}")

# The scaling assumption under the xi flow holds only while curve points
# cannot slide up the top edge of L1; the eta flow does not have this issue.
cap = theta_cap_for_slide(geom)
th, al, ss, fr = default_samples(12, geom)
for label, thetas, flow in (("xi, full range", th, "xi"), (f"xi, theta <= {cap:.4f}", th[th <= cap], "xi"),
                            ("eta, full range", th, "eta")):
    cert = check_assumption41(thetas, al, ss, geom, fr, flow=flow)
    print(f"assumption on {label}: {'pass' if cert.passed else 'FAIL'},"
          f" {cert.n_checks} checks, worst margin {cert.worst_margin:.4f}")

star = condition_star_check(8800.0)
print(f"interval expansion at c = 8800: {star.status}; T = {star.T:.4g}, min v on [-3M, 3M] = {star.min_v_lower:.4f}")
reach = star.reach[np.isfinite(star.reach)]
if reach.size:
    print(f"front of {{v > d1}} moved from {reach[0]:.3f} to {reach[-1]:.3f}")

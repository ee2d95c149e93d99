"""Sampled certificate that the ``xi``-flow pushes scaled curve points past the curve.

For ``theta in [0, theta0]``, a point ``(a0, b0)`` of ``gamma_theta``, a
scale ``alpha in (0, 1]`` and ``s in [0, s0]`` the flow of
``alpha (a0, b0)`` must dominate ``(1 + K1 s) alpha (a_s, b_s)`` when
``alpha b0 >= eps`` and ``(1 - K2 s) alpha (a_s, b_s)`` otherwise, where
``(a_s, b_s) = phi_theta(s, (a0, b0))``.

The left-hand side uses the ``xi``-flow by default.  ``flow="eta"`` uses
the reaction flow itself, which dominates it; the projection ``phi_theta``
always uses ``xi``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .fields import eta
from .flow import flow_xi, ray_hit
from .geometry import FlowGeometry


@dataclass
class Assumption41Certificate:
    passed: bool
    n_checks: int
    n_upper: int  # checks in the ``alpha b0 >= eps`` branch
    worst_margin: float
    witness: dict
    tol: float
    flow: str = "xi"
    theta_max: float = np.nan


def default_samples(n: int = 20, geom: FlowGeometry = FlowGeometry()):
    """``n`` values each of ``theta``, ``alpha``, ``s`` and curve fractions."""
    return (np.linspace(0.0, geom.theta0, n), np.linspace(1.0 / n, 1.0, n),
            np.linspace(0.0, geom.s0, n), np.linspace(0.0, 1.0, n))


def eta_flow_batch(points: np.ndarray, s_values, c: float, rtol: float = 1e-10) -> np.ndarray:
    """``eta``-flow of many points at the sorted times ``s_values``; shape ``(len(s), n, 2)``."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    s_values = np.asarray(s_values, dtype=float)

    def rhs(_, y):
        a, b = eta(y[:n], y[n:], c)
        return np.concatenate([a, b])

    if s_values.max() == 0:
        return np.broadcast_to(pts, (len(s_values), n, 2)).copy()
    sol = solve_ivp(rhs, (0.0, float(s_values.max())), np.concatenate([pts[:, 0], pts[:, 1]]),
                    method="DOP853", rtol=rtol, atol=1e-13, t_eval=s_values)
    if not sol.success:
        raise RuntimeError(sol.message)
    return np.stack([sol.y[:n].T, sol.y[n:].T], axis=-1)


def check_assumption41(theta_samples=None, alpha_samples=None, s_samples=None,
                       geom: FlowGeometry = FlowGeometry(), frac_samples=None,
                       tol: float = 1e-12, flow: str = "xi") -> Assumption41Certificate:
    """Evaluate the two-branch inequality on every sample combination.

    The margin of a check is the smaller componentwise difference between
    the flowed point and the target; the certificate passes when every
    margin is at least ``-tol``.
    """
    th_d, al_d, s_d, fr_d = default_samples(20, geom)
    thetas = th_d if theta_samples is None else np.asarray(theta_samples, float)
    alphas = al_d if alpha_samples is None else np.asarray(alpha_samples, float)
    ss = np.sort(s_d if s_samples is None else np.asarray(s_samples, float))
    fracs = fr_d if frac_samples is None else np.asarray(frac_samples, float)
    if thetas.min() < 0 or thetas.max() > geom.theta0 + 1e-15:
        raise ValueError("theta samples must lie in [0, theta0]")
    if alphas.min() <= 0 or alphas.max() > 1:
        raise ValueError("alpha samples must lie in (0, 1]")
    if ss.min() < 0 or ss.max() > geom.s0 * (1 + 1e-12):
        raise ValueError("s samples must lie in [0, s0]")
    if flow not in ("xi", "eta"):
        raise ValueError("flow must be 'xi' or 'eta'")

    worst, witness, n, n_up = np.inf, {}, 0, 0
    for theta in thetas:
        poly = geom.gamma_theta(theta)
        for frac in fracs:
            p0 = geom.point_on_gamma(theta, frac)
            if flow == "eta":
                flowed = eta_flow_batch(alphas[:, None] * p0, ss, geom.c)
            for j, s in enumerate(ss):
                target = ray_hit(flow_xi(s, p0, geom), poly)
                for i, alpha in enumerate(alphas):
                    upper = alpha * p0[1] >= geom.eps
                    factor = 1.0 + geom.K1 * s if upper else 1.0 - geom.K2 * s
                    got = flow_xi(s, alpha * p0, geom) if flow == "xi" else flowed[j, i]
                    margin = float(np.min(got - factor * alpha * target))
                    n += 1
                    n_up += int(upper)
                    if margin < worst:
                        worst = margin
                        witness = {"theta": float(theta), "frac": float(frac), "s": float(s),
                                   "alpha": float(alpha), "upper_branch": bool(upper),
                                   "point": tuple(map(float, alpha * p0)),
                                   "flowed": tuple(map(float, got)),
                                   "target": tuple(map(float, factor * alpha * target))}
    return Assumption41Certificate(worst >= -tol, n, n_up, float(worst), witness, tol, flow,
                                   float(thetas.max()))


def theta_cap_for_slide(geom: FlowGeometry = FlowGeometry()) -> float:
    """Largest ``theta`` with every point of ``gamma_theta`` at ``v <= 0.6 e^{-F2 s0}``.

    Below this the ``xi``-trajectories of curve points cannot reach the top
    of ``L1`` within ``s0``, so scaling by ``alpha`` commutes with the flow
    up to the pieces' own exits.
    """
    return float(geom.v_top * np.exp(-geom.F2 * geom.s0) / geom.A[1] - 1.0)

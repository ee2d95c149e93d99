"""Exact flow of the piecewise field ``xi`` and the ray projection onto ``gamma_theta``.

On each linear piece the flow is a product of exponentials, so the time at
which a trajectory leaves the piece has a closed form.  The point is
snapped onto the boundary it reaches and the next piece takes over.  On
``L1`` the field is tangent to the segment and trajectories slide along it
until ``v = 0.6``.  Off the pieces the field is ``eta``, which is
integrated numerically until the trajectory enters a piece again.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .fields import ETA, L1, R1, R2, R3, R4, REGION_NAMES, eta, region_of
from .geometry import FlowGeometry

_INF = float("inf")


class FlowError(RuntimeError):
    """The trajectory kept switching between pieces (a sliding mode off ``L1``)."""


class NoIntersection(ValueError):
    """The ray from the origin misses ``gamma_theta``."""


@dataclass
class FlowPath:
    point: np.ndarray
    legs: list = field(default_factory=list)  # (region name, t_start, t_end)

    @property
    def regions(self) -> list[str]:
        return [leg[0] for leg in self.legs]


def _log_ratio(a: float, b: float) -> float:
    return float(np.log(a / b)) if a > 0 and b > 0 else _INF


def _linear_leg(mode: int, u: float, v: float, g: FlowGeometry):
    """Closed-form flow on a piece: ``(exit_time, next_mode, move(t), exit_point)``."""
    lo, top, k, wall = g.eps_prime, g.v_top, g.slope, g.u_wall
    if mode in (R1, R2):
        rate = g.F1 + 2.0

        def move(t):
            return u * np.exp(g.F1 * t), v * np.exp(-2.0 * t)

        cands = []
        t_line = _log_ratio(k * v, u) / rate if v > lo else _INF
        if t_line < _INF and v * np.exp(-2.0 * t_line) > lo:
            vt = v * np.exp(-2.0 * t_line)
            cands.append((t_line, L1, (k * vt, vt)))
        t_low = _log_ratio(v, lo * u) / rate
        if t_low < _INF:
            ut = u * np.exp(g.F1 * t_low)
            cands.append((t_low, ETA, (ut, lo * ut)))
        t_wall = _log_ratio(wall, u) / g.F1
        if t_wall < _INF:
            cands.append((t_wall, ETA, (wall, v * np.exp(-2.0 * t_wall))))
        t, nxt, pt = min(cands, key=lambda c: c[0])
        return max(t, 0.0), nxt, move, pt
    if mode == L1:
        def move(t):
            vt = v * np.exp(g.F2 * t)
            return k * vt, vt

        return max(_log_ratio(top, v) / g.F2, 0.0), ETA, move, (k * top, top)
    if mode == R3:
        def move(t):
            return u, v * np.exp(g.F2 * t)

        if u <= k * top:
            return max(_log_ratio(u, k * v) / g.F2, 0.0), L1, move, (u, u / k)
        return max(_log_ratio(top, v) / g.F2, 0.0), ETA, move, (u, top)
    if mode == R4:
        def move(t):
            return u * np.exp(-t), v * np.exp(g.F2 * t)

        t_wall = _log_ratio(u, wall)
        t_top = _log_ratio(top, v) / g.F2
        if t_wall < t_top:
            return max(t_wall, 0.0), R3, move, (wall, v * np.exp(g.F2 * t_wall))
        return max(t_top, 0.0), ETA, move, (u * np.exp(-t_top), top)
    raise ValueError(f"no closed form for region {mode}")


def _eta_leg(t0: float, s: float, u: float, v: float, g: FlowGeometry, rtol: float):
    """Integrate ``eta`` from ``t0``; stop at the first entry into a linear piece."""
    c = g.c

    def rhs(_, y):
        a, b = eta(y[0], y[1], c)
        return [float(a), float(b)]

    sol = solve_ivp(rhs, (t0, s), [u, v], method="DOP853", rtol=rtol, atol=1e-14,
                    dense_output=True)
    if not sol.success:
        raise FlowError(sol.message)
    knots = sol.t
    ts = np.unique(np.concatenate([np.linspace(a, b, 17) for a, b in zip(knots[:-1], knots[1:])]))
    ts = ts[ts > t0]
    ys = sol.sol(ts)
    codes = np.asarray(region_of(ys[0], ys[1], g))
    hit = np.flatnonzero(codes != ETA)
    if hit.size == 0:
        return s, ETA, (float(sol.y[0, -1]), float(sol.y[1, -1]))
    j = hit[0]
    a, b = (t0 if j == 0 else ts[j - 1]), ts[j]
    for _ in range(80):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        y = sol.sol(mid)
        if region_of(y[0], y[1], g) == ETA:
            a = mid
        else:
            b = mid
    y = sol.sol(b)
    return b, int(region_of(y[0], y[1], g)), (float(y[0]), float(y[1]))


def flow_xi(s: float, point, geom: FlowGeometry = FlowGeometry(), return_path: bool = False,
            max_legs: int = 64, rtol: float = 1e-12):
    """Position at time ``s`` of the ``xi``-trajectory started at ``point``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    u, v = (float(p) for p in point)
    if not (-1e-12 <= v <= u + 1e-12 and u <= 1.0 + 1e-12):
        raise ValueError(f"({u}, {v}) lies outside the triangle 0 <= v <= u <= 1")
    g = geom
    mode = int(region_of(u, v, g))
    t = 0.0
    path = FlowPath(np.empty(2))
    for _ in range(max_legs):
        if t >= s:
            break
        if mode == ETA:
            t_new, nxt, (u, v) = _eta_leg(t, s, u, v, g, rtol)
            path.legs.append((REGION_NAMES[ETA], t, t_new))
            t, mode = t_new, nxt
            continue
        dt_exit, nxt, move, pt = _linear_leg(mode, u, v, g)
        if t + dt_exit >= s:
            u, v = move(s - t)
            path.legs.append((REGION_NAMES[mode], t, s))
            t = s
            break
        path.legs.append((REGION_NAMES[mode], t, t + dt_exit))
        t += dt_exit
        u, v = pt
        mode = nxt
    else:
        raise FlowError(f"more than {max_legs} region changes before s = {s}")
    path.point = np.array([u, v], dtype=float)
    return path if return_path else path.point


# -- projection onto gamma_theta ------------------------------------------------------------

def ray_hit(direction, polyline: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Intersection of the ray ``{t d : t > 0}`` with a polyline."""
    d = np.asarray(direction, dtype=float)
    for q0, q1 in zip(polyline[:-1], polyline[1:]):
        e = q1 - q0
        det = -d[0] * e[1] + d[1] * e[0]
        if abs(det) < 1e-300:
            continue
        # solve t d - w e = q0
        t = (-q0[0] * e[1] + q0[1] * e[0]) / det
        w = (d[0] * q0[1] - d[1] * q0[0]) / det
        if t > 0 and -tol <= w <= 1.0 + tol:
            w = min(max(w, 0.0), 1.0)
            return q0 + w * e
    raise NoIntersection(f"ray through {tuple(d)} misses the curve")


def phi_theta(s: float, theta: float, point, geom: FlowGeometry = FlowGeometry()) -> np.ndarray:
    """Where the ray from the origin through the flowed point meets ``gamma_theta``."""
    return ray_hit(flow_xi(s, point, geom), geom.gamma_theta(theta))

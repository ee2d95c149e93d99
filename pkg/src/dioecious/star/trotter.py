"""Operator splitting for the lily-pad system and the end-to-end interval check.

``trotter_run`` alternates the exact heat semigroup with the pointwise
reaction flow.  ``condition_star_check`` runs the finite-difference solver
from the smallest admissible bump and from the all-ones state and checks
that the bump's ``v`` lands in ``(d1, d2)`` on three times its width.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..pde.profiles import bump_f0
from ..pde.solver import PdeField, evolve
from ..pde.systems import ReactionSpec, System
from .fields import eta
from .lemmas import heat_step


def eta_flow_field(u: np.ndarray, v: np.ndarray, c: float, t: float, rtol: float = 1e-9):
    """Flow every grid point along ``eta`` for time ``t`` (adaptive RK45)."""
    n = u.size

    def rhs(_, y):
        a, b = eta(y[:n], y[n:], c)
        return np.concatenate([a, b])

    sol = solve_ivp(rhs, (0.0, t), np.concatenate([u, v]), method="RK45", rtol=rtol, atol=1e-12)
    if not sol.success:
        raise RuntimeError(sol.message)
    y = sol.y[:, -1]
    return y[:n], y[n:]


@dataclass
class TrotterResult:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t: float
    n: int


def trotter_run(a0: float, b0: float, c: float, t: float, n: int, L: float = 5.0, l: float = 1.0,
                dx: float = 0.05, half_width: float | None = None, rtol: float = 1e-9) -> TrotterResult:
    """``(e^{(t/n) Delta} F_eta^{t/n})^n`` applied to ``(a0 f0, b0 f0)`` on a symmetric grid."""
    if n < 1:
        raise ValueError("n must be at least 1")
    half_width = L + l + 10.0 + 6.0 * np.sqrt(t) if half_width is None else half_width
    m = int(np.ceil(half_width / dx))
    x = dx * np.arange(-m, m + 1)
    f0 = bump_f0(x, L, l)
    u, v = a0 * f0, b0 * f0
    h = t / n
    for _ in range(n):
        u, v = eta_flow_field(u, v, c, h, rtol)
        u, v = heat_step(u, h, dx), heat_step(v, h, dx)
    return TrotterResult(x, u, v, t, n)


def separable_solution(a0: float, b0: float, t: float, heat_f0: np.ndarray):
    """Exact solution when ``c = 0``: linear decay composed with the heat flow of ``f0``."""
    e1, e2 = np.exp(-t), np.exp(-2.0 * t)
    return (a0 * e1 + b0 * (e1 - e2)) * heat_f0, b0 * e2 * heat_f0


def rd_solution(a0: float, b0: float, c: float, t: float, x: np.ndarray, L: float = 5.0,
                l: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """The same initial value problem through the finite-difference solver (d = 1)."""
    spec = ReactionSpec(System.SYS10, c / 2.0, dim_d=1)
    f0 = bump_f0(x, L, l)
    fld = PdeField(("u", "v"), np.stack([a0 * f0, b0 * f0]), float(x[1] - x[0]), "neumann", float(x[0]))
    evolve(fld, spec, t)
    return fld.data[0], fld.data[1]


# -- interval-expansion check ------------------------------------------------------------------

@dataclass
class UpperCheck:
    passed: bool
    d2: float
    T: float  # first time the all-ones solution has v < d2
    invariant: bool  # eta2(u, d2) < 0 for every u, so v < d2 persists
    v_at_T: float


def upper_check(c: float, d2: float, t_max: float = 50.0) -> UpperCheck:
    """From ``u = v = 1`` the ODE reaches ``v < d2`` and cannot climb back."""
    if not 0 < d2 < 1:
        raise ValueError("d2 must lie in (0, 1)")

    def rhs(_, y):
        a, b = eta(y[0], y[1], c)
        return [a, b]

    def below(_, y):
        return y[1] - d2

    below.terminal = True
    below.direction = -1
    sol = solve_ivp(rhs, (0.0, t_max), [1.0, 1.0], method="LSODA", rtol=1e-10, atol=1e-13,
                    events=below)
    # eta2(u, d2) = (c(u - d2) - 2) d2 is largest at u = 1
    invariant = bool((c * (1.0 - d2) - 2.0) * d2 < 0.0)
    if sol.t_events[0].size == 0:
        return UpperCheck(False, d2, np.inf, invariant, float(sol.y[1, -1]))
    T = float(sol.t_events[0][0])
    return UpperCheck(invariant, d2, T, invariant, float(sol.y_events[0][0][1]))


@dataclass
class StarCertificate:
    passed: bool
    status: str  # "pass", "fail: ...", "inconclusive: ..."
    c: float
    D1: float
    d1: float
    d2: float
    D2: float
    M: float
    T: float
    min_v_lower: float  # min of the lower solution's v on [-3M, 3M] at T
    max_v_lower: float  # max of the lower solution's v at T (below d2 by comparison)
    upper: UpperCheck
    times: np.ndarray
    reach: np.ndarray  # rightmost x with v > d1, per sample time (nan if none)


def default_upper_levels(c: float) -> tuple[float, float]:
    """``(d2, D2)`` with ``1 - 1/c < d2 < D2 < 1``."""
    return 1.0 - min(0.5 / c, 0.2), 1.0 - min(0.25 / c, 0.1)


def condition_star_check(c: float, D1: float = 0.5, d1: float = 0.55, d2: float | None = None,
                         D2: float | None = None, M: float = 0.2, l: float = 0.1,
                         T: float | None = None, dx: float | None = None, t_max: float = 5.0,
                         sample_dt: float | None = None, extinction: float = 1e-3) -> StarCertificate:
    """Interval expansion for the lily-pad system at coefficient ``c`` (one space dimension).

    The lower solution starts from ``u = v = D1 f0`` with plateau
    ``[-M, M]`` and ramps of half-width ``l``, the smallest data allowed on
    ``[-M, M]``.  Without ``T`` the run stops once ``v > d1`` on
    ``[-3M, 3M]``; a vanishing bump is a definite failure.  The upper
    half compares with the constant solution from ``u = v = 1``.  The
    default grid spacing ``min(0.01, 0.2 / sqrt(c))`` keeps several cells
    across a front of width about ``c^{-1/2}``.
    """
    dd2, dD2 = default_upper_levels(c)
    d2 = dd2 if d2 is None else d2
    D2 = dD2 if D2 is None else D2
    if not 0 < D1 < d1 < d2 < D2 < 1:
        raise ValueError("need 0 < D1 < d1 < d2 < D2 < 1")
    dx = min(0.01, 0.2 / np.sqrt(c)) if dx is None else dx
    L = M + l
    half = 6.0 * M + 5.0 * l
    x = dx * np.arange(int(np.ceil(half / dx)) + 1)
    f0 = bump_f0(x, L, l)
    spec = ReactionSpec(System.SYS10, c / 2.0, dim_d=1)
    fld = PdeField(("u", "v"), np.stack([D1 * f0, D1 * f0]), dx, "neumann", 0.0)
    zone = x <= 3.0 * M + 1e-12
    upper = upper_check(c, d2)
    sample_dt = (M * M / 50.0) if sample_dt is None else sample_dt
    t_end = t_max if T is None else T
    times, reach = [0.0], [np.nan]
    status = None
    t = 0.0
    while t < t_end - 1e-15:
        t = min(t + sample_dt, t_end)
        evolve(fld, spec, t)
        v = fld.data[1]
        above = np.flatnonzero(v > d1)
        times.append(t)
        reach.append(float(x[above[-1]]) if above.size else np.nan)
        if v.max() < extinction:
            status = "fail: the bump died out"
            break
        if T is None and v[zone].min() > d1 and t >= upper.T:
            break
    v = fld.data[1]
    min_v = float(v[zone].min())
    max_v = float(v.max())
    if status is None:
        if max_v >= d2:
            status = "fail: the lower solution exceeded d2"
        elif min_v > d1 and upper.passed and fld.time >= upper.T:
            status = "pass"
        elif min_v > d1 and upper.passed:
            status = f"inconclusive: upper bound only holds from t = {upper.T:.4g}"
        elif not upper.passed:
            status = "fail: upper bound"
        else:
            status = f"inconclusive: v > d1 has not reached 3M by t = {fld.time:.4g}"
    return StarCertificate(status == "pass", status, c, D1, d1, d2, D2, M, fld.time, min_v, max_v, upper,
                           np.array(times), np.array(reach))

"""Explicit finite-difference solver for the reaction-diffusion systems.

Grids are vertex centred: ``x_i = x0 + i*dx``.  The Neumann boundary
mirrors across the end vertices (ghost ``u[-1] = u[1]``), so a half-domain
run with ``x0 = 0`` represents an even profile on the full line.

The ``"radial"`` boundary treats a 1D grid as the radius ``r = i*dx`` of a
radially symmetric field in the plane: the Laplacian is
``u_rr + u_r / r``, which becomes ``2 u_rr`` at the origin.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .systems import COMPONENTS, ReactionSpec, System

TOL = 1e-6
_SYS_CODE = {System.HEAT: 0, System.SYS9: 1, System.SYS10: 2, System.SYS11: 3, System.SYS12: 4,
             System.CONTACT: 5, System.INDIVIDUAL: 6}


class InstabilityError(RuntimeError):
    """A component left ``[-tol, 1 + tol]``; the step was too large."""


@dataclass
class PdeField:
    """Named components on a uniform 1D or 2D grid.

    ``data`` has shape ``(n_components,) + grid_shape``.  ``boundary`` is
    ``"neumann"``, ``"periodic"`` or ``"radial"`` (1D only, ``x0 = 0``).
    """

    names: tuple[str, ...]
    data: np.ndarray
    dx: float
    boundary: str = "neumann"
    x0: float = 0.0
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.names = tuple(self.names)
        self.data = np.ascontiguousarray(self.data, dtype=float)
        if self.data.shape[0] != len(self.names):
            raise ValueError("one data row per component name")
        if self.data.ndim not in (2, 3):
            raise ValueError("grid must be 1D or 2D")
        if self.boundary not in ("neumann", "periodic", "radial"):
            raise ValueError("boundary must be 'neumann', 'periodic' or 'radial'")
        if self.boundary == "radial" and (self.data.ndim != 2 or self.x0 != 0.0):
            raise ValueError("a radial grid is 1D and starts at r = 0")

    @classmethod
    def from_components(cls, components: dict, dx: float, boundary: str = "neumann",
                        x0: float = 0.0) -> "PdeField":
        names = tuple(components)
        return cls(names, np.stack([np.asarray(components[k], float) for k in names]), dx, boundary, x0)

    @classmethod
    def constant(cls, spec: ReactionSpec, values, n: int, dx: float, dim: int = 1,
                 boundary: str = "neumann") -> "PdeField":
        names = COMPONENTS[spec.system]
        data = np.empty((len(names),) + (n,) * dim)
        for i, val in enumerate(np.broadcast_to(values, (len(names),))):
            data[i] = val
        return cls(names, data, dx, boundary)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[self.names.index(name)]

    @property
    def dim(self) -> int:
        """Spatial dimension of the represented field (2 for a radial grid)."""
        return 2 if self.boundary == "radial" else self.data.ndim - 1

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.data.shape[1])

    def copy(self) -> "PdeField":
        return PdeField(self.names, self.data.copy(), self.dx, self.boundary, self.x0, self.time,
                        dict(self.meta))

    def check_range(self, tol: float = TOL):
        lo, hi = self.data.min(), self.data.max()
        if lo < -tol or hi > 1.0 + tol:
            raise InstabilityError(f"values left [0, 1]: min {lo:.3g}, max {hi:.3g}")


def stability_limit(dx: float, dim: int, spec: ReactionSpec | None = None) -> float:
    """Largest admissible time step: ``0.4 dx^2 / (2 dim)``, tightened for stiff reactions."""
    dt = 0.4 * dx * dx / (2 * dim)
    if spec is not None:
        lip = spec.reaction_bound()
        if lip > 0:
            dt = min(dt, 0.2 / lip)
    return dt


# -- numba kernels -----------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _react(sys, p, a, b, c, d):
    """Reaction at one point for up to four components (unused ones ignored)."""
    if sys == 0:
        return 0.0, 0.0, 0.0, 0.0
    if sys == 1:
        k = p[0]
        return (b + c - 2.0 * k * a * d, d - b + k * (a - b) * d,
                d - c + k * (a - c) * d, -2.0 * d + k * (b + c) * d)
    if sys == 2:
        cc = p[0]
        return (2.0 * cc * (1.0 - a) + 1.0) * b - a, (cc * (a - b) - 2.0) * b, 0.0, 0.0
    if sys == 3:
        return -a + p[0] * (1.0 - a) * a * a, 0.0, 0.0, 0.0
    if sys == 4:
        k1 = p[0]
        k2 = p[1]
        k3 = p[2]
        pair = (b + d) * (c + d)
        r0 = -k1 * a * pair
        r1 = -k2 * b * pair + k3 * a * pair
        r2 = -k2 * c * pair + k3 * a * pair
        if p[3] == 0.0:
            return r0, r1, r2, -k2 * (b + c) * pair
        return r0 + b + c, r1 + d - b, r2 + d - c, k2 * (b + c) * pair - 2.0 * d
    if sys == 5:
        return -a + p[0] * (1.0 - a) * a, 0.0, 0.0, 0.0
    # individual
    return -a + p[0] * (1.0 - a) * a * b, -b + p[0] * (1.0 - b) * a * b, 0.0, 0.0


@numba.njit(cache=True)
def _get(u, k, i):
    if k < u.shape[0]:
        return u[k, i]
    return 0.0


@numba.njit(cache=True)
def _evolve_1d(u, sys, p, dt, dx, nsteps, periodic, radial, tol):
    """Explicit Euler steps in place; returns the number of completed steps."""
    nc, n = u.shape
    new = np.empty_like(u)
    r = dt / (dx * dx)
    for step in range(nsteps):
        for i in range(n):
            if periodic:
                il = i - 1 if i > 0 else n - 1
                ir = i + 1 if i < n - 1 else 0
            else:
                il = i - 1 if i > 0 else 1
                ir = i + 1 if i < n - 1 else n - 2
            a = _get(u, 0, i)
            b = _get(u, 1, i)
            c = _get(u, 2, i)
            d = _get(u, 3, i)
            ra, rb, rc, rd = _react(sys, p, a, b, c, d)
            for k in range(nc):
                if radial:
                    if i == 0:
                        lap = 4.0 * (u[k, 1] - u[k, 0])
                    else:
                        lap = (u[k, il] - 2.0 * u[k, i] + u[k, ir]
                               + 0.5 * (u[k, ir] - u[k, il]) / i)
                else:
                    lap = u[k, il] - 2.0 * u[k, i] + u[k, ir]
                rk = ra
                if k == 1:
                    rk = rb
                elif k == 2:
                    rk = rc
                elif k == 3:
                    rk = rd
                val = u[k, i] + r * lap + dt * rk
                if val < -tol or val > 1.0 + tol:
                    return step
                new[k, i] = val
        u[:, :] = new
    return nsteps


@numba.njit(cache=True)
def _evolve_2d(u, sys, p, dt, dx, nsteps, periodic, radial, tol):
    nc, n, m = u.shape
    new = np.empty_like(u)
    r = dt / (dx * dx)
    for step in range(nsteps):
        for i in range(n):
            if periodic:
                il = i - 1 if i > 0 else n - 1
                ir = i + 1 if i < n - 1 else 0
            else:
                il = i - 1 if i > 0 else 1
                ir = i + 1 if i < n - 1 else n - 2
            for j in range(m):
                if periodic:
                    jl = j - 1 if j > 0 else m - 1
                    jr = j + 1 if j < m - 1 else 0
                else:
                    jl = j - 1 if j > 0 else 1
                    jr = j + 1 if j < m - 1 else m - 2
                a = u[0, i, j]
                b = u[1, i, j] if nc > 1 else 0.0
                c = u[2, i, j] if nc > 2 else 0.0
                d = u[3, i, j] if nc > 3 else 0.0
                ra, rb, rc, rd = _react(sys, p, a, b, c, d)
                for k in range(nc):
                    lap = u[k, il, j] + u[k, ir, j] + u[k, i, jl] + u[k, i, jr] - 4.0 * u[k, i, j]
                    rk = ra
                    if k == 1:
                        rk = rb
                    elif k == 2:
                        rk = rc
                    elif k == 3:
                        rk = rd
                    val = u[k, i, j] + r * lap + dt * rk
                    if val < -tol or val > 1.0 + tol:
                        return step
                    new[k, i, j] = val
        u[:, :, :] = new
    return nsteps


# -- public API ------------------------------------------------------------------------

def _run(fld: PdeField, spec: ReactionSpec, dt: float, nsteps: int, tol: float):
    if fld.names != COMPONENTS[spec.system] and spec.system is not System.HEAT:
        raise ValueError(f"field components {fld.names} do not match {spec.system.value}")
    if fld.data.shape[0] > 4:
        raise ValueError("at most four components are supported")
    limit = stability_limit(fld.dx, fld.dim, spec)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt = {dt:.3g} exceeds the stability limit {limit:.3g}")
    kern = _evolve_1d if fld.data.ndim == 2 else _evolve_2d
    done = kern(fld.data, _SYS_CODE[spec.system], spec.kernel_params(), float(dt), float(fld.dx),
                int(nsteps), fld.boundary == "periodic", fld.boundary == "radial", float(tol))
    fld.time += done * dt
    if done < nsteps:
        raise InstabilityError(f"component left [-{tol}, 1+{tol}] at t = {fld.time + dt:.6g}")
    return fld


def step_rd(fld: PdeField, spec: ReactionSpec, dt: float, tol: float = TOL) -> PdeField:
    """One explicit Euler step (in place) of diffusion plus reaction.

    Values are never clamped; leaving ``[-tol, 1 + tol]`` raises
    :class:`InstabilityError`.
    """
    return _run(fld, spec, dt, 1, tol)


def evolve(fld: PdeField, spec: ReactionSpec, t_end: float, dt: float | None = None,
           tol: float = TOL) -> PdeField:
    """Advance ``fld`` in place to time ``t_end`` with a uniform step.

    The step is the stability limit unless given; it is shortened so that
    ``t_end`` is hit exactly.
    """
    span = t_end - fld.time
    if span < 0:
        raise ValueError("t_end precedes the field time")
    if span == 0:
        return fld
    dt = stability_limit(fld.dx, fld.dim, spec) if dt is None else dt
    nsteps = int(np.ceil(span / dt - 1e-9))
    start = fld.time
    _run(fld, spec, span / nsteps, nsteps, tol)
    fld.time = start + span
    return fld


def ode_solution(spec: ReactionSpec, y0, t: float, rtol: float = 1e-11) -> np.ndarray:
    """Space-free solution of the reaction system (reference for flat data)."""
    from scipy.integrate import solve_ivp

    sol = solve_ivp(lambda _, y: _flat_reaction(spec, y), (0.0, t), np.asarray(y0, float),
                    method="DOP853", rtol=rtol, atol=1e-13)
    return sol.y[:, -1]


def _flat_reaction(spec, y):
    from .systems import reaction
    return reaction(spec, y[:, None])[:, 0]

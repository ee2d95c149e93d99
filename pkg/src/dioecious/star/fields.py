"""The reaction field ``eta`` and the piecewise-linear minorant ``xi``.

``R`` is the triangle ``0 <= v <= u <= 1``.  ``xi`` is linear on five
pieces (``R1`` to ``R4`` and the segment ``L1``) and equals ``eta`` on the
rest of ``R``.  Ties on shared boundaries go to the piece listed first.
The two segment pieces (``L1`` and the wall ``u = 0.9``) are matched with
an absolute tolerance ``SEG_TOL`` so that rounded inputs such as
``(1.1 * 0.4, 0.4)`` land on them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .geometry import FlowGeometry

R1, R2, L1, R3, R4, ETA = range(6)
REGION_NAMES = ("R1", "R2", "L1", "R3", "R4", "eta")
SEG_TOL = 1e-12


def eta(u, v, c: float):
    """``((2c(1-u) + 1) v - u, (c(u - v) - 2) v)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (2.0 * c * (1.0 - u) + 1.0) * v - u, (c * (u - v) - 2.0) * v


def region_of(u, v, geom: FlowGeometry = FlowGeometry()):
    """Region code per point (``R1`` ... ``ETA``), first listed region wins."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = geom
    lo, top, k, wall = g.eps_prime, g.v_top, g.slope, g.u_wall
    out = np.full(np.broadcast(u, v).shape, ETA, dtype=np.int64)
    band = (v > lo) & (v < top)
    on_line = np.abs(u - k * v) <= SEG_TOL
    on_wall = np.abs(u - wall) <= SEG_TOL
    masks = [
        (R4, band & (u > wall) & (u < 1.0)),
        (R3, (band & (u > k * v) & (u < wall) & ~on_line) | (on_wall & (v >= lo) & (v <= top))),
        (L1, on_line & (v >= lo) & (v <= top)),
        (R2, (v > lo) & (v <= top) & (u < k * v) & ~on_line),
        (R1, (v > lo * u) & (v <= lo) & (u <= wall)),
    ]
    for code, mask in masks:  # later assignments take priority
        out = np.where(mask, code, out)
    return out if out.ndim else int(out)


def _linear_piece(code: int, u, v, geom: FlowGeometry):
    g = geom
    if code in (R1, R2):
        return g.F1 * u, -2.0 * v
    if code == L1:
        return g.slope * g.F2 * v, g.F2 * v
    if code == R3:
        return np.zeros_like(u), g.F2 * v
    if code == R4:
        return -u, g.F2 * v
    raise ValueError(f"region {code} has no linear formula")


def xi(u, v, geom: FlowGeometry = FlowGeometry(), c: float | None = None):
    """The piecewise field; ``eta`` with coefficient ``c`` (default ``geom.c``) off the pieces."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    c = geom.c if c is None else c
    code = np.asarray(region_of(u, v, geom))
    x1, x2 = eta(u, v, c)
    x1, x2 = np.array(x1, dtype=float), np.array(x2, dtype=float)
    for r in (R1, R2, L1, R3, R4):
        m = code == r
        if np.any(m):
            a, b = _linear_piece(r, u[m], v[m], geom)
            x1[m], x2[m] = a, b
    if x1.ndim == 0:
        return float(x1), float(x2)
    return x1, x2


# -- domination certificate ----------------------------------------------------------------

def closure_masks(u, v, geom: FlowGeometry = FlowGeometry(), tol: float = 1e-12) -> dict:
    """Membership of each point in the closure of every linear piece."""
    g = geom
    lo, top, k, wall = g.eps_prime, g.v_top, g.slope, g.u_wall
    band = (v >= lo - tol) & (v <= top + tol)
    return {
        R1: (v >= lo * u - tol) & (v <= lo + tol) & (u <= wall + tol),
        R2: band & (u <= k * v + tol),
        L1: band & (np.abs(u - k * v) <= tol),
        R3: band & (u >= k * v - tol) & (u <= wall + tol),
        R4: band & (u >= wall - tol) & (u <= 1.0 + tol),
    }


def _boundary_lines(geom: FlowGeometry):
    """Lines ``a u + b v = r`` bounding the pieces and the triangle."""
    g = geom
    return [(-g.eps_prime, 1.0, 0.0), (0.0, 1.0, g.eps_prime), (0.0, 1.0, g.v_top),
            (1.0, -g.slope, 0.0), (1.0, 0.0, g.u_wall), (1.0, 0.0, 1.0),
            (1.0, -1.0, 0.0), (0.0, 1.0, 0.0)]


def _in_triangle(u, v, tol=1e-12):
    return (v >= -tol) & (v <= u + tol) & (u <= 1.0 + tol)


def certificate_points(grid_n: int, geom: FlowGeometry = FlowGeometry()) -> tuple[np.ndarray, np.ndarray]:
    """Grid over the triangle, samples along every boundary line, and all corners."""
    t = np.linspace(0.0, 1.0, grid_n)
    U, V = np.meshgrid(t, t, indexing="ij")
    keep = V <= U
    us, vs = [U[keep]], [V[keep]]
    lines = _boundary_lines(geom)
    for a, b, r in lines:
        if b != 0.0:
            uu = t
            vv = (r - a * uu) / b
        else:
            vv = t
            uu = np.full_like(t, r / a)
        m = _in_triangle(uu, vv)
        us.append(uu[m])
        vs.append(vv[m])
    for (a1, b1, r1), (a2, b2, r2) in combinations(lines, 2):
        det = a1 * b2 - a2 * b1
        if det == 0.0:
            continue
        uu = (r1 * b2 - r2 * b1) / det
        vv = (a1 * r2 - a2 * r1) / det
        if _in_triangle(uu, vv):
            us.append(np.array([uu]))
            vs.append(np.array([vv]))
    return np.concatenate(us), np.clip(np.concatenate(vs), 0.0, None)


@dataclass
class DominationCertificate:
    passed: bool
    c: float
    grid_n: int
    n_points: int
    worst_margin: float
    witness: tuple[float, float]
    witness_region: str
    witness_component: int
    region_margins: dict = field(default_factory=dict)  # name -> (min eta1 - xi1, min eta2 - xi2)
    scaled_margin: float = np.nan  # min (eta1 - F1 u) / u over the closure of R1 and R2


def verify_domination(c: float, grid_n: int = 2000, geom: FlowGeometry = FlowGeometry(),
                      tol: float = 1e-12) -> DominationCertificate:
    """Check ``xi <= eta`` componentwise on a grid over ``R``.

    Every point is tested against the formula of every piece whose closure
    contains it, so boundary ties cannot hide a failure.  Off the pieces
    ``xi = eta`` and the margin is zero.
    """
    if c < 1:
        raise ValueError("c must be at least 1")
    if grid_n < 100:
        raise ValueError("grid_n must be at least 100")
    u, v = certificate_points(grid_n, geom)
    e1, e2 = eta(u, v, c)
    masks = closure_masks(u, v, geom, tol)
    worst = (0.0, (float("nan"), float("nan")), "eta", 0)
    region_margins = {}
    for r, m in masks.items():
        if not m.any():
            continue
        x1, x2 = _linear_piece(r, u[m], v[m], geom)
        m1, m2 = e1[m] - x1, e2[m] - x2
        region_margins[REGION_NAMES[r]] = (float(m1.min()), float(m2.min()))
        for comp, arr in ((1, m1), (2, m2)):
            i = int(np.argmin(arr))
            if arr[i] < worst[0]:
                idx = np.flatnonzero(m)[i]
                worst = (float(arr[i]), (float(u[idx]), float(v[idx])), REGION_NAMES[r], comp)
    if worst[2] == "eta":
        # no negative margin: report the tightest nonnegative one
        best = min(region_margins.items(), key=lambda kv: min(kv[1]))
        name, (a, b) = best
        r = REGION_NAMES.index(name)
        m = masks[r]
        comp = 1 if a <= b else 2
        x1, x2 = _linear_piece(r, u[m], v[m], geom)
        arr = (e1[m] - x1) if comp == 1 else (e2[m] - x2)
        idx = np.flatnonzero(m)[int(np.argmin(arr))]
        worst = (float(arr.min()), (float(u[idx]), float(v[idx])), name, comp)
    r12 = (masks[R1] | masks[R2]) & (u > 0)
    scaled = float(np.min((e1[r12] - geom.F1 * u[r12]) / u[r12]))
    return DominationCertificate(worst[0] >= -tol, c, grid_n, int(u.size), worst[0], worst[1],
                                 worst[2], worst[3], region_margins, scaled)


def scaled_margin_exact(c: float, geom: FlowGeometry = FlowGeometry()) -> float:
    """Infimum of ``(eta1 - F1 u) / u`` over the closure of ``R1`` and ``R2``.

    ``eta1 / u = (2c(1-u) + 1)(v/u) - 1`` is smallest at the largest ``u``
    and smallest ``v/u``, i.e. the corner ``(u_wall, eps' u_wall)``.
    """
    g = geom
    return (2.0 * c * (1.0 - g.u_wall) + 1.0) * g.eps_prime - 1.0 - g.F1

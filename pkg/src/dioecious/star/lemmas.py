"""Heat-semigroup step and grid checks of the two profile lemmas.

* The shoulder lemma: on the convex outer part of each ramp of ``f0`` the
  heat flow lifts the profile by at least ``s / (5 l^2)``.
* The dominance lemma: ``f0 + m s`` (cut off just outside the support)
  dominates ``(1 + delta2 s) f_s``, where ``f_s`` is ``f0`` with both ramps
  pushed outward by ``delta1 s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from ..pde.profiles import bump_f0

TRUNCATE = 8.0


def heat_kernel(s: float, dx: float) -> np.ndarray:
    """Sampled Gaussian of variance ``2 s``, cut at ``8 sigma`` and normalized to mass 1."""
    sigma = np.sqrt(2.0 * s)
    half = int(np.ceil(TRUNCATE * sigma / dx))
    y = dx * np.arange(-half, half + 1)
    w = np.exp(-y * y / (4.0 * s))
    return w / w.sum()


def heat_step(f: np.ndarray, s: float, dx: float) -> np.ndarray:
    """``e^{s Delta} f`` on a uniform grid by discrete convolution.

    The grid must resolve the kernel (``sqrt(2 s) >= dx``).  Edges are
    mirrored, which keeps the total mass and suits profiles that are flat
    at the ends.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    f = np.asarray(f, dtype=float)
    if s == 0:
        return f.copy()
    if np.sqrt(2.0 * s) < dx:
        raise ValueError(f"dx = {dx:.3g} does not resolve the kernel width {np.sqrt(2 * s):.3g}")
    return convolve1d(f, heat_kernel(s, dx), axis=-1, mode="reflect")


def _grid(L: float, l: float, dx: float, pad: float) -> np.ndarray:
    half = L + l + pad
    n = int(np.ceil(half / dx))
    return dx * np.arange(-n, n + 1)


# -- shoulder lemma ----------------------------------------------------------------------

@dataclass
class ShoulderCheck:
    passed: bool
    L: float
    l: float
    dx: float
    s_values: np.ndarray
    worst_ratio: np.ndarray  # min over the zones of (e^{s Delta} f0 - f0) / (s / (5 l^2)), per s
    worst_x: np.ndarray


def shoulder_zones(x: np.ndarray, s: float, L: float, l: float) -> np.ndarray:
    """Mask of ``(-L-l-s, -L-l/200)`` and ``(L+l/200, L+l+s)``."""
    ax = np.abs(x)
    return (ax > L + l / 200.0) & (ax < L + l + s)


def check_lemma44(L: float = 5.0, l: float = 2.0, s_values=None, dx: float | None = None) -> ShoulderCheck:
    """Evaluate the shoulder lift on the zones for each ``s``; pass if every ratio is >= 1."""
    dx = l / 500.0 if dx is None else dx
    s_values = np.geomspace(1e-5, 1e-3, 9) if s_values is None else np.atleast_1d(np.asarray(s_values, float))
    ratios, where = [], []
    for s in s_values:
        x = _grid(L, l, dx, 20.0 * np.sqrt(2.0 * s) + 10 * dx)
        f0 = bump_f0(x, L, l)
        gain = (heat_step(f0, s, dx) - f0) / (s / (5.0 * l * l))
        z = shoulder_zones(x, s, L, l)
        i = int(np.argmin(np.where(z, gain, np.inf)))
        ratios.append(gain[i])
        where.append(x[i])
    ratios = np.array(ratios)
    return ShoulderCheck(bool(np.all(ratios >= 1.0)), L, l, dx, s_values, ratios, np.array(where))


# -- dominance lemma ---------------------------------------------------------------------

def f_hat(x, s: float, m: float, L: float, l: float) -> np.ndarray:
    """``f0 + m s`` on ``(-L-l-s, L+l+s)`` and 0 outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < L + l + s
    return np.where(inside, bump_f0(x, L, l) + m * s, 0.0)


def f_shifted(x, s: float, delta1: float, L: float, l: float) -> np.ndarray:
    """``f0`` with both ramps moved outward by ``delta1 s``."""
    return bump_f0(x, L, l, shift=delta1 * s)


@dataclass
class DominanceCheck:
    passed: bool
    m: float
    delta1: float
    delta2: float
    s_values: np.ndarray
    worst_margin: np.ndarray  # min over x of f_hat - (1 + delta2 s) f_s, per s
    worst_x: np.ndarray


def check_lemma45(m: float, s_values=None, L: float = 5.0, l: float = 0.31, delta1: float = 0.1,
                  delta2: float = 0.3, dx: float | None = None, tol: float = 1e-12) -> DominanceCheck:
    """Grid check of ``f_hat >= (1 + delta2 s) f_s`` for each ``s``."""
    if m <= 0:
        raise ValueError("m must be positive")
    dx = l / 500.0 if dx is None else dx
    s_values = np.geomspace(1e-6, 1e-3, 7) if s_values is None else np.atleast_1d(np.asarray(s_values, float))
    margins, where = [], []
    for s in s_values:
        x = _grid(L, l, dx, 2.0 * s + 4 * dx)
        # add the points where either profile has a kink or a jump
        ends = np.array([L + l + s, L + l + delta1 * s, L - l + delta1 * s, L + delta1 * s, L - l, L, L + l])
        ends = np.concatenate([ends, ends - 1e-12, ends + 1e-12])
        x = np.sort(np.concatenate([x, ends, -ends]))
        gap = f_hat(x, s, m, L, l) - (1.0 + delta2 * s) * f_shifted(x, s, delta1, L, l)
        i = int(np.argmin(gap))
        margins.append(gap[i])
        where.append(x[i])
    margins = np.array(margins)
    return DominanceCheck(bool(np.all(margins >= -tol)), m, delta1, delta2, s_values, margins,
                          np.array(where))


def admissible_deltas(m: float, s: float = 1e-3, L: float = 5.0, l: float = 0.31,
                      delta1_grid=None, delta2_grid=None, dx: float | None = None):
    """Boolean table over ``(delta1, delta2)`` of choices passing the dominance check at ``s``."""
    d1 = np.linspace(0.0, 1.0, 21) if delta1_grid is None else np.asarray(delta1_grid, float)
    d2 = np.linspace(0.0, 2.0 * m, 21) if delta2_grid is None else np.asarray(delta2_grid, float)
    ok = np.zeros((d1.size, d2.size), dtype=bool)
    for i, a in enumerate(d1):
        for j, b in enumerate(d2):
            ok[i, j] = check_lemma45(m, [s], L, l, a, b, dx).passed
    return d1, d2, ok

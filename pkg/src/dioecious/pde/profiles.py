"""Initial profiles: the smooth plateau bump and a Gaussian."""
from __future__ import annotations

import numpy as np


def bump_h(x, l: float):
    """Quadratic ramp from 0 at ``-l`` to 1 at ``l`` with ``h(0) = 1/2``; C^1."""
    x = np.asarray(x, dtype=float)
    left = 0.5 * ((x + l) / l) ** 2
    right = 1.0 - 0.5 * ((l - x) / l) ** 2
    out = np.where(x < -l, 0.0, np.where(x <= 0.0, left, np.where(x <= l, right, 1.0)))
    return out if out.ndim else float(out)


def bump_f0(x, L: float, l: float, shift: float = 0.0):
    """Plateau of height 1 on ``[-L+l, L-l]`` with ramps of half-width ``l``.

    ``shift`` moves both ramps outward (the translated profile used when the
    flat region grows).
    """
    if not L > l > 0:
        raise ValueError("need L > l > 0")
    x = np.asarray(x, dtype=float)
    Ls = L + shift
    out = np.where(x <= 0.0, bump_h(x + Ls, l), bump_h(Ls - x, l))
    return out if np.ndim(out) else float(out)


def gaussian(x, t0: float, center: float = 0.0, amplitude: float = 1.0):
    """Heat kernel at time ``t0`` (variance ``2 t0``) scaled to peak ``amplitude``."""
    x = np.asarray(x, dtype=float)
    return amplitude * np.exp(-((x - center) ** 2) / (4.0 * t0))

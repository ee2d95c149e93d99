"""Constants and curves of the interval-expansion construction.

The reference curve runs from ``A`` down to ``B`` and then horizontally to
``D``; ``gamma_theta`` is its dilation by ``1 + theta`` clipped to the unit
box in ``u``.  A piecewise-linear comparison field ``xi`` is defined on
regions bounded by the lines ``v = eps'``, ``v = 0.6``, ``u = 1.1 v``,
``u = 0.9`` and ``u = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class FlowGeometry:
    A: tuple[float, float] = (0.51, 0.51)
    B: tuple[float, float] = (0.55, 0.5)
    C: tuple[float, float] = (0.9, 0.5)
    D: tuple[float, float] = (1.0, 0.5)
    theta_range: tuple[float, float] = (-0.54, 0.2)
    F1: float = 400.0
    F2: float = 75.0
    K1: float = 44.0
    K2: float = 2.0
    eps: float = 0.24
    eps_prime: float = 0.23
    v_top: float = 0.6
    slope: float = 1.1  # the sliding line u = slope * v
    u_wall: float = 0.9
    c: float = 8800.0  # coefficient of eta, used outside the linear regions
    pi_v_A2_printed: float = 0.2346  # printed value; differs from (1 + 0.2) * 0.51

    @property
    def theta0(self) -> float:
        return self.theta_range[1]

    @property
    def s0_terms(self) -> tuple[float, float]:
        return np.log(12.0 / 11.0) / self.F2, np.log(45.0 / 23.0) / (self.F1 + 2.0)

    @property
    def s0(self) -> float:
        return min(self.s0_terms)

    def vertices(self, theta: float) -> np.ndarray:
        """``A_theta, B_theta, C_theta, D_theta`` as rows."""
        k = 1.0 + theta
        return np.array([[k * self.A[0], k * self.A[1]],
                         [k * self.B[0], k * self.B[1]],
                         [self.C[0], k * self.C[1]],
                         [self.D[0], k * self.D[1]]])

    def gamma_theta(self, theta: float) -> np.ndarray:
        """Polyline ``A_theta -> B_theta -> C_theta -> D_theta``; C is a vertex on the flat part."""
        lo, hi = self.theta_range
        if not lo - 1e-12 <= theta <= hi + 1e-12:
            raise ValueError(f"theta must lie in [{lo}, {hi}]")
        return self.vertices(theta)

    def point_on_gamma(self, theta: float, frac) -> np.ndarray:
        """Point at arc-length fraction ``frac`` of ``gamma_theta`` (0 at A, 1 at D)."""
        poly = self.gamma_theta(theta)
        seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        target = np.asarray(frac, dtype=float) * cum[-1]
        i = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(seg) - 1)
        w = (target - cum[i]) / seg[i]
        return poly[i] + w[..., None] * (poly[i + 1] - poly[i]) if np.ndim(frac) else \
            poly[i] + w * (poly[i + 1] - poly[i])

    @property
    def pi_v_A2(self) -> float:
        return (1.0 + self.theta0) * self.A[1]

    @property
    def pi_v_A1(self) -> float:
        """v-coordinate of the lowest dilation of A (``theta = -0.54``): 0.2346."""
        return (1.0 + self.theta_range[0]) * self.A[1]

    def min_v_gamma(self, theta: float = 0.0) -> float:
        return float(self.gamma_theta(theta)[:, 1].min())


# -- constant certificates ----------------------------------------------------------------

def ratio_condition_exact(K1=44, K2=2) -> tuple[bool, Fraction, Fraction]:
    """``K1/K2 > 21 (200/199)^2`` in exact rational arithmetic."""
    lhs = Fraction(K1) / Fraction(K2)
    rhs = 21 * Fraction(200, 199) ** 2
    return lhs > rhs, lhs, rhs


def rate_condition(F1: float = 400.0, F2: float = 75.0, K1: float = 44.0) -> tuple[bool, float]:
    """``min(F1 - 8, 5.1 F2) / (2 sqrt 17) >= K1``; returns the margin as well."""
    value = min(F1 - 8.0, 5.1 * F2) / (2.0 * np.sqrt(17.0))
    return value - K1 >= 0, value - K1


def plateau_floor() -> Fraction:
    """``f0`` just outside the flat part: ``(1/2)(199/200)^2`` (exact)."""
    return Fraction(1, 2) * Fraction(199, 200) ** 2


def shoulder_window(K1: float = 44.0, K2: float = 2.0) -> tuple[float, float]:
    """Open interval of ramp half-widths ``l`` allowed by the ``K1``/``K2`` pair.

    ``K1 > (200/199)^2 4.02 / l^2`` and ``K2 < 1 / (5.05 l^2)``.
    """
    lo = np.sqrt((200.0 / 199.0) ** 2 * 4.02 / K1)
    hi = np.sqrt(1.0 / (5.05 * K2))
    return float(lo), float(hi)


def plateau_gain(K1: float, K2: float, l: float) -> float:
    """Smallest ``m`` admitted by both lower bounds on the plateau gain."""
    m22 = K1 / 2.0 * (199.0 / 200.0) ** 2 - 2.01 / l ** 2
    m23 = 1.0 / (5.0 * l ** 2) - 1.01 * K2
    return float(max(m22, m23))

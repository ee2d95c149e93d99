"""Reaction terms of the mean-field systems and their equilibria.

Systems and component names:

========== ============================ ====================================
name       components                   reaction
========== ============================ ====================================
sys9       u00, u01, u10, u11           four-state lily-pad densities
sys10      u, v                         occupied / doubly occupied density
sys11      u                            symmetric individual-stirring density
sys12      u00, u01, u10, u11           lily-pad with neighbourhood mating
contact    u                            single-sex contact process
individual u1, u2                       male / female densities
heat       any                          no reaction (pure diffusion)
========== ============================ ====================================
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import simpson


class System(str, Enum):
    SYS9 = "sys9"
    SYS10 = "sys10"
    SYS11 = "sys11"
    SYS12 = "sys12"
    CONTACT = "contact"
    INDIVIDUAL = "individual"
    HEAT = "heat"


COMPONENTS = {
    System.SYS9: ("u00", "u01", "u10", "u11"),
    System.SYS10: ("u", "v"),
    System.SYS11: ("u",),
    System.SYS12: ("u00", "u01", "u10", "u11"),
    System.CONTACT: ("u",),
    System.INDIVIDUAL: ("u1", "u2"),
    System.HEAT: ("u",),
}

# component whose front is tracked by the survival classifier
MONITORED = {
    System.SYS9: "u11", System.SYS10: "v", System.SYS11: "u", System.SYS12: "u11",
    System.CONTACT: "u", System.INDIVIDUAL: "u1", System.HEAT: "u",
}


class NoRootsError(ValueError):
    """The reaction term has no nonzero equilibria at this coefficient."""


@dataclass(frozen=True)
class ReactionSpec:
    """A reaction system with its birth rate.

    ``coefficient`` multiplies ``lam`` to give ``beta`` for the scalar
    systems (sys11, contact, individual); it defaults to ``2*dim_d``, the
    number of neighbouring sites.  Use ``2*d*(2*d+1)`` for neighbourhood
    mating.  ``variant`` applies to sys12 only: ``"verbatim"`` keeps the
    birth-only system, ``"with_deaths"`` adds the death flows of sys9.
    """

    system: System
    lam: float
    dim_d: int = 2
    coefficient: float | None = None
    variant: str = "verbatim"

    def __post_init__(self):
        object.__setattr__(self, "system", System(self.system))
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.variant not in ("verbatim", "with_deaths"):
            raise ValueError("variant must be 'verbatim' or 'with_deaths'")

    @property
    def components(self) -> tuple[str, ...]:
        return COMPONENTS[self.system]

    @property
    def c(self) -> float:
        """Coefficient of sys10: ``c = 2 * lam * d``."""
        return 2.0 * self.lam * self.dim_d

    @property
    def beta(self) -> float:
        coef = 2.0 * self.dim_d if self.coefficient is None else self.coefficient
        return coef * self.lam

    def with_lam(self, lam: float) -> "ReactionSpec":
        return ReactionSpec(self.system, lam, self.dim_d, self.coefficient, self.variant)

    def kernel_params(self) -> np.ndarray:
        """Flat parameter vector consumed by the numba stepper."""
        d = self.dim_d
        if self.system is System.SYS9:
            return np.array([2.0 * self.lam * d])
        if self.system is System.SYS10:
            return np.array([self.c])
        if self.system is System.SYS12:
            k1, k2, k3 = sys12_coefficients(self.lam, d)
            return np.array([k1, k2, k3, 1.0 if self.variant == "with_deaths" else 0.0])
        if self.system is System.HEAT:
            return np.zeros(1)
        return np.array([self.beta])

    def reaction_bound(self) -> float:
        """A bound on the Lipschitz constant of the reaction on the unit box."""
        p = self.kernel_params()
        s = self.system
        if s is System.SYS9:
            return 2.0 + 8.0 * p[0]
        if s is System.SYS10:
            return 3.0 + 4.0 * p[0]
        if s is System.SYS12:
            return 2.0 + 4.0 * (p[0] + p[1] + p[2])
        if s is System.HEAT:
            return 0.0
        return 1.0 + 3.0 * p[0]


# -- reaction terms (numpy, vectorised) ------------------------------------------

def _unpack(fields, names):
    if isinstance(fields, dict):
        return [np.asarray(fields[k], dtype=float) for k in names]
    arr = np.asarray(fields, dtype=float)
    return [arr[i] for i in range(len(names))]


def rhs_sys9(fields, lam: float, dim_d: int = 2) -> tuple[np.ndarray, ...]:
    """Reaction terms of the four-state lily-pad system.

    ``fields`` is a mapping with keys u00, u01, u10, u11 or a stacked array.
    """
    u00, u01, u10, u11 = _unpack(fields, COMPONENTS[System.SYS9])
    k = 2.0 * lam * dim_d
    return (u01 + u10 - 2.0 * k * u00 * u11,
            u11 - u01 + k * (u00 - u01) * u11,
            u11 - u10 + k * (u00 - u10) * u11,
            -2.0 * u11 + k * (u01 + u10) * u11)


def rhs_sys10(u, v, c: float) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (2.0 * c * (1.0 - u) + 1.0) * v - u, (c * (u - v) - 2.0) * v


def rhs_sys11(u, beta: float):
    u = np.asarray(u, dtype=float)
    return -u + beta * (1.0 - u) * u * u


def rhs_contact(u, beta: float):
    u = np.asarray(u, dtype=float)
    return -u + beta * (1.0 - u) * u


def rhs_individual(u1, u2, beta: float):
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    return -u1 + beta * (1.0 - u1) * u1 * u2, -u2 + beta * (1.0 - u2) * u1 * u2


def sys12_coefficients(lam: float, dim_d: int = 2) -> tuple[float, float, float]:
    """``(2 lam (2d)^2, lam (2d)(2d+1), lam (2d)^2)``."""
    n = 2.0 * dim_d
    return 2.0 * lam * n * n, lam * n * (n + 1.0), lam * n * n


def rhs_sys12(fields, lam: float, dim_d: int = 2, variant: str = "verbatim"):
    """Reaction terms of the lily-pad system with neighbourhood mating.

    ``"verbatim"`` has no death terms and a loss term on u11; it does not
    conserve total probability.  ``"with_deaths"`` adds the death flows of
    the four-state system and turns the u11 term into a gain, which restores
    conservation.
    """
    u00, u01, u10, u11 = _unpack(fields, COMPONENTS[System.SYS12])
    k1, k2, k3 = sys12_coefficients(lam, dim_d)
    pair = (u01 + u11) * (u10 + u11)
    r00 = -k1 * u00 * pair
    r01 = -k2 * u01 * pair + k3 * u00 * pair
    r10 = -k2 * u10 * pair + k3 * u00 * pair
    if variant == "verbatim":
        r11 = -k2 * (u01 + u10) * pair
        return r00, r01, r10, r11
    if variant != "with_deaths":
        raise ValueError("variant must be 'verbatim' or 'with_deaths'")
    r11 = k2 * (u01 + u10) * pair
    return (r00 + u01 + u10, r01 + u11 - u01, r10 + u11 - u10, r11 - 2.0 * u11)


def reaction(spec: ReactionSpec, data: np.ndarray) -> np.ndarray:
    """Stacked reaction terms for stacked component data."""
    s = spec.system
    if s is System.SYS9:
        out = rhs_sys9(data, spec.lam, spec.dim_d)
    elif s is System.SYS10:
        out = rhs_sys10(data[0], data[1], spec.c)
    elif s is System.SYS11:
        out = (rhs_sys11(data[0], spec.beta),)
    elif s is System.SYS12:
        out = rhs_sys12(data, spec.lam, spec.dim_d, spec.variant)
    elif s is System.CONTACT:
        out = (rhs_contact(data[0], spec.beta),)
    elif s is System.INDIVIDUAL:
        out = rhs_individual(data[0], data[1], spec.beta)
    else:
        out = tuple(np.zeros_like(d) for d in data)
    return np.stack(out)


# -- equilibria ------------------------------------------------------------------------

def sys11_roots(beta: float) -> tuple[float, float]:
    """``(rho_1, rho_0)``, the nonzero roots of ``-u + beta u^2 (1-u)``, ``rho_1 < rho_0``."""
    if beta <= 4.0:
        raise NoRootsError(f"beta = {beta} <= 4: no distinct nonzero roots")
    r = np.sqrt(1.0 - 4.0 / beta)
    return 0.5 * (1.0 - r), 0.5 * (1.0 + r)


def sys10_fixed_points(c: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Interior fixed points ``(P_minus, P_plus)`` of sys10.

    With ``v > 0`` the second equation forces ``u = v + 2/c``; substituting
    into the first leaves ``v^2 - (1 - 2/c) v + 1/c^2 = 0``.
    """
    if c < 4.0:
        raise NoRootsError(f"c = {c} < 4: no interior fixed points")
    b = 1.0 - 2.0 / c
    disc = np.sqrt(max(b * b - 4.0 / c ** 2, 0.0))
    v_lo, v_hi = 0.5 * (b - disc), 0.5 * (b + disc)
    return (v_lo + 2.0 / c, v_lo), (v_hi + 2.0 / c, v_hi)


def contact_root(beta: float) -> float:
    if beta <= 1.0:
        raise NoRootsError("beta <= 1: only the zero equilibrium")
    return 1.0 - 1.0 / beta


def wave_integral_criterion(beta: float, panels: int = 10_000) -> float:
    """Integral of the sys11 reaction over ``[0, rho_0]`` (composite Simpson).

    Positive values mean the occupied phase invades.
    """
    _, rho0 = sys11_roots(beta)
    x = np.linspace(0.0, rho0, panels + 1)
    return float(simpson(rhs_sys11(x, beta), x=x))


def wave_integral_closed_form(beta: float) -> float:
    _, r = sys11_roots(beta)
    return beta * (r ** 3 / 3.0 - r ** 4 / 4.0) - r ** 2 / 2.0


def upper_equilibrium(spec: ReactionSpec, t_max: float = 400.0) -> np.ndarray | None:
    """Stable equilibrium reached by the space-free system from the full state.

    Returns ``None`` when the full state decays to zero.  Used for systems
    without closed-form equilibria (sys12); the closed forms are used where
    they exist.
    """
    from scipy.integrate import solve_ivp

    s = spec.system
    if s is System.SYS10:
        try:
            return np.array(sys10_fixed_points(spec.c)[1])
        except NoRootsError:
            return None
    if s is System.SYS11:
        try:
            return np.array([sys11_roots(spec.beta)[1]])
        except NoRootsError:
            return None
    if s is System.CONTACT:
        try:
            return np.array([contact_root(spec.beta)])
        except NoRootsError:
            return None
    n = len(spec.components)
    full = np.zeros(n)
    if s in (System.SYS9, System.SYS12):
        full[3] = 1.0
    else:
        full[:] = 1.0
    sol = solve_ivp(lambda t, y: reaction(spec, y[:, None])[:, 0], (0.0, t_max), full,
                    method="LSODA", rtol=1e-10, atol=1e-12)
    end = sol.y[:, -1]
    if np.max(np.abs(end - (full if s is System.HEAT else 0.0))) < 1e-6 or end[-1] < 1e-6:
        return None
    return end

"""Survival classification of a localized bump and bisection for the critical rate.

A plateau bump is placed on the half line ``[0, half_width]`` (mirror
boundary at 0, so the profile is even) and the rightmost crossing of a
threshold by the monitored component is tracked.  With
``geometry="radial"`` the same grid is the radius of a disc-shaped bump in
the plane, whose front also feels its own curvature.  A front that keeps
advancing means the occupied phase invades; a sup-norm collapse means
extinction.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .pde.profiles import bump_f0
from .pde.solver import PdeField, evolve
from .pde.systems import COMPONENTS, MONITORED, ReactionSpec, System, upper_equilibrium

log = logging.getLogger(__name__)


class Verdict(str, Enum):
    SURVIVES = "Survives"
    DIES = "Dies"
    UNDECIDED = "Undecided"


class BracketInvalid(ValueError):
    """The initial bracket does not straddle the transition."""


@dataclass
class SurvivalVerdict:
    verdict: Verdict
    lam: float
    times: np.ndarray
    front_positions: np.ndarray
    sup_norms: np.ndarray
    t_used: float
    threshold: float

    @property
    def survives(self) -> bool:
        return self.verdict is Verdict.SURVIVES


@dataclass
class ProbeRecord:
    iteration: int
    lo: float
    hi: float
    probe: float
    verdict: Verdict


@dataclass
class LambdaBracket:
    lo: float
    hi: float
    lo_verdict: SurvivalVerdict
    hi_verdict: SurvivalVerdict
    transcript: list[ProbeRecord] = field(default_factory=list)
    probes: dict = field(default_factory=dict, repr=False)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


# -- initial data and monitoring --------------------------------------------------

def plateau_state(spec: ReactionSpec) -> tuple[np.ndarray, float]:
    """Bump amplitude per component and the front threshold.

    Amplitudes are 90% of the upper stable equilibrium; without one the
    bump is 0.9 in the monitored component.
    """
    names = COMPONENTS[spec.system]
    mon = names.index(MONITORED[spec.system])
    eq = upper_equilibrium(spec)
    s = spec.system
    if s is System.SYS11 or s is System.INDIVIDUAL:
        from .pde.systems import NoRootsError, sys11_roots
        try:
            r1, r0 = sys11_roots(spec.beta)
            amp, thr = 0.9 * r0, 0.5 * (r0 + r1)
        except NoRootsError:
            amp, thr = 0.9, 0.5
        return np.full(len(names), amp), thr
    if s is System.SYS10:
        from .pde.systems import NoRootsError, sys10_fixed_points
        try:
            (_, vm), (up, vp) = sys10_fixed_points(spec.c)
            return 0.9 * np.array([up, vp]), 0.5 * (vm + vp)
        except NoRootsError:
            return np.array([0.9, 0.9]), 0.5
    if eq is None:
        amp = np.zeros(len(names))
        if s in (System.SYS9, System.SYS12):
            amp[3] = 0.9
        else:
            amp[:] = 0.9
        return amp, 0.5 * 0.9
    amp = 0.9 * eq
    return amp, 0.5 * eq[mon]


GEOMETRIES = {"planar": "neumann", "radial": "radial"}


def bump_field(spec: ReactionSpec, dx: float = 0.1, half_width: float = 40.0,
               L: float = 5.0, l: float = 1.0, geometry: str = "planar") -> tuple[PdeField, float]:
    """Even plateau bump on ``[0, half_width]`` and the front threshold."""
    if geometry not in GEOMETRIES:
        raise ValueError(f"geometry must be one of {sorted(GEOMETRIES)}")
    amp, thr = plateau_state(spec)
    x = np.arange(0.0, half_width + dx / 2, dx)
    f0 = bump_f0(x, L, l)
    data = amp[:, None] * f0[None, :]
    if spec.system in (System.SYS9, System.SYS12):
        data[0] = 1.0 - data[1:].sum(axis=0)
    return PdeField(COMPONENTS[spec.system], data, dx, GEOMETRIES[geometry], 0.0), thr


def front_position(x: np.ndarray, w: np.ndarray, threshold: float) -> float:
    """Rightmost threshold crossing, linearly interpolated; ``nan`` if none."""
    above = np.nonzero(w >= threshold)[0]
    if above.size == 0:
        return np.nan
    i = above[-1]
    if i == len(w) - 1:
        return float(x[i])
    return float(x[i] + (x[i + 1] - x[i]) * (w[i] - threshold) / (w[i] - w[i + 1]))


# -- classification ---------------------------------------------------------------------

def classify_survival(spec: ReactionSpec, lam: float | None = None, dx: float = 0.1,
                      horizon: float = 200.0, half_width: float = 40.0, L: float = 5.0,
                      l: float = 1.0, extinction_threshold: float = 0.02, sample_dt: float = 1.0,
                      extend_cap: float = 20.0, dt: float | None = None,
                      geometry: str = "planar") -> SurvivalVerdict:
    """Evolve a plateau bump and decide whether its front invades.

    * Survives: over the last half of the run the front position increases
      at every sample and moves by at least two grid cells.  The run stops
      early once the front gets within ``2 L`` of the far boundary.
    * Dies: the sup-norm of the monitored component drops below
      ``extinction_threshold``.  A steadily retreating front keeps the run
      going (up to ``extend_cap * horizon``) until that happens.
    * Undecided otherwise.
    """
    if lam is not None:
        spec = spec.with_lam(lam)
    fld, thr = bump_field(spec, dx, half_width, L, l, geometry)
    mon = fld.names.index(MONITORED[spec.system])
    x = fld.x
    times, fronts, sups = [0.0], [front_position(x, fld.data[mon], thr)], [fld.data[mon].max()]

    def verdict(v, t):
        return SurvivalVerdict(v, spec.lam, np.array(times), np.array(fronts), np.array(sups), t, thr)

    def advancing():
        t = np.array(times)
        f = np.array(fronts)
        half = f[t >= t[-1] / 2]
        if len(half) < 3 or np.isnan(half).any():
            return False
        return bool(np.all(np.diff(half) > 0) and half[-1] - half[0] >= 2 * dx)

    def retreating():
        t = np.array(times)
        f = np.array(fronts)
        half = f[t >= t[-1] / 2]
        return bool(np.isnan(half[-1]) or (len(half) >= 3 and np.all(np.diff(half) < 0)))

    t = 0.0
    t_cap = extend_cap * horizon
    while True:
        t = min(t + sample_dt, t_cap)
        evolve(fld, spec, t, dt=dt)
        w = fld.data[mon]
        times.append(t)
        fronts.append(front_position(x, w, thr))
        sups.append(float(w.max()))
        if sups[-1] < extinction_threshold:
            return verdict(Verdict.DIES, t)
        if not np.isnan(fronts[-1]) and fronts[-1] >= half_width - 2 * L and advancing():
            return verdict(Verdict.SURVIVES, t)
        if t >= horizon:
            if advancing():
                return verdict(Verdict.SURVIVES, t)
            if not retreating() or t >= t_cap:
                return verdict(Verdict.UNDECIDED, t)


def bisect_lambda_c(spec: ReactionSpec, lo0: float, hi0: float, target_width: float,
                    max_retries: int = 3, **classify_kw) -> LambdaBracket:
    """Bracket the critical rate between a dying and a surviving probe.

    Both initial endpoints are classified first; an Undecided probe is
    rerun with a doubled horizon up to ``max_retries`` times.
    """
    if not lo0 < hi0:
        raise BracketInvalid("need lo0 < hi0")
    base_horizon = classify_kw.pop("horizon", 200.0)
    probes: dict[float, SurvivalVerdict] = {}

    def classify(lam):
        horizon = base_horizon
        for _ in range(max_retries + 1):
            v = classify_survival(spec, lam, horizon=horizon, **classify_kw)
            if v.verdict is not Verdict.UNDECIDED:
                break
            log.info("lam=%.6g undecided at horizon %.0f; retrying", lam, horizon)
            horizon *= 2
        probes[lam] = v
        return v

    v_lo, v_hi = classify(lo0), classify(hi0)
    if v_lo.verdict is not Verdict.DIES or v_hi.verdict is not Verdict.SURVIVES:
        raise BracketInvalid(f"initial verdicts {v_lo.verdict.value} at {lo0}, "
                             f"{v_hi.verdict.value} at {hi0}")
    lo, hi = lo0, hi0
    transcript = [ProbeRecord(0, lo, hi, lo, Verdict.DIES), ProbeRecord(0, lo, hi, hi, Verdict.SURVIVES)]
    it = 0
    while hi - lo > target_width:
        it += 1
        mid = 0.5 * (lo + hi)
        v = classify(mid)
        transcript.append(ProbeRecord(it, lo, hi, mid, v.verdict))
        if v.verdict is Verdict.SURVIVES:
            hi, v_hi = mid, v
        elif v.verdict is Verdict.DIES:
            lo, v_lo = mid, v
        else:
            raise RuntimeError(f"probe at lam={mid:.6g} stayed undecided after {max_retries} retries")
        log.info("iteration %d: [%.6f, %.6f]", it, lo, hi)
    return LambdaBracket(lo, hi, v_lo, v_hi, transcript, probes)


def verdicts_monotone(bracket: LambdaBracket) -> bool:
    """No surviving probe sits below a dying one."""
    lams = sorted(bracket.probes)
    surv = [bracket.probes[k].verdict is Verdict.SURVIVES for k in lams]
    first = surv.index(True) if True in surv else len(surv)
    return all(surv[first:]) and not any(surv[:first])

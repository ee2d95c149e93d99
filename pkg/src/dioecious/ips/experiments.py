"""Replica experiments on the particle systems.

* ``upper_invariant_decay``: start from the full configuration and watch
  the fraction of empty male nests grow toward its stationary value.
* ``extinction_experiment``: subcritical runs from the full configuration.
* ``hydrodynamic_check``: individual stirring at spacing ``eps`` against the
  mean-field reaction-diffusion solution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..pde.solver import PdeField, evolve
from ..pde.systems import ReactionSpec, System
from .engine import simulate_replicas
from .torus import IpsParams, Model, Stirring, full_config, lattice_for


@dataclass
class DecayResult:
    times: np.ndarray
    p_empty: np.ndarray  # estimate of P(no male at a site) per time
    stderr: np.ndarray
    density_any: np.ndarray
    replicas: int
    slope: float  # least-squares slope of p_empty against time

    @property
    def slope_ok(self) -> bool:
        """The fitted slope is nonnegative up to three standard errors of the series."""
        return bool(self.slope >= -3.0 * self.stderr.max() / max(np.ptp(self.times), 1e-300))


def upper_invariant_decay(params: IpsParams, t_grid, replicas: int = 100, seed: int = 0) -> DecayResult:
    """Empty-male-nest probability over time, started from all sites ``(1, 1)``.

    Sites are exchangeable on the torus, so the estimate averages over sites
    as well as replicas; the standard error uses the replica-to-replica
    spread of the site averages.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    batch = simulate_replicas(params, full_config(params), float(t_grid[-1]), replicas, seed,
                              sample_times=t_grid)
    empty = 1.0 - batch.densities[:, :, 2]  # (replicas, times)
    p = empty.mean(axis=0)
    se = empty.std(axis=0, ddof=1) / np.sqrt(replicas) if replicas > 1 else np.zeros_like(p)
    slope = float(np.polyfit(t_grid, p, 1)[0]) if len(t_grid) > 1 else 0.0
    return DecayResult(t_grid, p, se, batch.densities[:, :, 0].mean(axis=0), replicas, slope)


@dataclass
class ExtinctionResult:
    params: IpsParams
    t_end: float
    extinction_times: np.ndarray

    @property
    def extinct(self) -> np.ndarray:
        return np.isfinite(self.extinction_times)

    @property
    def fraction_extinct(self) -> float:
        return float(self.extinct.mean())


def extinction_experiment(lam: float, side: int = 64, dim: int = 1, replicas: int = 100,
                          t_end: float = 200.0, seed: int = 0, model: Model = Model.G1) -> ExtinctionResult:
    """Independent runs from the full configuration; records when each dies out."""
    params = IpsParams(lam, model=model, torus_side=side, dim=dim)
    batch = simulate_replicas(params, full_config(params), t_end, replicas, seed, n_samples=2)
    return ExtinctionResult(params, t_end, batch.extinction_times)


def extinction_bound(lam: float, dim: int = 1) -> float:
    """``lam |N|^2`` with ``|N| = 2 d + 1``; below 1 the process dies out."""
    return lam * (2 * dim + 1) ** 2


# -- hydrodynamics ---------------------------------------------------------------------------

def sinusoid(x, period: float, mean: float = 0.5, amplitude: float = 0.3):
    return mean + amplitude * np.sin(2.0 * np.pi * np.asarray(x, float) / period)


@dataclass
class HydroResult:
    eps: np.ndarray
    sup_distance: np.ndarray  # per eps, over the common bins
    stderr: np.ndarray  # largest bin standard error per eps
    bins: np.ndarray  # bin centres
    ips_bins: np.ndarray  # (len(eps), n_bins) male density per bin
    pde_bins: np.ndarray  # (n_bins,)
    beta: float

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.sup_distance) < 0))


def _bin_average(x: np.ndarray, values: np.ndarray, period: float, n_bins: int) -> np.ndarray:
    idx = np.minimum((np.mod(x, period) / period * n_bins).astype(int), n_bins - 1)
    return np.bincount(idx, weights=values, minlength=n_bins) / np.bincount(idx, minlength=n_bins)


def mean_field_profile(lam: float, period: float, t: float, dx: float = 0.01, mean: float = 0.5,
                       amplitude: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    """Male density of the individual-stirring mean field in one dimension.

    The birth coefficient is ``2 lam``: an empty male nest at ``x`` rules
    out a pair at ``x`` itself, so only the two neighbouring sites count.
    """
    spec = ReactionSpec(System.INDIVIDUAL, lam, dim_d=1)
    n = int(round(period / dx))
    x = dx * np.arange(n)
    u0 = sinusoid(x, period, mean, amplitude)
    fld = PdeField(("u1", "u2"), np.stack([u0, u0]), period / n, "periodic")
    evolve(fld, spec, t)
    return x, fld.data[0]


def hydrodynamic_check(lam: float = 3.0, eps_values=(0.2, 0.1, 0.05), period: float = 4.0,
                       t: float = 1.0, replicas: int = 200, n_bins: int = 5, seed: int = 0,
                       mean: float = 0.5, amplitude: float = 0.3) -> HydroResult:
    """Sup-distance between binned IPS densities and the mean-field solution at time ``t``.

    Site ``i`` of the torus sits at ``x = i eps``; both nests start as
    independent Bernoulli variables with the sinusoidal mean profile.  Births
    need a doubly occupied site in the neighbourhood (G2), which gives the
    mean-field rate ``2 d lam u1 u2`` at an empty nest.  The default
    ``lam = 3`` keeps ``beta = 6`` away from the degenerate value 4.
    """
    xs, u = mean_field_profile(lam, period, t, mean=mean, amplitude=amplitude)
    pde = _bin_average(xs, u, period, n_bins)
    dist, errs, ipsb = [], [], []
    for k, eps in enumerate(eps_values):
        side = int(round(period / eps))
        params = IpsParams(lam, model=Model.G2, stirring=Stirring.INDIVIDUAL, eps=float(eps),
                           torus_side=side, dim=1)
        lattice_for(params)
        x = eps * np.arange(side)
        prob = sinusoid(x, period, mean, amplitude)

        def init(rng, prob=prob):
            return (rng.random((side, 2)) < prob[:, None]).astype(np.int8)

        batch = simulate_replicas(params, init, t, replicas, seed=seed + 7919 * k, n_samples=2)
        male = batch.finals[:, :, 0].astype(float)  # (replicas, side)
        per_rep = np.array([_bin_average(x, m, period, n_bins) for m in male])
        est = per_rep.mean(axis=0)
        ipsb.append(est)
        errs.append(float((per_rep.std(axis=0, ddof=1) / np.sqrt(replicas)).max()))
        dist.append(float(np.abs(est - pde).max()))
    centres = (np.arange(n_bins) + 0.5) * period / n_bins
    return HydroResult(np.asarray(eps_values, float), np.array(dist), np.array(errs), centres,
                       np.array(ipsb), pde, 2.0 * lam)

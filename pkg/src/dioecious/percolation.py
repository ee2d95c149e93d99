"""Oriented site percolation with independent or 1-dependent site fields, and
the good-event probability used to compare the particle system with it.

Sites are ``(x, k)`` with ``x + k`` even.  Site ``(x, k+1)`` is wet when it
is open and ``(x-1, k)`` or ``(x+1, k)`` is wet.  Replicas are simulated
together as rows of ``(replicas, width)`` arrays over the window
``x in [-2n, 2n]``, which contains the backward light cone of ``(0, 2n)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest


@dataclass(frozen=True)
class OpConfig:
    gamma: float
    p: float = 0.5
    n_levels: int = 200  # the run covers levels 0..2n
    M: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.M not in (0, 1):
            raise ValueError("only M = 0 (independent) and M = 1 (shared corner noise) are built")
        if self.n_levels < 1:
            raise ValueError("n_levels must be positive")

    @property
    def corner_threshold(self) -> float:
        """``q`` with ``1 - (1 - q)^4 = gamma``: each site reads four corner variables."""
        return 1.0 - (1.0 - self.gamma) ** 0.25


@dataclass
class OpRun:
    config: OpConfig
    x: np.ndarray
    wet_counts: np.ndarray  # (replicas, 2n + 1)
    final: np.ndarray  # wet set at level 2n, (replicas, width)
    levels: np.ndarray | None = None  # (2n + 1, replicas, width) when kept

    @property
    def origin_wet(self) -> np.ndarray:
        return self.final[:, self.x.size // 2]


def _parity_mask(x: np.ndarray, k: int) -> np.ndarray:
    return (x + k) % 2 == 0


def simulate_op(config: OpConfig, seed: int = 0, replicas: int = 1,
                keep_levels: bool = False) -> OpRun:
    """Run ``replicas`` independent copies of the percolation process.

    The uniform variables depend only on ``(seed, replicas, n_levels)``, so
    runs with different ``gamma`` or ``p`` and the same seed are coupled:
    openness is ``U >= gamma`` (or a corner test for M = 1) and initial
    wetness is ``V < p``.
    """
    n = config.n_levels
    x = np.arange(-2 * n, 2 * n + 1)
    width = x.size
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x0F])))
    wet = (rng.random((replicas, width)) < config.p) & _parity_mask(x, 0)
    counts = np.zeros((replicas, 2 * n + 1), dtype=np.int64)
    counts[:, 0] = wet.sum(axis=1)
    kept = [wet.copy()] if keep_levels else None
    if config.M == 1:
        q = config.corner_threshold
        corners = [rng.random((replicas, width)), rng.random((replicas, width))]
    for k in range(1, 2 * n + 1):
        if config.M == 0:
            is_open = rng.random((replicas, width)) >= config.gamma
        else:
            # site (x, k) reads corners (x, k), (x +- 1, k + 1), (x, k + 2)
            corners.append(rng.random((replicas, width)))
            c0, c1, c2 = corners[-3:]
            low = np.minimum(c0, c2)
            side = np.full_like(c1, np.inf)
            side[:, 1:] = c1[:, :-1]
            side[:, :-1] = np.minimum(side[:, :-1], c1[:, 1:])
            is_open = np.minimum(low, side) >= q
            corners.pop(0)
        reach = np.zeros_like(wet)
        reach[:, 1:] |= wet[:, :-1]
        reach[:, :-1] |= wet[:, 1:]
        wet = reach & is_open & _parity_mask(x, k)
        counts[:, k] = wet.sum(axis=1)
        if keep_levels:
            kept.append(wet.copy())
    return OpRun(config, x, counts, wet, np.array(kept) if keep_levels else None)


@dataclass
class Frequency:
    estimate: float
    lo: float
    hi: float
    successes: int
    trials: int


def binomial_frequency(k: int, n: int) -> Frequency:
    ci = binomtest(k, n).proportion_ci(0.95, method="wilson")
    return Frequency(k / n, float(ci.low), float(ci.high), k, n)


def survival_frequency(config: OpConfig, replicas: int = 1000, seed: int = 0) -> Frequency:
    """Fraction of replicas with the origin wet at level ``2n`` (95% Wilson interval)."""
    if replicas < 100:
        raise ValueError("use at least 100 replicas")
    run = simulate_op(config, seed, replicas)
    return binomial_frequency(int(run.origin_wet.sum()), replicas)


# -- good event -------------------------------------------------------------------------

def good_event_bound(lam: float, T: float) -> float:
    """No death among six nests and all four births within ``T``.

    Six unit-rate death clocks stay silent with probability ``exp(-6T)``;
    each of four rate-``lam`` birth clocks rings by ``T`` with probability
    ``1 - exp(-lam T)``.
    """
    if lam < 0 or T < 0:
        raise ValueError("lam and T must be nonnegative")
    return float(np.exp(-6.0 * T) * (-np.expm1(-lam * T)) ** 4)


def mc_good_event(lam: float, T: float, replicas: int = 100_000, seed: int = 0) -> Frequency:
    """Monte Carlo frequency of the good event from its ten exponential clocks."""
    if lam < 0 or T < 0:
        raise ValueError("lam and T must be nonnegative")
    if lam == 0 or T == 0:
        return binomial_frequency(0, replicas)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x6E])))
    deaths = rng.exponential(1.0, size=(replicas, 6))
    births = rng.exponential(1.0 / lam, size=(replicas, 4))
    good = (deaths.min(axis=1) >= T) & (births.max(axis=1) <= T)
    return binomial_frequency(int(good.sum()), replicas)


def good_event_parameters(gamma: float) -> tuple[float, float]:
    """``(lam, T)`` with ``good_event_bound(lam, T) >= 1 - gamma``.

    ``T = gamma/12`` keeps the no-death factor above ``1 - gamma/2``; the
    birth factor is then solved to equal ``1 - gamma/2``.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    T = gamma / 12.0
    lam = -np.log1p(-(1.0 - gamma / 2.0) ** 0.25) / T
    return float(lam), float(T)

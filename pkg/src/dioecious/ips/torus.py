"""Lattice geometry and parameter types for the two-sex particle systems.

A configuration on a torus of side ``n`` in dimension ``d`` is an int8 array
of shape ``(n,)*d + (2,)``; the last axis holds the (male, female) nest
occupancies of each site.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np


MALE, FEMALE = 0, 1


class SiteState(NamedTuple):
    """Occupancy pair ``(male, female)`` of a single site."""

    male: int
    female: int

    def __le__(self, other):
        return self.male <= other.male and self.female <= other.female

    def __ge__(self, other):
        return other <= self

    def __lt__(self, other):
        return self <= other and self != other

    def __gt__(self, other):
        return other < self

    @property
    def code(self) -> int:
        return 2 * self.male + self.female

    @classmethod
    def from_code(cls, code: int) -> "SiteState":
        return cls(code >> 1, code & 1)


class Model(str, Enum):
    G1 = "G1"  # parents anywhere in the neighbourhood
    G2 = "G2"  # parents at the same site
    DECOUPLED = "decoupled"  # births need one parent of the same sex only


class Stirring(str, Enum):
    NONE = "none"
    LILY_PAD = "lily-pad"
    INDIVIDUAL = "individual"


@dataclass(frozen=True)
class IpsParams:
    lam: float
    model: Model = Model.G2
    stirring: Stirring = Stirring.NONE
    eps: float | None = None
    torus_side: int = 8
    dim: int = 1
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "stirring", Stirring(self.stirring))
        if self.lam < 0:
            raise ValueError("birth rate must be nonnegative")
        if self.delta != 1.0:
            raise ValueError("death rate is fixed to 1")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.torus_side < 2:
            raise ValueError("torus_side must be at least 2")
        if self.stirring is not Stirring.NONE:
            if self.eps is None or self.eps <= 0:
                raise ValueError("stirring requires eps > 0")

    @property
    def stir_rate(self) -> float:
        """Exchange rate per bond (and per sex for individual stirring)."""
        if self.stirring is Stirring.NONE:
            return 0.0
        return self.eps ** -2

    @property
    def n_sites(self) -> int:
        return self.torus_side ** self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.torus_side,) * self.dim

    def replace(self, **kw) -> "IpsParams":
        d = dict(lam=self.lam, model=self.model, stirring=self.stirring, eps=self.eps,
                 torus_side=self.torus_side, dim=self.dim)
        d.update(kw)
        return IpsParams(**d)


@dataclass(frozen=True)
class Lattice:
    """Flat-index tables for a periodic torus.

    ``hood[x, :hood_len[x]]`` lists the distinct sites of the interaction
    neighbourhood of ``x`` (``x`` itself first).  ``bonds`` lists the torus
    edges ``(x, x + e_k)``; on a side-2 torus both edges between the two sites
    appear, matching the periodic lattice.
    """

    side: int
    dim: int
    hood: np.ndarray
    hood_len: np.ndarray
    bonds: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.side ** self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    def flat(self, x) -> int:
        if np.ndim(x) == 0:
            if self.dim != 1:
                raise ValueError("need a coordinate tuple in dim > 1")
            return int(x) % self.side
        return int(np.ravel_multi_index(tuple(int(c) % self.side for c in x), self.shape))


@lru_cache(maxsize=64)
def lattice(side: int, dim: int) -> Lattice:
    shape = (side,) * dim
    n = side ** dim
    coords = np.array(np.unravel_index(np.arange(n), shape)).T
    kmax = 2 * dim + 1
    hood = np.full((n, kmax), -1, dtype=np.int64)
    hood_len = np.zeros(n, dtype=np.int64)
    bonds = []
    for x in range(n):
        members = [x]
        for k in range(dim):
            for step in (-1, 1):
                c = coords[x].copy()
                c[k] = (c[k] + step) % side
                y = int(np.ravel_multi_index(tuple(c), shape))
                if y not in members:
                    members.append(y)
                if step == 1 and y != x:
                    bonds.append((x, y))
        hood[x, : len(members)] = members
        hood_len[x] = len(members)
    return Lattice(side, dim, hood, hood_len, np.array(bonds, dtype=np.int64).reshape(-1, 2))


def lattice_for(params: IpsParams) -> Lattice:
    return lattice(params.torus_side, params.dim)


def as_flat(config: np.ndarray) -> np.ndarray:
    """View a configuration as ``(n_sites, 2)`` int8."""
    config = np.asarray(config)
    if config.shape[-1] != 2:
        raise ValueError("last axis must hold (male, female) occupancies")
    if not np.isin(config, (0, 1)).all():
        raise ValueError("nest occupancies must be 0 or 1")
    return np.ascontiguousarray(config.reshape(-1, 2), dtype=np.int8)


def lattice_of(config: np.ndarray) -> Lattice:
    shape = np.shape(config)[:-1]
    if len(set(shape)) != 1:
        raise ValueError("torus must have equal sides")
    return lattice(shape[0], len(shape))


def full_config(params: IpsParams, state=(1, 1)) -> np.ndarray:
    cfg = np.zeros(params.shape + (2,), dtype=np.int8)
    cfg[...] = state
    return cfg


def random_config(params: IpsParams, rng: np.random.Generator, density: float = 0.5) -> np.ndarray:
    return (rng.random(params.shape + (2,)) < density).astype(np.int8)


def config_leq(lower: np.ndarray, upper: np.ndarray) -> bool:
    """Sitewise partial order: both nests of ``lower`` dominated by ``upper``."""
    return bool(np.all(np.asarray(lower) <= np.asarray(upper)))

"""Flip rates of the particle systems and exact generators on tiny tori."""
from __future__ import annotations

import numpy as np

from .torus import IpsParams, Lattice, Model, Stirring, as_flat, lattice_for, lattice_of

MAX_STATES = 4096


class StateSpaceTooLarge(ValueError):
    pass


def _nest(m: int) -> int:
    if m not in (1, 2):
        raise ValueError("nest index m must be 1 (male) or 2 (female)")
    return m - 1


def _counts(flat: np.ndarray, lat: Lattice, x: int) -> tuple[int, int, int]:
    sites = lat.hood[x, : lat.hood_len[x]]
    occ = flat[sites]
    return int(occ[:, 0].sum()), int(occ[:, 1].sum()), int((occ[:, 0] & occ[:, 1]).sum())


def neighbour_counts(x, config) -> tuple[int, int, int]:
    """``(n_1, n_2, n_{1+2})`` over the neighbourhood of ``x`` (``x`` included)."""
    lat = lattice_of(config)
    return _counts(as_flat(config), lat, lat.flat(x))


def birth_rate_g1(x, m: int, config, lam: float) -> float:
    lat = lattice_of(config)
    flat = as_flat(config)
    xi = lat.flat(x)
    if flat[xi, _nest(m)]:
        return 0.0
    n1, n2, _ = _counts(flat, lat, xi)
    return lam * n1 * n2


def birth_rate_g2(x, m: int, config, lam: float) -> float:
    lat = lattice_of(config)
    flat = as_flat(config)
    xi = lat.flat(x)
    if flat[xi, _nest(m)]:
        return 0.0
    return lam * _counts(flat, lat, xi)[2]


def decoupled_contact_rates(x, m: int, config, lam: float) -> float:
    """Birth rate of the dominating process: a parent of sex ``m`` suffices."""
    lat = lattice_of(config)
    flat = as_flat(config)
    xi = lat.flat(x)
    k = _nest(m)
    if flat[xi, k]:
        return 0.0
    return lam * int(lat.hood_len[xi]) * _counts(flat, lat, xi)[k]


def death_rate(x, m: int, config) -> float:
    lat = lattice_of(config)
    return float(as_flat(config)[lat.flat(x), _nest(m)])


_BIRTH = {Model.G1: birth_rate_g1, Model.G2: birth_rate_g2, Model.DECOUPLED: decoupled_contact_rates}


def birth_rate(model: Model, x, m: int, config, lam: float) -> float:
    return _BIRTH[Model(model)](x, m, config, lam)


def max_flip_rate(params: IpsParams) -> float:
    """``c*``: an upper bound on the total flip rate of a single nest."""
    k = int(lattice_for(params).hood_len.max())
    birth = {Model.G1: params.lam * k * k, Model.G2: params.lam * k,
             Model.DECOUPLED: params.lam * k * k}[params.model]
    return max(1.0, birth)


def total_rate(config, params: IpsParams) -> float:
    """Total event rate recomputed from scratch, stirring clocks included."""
    lat = lattice_of(config)
    flat = as_flat(config)
    rate = float(flat.sum())
    for x in range(lat.n_sites):
        for m in (1, 2):
            if not flat[x, m - 1]:
                rate += birth_rate(params.model, _coord(lat, x), m, config, params.lam)
    nb = len(lat.bonds)
    if params.stirring is Stirring.LILY_PAD:
        rate += nb * params.stir_rate
    elif params.stirring is Stirring.INDIVIDUAL:
        rate += 2 * nb * params.stir_rate
    return rate


def _coord(lat: Lattice, x: int):
    if lat.dim == 1:
        return x
    return np.unravel_index(x, lat.shape)


def zeta_rates(x, config, lam: float) -> dict[tuple[int, int], float]:
    """Transition rates of the particle-count process at site ``x``.

    ``config`` holds values in {0, 1, 2} (number of particles per site) with
    the torus shape.  Only the transitions available from the current value
    carry a nonzero rate.
    """
    config = np.asarray(config)
    if not np.isin(config, (0, 1, 2)).all():
        raise ValueError("particle counts must lie in {0, 1, 2}")
    lat = _count_lattice(config)
    flat = config.reshape(-1)
    xi = lat.flat(x)
    n2 = int((flat[lat.hood[xi, : lat.hood_len[xi]]] == 2).sum())
    s = flat[xi]
    return {
        (1, 0): 1.0 if s == 1 else 0.0,
        (2, 1): 2.0 if s == 2 else 0.0,
        (0, 1): 2.0 * lam * n2 if s == 0 else 0.0,
        (1, 2): lam * n2 if s == 1 else 0.0,
    }


def _count_lattice(config: np.ndarray) -> Lattice:
    from .torus import lattice
    shape = config.shape
    return lattice(shape[0], len(shape))


# -- exact generators ----------------------------------------------------------

def encode(config) -> int:
    """Index of a configuration in the exact state space (site 0 least significant)."""
    flat = as_flat(config)
    codes = 2 * flat[:, 0].astype(np.int64) + flat[:, 1]
    return int(np.sum(codes * 4 ** np.arange(len(codes))))


def decode(index: int, params: IpsParams) -> np.ndarray:
    n = params.n_sites
    codes = (index // 4 ** np.arange(n)) % 4
    flat = np.stack([codes >> 1, codes & 1], axis=1).astype(np.int8)
    return flat.reshape(params.shape + (2,))


def _check_size(n_states: int):
    if n_states > MAX_STATES:
        raise StateSpaceTooLarge(f"{n_states} states exceeds the limit of {MAX_STATES}")


def exact_generator_matrix(params: IpsParams) -> np.ndarray:
    """Dense rate matrix of the full two-sex process on a tiny torus.

    Off-diagonal entry ``(i, j)`` is the total rate of all clocks that move
    configuration ``i`` to ``j``; the diagonal makes rows sum to zero.
    """
    lat = lattice_for(params)
    n = lat.n_sites
    n_states = 4 ** n
    _check_size(n_states)
    Q = np.zeros((n_states, n_states))
    pow4 = 4 ** np.arange(n)
    for i in range(n_states):
        cfg = decode(i, params)
        flat = cfg.reshape(-1, 2)
        codes = 2 * flat[:, 0].astype(np.int64) + flat[:, 1]
        for x in range(n):
            for k in (0, 1):
                bit = 2 if k == 0 else 1
                if flat[x, k]:
                    Q[i, i - bit * pow4[x]] += 1.0
                else:
                    r = birth_rate(params.model, _coord(lat, x), k + 1, cfg, params.lam)
                    if r:
                        Q[i, i + bit * pow4[x]] += r
        rate = params.stir_rate
        for a, b in lat.bonds:
            if params.stirring is Stirring.LILY_PAD:
                if codes[a] != codes[b]:
                    j = i + (codes[b] - codes[a]) * pow4[a] + (codes[a] - codes[b]) * pow4[b]
                    Q[i, j] += rate
            elif params.stirring is Stirring.INDIVIDUAL:
                for k in (0, 1):
                    if flat[a, k] != flat[b, k]:
                        bit = 2 if k == 0 else 1
                        d = int(flat[b, k]) - int(flat[a, k])
                        j = i + bit * d * pow4[a] - bit * d * pow4[b]
                        Q[i, j] += rate
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


def zeta_generator_matrix(params: IpsParams) -> np.ndarray:
    """Rate matrix of the particle-count process on {0,1,2}^sites.

    Birth/death moves follow :func:`zeta_rates`; lily-pad stirring exchanges
    whole site values along each bond.
    """
    lat = lattice_for(params)
    n = lat.n_sites
    n_states = 3 ** n
    _check_size(n_states)
    pow3 = 3 ** np.arange(n)
    Q = np.zeros((n_states, n_states))
    for i in range(n_states):
        vals = (i // pow3) % 3
        cfg = vals.reshape(params.shape)
        for x in range(n):
            for (a, b), r in zeta_rates(_coord(lat, x), cfg, params.lam).items():
                if r and vals[x] == a:
                    Q[i, i + (b - a) * pow3[x]] += r
        if params.stirring is Stirring.LILY_PAD:
            for a, b in lat.bonds:
                if vals[a] != vals[b]:
                    j = i + (vals[b] - vals[a]) * pow3[a] + (vals[a] - vals[b]) * pow3[b]
                    Q[i, j] += params.stir_rate
        elif params.stirring is Stirring.INDIVIDUAL:
            raise ValueError("the particle-count projection is Markov only under lily-pad stirring")
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


def zeta_projection(params: IpsParams) -> np.ndarray:
    """0/1 matrix mapping each two-sex configuration to its particle counts."""
    n = params.n_sites
    pow4, pow3 = 4 ** np.arange(n), 3 ** np.arange(n)
    P = np.zeros((4 ** n, 3 ** n))
    for i in range(4 ** n):
        codes = (i // pow4) % 4
        P[i, int(np.sum(((codes >> 1) + (codes & 1)) * pow3))] = 1.0
    return P

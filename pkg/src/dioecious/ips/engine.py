"""Event-driven simulation of the two-sex particle systems.

Two execution paths share the same rate definitions:

* the fast path keeps one rate per nest (death rate 1 when occupied, the
  model's birth rate when empty) in a binary sum-tree, and treats stirring
  as a constant-rate channel whose no-op swaps are skipped;
* the coupled path uses uniformized clocks of a common rate ``c*`` with
  thinning by a shared uniform, applied to two configurations at once, so
  that order between them is preserved event by event.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .rates import max_flip_rate
from .torus import IpsParams, Lattice, Model, Stirring, as_flat, lattice_for

_MODEL_CODE = {Model.G1: 0, Model.G2: 1, Model.DECOUPLED: 2}
_STIR_CODE = {Stirring.NONE: 0, Stirring.LILY_PAD: 1, Stirring.INDIVIDUAL: 2}

# kernel status codes
RUNNING, REACHED_T_END, ABSORBED, VIOLATION = 0, 1, 2, 3
N_SAMPLES = 64


class AbsorbingState(RuntimeError):
    """Raised by :func:`step_event` when no event has positive rate."""


class CouplingViolation(RuntimeError):
    """The coupled pair left the partial order; this indicates a bug."""


def make_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Counter-based stream for one replica, keyed by ``(seed, replica)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replica)])))


# -- numba kernels --------------------------------------------------------------

@numba.njit(cache=True)
def _nest_rate(flat, hood, hood_len, x, k, model, lam):
    if flat[x, k]:
        return 1.0
    n1 = 0
    n2 = 0
    n12 = 0
    for j in range(hood_len[x]):
        y = hood[x, j]
        a = flat[y, 0]
        b = flat[y, 1]
        n1 += a
        n2 += b
        n12 += a & b
    if model == 0:
        return lam * n1 * n2
    elif model == 1:
        return lam * n12
    nm = n1 if k == 0 else n2
    return lam * hood_len[x] * nm


@numba.njit(cache=True)
def _tree_set(tree, size, i, value):
    p = size + i
    tree[p] = value
    p //= 2
    while p >= 1:
        tree[p] = tree[2 * p] + tree[2 * p + 1]
        p //= 2


@numba.njit(cache=True)
def _tree_find(tree, size, u):
    p = 1
    while p < size:
        left = tree[2 * p]
        if u < left:
            p = 2 * p
        else:
            u -= left
            p = 2 * p + 1
    return p - size


@numba.njit(cache=True)
def _build_tree(flat, hood, hood_len, model, lam, size):
    n = flat.shape[0]
    tree = np.zeros(2 * size)
    for x in range(n):
        for k in range(2):
            tree[size + 2 * x + k] = _nest_rate(flat, hood, hood_len, x, k, model, lam)
    for p in range(size - 1, 0, -1):
        tree[p] = tree[2 * p] + tree[2 * p + 1]
    return tree


@numba.njit(cache=True)
def _refresh_around(flat, tree, size, hood, hood_len, x, model, lam):
    # the neighbourhood relation is symmetric, so the sites whose rates
    # depend on x are exactly the members of hood[x]
    for j in range(hood_len[x]):
        y = hood[x, j]
        for k in range(2):
            _tree_set(tree, size, 2 * y + k, _nest_rate(flat, hood, hood_len, y, k, model, lam))


@numba.njit(cache=True)
def _record(flat, out, row):
    n = flat.shape[0]
    c_any = 0
    c_both = 0
    c_m = 0
    c_f = 0
    for x in range(n):
        a = flat[x, 0]
        b = flat[x, 1]
        c_any += a | b
        c_both += a & b
        c_m += a
        c_f += b
    out[row, 0] = c_any / n
    out[row, 1] = c_both / n
    out[row, 2] = c_m / n
    out[row, 3] = c_f / n


@numba.njit(cache=True)
def _fast_run(flat, tree, size, hood, hood_len, bonds, model, lam, stir_mode, stir_rate,
              t, t_end, max_events, rng, sample_times, out, sample_idx):
    """Advance until ``t_end``, absorption, or ``max_events`` real transitions.

    Returns ``(t, events, status, sample_idx)``.
    """
    nb = bonds.shape[0]
    stir_total = 0.0
    if stir_mode == 1:
        stir_total = nb * stir_rate
    elif stir_mode == 2:
        stir_total = 2 * nb * stir_rate
    n_s = sample_times.shape[0]
    events = 0
    while True:
        react = tree[1]
        if react <= 0.0:
            while sample_idx < n_s and sample_times[sample_idx] <= t_end:
                _record(flat, out, sample_idx)
                sample_idx += 1
            return t, events, 2, sample_idx
        if events >= max_events:
            return t, events, 0, sample_idx
        total = react + stir_total
        t_next = t + rng.standard_exponential() / total
        while sample_idx < n_s and sample_times[sample_idx] < t_next and sample_times[sample_idx] <= t_end:
            _record(flat, out, sample_idx)
            sample_idx += 1
        if t_next > t_end:
            return t_end, events, 1, sample_idx
        t = t_next
        u = rng.random() * total
        if u < react:
            i = _tree_find(tree, size, u)
            while tree[size + i] <= 0.0:
                # rounding landed on a dead leaf; redraw within the reactions
                i = _tree_find(tree, size, rng.random() * react)
            x = i // 2
            k = i - 2 * x
            flat[x, k] = 1 - flat[x, k]
            _refresh_around(flat, tree, size, hood, hood_len, x, model, lam)
            events += 1
        else:
            j = int((u - react) / stir_rate)
            if stir_mode == 1:
                if j >= nb:
                    j = nb - 1
                a = bonds[j, 0]
                b = bonds[j, 1]
                if flat[a, 0] != flat[b, 0] or flat[a, 1] != flat[b, 1]:
                    for k in range(2):
                        tmp = flat[a, k]
                        flat[a, k] = flat[b, k]
                        flat[b, k] = tmp
                    _refresh_around(flat, tree, size, hood, hood_len, a, model, lam)
                    _refresh_around(flat, tree, size, hood, hood_len, b, model, lam)
                    events += 1
            else:
                if j >= 2 * nb:
                    j = 2 * nb - 1
                a = bonds[j // 2, 0]
                b = bonds[j // 2, 1]
                k = j % 2
                if flat[a, k] != flat[b, k]:
                    tmp = flat[a, k]
                    flat[a, k] = flat[b, k]
                    flat[b, k] = tmp
                    _refresh_around(flat, tree, size, hood, hood_len, a, model, lam)
                    _refresh_around(flat, tree, size, hood, hood_len, b, model, lam)
                    events += 1


@numba.njit(cache=True)
def _birth(flat, hood, hood_len, x, k, model, lam):
    if flat[x, k]:
        return 0.0
    return _nest_rate(flat, hood, hood_len, x, k, model, lam)


@numba.njit(cache=True)
def _coupled_run(lo, hi, hood, hood_len, bonds, model_lo, lam_lo, model_hi, lam_hi,
                 stir_mode, stir_rate, c_star, t, t_end, rng, check_order):
    """Uniformized coupled evolution; returns ``(t, rings, status)``.

    Every nest carries a death clock and a birth clock of rate ``c_star``;
    a ring of clock ``(x, i, m)`` with uniform ``U`` flips a nest to ``i``
    in each process whose current rate ``c_i`` satisfies ``U <= c_i/c_star``.
    """
    n = lo.shape[0]
    nb = bonds.shape[0]
    react = 4.0 * n * c_star
    stir_total = 0.0
    if stir_mode == 1:
        stir_total = nb * stir_rate
    elif stir_mode == 2:
        stir_total = 2 * nb * stir_rate
    total = react + stir_total
    rings = 0
    while True:
        t += rng.standard_exponential() / total
        if t > t_end:
            return t_end, rings, 1
        rings += 1
        u = rng.random() * total
        if u < react:
            c = int(u / c_star)
            if c >= 4 * n:
                c = 4 * n - 1
            x = c // 4
            i = (c // 2) % 2  # 0: death clock, 1: birth clock
            k = c % 2
            U = rng.random()
            if i == 0:
                if lo[x, k] and U * c_star <= 1.0:
                    lo[x, k] = 0
                if hi[x, k] and U * c_star <= 1.0:
                    hi[x, k] = 0
            else:
                r_lo = _birth(lo, hood, hood_len, x, k, model_lo, lam_lo)
                r_hi = _birth(hi, hood, hood_len, x, k, model_hi, lam_hi)
                if r_lo > 0.0 and U * c_star <= r_lo:
                    lo[x, k] = 1
                if r_hi > 0.0 and U * c_star <= r_hi:
                    hi[x, k] = 1
            if check_order and lo[x, k] > hi[x, k]:
                return t, rings, 3
        else:
            j = int((u - react) / stir_rate)
            if stir_mode == 1:
                if j >= nb:
                    j = nb - 1
                a = bonds[j, 0]
                b = bonds[j, 1]
                for k in range(2):
                    tmp = lo[a, k]
                    lo[a, k] = lo[b, k]
                    lo[b, k] = tmp
                    tmp = hi[a, k]
                    hi[a, k] = hi[b, k]
                    hi[b, k] = tmp
                ks = 0
                ke = 2
            else:
                if j >= 2 * nb:
                    j = 2 * nb - 1
                a = bonds[j // 2, 0]
                b = bonds[j // 2, 1]
                k = j % 2
                tmp = lo[a, k]
                lo[a, k] = lo[b, k]
                lo[b, k] = tmp
                tmp = hi[a, k]
                hi[a, k] = hi[b, k]
                hi[b, k] = tmp
                ks = k
                ke = k + 1
            if check_order:
                for k in range(ks, ke):
                    if lo[a, k] > hi[a, k] or lo[b, k] > hi[b, k]:
                        return t, rings, 3


# -- state objects --------------------------------------------------------------

def _tree_size(n_nests: int) -> int:
    size = 1
    while size < n_nests:
        size *= 2
    return size


@dataclass
class IpsState:
    """Configuration of a finite torus plus the bookkeeping of the fast path.

    ``config`` is a view on the internal ``(n_sites, 2)`` buffer, shaped like
    the torus.  The sum-tree of per-nest rates is rebuilt whenever the state
    is stepped with parameters different from the ones it was built for.
    """

    config: np.ndarray
    time: float = 0.0
    rng_seed: int = 0
    event_count: int = 0
    replica: int = 0
    rng: np.random.Generator | None = field(default=None, repr=False)
    _flat: np.ndarray = field(default=None, repr=False)
    _tree: np.ndarray = field(default=None, repr=False)
    _size: int = field(default=0, repr=False)
    _bound: IpsParams | None = field(default=None, repr=False)

    def __post_init__(self):
        shape = np.shape(self.config)
        self._flat = as_flat(self.config).copy()
        self.config = self._flat.reshape(shape)
        if self.rng is None:
            self.rng = make_rng(self.rng_seed, self.replica)

    @classmethod
    def new(cls, config, seed: int = 0, replica: int = 0, time: float = 0.0) -> "IpsState":
        return cls(np.array(config, dtype=np.int8), time=time, rng_seed=seed, replica=replica)

    def copy(self, seed: int | None = None, replica: int | None = None) -> "IpsState":
        """Independent copy; with a new seed or replica the stream is fresh."""
        seed = self.rng_seed if seed is None else seed
        replica = self.replica if replica is None else replica
        fresh = IpsState(self.config.copy(), time=self.time, rng_seed=seed,
                         event_count=self.event_count, replica=replica)
        if seed == self.rng_seed and replica == self.replica:
            fresh.rng = np.random.Generator(np.random.Philox())
            fresh.rng.bit_generator.state = self.rng.bit_generator.state
        return fresh

    def bind(self, params: IpsParams) -> Lattice:
        lat = lattice_for(params)
        if self._flat.shape[0] != lat.n_sites or self.config.shape[:-1] != params.shape:
            raise ValueError("configuration does not fit the torus in params")
        if self._bound != params:
            self._size = _tree_size(2 * lat.n_sites)
            self._tree = _build_tree(self._flat, lat.hood, lat.hood_len,
                                     _MODEL_CODE[params.model], float(params.lam), self._size)
            self._bound = params
        return lat

    def incremental_total_rate(self, params: IpsParams) -> float:
        """Total event rate as maintained by the sum-tree plus stirring."""
        lat = self.bind(params)
        nb = len(lat.bonds)
        stir = {Stirring.NONE: 0, Stirring.LILY_PAD: nb, Stirring.INDIVIDUAL: 2 * nb}[params.stirring]
        return float(self._tree[1]) + stir * params.stir_rate

    @property
    def is_empty(self) -> bool:
        return not self._flat.any()


@dataclass
class CoupledPair:
    lower: IpsState
    upper: IpsState
    shared_clock_seed: int = 0
    rings: int = 0

    def __post_init__(self):
        if self.lower.config.shape != self.upper.config.shape:
            raise ValueError("coupled configurations must live on the same torus")
        if np.any(self.lower.config > self.upper.config):
            raise ValueError("coupling requires lower <= upper initially")

    @property
    def ordered(self) -> bool:
        return bool(np.all(self.lower.config <= self.upper.config))


@dataclass
class DensitySeries:
    """Sampled site densities: columns any, both, male, female."""

    times: np.ndarray
    values: np.ndarray

    @property
    def density_any(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def density_both(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def density_male(self) -> np.ndarray:
        return self.values[:, 2]

    @property
    def density_female(self) -> np.ndarray:
        return self.values[:, 3]


# -- public operations ------------------------------------------------------------

def _stir_args(params: IpsParams):
    return _STIR_CODE[params.stirring], float(params.stir_rate) if params.stirring is not Stirring.NONE else 1.0


_NO_SAMPLES = np.zeros(0)
_NO_OUT = np.zeros((0, 4))


def step_event(state: IpsState, params: IpsParams) -> IpsState:
    """Apply exactly one transition (stirring swaps of equal values are skipped).

    Raises :class:`AbsorbingState` when the total rate is zero.
    """
    lat = state.bind(params)
    mode, srate = _stir_args(params)
    t, events, status, _ = _fast_run(state._flat, state._tree, state._size, lat.hood, lat.hood_len,
                                     lat.bonds, _MODEL_CODE[params.model], float(params.lam),
                                     mode, srate, state.time, np.inf, 1, state.rng,
                                     _NO_SAMPLES, _NO_OUT, 0)
    if status == ABSORBED:
        raise AbsorbingState("no event has positive rate")
    state.time = t
    state.event_count += events
    return state


def run_until(state: IpsState, params: IpsParams, t_end: float,
              n_samples: int = N_SAMPLES, sample_times=None) -> tuple[IpsState, DensitySeries]:
    """Evolve ``state`` to ``t_end`` and sample densities on a fixed grid.

    The default grid has ``n_samples`` equally spaced times from the start
    time to ``t_end`` inclusive.  An absorbed state simply jumps to ``t_end``.
    """
    if t_end < state.time:
        raise ValueError("t_end precedes the current time")
    lat = state.bind(params)
    if sample_times is None:
        sample_times = np.linspace(state.time, t_end, n_samples)
    sample_times = np.asarray(sample_times, dtype=float)
    out = np.zeros((len(sample_times), 4))
    mode, srate = _stir_args(params)
    t, events, status, idx = _fast_run(state._flat, state._tree, state._size, lat.hood, lat.hood_len,
                                       lat.bonds, _MODEL_CODE[params.model], float(params.lam),
                                       mode, srate, state.time, float(t_end), np.iinfo(np.int64).max,
                                       state.rng, sample_times, out, 0)
    state.time = float(t_end)
    state.event_count += events
    if idx < len(sample_times):
        # sample times beyond t_end (if the caller passed any) stay unrecorded
        out = out[:idx]
        sample_times = sample_times[:idx]
    return state, DensitySeries(sample_times, out)


def _check_coupling_params(lower: IpsParams, upper: IpsParams):
    if lower.shape != upper.shape:
        raise ValueError("both processes must live on the same torus")
    if lower.stirring != upper.stirring or lower.stir_rate != upper.stir_rate:
        raise ValueError("both processes must share the stirring mechanism")
    order = {Model.G2: 0, Model.G1: 1, Model.DECOUPLED: 2}
    if order[lower.model] > order[upper.model] or lower.lam > upper.lam:
        raise ValueError("lower process must have smaller rates (G2 <= G1 <= decoupled, lam_lo <= lam_hi)")


def run_coupled(pair: CoupledPair, params: IpsParams, t_end: float,
                upper_params: IpsParams | None = None, check_order: bool = True) -> CoupledPair:
    """Drive both members of ``pair`` with the same uniformized clocks.

    ``upper_params`` (default: ``params``) may raise the birth rate or switch
    to a dominating model; this gives the parameter-order and domination
    couplings.  Raises :class:`CouplingViolation` if order is ever lost.
    """
    upper_params = params if upper_params is None else upper_params
    _check_coupling_params(params, upper_params)
    lat = lattice_for(params)
    if not pair.ordered:
        raise CouplingViolation("pair is not ordered")
    c_star = max(max_flip_rate(params), max_flip_rate(upper_params))
    rng = make_rng(pair.shared_clock_seed, pair.rings)
    lo, hi = pair.lower._flat, pair.upper._flat
    mode, srate = _stir_args(params)
    t, rings, status = _coupled_run(lo, hi, lat.hood, lat.hood_len, lat.bonds,
                                    _MODEL_CODE[params.model], float(params.lam),
                                    _MODEL_CODE[upper_params.model], float(upper_params.lam),
                                    mode, srate, float(c_star), float(pair.lower.time),
                                    float(t_end), rng, check_order)
    pair.lower._bound = pair.upper._bound = None  # trees are stale now
    pair.rings += rings
    if status == VIOLATION:
        raise CouplingViolation(f"order lost at t={t:.6g}")
    pair.lower.time = pair.upper.time = float(t_end)
    return pair


@numba.njit(cache=True)
def _replica_run(init_flat, hood, hood_len, bonds, model, lam, stir_mode, stir_rate, size,
                 t_end, rng, sample_times, out):
    flat = init_flat.copy()
    tree = _build_tree(flat, hood, hood_len, model, lam, size)
    t, events, status, idx = _fast_run(flat, tree, size, hood, hood_len, bonds, model, lam,
                                       stir_mode, stir_rate, 0.0, t_end, np.iinfo(np.int64).max,
                                       rng, sample_times, out, 0)
    return flat, t, status


@dataclass
class ReplicaBatch:
    """Output of :func:`simulate_replicas`.

    ``densities`` has shape ``(replicas, len(times), 4)`` with columns any,
    both, male, female.  ``extinction_times`` is ``inf`` for runs that were
    still alive at ``t_end``.
    """

    times: np.ndarray
    densities: np.ndarray
    finals: np.ndarray
    extinction_times: np.ndarray


def simulate_replicas(params: IpsParams, init, t_end: float, replicas: int, seed: int = 0,
                      n_samples: int = N_SAMPLES, sample_times=None) -> ReplicaBatch:
    """Independent runs, replica ``r`` driven by the stream keyed ``(seed, r)``.

    ``init`` is either a configuration or a callable ``init(rng)`` that draws
    one from the replica's own stream (used for random initial data).  A
    fixed initial configuration run can be replayed exactly through
    :class:`IpsState` and :func:`run_until`.
    """
    lat = lattice_for(params)
    times = np.linspace(0.0, t_end, n_samples) if sample_times is None else np.asarray(sample_times, float)
    dens = np.zeros((replicas, len(times), 4))
    finals = np.zeros((replicas,) + params.shape + (2,), dtype=np.int8)
    ext = np.full(replicas, np.inf)
    mode, srate = _stir_args(params)
    model, lam = _MODEL_CODE[params.model], float(params.lam)
    size = _tree_size(2 * lat.n_sites)
    fixed = None if callable(init) else as_flat(np.asarray(init, dtype=np.int8))
    if fixed is not None and fixed.shape[0] != lat.n_sites:
        raise ValueError("configuration does not fit the torus in params")
    for r in range(replicas):
        rng = make_rng(seed, r)
        init_flat = fixed if fixed is not None else as_flat(init(rng))
        flat, t, status = _replica_run(init_flat, lat.hood, lat.hood_len, lat.bonds, model, lam,
                                       mode, srate, size, float(t_end), rng, times, dens[r])
        finals[r] = flat.reshape(params.shape + (2,))
        if status == ABSORBED:
            ext[r] = t
    return ReplicaBatch(times, dens, finals, ext)


def final_states(params: IpsParams, init, t_end: float, replicas: int, seed: int = 0) -> np.ndarray:
    """Encoded configurations at ``t_end`` for many replicas (tiny tori)."""
    finals = simulate_replicas(params, init, t_end, replicas, seed, n_samples=1).finals
    n = params.n_sites
    flat = finals.reshape(replicas, n, 2).astype(np.int64)
    codes = 2 * flat[:, :, 0] + flat[:, :, 1]
    return codes @ (4 ** np.arange(n))

"""Event engine, couplings and replica runs."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.linalg import expm

from dioecious.ips import (AbsorbingState, CoupledPair, CouplingViolation, IpsParams, IpsState,
                           Model, Stirring, as_flat, decode, encode, exact_generator_matrix,
                           final_states, full_config, make_rng, random_config, run_coupled,
                           run_until, simulate_replicas, step_event, total_rate)


def state_of(cfg, seed=0):
    return IpsState.new(np.array(cfg, dtype=np.int8), seed=seed)


class TestStepEvent:
    def test_all_empty_is_absorbing(self):
        params = IpsParams(2.0, Model.G1, torus_side=4)
        with pytest.raises(AbsorbingState):
            step_event(state_of(np.zeros((4, 2))), params)

    def test_pure_death_two_sites(self):
        params = IpsParams(0.0, Model.G2, torus_side=2)
        n = 4000
        waits, male = np.empty(n), 0
        for k in range(n):
            s = step_event(state_of([[1, 1], [0, 0]], seed=k), params)
            waits[k] = s.time
            male += int(s.config[0, 0] == 0)
            assert s.config.sum() == 1 and s.event_count == 1
        assert stats.kstest(waits, "expon", args=(0, 0.5)).pvalue > 1e-3
        assert abs(male / n - 0.5) < 4 * np.sqrt(0.25 / n)

    @pytest.mark.parametrize("params", [
        IpsParams(3.0, Model.G2, Stirring.LILY_PAD, eps=0.5, torus_side=2),
        IpsParams(1.5, Model.G1, Stirring.INDIVIDUAL, eps=0.8, torus_side=3),
        IpsParams(0.7, Model.DECOUPLED, torus_side=3),
    ])
    def test_generator_fidelity(self, params):
        """Chi-square on the jump chain out of one state plus the mean sojourn."""
        Q = exact_generator_matrix(params)
        start = decode(np.argmin(np.diag(Q)), params)  # busiest state
        i = encode(start)
        n = 10_000
        targets = np.empty(n, dtype=np.int64)
        waits = np.empty(n)
        for k in range(n):
            s = step_event(state_of(start, seed=k), params)
            targets[k] = encode(s.config)
            waits[k] = s.time
        rate = -Q[i, i]
        support = np.flatnonzero(Q[i] > 0)
        assert set(np.unique(targets)) <= set(support)
        observed = np.array([(targets == j).sum() for j in support])
        expected = n * Q[i, support] / rate
        assert stats.chisquare(observed, expected).pvalue > 0.01
        assert abs(waits.mean() * rate - 1.0) < 4.0 / np.sqrt(n)

    def test_incremental_total_rate_matches_scratch(self):
        params = IpsParams(1.7, Model.G1, Stirring.LILY_PAD, eps=0.9, torus_side=6, dim=2)
        rng = make_rng(5)
        s = state_of(random_config(params, rng, 0.5), seed=1)
        for _ in range(300):
            if s.is_empty:
                break
            step_event(s, params)
            scratch = total_rate(s.config, params)
            assert s.incremental_total_rate(params) == pytest.approx(scratch, rel=1e-9)

    @pytest.mark.parametrize("stirring", [Stirring.LILY_PAD, Stirring.INDIVIDUAL])
    def test_stirring_preserves_sex_counts(self, stirring):
        # lam = 0 and huge stir rate: almost every event is a swap
        params = IpsParams(0.0, Model.G2, stirring, eps=1e-3, torus_side=10)
        s = state_of(random_config(params, make_rng(3), 0.5), seed=2)
        before = s.config.sum(axis=0).copy()
        run_until(s, params, 1e-4)
        assert s.event_count > 50
        # deaths occur at rate <= 20 over 1e-4, so almost surely none
        np.testing.assert_array_equal(s.config.sum(axis=0), before)

    def test_lily_pad_moves_whole_pairs(self):
        params = IpsParams(0.0, Model.G2, Stirring.LILY_PAD, eps=1e-3, torus_side=6)
        cfg = np.zeros((6, 2), dtype=np.int8)
        cfg[0] = (1, 1)
        cfg[3] = (1, 0)
        s = state_of(cfg, seed=4)
        run_until(s, params, 1e-4)
        codes = sorted((2 * s.config[:, 0] + s.config[:, 1]).tolist())
        assert codes == [0, 0, 0, 0, 2, 3]


class TestRunUntil:
    def test_density_grid(self):
        params = IpsParams(2.0, Model.G1, torus_side=16)
        s, series = run_until(state_of(full_config(params)), params, 2.0, n_samples=5)
        np.testing.assert_allclose(series.times, np.linspace(0, 2, 5))
        assert series.density_any[0] == 1.0 and series.density_both[0] == 1.0
        assert np.all(series.density_both <= series.density_any)
        assert s.time == 2.0

    def test_t_end_before_time(self):
        params = IpsParams(2.0, torus_side=4)
        s = state_of(full_config(params))
        s.time = 1.0
        with pytest.raises(ValueError):
            run_until(s, params, 0.5)

    def test_replay_is_bit_exact(self):
        params = IpsParams(1.2, Model.G1, Stirring.INDIVIDUAL, eps=0.5, torus_side=12)
        cfg = random_config(params, make_rng(9), 0.6)
        a, sa = run_until(state_of(cfg, seed=11), params, 3.0)
        b, sb = run_until(state_of(cfg, seed=11), params, 3.0)
        np.testing.assert_array_equal(a.config, b.config)
        np.testing.assert_array_equal(sa.values, sb.values)
        assert a.event_count == b.event_count

    def test_absorbed_run_jumps_to_horizon(self):
        params = IpsParams(0.0, torus_side=4)
        cfg = np.zeros((4, 2), dtype=np.int8)
        cfg[0, 0] = 1
        s, _ = run_until(state_of(cfg), params, 50.0)
        assert s.is_empty and s.time == 50.0


class TestCoupling:
    def test_empty_lower_stays_empty(self):
        params = IpsParams(2.0, Model.G1, torus_side=8)
        pair = CoupledPair(state_of(np.zeros((8, 2))), state_of(full_config(params)), 3)
        run_coupled(pair, params, 5.0)
        assert pair.lower.is_empty and pair.ordered

    def test_equal_start_identical_paths(self):
        params = IpsParams(2.0, Model.G1, Stirring.LILY_PAD, eps=0.7, torus_side=8)
        cfg = random_config(params, make_rng(1), 0.7)
        pair = CoupledPair(state_of(cfg), state_of(cfg), 21)
        run_coupled(pair, params, 10.0)
        np.testing.assert_array_equal(pair.lower.config, pair.upper.config)

    def test_unordered_pair_rejected(self):
        a = np.zeros((4, 2), dtype=np.int8)
        b = a.copy()
        a[0, 0] = 1
        with pytest.raises(ValueError):
            CoupledPair(state_of(a), state_of(b))

    def test_bad_parameter_order_rejected(self):
        params = IpsParams(2.0, Model.G1, torus_side=4)
        pair = CoupledPair(state_of(np.zeros((4, 2))), state_of(full_config(params)))
        with pytest.raises(ValueError):
            run_coupled(pair, params, 1.0, upper_params=params.replace(lam=1.0))
        with pytest.raises(ValueError):
            run_coupled(pair, params, 1.0, upper_params=params.replace(model=Model.G2))

    def test_violation_is_detected(self):
        params = IpsParams(1.0, Model.G1, torus_side=4)
        pair = CoupledPair(state_of(np.zeros((4, 2))), state_of(full_config(params)))
        pair.lower.config[0, 0] = 1
        pair.upper.config[0, 0] = 0
        with pytest.raises(CouplingViolation):
            run_coupled(pair, params, 1.0)

    @settings(max_examples=40)
    @given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0.1, 3.0),
           stir=st.sampled_from([(Stirring.NONE, None), (Stirring.LILY_PAD, 0.5),
                                 (Stirring.INDIVIDUAL, 0.5)]),
           model=st.sampled_from([Model.G1, Model.G2]))
    def test_initial_order_preserved(self, seed, lam, stir, model):
        params = IpsParams(lam, model, stir[0], eps=stir[1], torus_side=8)
        rng = make_rng(seed)
        hi = random_config(params, rng, 0.7)
        lo = hi & random_config(params, rng, 0.6)
        pair = CoupledPair(state_of(lo), state_of(hi), seed)
        run_coupled(pair, params, 10.0)  # raises on any violation
        assert pair.ordered

    @settings(max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0.1, 2.0), gap=st.floats(0.0, 2.0))
    def test_lambda_order_preserved(self, seed, lam, gap):
        params = IpsParams(lam, Model.G2, torus_side=8)
        cfg = random_config(params, make_rng(seed), 0.7)
        pair = CoupledPair(state_of(cfg), state_of(cfg), seed)
        run_coupled(pair, params, 10.0, upper_params=params.replace(lam=lam + gap))
        assert pair.ordered

    @settings(max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0.05, 1.0))
    def test_decoupled_domination(self, seed, lam):
        params = IpsParams(lam, Model.G1, torus_side=8)
        cfg = random_config(params, make_rng(seed), 0.7)
        pair = CoupledPair(state_of(cfg), state_of(cfg), seed)
        run_coupled(pair, params, 10.0, upper_params=params.replace(model=Model.DECOUPLED))
        assert pair.ordered


class TestReplicas:
    def test_monte_carlo_matches_expm(self):
        params = IpsParams(1.0, Model.G1, Stirring.LILY_PAD, eps=1.0, torus_side=2)
        start = np.array([[1, 1], [0, 1]], dtype=np.int8)
        n = 20_000
        codes = final_states(params, start, 1.0, n, seed=3)
        exact = expm(exact_generator_matrix(params))[encode(start)]
        emp = np.bincount(codes, minlength=16) / n
        tv = 0.5 * np.abs(emp - exact).sum()
        assert tv < 3.0 * np.sqrt(1.0 / n) * np.sqrt(16)

    def test_callable_init_uses_replica_stream(self):
        params = IpsParams(1.0, torus_side=6)
        seen = []

        def init(rng):
            cfg = random_config(params, rng, 0.5)
            seen.append(cfg.copy())
            return cfg

        simulate_replicas(params, init, 0.1, 3, seed=8)
        again = [random_config(params, make_rng(8, r), 0.5) for r in range(3)]
        for a, b in zip(seen, again):
            np.testing.assert_array_equal(a, b)

    def test_extinction_times_recorded(self):
        params = IpsParams(0.0, torus_side=4)
        batch = simulate_replicas(params, full_config(params), 100.0, 5, seed=0, n_samples=3)
        assert np.all(np.isfinite(batch.extinction_times))
        assert np.all(batch.finals == 0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            simulate_replicas(IpsParams(1.0, torus_side=4), np.ones((5, 2), np.int8), 1.0, 1)

    def test_as_flat_validates(self):
        with pytest.raises(ValueError):
            as_flat(np.full((3, 2), 2))

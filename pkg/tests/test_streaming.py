import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rdwo.core import (
    EstimatorConfig,
    NoSupportError,
    Sample,
    batch_weights,
    batch_weights_arrays,
    estimate,
    optimal_objective,
)
from rdwo.streaming import (
    Absorbed,
    LedgerDisabledError,
    RecursiveState,
    Skipped,
    StreamingGrid,
)

CFG = EstimatorConfig(delta=1.0, l1=1.0)
HAND = [Sample(1, -0.5, 1.0), Sample(2, 0.2, 2.0), Sample(3, 2.0, 100.0)]


@st.composite
def streams(draw, min_n=1, max_n=25):
    n = draw(st.integers(min_n, max_n))
    phis = draw(st.lists(st.floats(-3.0, 3.0), min_size=n, max_size=n))
    ys = draw(st.lists(st.floats(-10.0, 10.0), min_size=n, max_size=n))
    x = draw(st.floats(-2.0, 2.0))
    delta = draw(st.floats(0.05, 2.0))
    samples = [Sample(k + 1, p, y) for k, (p, y) in enumerate(zip(phis, ys))]
    return x, samples, EstimatorConfig(delta=delta, l1=1.0)


class TestRecursiveState:
    def test_hand_sequence(self):
        state = RecursiveState(0.0, CFG)
        first = state.update(HAND[0])
        assert isinstance(first, Absorbed)
        assert first.reweight == 0.0 and first.new_weight == 1.0
        assert state.estimate == 1.0

        second = state.update(HAND[1])
        assert isinstance(second, Absorbed)
        assert math.isclose(second.reweight, 0.5 / 1.3, rel_tol=1e-12)
        assert second.new_weight == 1.0 - second.reweight

        third = state.update(HAND[2])
        assert isinstance(third, Skipped)

        assert state.n_seen == 3 and state.n_active == 2
        assert abs(state.estimate - 21.0 / 13.0) <= 1e-12
        batch = estimate(batch_weights(0.0, HAND, CFG), HAND)
        assert math.isclose(state.estimate, batch, rel_tol=1e-12)

    def test_fourth_sample_rescale(self):
        state = RecursiveState(0.0, CFG)
        for s in HAND:
            state.update(s)
        outcome = state.update(Sample(4, 0.1, 5.0))
        assert isinstance(outcome, Absorbed)
        # margin 0.9 joins support 1.3, so the old weights shrink by 1.3/2.2
        assert math.isclose(outcome.reweight, 1.3 / 2.2, rel_tol=1e-12)
        assert math.isclose(outcome.new_weight, 0.9 / 2.2, rel_tol=1e-12)
        assert math.isclose(state.support_sum, 2.2, rel_tol=1e-12)

    def test_estimate_is_none_before_any_absorption(self):
        state = RecursiveState(0.0, CFG)
        assert state.estimate is None
        state.update(Sample(1, 9.0, 3.0))
        assert state.estimate is None
        assert state.n_seen == 1 and state.n_active == 0

    def test_boundary_sample_is_skipped(self):
        state = RecursiveState(0.0, CFG)
        assert isinstance(state.update(Sample(1, 1.0, 3.0)), Skipped)

    def test_rescale_factor_stays_below_one(self):
        # A margin this small vanishes when added to the running sum; the
        # guard must keep the factor strictly inside [0, 1).
        state = RecursiveState(0.0, CFG)
        state.update(Sample(1, 0.0, 1.0))
        state.update(Sample(2, 0.0, 1.0))
        assert state.support_sum == 2.0
        tiny_phi = 0.9999999999999999
        outcome = state.update(Sample(3, tiny_phi, 100.0))
        assert isinstance(outcome, Absorbed)
        assert 0.0 < outcome.reweight < 1.0
        assert outcome.new_weight > 0.0
        assert math.isfinite(state.estimate)

    @given(streams())
    @settings(max_examples=100)
    def test_prefixes_match_batch(self, stream):
        x, samples, config = stream
        state = RecursiveState(x, config)
        for k in range(len(samples)):
            state.update(samples[k])
            prefix = samples[: k + 1]
            try:
                batch = estimate(batch_weights(x, prefix, config), prefix)
            except NoSupportError:
                assert state.estimate is None
                continue
            rel = abs(state.estimate - batch) / max(abs(batch), 1e-300)
            assert rel <= 1e-10 or abs(state.estimate - batch) <= 1e-12

    @given(streams(min_n=2), st.randoms(use_true_random=False))
    @settings(max_examples=75)
    def test_order_invariance(self, stream, rnd):
        x, samples, config = stream
        assume(any(abs(x - s.phi) < config.delta for s in samples))
        state = RecursiveState(x, config)
        for s in samples:
            state.update(s)
        shuffled = list(samples)
        rnd.shuffle(shuffled)
        other = RecursiveState(x, config)
        for s in shuffled:
            other.update(s)
        rel = abs(state.estimate - other.estimate) / max(abs(state.estimate), 1e-300)
        assert rel <= 1e-10 or abs(state.estimate - other.estimate) <= 1e-12

    @given(streams())
    @settings(max_examples=100)
    def test_rescale_invariants(self, stream):
        x, samples, config = stream
        state = RecursiveState(x, config)
        absorbed = 0
        for s in samples:
            outcome = state.update(s)
            if isinstance(outcome, Skipped):
                continue
            absorbed += 1
            assert 0.0 <= outcome.reweight < 1.0
            assert (outcome.reweight == 0.0) == (absorbed == 1)
            assert outcome.new_weight == 1.0 - outcome.reweight


class TestWeightsSnapshot:
    def test_hand_snapshot(self):
        state = RecursiveState(0.0, CFG, diagnostics=True)
        for s in HAND + [Sample(4, 0.1, 5.0)]:
            state.update(s)
        snap = state.weights_snapshot()
        np.testing.assert_allclose(
            snap.weights,
            [0.5 / 2.2, 0.8 / 2.2, 0.0, 0.9 / 2.2],
            rtol=0,
            atol=1e-15,
        )
        assert snap.weights[2] == 0.0
        assert snap.active.members == (1, 2, 4)

    def test_matches_batch_weights(self):
        rng = np.random.default_rng(21)
        phis = rng.uniform(-2, 2, 500)
        ys = rng.normal(0, 1, 500)
        config = EstimatorConfig(delta=0.5, l1=1.0)
        state = RecursiveState(0.25, config, diagnostics=True)
        for k, (p, y) in enumerate(zip(phis, ys), start=1):
            state.update(Sample(k, float(p), float(y)))
        snap = state.weights_snapshot()
        sol = batch_weights_arrays(0.25, phis, config)
        scale = np.maximum(np.abs(sol.weights), 1e-300)
        assert float(np.max(np.abs(snap.weights - sol.weights) / scale)) <= 1e-12
        assert math.isclose(
            snap.objective, optimal_objective_of_arrays(0.25, phis, config), rel_tol=1e-12
        )

    def test_requires_diagnostics(self):
        state = RecursiveState(0.0, CFG)
        state.update(HAND[0])
        with pytest.raises(LedgerDisabledError):
            state.weights_snapshot()

    def test_requires_support(self):
        state = RecursiveState(0.0, CFG, diagnostics=True)
        with pytest.raises(NoSupportError):
            state.weights_snapshot()


def optimal_objective_of_arrays(x, phis, config):
    samples = [Sample(k + 1, float(p), 0.0) for k, p in enumerate(phis)]
    return optimal_objective(x, samples, config)


class TestStreamingGrid:
    def test_bit_identical_to_scalar_states(self):
        rng = np.random.default_rng(4)
        phis = rng.uniform(-3, 3, 400)
        ys = rng.normal(0, 2, 400)
        xs = np.linspace(-2, 2, 9)
        config = EstimatorConfig(delta=0.35, l1=1.0)
        grid = StreamingGrid(xs, config)
        scalars = [RecursiveState(float(x), config) for x in xs]
        for k, (p, y) in enumerate(zip(phis, ys), start=1):
            grid.update(float(p), float(y))
            for st_ in scalars:
                st_.update(Sample(k, float(p), float(y)))
        ests = grid.estimates()
        for i, st_ in enumerate(scalars):
            if st_.estimate is None:
                assert math.isnan(ests[i])
            else:
                assert ests[i] == st_.estimate
            assert grid.support_sum[i] == st_.support_sum
            assert grid.support_sq_sum[i] == st_.support_sq_sum
            assert grid.n_active[i] == st_.n_active

    @given(streams(min_n=1, max_n=30))
    @settings(max_examples=50)
    def test_bit_identical_small_streams(self, stream):
        x, samples, config = stream
        grid = StreamingGrid(np.array([x]), config)
        scalar = RecursiveState(x, config)
        for s in samples:
            grid.update(s.phi, s.y)
            scalar.update(s)
        est = grid.estimates()[0]
        if scalar.estimate is None:
            assert math.isnan(est)
        else:
            assert est == scalar.estimate

    def test_objectives_and_counts(self):
        grid = StreamingGrid(np.array([0.0, 10.0]), CFG)
        grid.update(-0.5, 1.0)
        grid.update(0.2, 2.0)
        objs = grid.objectives()
        assert math.isclose(objs[0], math.sqrt(0.89), rel_tol=1e-12)
        assert math.isnan(objs[1])
        assert list(grid.active_counts()) == [2, 0]
        assert grid.n_seen == 2

    def test_extend_matches_update_loop(self):
        rng = np.random.default_rng(8)
        phis = rng.uniform(-1, 1, 50)
        ys = rng.normal(0, 1, 50)
        xs = np.array([-0.5, 0.0, 0.5])
        a = StreamingGrid(xs, CFG)
        a.extend(phis, ys)
        b = StreamingGrid(xs, CFG)
        for p, y in zip(phis, ys):
            b.update(float(p), float(y))
        assert np.array_equal(a.estimates(), b.estimates(), equal_nan=True)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            StreamingGrid(np.array([]), CFG)
        with pytest.raises(ValueError):
            StreamingGrid(np.array([0.0, math.nan]), CFG)
        grid = StreamingGrid(np.array([0.0]), CFG)
        with pytest.raises(ValueError):
            grid.update(math.nan, 1.0)
        assert grid.n_seen == 0

    def test_grid_is_readonly(self):
        grid = StreamingGrid(np.array([0.0, 1.0]), CFG)
        with pytest.raises(ValueError):
            grid.xs[0] = 5.0

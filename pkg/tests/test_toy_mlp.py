"""Toy MLP training, gradients, dropout, and ensembles."""

from dataclasses import replace

import numpy as np
import pytest

from qipf.errors import InvalidArgumentError, TrainingFailureError
from qipf.shift_lab import make_sine_dataset
from qipf.toy_mlp import (
    TrainConfig,
    ensemble_uncertainty,
    init_model,
    loss_and_grads,
    model_to_bundle,
    predict,
    train,
)


@pytest.fixture(scope="module")
def dataset():
    return make_sine_dataset(n_train=120, seed=0, noise_sd=0.1)


def fd_gradient_check(model, xs, ys, l2, h=1e-5):
    """Central-difference loss gradients over every parameter."""
    _, gw, gb = loss_and_grads(model, xs, ys, l2)
    worst = 0.0
    for li in range(len(model.weights)):
        for idx in np.ndindex(model.weights[li].shape):
            wp = [w.copy() for w in model.weights]
            wm = [w.copy() for w in model.weights]
            wp[li][idx] += h
            wm[li][idx] -= h
            lp, _, _ = loss_and_grads(replace(model, weights=tuple(wp)), xs, ys, l2)
            lm, _, _ = loss_and_grads(replace(model, weights=tuple(wm)), xs, ys, l2)
            fd = (lp - lm) / (2 * h)
            worst = max(worst, abs(fd - gw[li][idx]) / max(1e-8, abs(fd)))
        for idx in np.ndindex(model.biases[li].shape):
            bp = [b.copy() for b in model.biases]
            bm = [b.copy() for b in model.biases]
            bp[li][idx] += h
            bm[li][idx] -= h
            lp, _, _ = loss_and_grads(replace(model, biases=tuple(bp)), xs, ys, l2)
            lm, _, _ = loss_and_grads(replace(model, biases=tuple(bm)), xs, ys, l2)
            fd = (lp - lm) / (2 * h)
            worst = max(worst, abs(fd - gb[li][idx]) / max(1e-8, abs(fd)))
    return worst


class TestGradients:
    def test_small_network_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        xs = rng.uniform(-1, 1, 8)
        ys = rng.uniform(-1, 1, 8)
        model = init_model((1, 4, 1), seed=3)
        assert fd_gradient_check(model, xs, ys, l2=0.01) < 1e-5

    def test_multiple_seeds(self):
        for seed in range(5):
            rng = np.random.default_rng(seed + 100)
            xs = rng.uniform(-1, 1, 6)
            ys = rng.uniform(-1, 1, 6)
            model = init_model((1, 3, 2, 1), seed=seed)
            assert fd_gradient_check(model, xs, ys, l2=0.05) < 1e-5


class TestTrain:
    def test_zero_epochs_returns_seeded_init(self, dataset):
        trained = train(dataset, model_init_seed=7, l2=0.0, config=TrainConfig(epochs=0))
        fresh = init_model(seed=7)
        for a, b in zip(trained.weights, fresh.weights):
            np.testing.assert_array_equal(a, b)

    def test_loss_decreases(self, dataset):
        cfg = TrainConfig(epochs=100, seed=0)
        model = train(dataset, model_init_seed=0, l2=0.0, config=cfg)
        init = init_model(seed=0)
        loss0, _, _ = loss_and_grads(init, dataset.train_xs, dataset.train_ys, 0.0)
        loss1, _, _ = loss_and_grads(model, dataset.train_xs, dataset.train_ys, 0.0)
        assert loss1 <= loss0

    def test_noiseless_linear_target_fits(self):
        # regression test: fixed seed, 200 epochs reaches MSE < 1e-2
        ds = make_sine_dataset(n_train=60, seed=5, noise_sd=0.0)
        linear = replace(ds, ys=0.5 * ds.xs)
        model = train(
            linear, model_init_seed=1, l2=0.0,
            config=TrainConfig(epochs=200, seed=1), layer_sizes=(1, 20, 1),
        )
        mse, _, _ = loss_and_grads(model, linear.train_xs, linear.train_ys, 0.0)
        assert mse < 1e-2

    def test_determinism_bitwise(self, dataset):
        cfg = TrainConfig(epochs=50, seed=9)
        a = train(dataset, model_init_seed=9, l2=0.01, config=cfg)
        b = train(dataset, model_init_seed=9, l2=0.01, config=cfg)
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)
        for ba, bb in zip(a.biases, b.biases):
            np.testing.assert_array_equal(ba, bb)

    def test_l2_shrinks_weight_norm(self, dataset):
        cfg = TrainConfig(epochs=300, seed=2)
        free = train(dataset, model_init_seed=2, l2=0.0, config=cfg)
        shrunk = train(dataset, model_init_seed=2, l2=0.2, config=cfg)
        assert shrunk.weight_norm_sq() < free.weight_norm_sq()

    def test_divergence_raises_with_epoch(self, dataset):
        # tanh keeps activations bounded, so overflow needs an absurd step size
        cfg = TrainConfig(epochs=10, learning_rate=1e200, seed=0)
        with pytest.raises(TrainingFailureError) as err:
            train(dataset, model_init_seed=0, l2=0.0, config=cfg)
        assert err.value.epoch is not None

    def test_negative_l2_rejected(self, dataset):
        with pytest.raises(InvalidArgumentError):
            train(dataset, model_init_seed=0, l2=-0.1, config=TrainConfig(epochs=1))

    def test_minibatch_training_runs(self, dataset):
        cfg = TrainConfig(epochs=5, seed=0, batch_size=32)
        model = train(dataset, model_init_seed=0, l2=0.0, config=cfg)
        assert all(np.all(np.isfinite(w)) for w in model.weights)


class TestPredict:
    def test_zero_dropout_rate_gives_identical_rows(self, dataset):
        model = init_model((1, 8, 1), seed=4, dropout_rate=0.0)
        out = predict(model, dataset.grid_xs, dropout_samples=5, seed=1)
        assert out.shape == (5, dataset.grid_xs.size)
        for row in out[1:]:
            np.testing.assert_array_equal(row, out[0])

    def test_deterministic_single_pass(self, dataset):
        model = init_model((1, 8, 1), seed=4)
        a = predict(model, dataset.grid_xs)
        b = predict(model, dataset.grid_xs)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (1, dataset.grid_xs.size)

    def test_mc_dropout_spread_positive(self, dataset):
        model = init_model((1, 32, 32, 1), seed=4, dropout_rate=0.1)
        out = predict(model, dataset.grid_xs, dropout_samples=100, seed=3)
        assert out.shape[0] == 100
        assert out.std(axis=0).mean() > 0

    def test_mc_dropout_seeded(self, dataset):
        model = init_model((1, 8, 1), seed=4, dropout_rate=0.2)
        a = predict(model, dataset.grid_xs, dropout_samples=10, seed=5)
        b = predict(model, dataset.grid_xs, dropout_samples=10, seed=5)
        np.testing.assert_array_equal(a, b)


class TestEnsemble:
    CFG = TrainConfig(epochs=20, seed=0)

    def test_identical_seeds_give_zero_std(self, dataset):
        # members are bitwise identical; std is zero up to mean round-off
        std = ensemble_uncertainty(dataset, T=3, l2=0.0, config=self.CFG, seeds=[1, 1, 1])
        np.testing.assert_allclose(std, 0.0, atol=1e-12)
        std2 = ensemble_uncertainty(dataset, T=2, l2=0.0, config=self.CFG, seeds=[1, 1])
        np.testing.assert_array_equal(std2, np.zeros_like(std2))

    def test_two_member_ensemble_is_half_gap(self, dataset):
        std = ensemble_uncertainty(dataset, T=2, l2=0.0, config=self.CFG)
        m1 = train(dataset, model_init_seed=0, l2=0.0, config=self.CFG)
        m2 = train(dataset, model_init_seed=1, l2=0.0, config=replace(self.CFG, seed=1))
        gap = np.abs(predict(m1, dataset.grid_xs)[0] - predict(m2, dataset.grid_xs)[0])
        np.testing.assert_allclose(std, gap / 2.0, rtol=1e-12)

    def test_needs_at_least_two(self, dataset):
        with pytest.raises(InvalidArgumentError):
            ensemble_uncertainty(dataset, T=1, l2=0.0, config=self.CFG)


class TestBundleExport:
    def test_round_trip_through_qwb(self, tmp_path):
        from qipf.weight_ingest import load_bundle, save_bundle

        model = init_model((1, 5, 1), seed=8)
        bundle = model_to_bundle(model)
        assert bundle.total_params() == (1 * 5 + 5) + (5 * 1 + 1)
        path = tmp_path / "toy.qwb"
        save_bundle(bundle, path)
        again = load_bundle(path)
        assert [l.name for l in again.layers] == [l.name for l in bundle.layers]
        # float32 storage: values agree to float32 resolution
        for a, b in zip(bundle.layers, again.layers):
            np.testing.assert_allclose(a.values, b.values, atol=1e-7)

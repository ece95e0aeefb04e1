"""Minimal fully-connected regressor: tanh hidden layers, Adam, L2 penalty.

Just enough network to train the toy sine task, run MC-dropout forward
passes, and build deep-ensemble spreads.  Training is full-batch by
default so runs are deterministic for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, TrainingFailureError
from .shift_lab import SineDataset
from .weight_ingest import Layer, WeightBundle

__all__ = [
    "MlpModel",
    "TrainConfig",
    "init_model",
    "loss_and_grads",
    "train",
    "predict",
    "ensemble_uncertainty",
    "model_to_bundle",
]

DEFAULT_LAYER_SIZES = (1, 100, 100, 100, 1)


@dataclass(frozen=True)
class MlpModel:
    """Dense network parameters; hidden activations are tanh, output linear."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    l2_coeff: float = 0.0
    dropout_rate: float = 0.0

    def __post_init__(self):
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise InvalidArgumentError("parameter count does not match layer_sizes")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            n_in, n_out = self.layer_sizes[i], self.layer_sizes[i + 1]
            if w.shape != (n_in, n_out) or b.shape != (n_out,):
                raise InvalidArgumentError(f"layer {i}: shape mismatch")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise InvalidArgumentError(f"layer {i}: non-finite parameters")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise InvalidArgumentError("dropout_rate must lie in [0, 1)")
        if self.l2_coeff < 0.0:
            raise InvalidArgumentError("l2_coeff must be >= 0")

    def weight_norm_sq(self) -> float:
        return float(sum((w * w).sum() for w in self.weights))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 2000
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 0  # 0 = full batch
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise InvalidArgumentError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise InvalidArgumentError("learning_rate must be > 0")


def init_model(
    layer_sizes=DEFAULT_LAYER_SIZES,
    seed: int = 0,
    l2_coeff: float = 0.0,
    dropout_rate: float = 0.0,
) -> MlpModel:
    """Seeded init: weights ~ N(0, 1/fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in layer_sizes)
    weights = []
    biases = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, 1.0 / math.sqrt(n_in), (n_in, n_out)))
        biases.append(np.zeros(n_out))
    return MlpModel(
        layer_sizes=sizes,
        weights=tuple(weights),
        biases=tuple(biases),
        l2_coeff=l2_coeff,
        dropout_rate=dropout_rate,
    )


def _forward(model: MlpModel, x: np.ndarray):
    """Forward pass keeping post-activation values for backprop."""
    acts = [x]
    a = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        a = z if i == last else np.tanh(z)
        acts.append(a)
    return acts


def loss_and_grads(model: MlpModel, xs, ys, l2: float):
    """MSE + l2 * sum ||W||^2 and its gradients by backprop.

    The L2 penalty applies to weights only, not biases.
    """
    x = np.asarray(xs, dtype=np.float64).reshape(-1, 1)
    y = np.asarray(ys, dtype=np.float64).reshape(-1, 1)
    n = x.shape[0]
    acts = _forward(model, x)
    pred = acts[-1]
    resid = pred - y
    loss = float((resid * resid).mean()) + l2 * model.weight_norm_sq()

    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    delta = 2.0 * resid / n
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta + 2.0 * l2 * model.weights[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            # tanh'(z) = 1 - tanh(z)^2, and acts[i] already holds tanh(z)
            delta = (delta @ model.weights[i].T) * (1.0 - acts[i] * acts[i])
    return loss, grads_w, grads_b


def train(
    dataset: SineDataset,
    model_init_seed: int,
    l2: float,
    config: TrainConfig,
    layer_sizes=DEFAULT_LAYER_SIZES,
    dropout_rate: float = 0.0,
) -> MlpModel:
    """Adam on the dataset's training pairs; returns the trained model."""
    if l2 < 0:
        raise InvalidArgumentError("l2 must be >= 0")
    xs = dataset.train_xs
    ys = dataset.train_ys
    if xs.size == 0:
        raise InvalidArgumentError("dataset has no training points")
    model = init_model(layer_sizes, seed=model_init_seed, l2_coeff=l2, dropout_rate=dropout_rate)
    if config.epochs == 0:
        return model

    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    params = weights + biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(config.seed)
    step = 0
    for epoch in range(config.epochs):
        if config.batch_size and config.batch_size < xs.size:
            order = rng.permutation(xs.size)
            batches = [
                order[i : i + config.batch_size]
                for i in range(0, xs.size, config.batch_size)
            ]
        else:
            batches = [slice(None)]
        for batch in batches:
            try:
                work = replace(model, weights=tuple(weights), biases=tuple(biases))
            except InvalidArgumentError:
                raise TrainingFailureError(
                    f"parameters became non-finite at epoch {epoch}", epoch=epoch
                ) from None
            with np.errstate(over="ignore", invalid="ignore"):
                loss, gw, gb = loss_and_grads(work, xs[batch], ys[batch], l2)
            if not math.isfinite(loss):
                raise TrainingFailureError(
                    f"loss became non-finite at epoch {epoch}", epoch=epoch
                )
            step += 1
            grads = gw + gb
            b1, b2 = config.adam_beta1, config.adam_beta2
            for j, (p, g) in enumerate(zip(params, grads)):
                m[j] = b1 * m[j] + (1 - b1) * g
                v[j] = b2 * v[j] + (1 - b2) * g * g
                m_hat = m[j] / (1 - b1**step)
                v_hat = v[j] / (1 - b2**step)
                p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return replace(model, weights=tuple(weights), biases=tuple(biases))


def predict(model: MlpModel, xs, dropout_samples: int = 0, seed: int = 0) -> np.ndarray:
    """Forward passes over xs; shape (max(dropout_samples, 1), len(xs)).

    With dropout_samples = S > 0, hidden activations are masked by
    independent Bernoulli(1 - rate) draws scaled by 1/(1 - rate) per pass.
    """
    if dropout_samples < 0:
        raise InvalidArgumentError("dropout_samples must be >= 0")
    x = np.asarray(xs, dtype=np.float64).reshape(-1, 1)
    if dropout_samples == 0:
        return _forward(model, x)[-1].reshape(1, -1)
    rng = np.random.default_rng(seed)
    rate = model.dropout_rate
    keep = 1.0 - rate
    rows = []
    last = len(model.weights) - 1
    for _ in range(dropout_samples):
        a = x
        for i, (w, b) in enumerate(zip(model.weights, model.biases)):
            z = a @ w + b
            if i == last:
                a = z
            else:
                a = np.tanh(z)
                if rate > 0.0:
                    mask = rng.random(a.shape) < keep
                    a = a * mask / keep
        rows.append(a.reshape(-1))
    return np.stack(rows)


def ensemble_uncertainty(
    dataset: SineDataset,
    T: int = 10,
    l2: float = 0.0,
    config: TrainConfig = TrainConfig(),
    seeds=None,
) -> np.ndarray:
    """Per-grid-point std of predictions across T independently seeded models."""
    if T < 2:
        raise InvalidArgumentError("ensemble needs T >= 2")
    if seeds is None:
        seeds = [config.seed + t for t in range(T)]
    elif len(seeds) != T:
        raise InvalidArgumentError("seeds must have length T")
    preds = []
    for s in seeds:
        model = train(dataset, model_init_seed=s, l2=l2, config=replace(config, seed=s))
        preds.append(predict(model, dataset.grid_xs)[0])
    return np.std(np.stack(preds), axis=0)


def model_to_bundle(model: MlpModel) -> WeightBundle:
    """Serialize trained parameters as QWB layers (dense{i}.weight/.bias)."""
    layers = []
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        layers.append(Layer(name=f"dense{i}.weight", shape=w.shape, values=w.ravel()))
        layers.append(Layer(name=f"dense{i}.bias", shape=b.shape, values=b))
    return WeightBundle(
        layers=layers,
        meta={"arch": "x".join(str(s) for s in model.layer_sizes), "activation": "tanh"},
    )

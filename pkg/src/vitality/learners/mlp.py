"""Two-hidden-layer MLP regressor trained full-batch with Adam moments.

The scalar input is rescaled to [0, 1] internally; hidden layers use tanh,
the output is linear. Parameters live in one flat vector so the analytic
gradient can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, NonFiniteLossError, ShapeMismatchError

HIDDEN = (8, 8)
ADAM_B1 = 0.9
ADAM_B2 = 0.999
ADAM_EPS = 1e-8


def layer_sizes(hidden=HIDDEN) -> tuple[int, ...]:
    return (1, *hidden, 1)


def n_params(sizes) -> int:
    return sum(sizes[i] * sizes[i + 1] + sizes[i + 1] for i in range(len(sizes) - 1))


def unflatten(params: np.ndarray, sizes):
    """Split the flat parameter vector into per-layer (W, b) pairs."""
    layers = []
    pos = 0
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        w = params[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = params[pos:pos + fan_out]
        pos += fan_out
        layers.append((w, b))
    return layers


def _forward(params, sizes, t01):
    """Activations per layer for a column of rescaled inputs."""
    acts = [t01.reshape(-1, 1)]
    layers = unflatten(params, sizes)
    for i, (w, b) in enumerate(layers):
        z = acts[-1] @ w + b
        acts.append(z if i == len(layers) - 1 else np.tanh(z))
    return acts


def loss_and_grad(params, sizes, t01, y):
    """Mean squared error and its gradient in the flat parameter order."""
    n = t01.shape[0]
    acts = _forward(params, sizes, t01)
    pred = acts[-1][:, 0]
    resid = pred - y
    loss = float(np.mean(resid**2))

    layers = unflatten(params, sizes)
    grad = np.zeros_like(params)
    glayers = unflatten(grad, sizes)
    delta = (2.0 / n) * resid.reshape(-1, 1)
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        gw, gb = glayers[i]
        gw += acts[i].T @ delta
        gb += delta.sum(axis=0)
        if i > 0:
            delta = (delta @ w.T) * (1.0 - acts[i] ** 2)
    return loss, grad


@dataclass(frozen=True)
class MLPModel:
    sizes: tuple[int, ...]
    params: np.ndarray
    t_min: float
    t_max: float
    epochs: int
    step: float
    seed: int
    loss_history: np.ndarray

    def __post_init__(self):
        self.params.setflags(write=False)
        self.loss_history.setflags(write=False)


def _rescale(t, t_min, t_max):
    return (np.asarray(t, dtype=np.float64) - t_min) / (t_max - t_min)


def fit_mlp(t, y, epochs=2000, step=0.01, seed=0, hidden=HIDDEN) -> MLPModel:
    """Deterministic full-batch Adam fit; loss at the last epoch never
    exceeds the loss at the first."""
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if t.ndim != 1 or t.shape != y.shape:
        raise ShapeMismatchError(f"t {t.shape} incompatible with y {y.shape}")
    if t.shape[0] < 2:
        raise ShapeMismatchError("need at least 2 points")
    t_min, t_max = float(t.min()), float(t.max())
    if t_min == t_max:
        raise DegenerateInputError("all abscissae equal; cannot rescale input")
    t01 = _rescale(t, t_min, t_max)

    sizes = layer_sizes(hidden)
    rng = np.random.default_rng(seed)
    params = np.empty(n_params(sizes), dtype=np.float64)
    pos = 0
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        params[pos:pos + fan_in * fan_out] = rng.normal(
            0.0, 1.0 / np.sqrt(fan_in), fan_in * fan_out
        )
        pos += fan_in * fan_out
        params[pos:pos + fan_out] = 0.0
        pos += fan_out

    m = np.zeros_like(params)
    v = np.zeros_like(params)
    history = np.empty(epochs, dtype=np.float64)
    for epoch in range(1, epochs + 1):
        loss, grad = loss_and_grad(params, sizes, t01, y)
        if not np.isfinite(loss):
            raise NonFiniteLossError(
                f"loss diverged at epoch {epoch} (step={step}, seed={seed})"
            )
        history[epoch - 1] = loss
        m = ADAM_B1 * m + (1.0 - ADAM_B1) * grad
        v = ADAM_B2 * v + (1.0 - ADAM_B2) * grad**2
        mhat = m / (1.0 - ADAM_B1**epoch)
        vhat = v / (1.0 - ADAM_B2**epoch)
        params = params - step * mhat / (np.sqrt(vhat) + ADAM_EPS)

    final_loss, _ = loss_and_grad(params, sizes, t01, y)
    if not np.isfinite(final_loss):
        raise NonFiniteLossError(f"final loss non-finite (step={step}, seed={seed})")
    if final_loss > history[0]:
        raise NonFiniteLossError(
            f"training failed to improve: {final_loss} > first-epoch {history[0]}"
        )
    return MLPModel(
        sizes=sizes, params=params, t_min=t_min, t_max=t_max,
        epochs=epochs, step=step, seed=seed, loss_history=history,
    )


def predict_mlp(model: MLPModel, t) -> float | np.ndarray:
    arr = np.asarray(t, dtype=np.float64)
    t01 = _rescale(arr.reshape(-1), model.t_min, model.t_max)
    pred = _forward(model.params, model.sizes, t01)[-1][:, 0]
    if arr.ndim == 0:
        return float(pred[0])
    return pred

"""One-hidden-layer perceptron trained by full-batch backpropagation.

The network computes hidden_j = f(sum_i w_ij x_i + b_j) and
output_n = g(sum_j rho_jn hidden_j + delta_n). The training loss is the
half-squared error summed over output nodes, averaged over the batch so the
learning rate is batch-size independent. Updates are plain steepest descent
w <- w - phi * dE/dw; no momentum, no mini-batches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


def _tanh(z):
    return np.tanh(z)


def _tanh_deriv(z):
    t = np.tanh(z)
    return 1.0 - t * t


def _logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


def _logistic_deriv(z):
    s = _logistic(z)
    return s * (1.0 - s)


def _linear(z):
    return z


def _linear_deriv(z):
    return np.ones_like(z)


ACTIVATIONS = {
    "tanh": (_tanh, _tanh_deriv),
    "logistic": (_logistic, _logistic_deriv),
    "linear": (_linear, _linear_deriv),
}


@dataclass
class MlpNetwork:
    """Parameters of a [k inputs, m hidden, l outputs] perceptron."""

    layer_sizes: list
    weights_input_hidden: np.ndarray   # (k, m)
    bias_hidden: np.ndarray            # (m,)
    weights_hidden_output: np.ndarray  # (m, l)
    bias_output: np.ndarray            # (l,)
    activation_hidden: str = "tanh"
    activation_output: str = "linear"

    def __post_init__(self):
        k, m, l = self.layer_sizes
        if self.weights_input_hidden.shape != (k, m):
            raise ValueError(f"input-hidden weights must be {(k, m)}")
        if self.bias_hidden.shape != (m,):
            raise ValueError(f"hidden bias must be ({m},)")
        if self.weights_hidden_output.shape != (m, l):
            raise ValueError(f"hidden-output weights must be {(m, l)}")
        if self.bias_output.shape != (l,):
            raise ValueError(f"output bias must be ({l},)")
        for name in (self.activation_hidden, self.activation_output):
            if name not in ACTIVATIONS:
                raise ValueError(f"unknown activation: {name!r}")
        for arr in (self.weights_input_hidden, self.bias_hidden,
                    self.weights_hidden_output, self.bias_output):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network parameters must be finite")

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(
            layer_sizes=list(self.layer_sizes),
            weights_input_hidden=self.weights_input_hidden.copy(),
            bias_hidden=self.bias_hidden.copy(),
            weights_hidden_output=self.weights_hidden_output.copy(),
            bias_output=self.bias_output.copy(),
            activation_hidden=self.activation_hidden,
            activation_output=self.activation_output,
        )


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings.

    learning_rate 0 is allowed (a no-op pass over the epochs) and
    max_epochs 0 skips training entirely; mse_stop halts at the first epoch
    whose training MSE falls to or below it.
    """

    learning_rate: float = 0.01
    max_epochs: int = 50
    mse_stop: float = 0.0
    seed: int = 0
    batch_mode: str = "full-batch"

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.mse_stop < 0:
            raise ValueError(f"mse_stop must be >= 0, got {self.mse_stop}")
        if self.batch_mode != "full-batch":
            raise ValueError(f"only full-batch training is supported, got {self.batch_mode!r}")


def init_network(layer_sizes, seed: int, activation_hidden: str = "tanh",
                 activation_output: str = "linear") -> MlpNetwork:
    """Seeded init: weights uniform in +-1/sqrt(fan_in), biases zero."""
    layer_sizes = [int(s) for s in layer_sizes]
    if len(layer_sizes) != 3 or any(s < 1 for s in layer_sizes):
        raise ValueError(f"layer_sizes must be three integers >= 1, got {layer_sizes}")
    k, m, l = layer_sizes
    rng = np.random.default_rng(seed)
    lim_in = 1.0 / np.sqrt(k)
    lim_out = 1.0 / np.sqrt(m)
    return MlpNetwork(
        layer_sizes=layer_sizes,
        weights_input_hidden=rng.uniform(-lim_in, lim_in, size=(k, m)),
        bias_hidden=np.zeros(m),
        weights_hidden_output=rng.uniform(-lim_out, lim_out, size=(m, l)),
        bias_output=np.zeros(l),
        activation_hidden=activation_hidden,
        activation_output=activation_output,
    )


def _as_batch(x, width: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"{what} must have {width} columns, got shape {arr.shape}")
    return arr


def _forward_batch(net: MlpNetwork, inputs: np.ndarray):
    f, _ = ACTIVATIONS[net.activation_hidden]
    g, _ = ACTIVATIONS[net.activation_output]
    # Divergent training walks through inf on its way to DivergenceError;
    # let the non-finite values flow instead of warning.
    with np.errstate(over="ignore", invalid="ignore"):
        z_hidden = inputs @ net.weights_input_hidden + net.bias_hidden
        hidden = f(z_hidden)
        z_out = hidden @ net.weights_hidden_output + net.bias_output
        return z_hidden, hidden, z_out, g(z_out)


def forward(net: MlpNetwork, x):
    """Single-sample pass; returns (hidden activations, outputs)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.layer_sizes[0],):
        raise ValueError(
            f"input must be a vector of length {net.layer_sizes[0]}, got shape {x.shape}"
        )
    _, hidden, _, out = _forward_batch(net, x[None, :])
    return hidden[0], out[0]


def predict_batch(net: MlpNetwork, inputs) -> np.ndarray:
    """Outputs for a (samples x k) input matrix."""
    inputs = _as_batch(inputs, net.layer_sizes[0], "inputs")
    return _forward_batch(net, inputs)[3]


def loss(net: MlpNetwork, inputs, targets) -> float:
    """Batch-mean of the per-sample half-squared output error."""
    inputs = _as_batch(inputs, net.layer_sizes[0], "inputs")
    targets = _as_batch(targets, net.layer_sizes[2], "targets")
    if inputs.shape[0] == 0:
        raise ValueError("loss requires a nonempty batch")
    if inputs.shape[0] != targets.shape[0]:
        raise ValueError(
            f"sample counts differ: {inputs.shape[0]} inputs vs {targets.shape[0]} targets"
        )
    outputs = _forward_batch(net, inputs)[3]
    with np.errstate(over="ignore", invalid="ignore"):
        per_sample = 0.5 * np.sum((targets - outputs) ** 2, axis=1)
        return float(per_sample.mean())


@dataclass
class Gradients:
    """Loss gradients, shaped exactly like the network parameters."""

    weights_input_hidden: np.ndarray
    bias_hidden: np.ndarray
    weights_hidden_output: np.ndarray
    bias_output: np.ndarray


def gradients(net: MlpNetwork, inputs, targets) -> Gradients:
    """Analytic full-batch gradient of :func:`loss`."""
    inputs = _as_batch(inputs, net.layer_sizes[0], "inputs")
    targets = _as_batch(targets, net.layer_sizes[2], "targets")
    if inputs.shape[0] == 0:
        raise ValueError("gradients requires a nonempty batch")
    if inputs.shape[0] != targets.shape[0]:
        raise ValueError(
            f"sample counts differ: {inputs.shape[0]} inputs vs {targets.shape[0]} targets"
        )
    count = inputs.shape[0]
    _, f_deriv = ACTIVATIONS[net.activation_hidden]
    _, g_deriv = ACTIVATIONS[net.activation_output]

    z_hidden, hidden, z_out, outputs = _forward_batch(net, inputs)
    with np.errstate(over="ignore", invalid="ignore"):
        delta_out = (outputs - targets) * g_deriv(z_out)        # (N, l)
        delta_hidden = (delta_out @ net.weights_hidden_output.T) * f_deriv(z_hidden)
        return Gradients(
            weights_input_hidden=inputs.T @ delta_hidden / count,
            bias_hidden=delta_hidden.sum(axis=0) / count,
            weights_hidden_output=hidden.T @ delta_out / count,
            bias_output=delta_out.sum(axis=0) / count,
        )


def train(net: MlpNetwork, train_set, val_set, config: TrainConfig):
    """Full-batch gradient descent.

    train_set/val_set are (inputs, targets) pairs; val_set may be None.
    Returns (trained network copy, history) where history rows are
    (epoch, train_loss, val_loss-or-None), one per epoch actually run.
    Stops at the first epoch whose training MSE is <= config.mse_stop, or
    at max_epochs. Raises DivergenceError when the loss leaves the finite
    range, reporting the epoch.
    """
    x_train, y_train = train_set
    x_train = _as_batch(x_train, net.layer_sizes[0], "train inputs")
    y_train = _as_batch(y_train, net.layer_sizes[2], "train targets")
    if x_train.shape[0] == 0:
        raise ValueError("train requires a nonempty training set")
    validation = None
    if val_set is not None:
        x_val = _as_batch(val_set[0], net.layer_sizes[0], "val inputs")
        y_val = _as_batch(val_set[1], net.layer_sizes[2], "val targets")
        if x_val.shape[0] > 0:
            validation = (x_val, y_val)

    net = net.copy()
    history = []
    for epoch in range(1, config.max_epochs + 1):
        grads = gradients(net, x_train, y_train)
        net.weights_input_hidden -= config.learning_rate * grads.weights_input_hidden
        net.bias_hidden -= config.learning_rate * grads.bias_hidden
        net.weights_hidden_output -= config.learning_rate * grads.weights_hidden_output
        net.bias_output -= config.learning_rate * grads.bias_output

        train_loss = loss(net, x_train, y_train)
        if not np.isfinite(train_loss):
            raise DivergenceError(f"training diverged at epoch {epoch}")
        val_loss = loss(net, *validation) if validation is not None else None
        history.append((epoch, train_loss, val_loss))
        if train_loss <= config.mse_stop:
            break
    return net, history


HISTORY_CSV_HEADER = "epoch,train_loss,val_loss"


def history_to_csv(history) -> str:
    """Loss-curve CSV; the val column is empty when no validation set ran."""
    lines = [HISTORY_CSV_HEADER]
    for epoch, train_loss, val_loss in history:
        val_text = "" if val_loss is None else repr(float(val_loss))
        lines.append(f"{epoch},{float(train_loss)!r},{val_text}")
    return "\n".join(lines) + "\n"


def network_to_jsonable(net: MlpNetwork) -> dict:
    return {
        "layer_sizes": list(net.layer_sizes),
        "weights_input_hidden": net.weights_input_hidden.tolist(),
        "bias_hidden": net.bias_hidden.tolist(),
        "weights_hidden_output": net.weights_hidden_output.tolist(),
        "bias_output": net.bias_output.tolist(),
        "activation_hidden": net.activation_hidden,
        "activation_output": net.activation_output,
    }


def network_from_jsonable(doc: dict) -> MlpNetwork:
    return MlpNetwork(
        layer_sizes=[int(s) for s in doc["layer_sizes"]],
        weights_input_hidden=np.asarray(doc["weights_input_hidden"], dtype=float),
        bias_hidden=np.asarray(doc["bias_hidden"], dtype=float),
        weights_hidden_output=np.asarray(doc["weights_hidden_output"], dtype=float),
        bias_output=np.asarray(doc["bias_output"], dtype=float),
        activation_hidden=doc["activation_hidden"],
        activation_output=doc["activation_output"],
    )


def network_to_json(net: MlpNetwork) -> str:
    return json.dumps(network_to_jsonable(net), sort_keys=True)


def network_from_json(text: str) -> MlpNetwork:
    return network_from_jsonable(json.loads(text))

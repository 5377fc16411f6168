"""Hybrid PCA -> ANN workflow.

Level 1 reduces the weather variables to the leading principal-component
scores; level 2 regresses SNR on those scores with the backprop perceptron.
All statistics (standardization, eigenvectors, target scaling) come from the
training split only, so held-out evaluation stays leak-free. Targets are
min-max scaled to [-1, 1] for training and unscaled on prediction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import metrics, mlp, pca
from .dataset import ObservationTable

FORMAT_VERSION = 1


@dataclass
class HybridModel:
    """Fitted two-level model plus the provenance needed to reuse it."""

    pca: pca.PcaModel
    k_selected: int
    net: mlp.MlpNetwork
    target_scaling: tuple            # (min, max) of the training targets
    variable_names: list
    provenance: dict

    def __post_init__(self):
        if not 1 <= self.k_selected <= self.pca.n_variables:
            raise ValueError(
                f"k_selected must lie in [1, {self.pca.n_variables}], got {self.k_selected}"
            )
        if self.net.layer_sizes[0] != self.k_selected:
            raise ValueError(
                f"network expects {self.net.layer_sizes[0]} inputs, "
                f"but {self.k_selected} components are selected"
            )


def _scale_targets(values: np.ndarray, scaling) -> np.ndarray:
    lo, hi = scaling
    span = hi - lo if hi > lo else 1.0
    return 2.0 * (values - lo) / span - 1.0


def _unscale_targets(values: np.ndarray, scaling) -> np.ndarray:
    lo, hi = scaling
    span = hi - lo if hi > lo else 1.0
    return (values + 1.0) / 2.0 * span + lo


def _dataset_sha256(table: ObservationTable) -> str:
    digest = hashlib.sha256()
    digest.update(",".join(table.features.variable_names).encode())
    digest.update(np.ascontiguousarray(table.features.values).tobytes())
    if table.target_snr_db is not None:
        digest.update(np.ascontiguousarray(table.target_snr_db).tobytes())
    return digest.hexdigest()


def fit_hybrid(train: ObservationTable, val: ObservationTable | None,
               pca_mode: str = "correlation", selection_rule: str = "kaiser",
               train_config: mlp.TrainConfig = mlp.TrainConfig(), *,
               selection_threshold: float | None = None,
               selection_k: int | None = None, hidden_size: int = 10,
               activation_hidden: str = "tanh",
               activation_output: str = "linear"):
    """Fit PCA on the training split, select components, train the MLP.

    Returns (HybridModel, per-epoch loss history). The validation split only
    feeds the reported history; it never influences the fit.
    """
    if train.target_snr_db is None:
        raise ValueError("training table has no SNR targets")
    if hidden_size < 1:
        raise ValueError(f"hidden_size must be >= 1, got {hidden_size}")

    model = pca.fit_pca(train.features, pca_mode)
    k = pca.select_components(
        model, selection_rule, threshold=selection_threshold, k=selection_k
    )
    scores_train = pca.project(model, train.features, k).T

    targets = train.target_snr_db
    scaling = (float(targets.min()), float(targets.max()))
    y_train = _scale_targets(targets, scaling)[:, None]

    val_set = None
    if val is not None and val.n_observations > 0 and val.target_snr_db is not None:
        if val.features.variable_names != train.features.variable_names:
            raise ValueError("validation variables do not match the training schema")
        scores_val = pca.project(model, val.features, k).T
        val_set = (scores_val, _scale_targets(val.target_snr_db, scaling)[:, None])

    net = mlp.init_network(
        [k, hidden_size, 1], seed=train_config.seed,
        activation_hidden=activation_hidden, activation_output=activation_output,
    )
    net, history = mlp.train(net, (scores_train, y_train), val_set, train_config)

    hybrid = HybridModel(
        pca=model,
        k_selected=k,
        net=net,
        target_scaling=scaling,
        variable_names=list(train.features.variable_names),
        provenance={
            "dataset_sha256": _dataset_sha256(train),
            "seeds": {"network_init": train_config.seed},
            "configs": {
                "pca_mode": pca_mode,
                "selection_rule": selection_rule,
                "selection_threshold": selection_threshold,
                "selection_k": selection_k,
                "hidden_size": hidden_size,
                "activation_hidden": activation_hidden,
                "activation_output": activation_output,
                "train": asdict(train_config),
            },
        },
    )
    return hybrid, history


def predict(model: HybridModel, observations: ObservationTable) -> np.ndarray:
    """Predicted SNR in dB for each observation."""
    if observations.features.variable_names != model.variable_names:
        raise ValueError(
            f"observation variables {observations.features.variable_names} do not "
            f"match the fitted schema {model.variable_names}"
        )
    scores = pca.project(model.pca, observations.features, model.k_selected).T
    outputs = mlp.predict_batch(model.net, scores)[:, 0]
    return _unscale_targets(outputs, model.target_scaling)


def evaluate_hybrid(model: HybridModel, test: ObservationTable) -> metrics.MetricsReport:
    """Metrics over the held-out split (which must carry targets)."""
    if test.target_snr_db is None:
        raise ValueError("test table has no SNR targets")
    return metrics.evaluate(test.target_snr_db, predict(model, test))


def model_to_jsonable(model: HybridModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "pca": pca.model_to_jsonable(model.pca),
        "k_selected": model.k_selected,
        "net": mlp.network_to_jsonable(model.net),
        "target_scaling": list(model.target_scaling),
        "variable_names": list(model.variable_names),
        "provenance": model.provenance,
    }


def model_from_jsonable(doc: dict) -> HybridModel:
    return HybridModel(
        pca=pca.model_from_jsonable(doc["pca"]),
        k_selected=int(doc["k_selected"]),
        net=mlp.network_from_jsonable(doc["net"]),
        target_scaling=tuple(doc["target_scaling"]),
        variable_names=list(doc["variable_names"]),
        provenance=dict(doc["provenance"]),
    )


def model_to_json(model: HybridModel) -> str:
    return json.dumps(model_to_jsonable(model), sort_keys=True, indent=2) + "\n"


def model_from_json(text: str) -> HybridModel:
    return model_from_jsonable(json.loads(text))

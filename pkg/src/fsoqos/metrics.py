"""Regression error metrics over measured vs predicted SNR."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsReport:
    """MAPE (as a fraction), MAE, RMSE, MSE and the sample count."""

    mape: float
    mae: float
    rmse: float
    mse: float
    sample_count: int

    def to_json_dict(self) -> dict:
        return {
            "mape": self.mape,
            "mae": self.mae,
            "rmse": self.rmse,
            "mse": self.mse,
            "sample_count": self.sample_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_csv(self) -> str:
        return (
            "mape,mae,rmse,mse,sample_count\n"
            f"{self.mape!r},{self.mae!r},{self.rmse!r},{self.mse!r},{self.sample_count}\n"
        )


def evaluate(actual, predicted) -> MetricsReport:
    """Compute the report over paired (Q_a, Q_p) vectors.

    Zero actual values are a hard error (naming the offending index) rather
    than being skipped, since silent skipping would bias MAPE.
    """
    actual = np.asarray(actual, dtype=float).ravel()
    predicted = np.asarray(predicted, dtype=float).ravel()
    if actual.size == 0:
        raise ValueError("evaluate requires at least one sample")
    if actual.shape != predicted.shape:
        raise ValueError(
            f"length mismatch: {actual.size} actual vs {predicted.size} predicted"
        )
    zero = np.flatnonzero(actual == 0.0)
    if zero.size:
        raise ValueError(f"actual value at index {int(zero[0])} is zero; MAPE is undefined")

    err = actual - predicted
    mse = float(np.mean(err * err))
    return MetricsReport(
        mape=float(np.mean(np.abs(err / actual))),
        mae=float(np.mean(np.abs(err))),
        rmse=math.sqrt(mse),
        mse=mse,
        sample_count=int(actual.size),
    )

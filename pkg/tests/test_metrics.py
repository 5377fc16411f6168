import json
import math

import numpy as np
import pytest

from fsoqos import metrics

# Published (RMSE, MSE) pairs for the five stations; internal consistency
# |rmse^2 - mse| < 0.01 is part of the acceptance gate.
STATION_RMSE_MSE = [
    (4.1611, 17.3140),
    (5.6380, 31.7860),
    (6.1198, 37.4500),
    (3.4714, 12.0507),
    (6.6139, 43.7460),
]


class TestEvaluate:
    def test_perfect_prediction(self):
        report = metrics.evaluate([1.0, 2.0, -3.0], [1.0, 2.0, -3.0])
        assert report.mape == 0.0
        assert report.mae == 0.0
        assert report.rmse == 0.0
        assert report.mse == 0.0
        assert report.sample_count == 3

    def test_hand_example(self):
        report = metrics.evaluate([1.0, 2.0], [2.0, 4.0])
        assert report.mae == 1.5
        assert report.mse == 2.5
        assert report.rmse == pytest.approx(math.sqrt(2.5), rel=1e-15)
        assert report.mape == 1.0

    def test_mape_is_a_fraction(self):
        report = metrics.evaluate([10.0], [9.0])
        assert report.mape == pytest.approx(0.1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            metrics.evaluate([1.0, 2.0], [1.0])

    def test_empty(self):
        with pytest.raises(ValueError):
            metrics.evaluate([], [])

    def test_zero_actual_names_index(self):
        with pytest.raises(ValueError, match="index 1"):
            metrics.evaluate([1.0, 0.0, 2.0], [1.0, 1.0, 1.0])


class TestInvariants:
    @pytest.mark.parametrize("rmse,mse", STATION_RMSE_MSE)
    def test_published_pairs_are_consistent(self, rmse, mse):
        assert abs(rmse ** 2 - mse) < 0.01

    def test_rmse_squared_equals_mse(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            actual = rng.uniform(1.0, 50.0, n)
            predicted = actual + rng.standard_normal(n)
            report = metrics.evaluate(actual, predicted)
            if report.mse > 0:
                assert abs(report.rmse ** 2 - report.mse) <= 1e-9 * report.mse

    def test_mae_never_exceeds_rmse(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            actual = rng.uniform(1.0, 50.0, n)
            predicted = actual + rng.standard_normal(n) * rng.uniform(0.1, 5.0)
            report = metrics.evaluate(actual, predicted)
            assert report.mae <= report.rmse + 1e-12

    def test_scale_property(self):
        rng = np.random.default_rng(2)
        actual = rng.uniform(5.0, 20.0, 25)
        predicted = actual + rng.standard_normal(25)
        base = metrics.evaluate(actual, predicted)
        for c in (0.5, 3.0, 17.0):
            scaled = metrics.evaluate(c * actual, c * predicted)
            assert scaled.mape == pytest.approx(base.mape, rel=1e-12)
            assert scaled.mae == pytest.approx(c * base.mae, rel=1e-12)
            assert scaled.rmse == pytest.approx(c * base.rmse, rel=1e-12)
            assert scaled.mse == pytest.approx(c * c * base.mse, rel=1e-12)


class TestSerialization:
    def test_json_fields(self):
        report = metrics.evaluate([2.0, 4.0], [1.0, 5.0])
        doc = json.loads(report.to_json())
        assert set(doc) == {"mape", "mae", "rmse", "mse", "sample_count"}
        assert doc["sample_count"] == 2
        assert doc["mae"] == report.mae

    def test_csv_line(self):
        report = metrics.evaluate([2.0], [1.0])
        lines = report.to_csv().splitlines()
        assert lines[0] == "mape,mae,rmse,mse,sample_count"
        assert lines[1] == "0.5,1.0,1.0,1.0,1"

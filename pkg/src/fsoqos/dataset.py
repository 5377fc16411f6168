"""Weather-observation tables: CSV ingestion, synthesis, targets, splitting.

The on-disk schema is
``station,date(YYYY-MM-DD),slot(08h00|14h00|20h00),visibility_km,<feature...>[,snr_db]``
with observations sampled three times a day. The real meteorological archive
behind the study is proprietary, so a seeded one-factor synthetic generator
is the canonical data source for tests and demos.
"""

from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass, replace

import numpy as np

from . import atmos, link
from .pca import DataMatrix

SLOTS = ("08h00", "14h00", "20h00")
FIXED_COLUMNS = ("station", "date", "slot")
TARGET_COLUMN = "snr_db"
DEFAULT_VISIBILITY_NAME = "visibility_km"


@dataclass
class ObservationTable:
    """One station's observations: timestamps, feature rows, optional targets."""

    station: str
    timestamps: list            # (date "YYYY-MM-DD", slot) pairs
    features: DataMatrix
    target_snr_db: np.ndarray | None = None
    visibility_name: str = DEFAULT_VISIBILITY_NAME
    dropped_rows: int = 0

    def __post_init__(self):
        if len(self.timestamps) != self.features.n_observations:
            raise ValueError(
                f"{len(self.timestamps)} timestamps for "
                f"{self.features.n_observations} observations"
            )
        if self.visibility_name not in self.features.variable_names:
            raise ValueError(f"no {self.visibility_name!r} variable in the table")
        if not np.all(self.visibility_km > 0):
            raise ValueError("visibility values must be strictly positive")
        if self.target_snr_db is not None:
            self.target_snr_db = np.asarray(self.target_snr_db, dtype=float)
            if self.target_snr_db.shape != (self.features.n_observations,):
                raise ValueError("target vector length must match the observation count")

    @property
    def n_observations(self) -> int:
        return self.features.n_observations

    @property
    def visibility_km(self) -> np.ndarray:
        row = self.features.variable_names.index(self.visibility_name)
        return self.features.values[row]

    def subset(self, indices) -> "ObservationTable":
        indices = np.asarray(indices, dtype=int)
        return ObservationTable(
            station=self.station,
            timestamps=[self.timestamps[i] for i in indices],
            features=DataMatrix(
                self.features.values[:, indices], self.features.variable_names
            ),
            target_snr_db=None if self.target_snr_db is None
            else self.target_snr_db[indices],
            visibility_name=self.visibility_name,
        )


@dataclass(frozen=True)
class SynthConfig:
    """One-factor synthetic weather generator settings.

    Features follow z_i = loading_i * f + eps_i with f standard normal and
    eps_i ~ N(0, noise_std^2); the visibility row is then squashed into
    visibility_range_km by a logistic map (monotone in the latent value).
    The defaults give a correlation spectrum with one dominant component.
    """

    m_observations: int
    n_features: int = 9
    factor_loadings: tuple | None = None
    noise_std: float = 0.5
    visibility_range_km: tuple = (1.0, 20.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 2:
            raise ValueError(f"n_features must be >= 2, got {self.n_features}")
        if self.m_observations < 1:
            raise ValueError(f"m_observations must be >= 1, got {self.m_observations}")
        if not self.noise_std > 0:
            raise ValueError(f"noise_std must be > 0, got {self.noise_std}")
        lo, hi = self.visibility_range_km
        if not 0 < lo < hi:
            raise ValueError(
                f"visibility_range_km must satisfy 0 < min < max, got {self.visibility_range_km}"
            )
        if self.factor_loadings is not None and len(self.factor_loadings) != self.n_features:
            raise ValueError("factor_loadings length must equal n_features")

    def loadings(self) -> np.ndarray:
        if self.factor_loadings is None:
            return np.full(self.n_features, 0.9)
        return np.asarray(self.factor_loadings, dtype=float)


def _parse_float(text: str, line_no: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(
            f"row {line_no}: non-numeric value {text!r} in column {column!r}"
        ) from None


def load_observations(path, visibility_column: str = DEFAULT_VISIBILITY_NAME,
                      station: str | None = None) -> ObservationTable:
    """Parse an observation CSV.

    Rows with any blank field are dropped and counted; malformed non-blank
    cells (bad slot, bad date, non-numeric value) are hard errors naming the
    row. The file must hold a single station unless one is selected.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if tuple(header[:3]) != FIXED_COLUMNS:
            raise ValueError(
                f"{path}: header must start with {','.join(FIXED_COLUMNS)}, got {header[:3]}"
            )
        feature_names = header[3:]
        has_target = bool(feature_names) and feature_names[-1] == TARGET_COLUMN
        if has_target:
            feature_names = feature_names[:-1]
        if visibility_column not in feature_names:
            raise ValueError(f"{path}: no {visibility_column!r} column in header")

        stations, timestamps, columns, targets = [], [], [], []
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"row {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            row = [cell.strip() for cell in row]
            if any(cell == "" for cell in row):
                dropped += 1
                continue
            row_station, date_text, slot = row[0], row[1], row[2]
            if station is not None and row_station != station:
                continue
            if slot not in SLOTS:
                raise ValueError(
                    f"row {line_no}: slot must be one of {'|'.join(SLOTS)}, got {slot!r}"
                )
            try:
                datetime.date.fromisoformat(date_text)
            except ValueError:
                raise ValueError(
                    f"row {line_no}: date must be YYYY-MM-DD, got {date_text!r}"
                ) from None
            numeric = [
                _parse_float(cell, line_no, name)
                for cell, name in zip(row[3:], header[3:])
            ]
            stations.append(row_station)
            timestamps.append((date_text, slot))
            if has_target:
                targets.append(numeric[-1])
                numeric = numeric[:-1]
            columns.append(numeric)

    if not columns:
        raise ValueError(f"{path}: no usable observation rows")
    unique_stations = sorted(set(stations))
    if len(unique_stations) > 1:
        raise ValueError(
            f"{path}: multiple stations {unique_stations}; pass station= to select one"
        )
    return ObservationTable(
        station=unique_stations[0],
        timestamps=timestamps,
        features=DataMatrix(np.asarray(columns, dtype=float).T, feature_names),
        target_snr_db=np.asarray(targets, dtype=float) if has_target else None,
        visibility_name=visibility_column,
        dropped_rows=dropped,
    )


def save_observations(table: ObservationTable, path) -> None:
    """Write the CSV form; floats use shortest round-trip formatting."""
    names = list(table.features.variable_names)
    header = list(FIXED_COLUMNS) + names
    if table.target_snr_db is not None:
        header.append(TARGET_COLUMN)
    lines = [",".join(header)]
    for j, (date_text, slot) in enumerate(table.timestamps):
        cells = [table.station, date_text, slot]
        cells += [repr(float(v)) for v in table.features.values[:, j]]
        if table.target_snr_db is not None:
            cells.append(repr(float(table.target_snr_db[j])))
        lines.append(",".join(cells))
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


def _timestamp_sequence(count: int):
    """Dates from 2010-01-01 onward, three slots per day."""
    start = datetime.date(2010, 1, 1)
    stamps = []
    for j in range(count):
        day = start + datetime.timedelta(days=j // len(SLOTS))
        stamps.append((day.isoformat(), SLOTS[j % len(SLOTS)]))
    return stamps


def synthesize_weather(config: SynthConfig) -> ObservationTable:
    """Draw a seeded one-factor weather table.

    The first variable is visibility in km, mapped into the configured range
    by v_min + (v_max - v_min) * logistic(z); the remaining variables keep
    their raw latent values.
    """
    rng = np.random.default_rng(config.seed)
    loadings = config.loadings()
    factor = rng.standard_normal(config.m_observations)
    noise = rng.standard_normal((config.n_features, config.m_observations))
    latent = loadings[:, None] * factor[None, :] + config.noise_std * noise

    lo, hi = config.visibility_range_km
    values = latent.copy()
    values[0] = lo + (hi - lo) / (1.0 + np.exp(-latent[0]))
    names = [DEFAULT_VISIBILITY_NAME] + [
        f"feature_{i:02d}" for i in range(1, config.n_features)
    ]
    return ObservationTable(
        station="synthetic",
        timestamps=_timestamp_sequence(config.m_observations),
        features=DataMatrix(values, names),
    )


def attach_snr_target(table: ObservationTable, params: link.LinkParams, *,
                      wavelength_nm: float, length_km: float,
                      model: atmos.SizeModel, noise_std: float = 0.0,
                      seed: int = 0) -> ObservationTable:
    """Attach SNR targets computed from the visibility row.

    target_t = snr_db(params, attenuation_db(path with V_t)) plus seeded
    Gaussian noise of the given standard deviation.
    """
    if noise_std < 0:
        raise ValueError(f"noise_std must be >= 0, got {noise_std}")
    taus = np.array([
        atmos.attenuation_db(
            atmos.OpticalPath(
                wavelength_nm=wavelength_nm, visibility_km=vis, length_km=length_km
            ),
            model,
        )
        for vis in table.visibility_km
    ])
    clean = np.array([link.snr_db(params, tau) for tau in taus])
    noise = np.random.default_rng(seed).standard_normal(clean.size) * noise_std
    return replace(table, target_snr_db=clean + noise)


def split(table: ObservationTable, fractions, seed: int):
    """Seeded shuffle then contiguous partition into train/val/test.

    The val and test sizes are floor(fraction * m); the remainder goes to
    train. Every partition must come out nonempty.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError(f"need three positive fractions, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")
    m = table.n_observations
    n_val = int(fractions[1] * m)
    n_test = int(fractions[2] * m)
    n_train = m - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(
            f"partition sizes {n_train}/{n_val}/{n_test} of {m} observations: "
            "every partition must be nonempty"
        )
    perm = np.random.default_rng(seed).permutation(m)
    return (
        table.subset(perm[:n_train]),
        table.subset(perm[n_train:n_train + n_val]),
        table.subset(perm[n_train + n_val:]),
    )

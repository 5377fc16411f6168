"""Principal component analysis by direct covariance diagonalization.

The pipeline is: center (and optionally scale) the variable rows, form the
sample covariance of the standardized matrix, diagonalize it with cyclic
Jacobi rotations, and project observations onto the leading eigenvectors.
Correlation mode (unit-variance scaling) is the default because the weather
variables carry incommensurate units and the eigenvalue>1 retention rule
presumes unit-variance inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

# Jacobi convergence: off-diagonal Frobenius norm relative to ||S||_F.
JACOBI_RELATIVE_THRESHOLD = 1e-12
JACOBI_SWEEP_CAP = 100

# Eigenvalues of a PSD analysis matrix may round slightly negative.
EIGENVALUE_CLAMP = -1e-10

MODES = ("correlation", "covariance")


class ConvergenceError(RuntimeError):
    """Jacobi sweep cap reached before the off-diagonal norm threshold."""


@dataclass
class DataMatrix:
    """n-variable x m-observation matrix with variable labels.

    Variables are rows, observations are columns.
    """

    values: np.ndarray
    variable_names: list

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        n, m = self.values.shape
        if n < 1 or m < 1:
            raise ValueError(f"need at least one variable and one observation, got {n}x{m}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        self.variable_names = list(self.variable_names)
        if len(self.variable_names) != n:
            raise ValueError(
                f"got {len(self.variable_names)} variable names for {n} variables"
            )

    @property
    def n_variables(self) -> int:
        return self.values.shape[0]

    @property
    def n_observations(self) -> int:
        return self.values.shape[1]


@dataclass
class PcaModel:
    """Fitted PCA state.

    eigenvalues are descending; eigenvectors are orthonormal columns of the
    same index order; loadings[i, p] is the weight of variable i in
    component p (the eigenvector coefficients).
    """

    means: np.ndarray
    scales: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    loadings: np.ndarray
    mode: str

    @property
    def n_variables(self) -> int:
        return self.means.shape[0]


def standardize(x: DataMatrix, mode: str = "correlation"):
    """Center each variable row; in correlation mode also scale to unit std.

    Returns (standardized DataMatrix, means, scales). The sample standard
    deviation uses the m-1 divisor. A constant variable is an error in
    correlation mode (named in the message) and becomes an all-zero row with
    scale 1 in covariance mode.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if x.n_observations < 2:
        raise ValueError("standardize requires at least 2 observations")
    values = x.values
    means = values.mean(axis=1)
    centered = values - means[:, None]
    constant = np.ptp(values, axis=1) == 0
    # Exactly constant rows are zeroed outright so fp residue from the mean
    # subtraction cannot leak through.
    centered[constant] = 0.0
    scales = np.ones(x.n_variables)
    if mode == "correlation":
        if np.any(constant):
            name = x.variable_names[int(np.flatnonzero(constant)[0])]
            raise ValueError(
                f"variable {name!r} has zero variance; correlation mode needs spread"
            )
        scales = centered.std(axis=1, ddof=1)
        if np.any(scales == 0):
            name = x.variable_names[int(np.flatnonzero(scales == 0)[0])]
            raise ValueError(
                f"variable {name!r} has zero variance; correlation mode needs spread"
            )
        centered = centered / scales[:, None]
        # Scaling can amplify the fp residue of the mean subtraction; one
        # re-centering pass keeps every row mean at ~machine epsilon.
        centered = centered - centered.mean(axis=1)[:, None]
    return DataMatrix(centered, x.variable_names), means, scales


def covariance(x: DataMatrix) -> np.ndarray:
    """Sample covariance C = X X^T / (m - 1) of a row-centered matrix."""
    if x.n_observations < 2:
        raise ValueError("covariance requires at least 2 observations")
    row_means = x.values.mean(axis=1)
    if np.any(np.abs(row_means) > 1e-9):
        worst = int(np.argmax(np.abs(row_means)))
        raise ValueError(
            f"covariance input must be centered; row {worst} has mean {row_means[worst]:g}"
        )
    c = x.values @ x.values.T / (x.n_observations - 1)
    return (c + c.T) / 2.0


def _offdiagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def eigh_symmetric(s: np.ndarray):
    """Diagonalize a symmetric matrix with cyclic Jacobi rotations.

    Returns (eigenvalues descending, eigenvector columns). Eigenvectors are
    orthonormal and sign-fixed so each column's largest-magnitude entry is
    positive; ties in eigenvalues keep their pre-sort order.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {s.shape}")
    if np.max(np.abs(s - s.T), initial=0.0) > 1e-9:
        raise ValueError("matrix is not symmetric within 1e-9")
    a = (s + s.T) / 2.0
    n = a.shape[0]
    vectors = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), vectors

    threshold = JACOBI_RELATIVE_THRESHOLD * float(np.sqrt(np.sum(a * a)))
    for _ in range(JACOBI_SWEEP_CAP):
        if _offdiagonal_norm(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                rot = np.array([[c, sn], [-sn, c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.T @ a[[p, q], :]
                a[p, q] = a[q, p] = 0.0
                vectors[:, [p, q]] = vectors[:, [p, q]] @ rot
    else:
        if _offdiagonal_norm(a) > threshold:
            raise ConvergenceError(
                f"Jacobi did not converge within {JACOBI_SWEEP_CAP} sweeps"
            )

    eigenvalues = a.diagonal().copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    for col in range(n):
        anchor = int(np.argmax(np.abs(vectors[:, col])))
        if vectors[anchor, col] < 0:
            vectors[:, col] = -vectors[:, col]
    return eigenvalues, vectors


def fit_pca(x: DataMatrix, mode: str = "correlation") -> PcaModel:
    """Standardize, build the covariance, diagonalize and package the model."""
    standardized, means, scales = standardize(x, mode)
    analyzed = covariance(standardized)
    eigenvalues, eigenvectors = eigh_symmetric(analyzed)
    if np.any(eigenvalues < EIGENVALUE_CLAMP):
        raise RuntimeError(
            f"covariance produced eigenvalue {eigenvalues.min():g} below clamp"
        )
    eigenvalues = np.where(eigenvalues < 0.0, 0.0, eigenvalues)

    trace = float(np.trace(analyzed))
    if abs(float(eigenvalues.sum()) - trace) > 1e-8 * max(1.0, abs(trace)):
        raise RuntimeError("eigenvalue sum drifted from the analyzed-matrix trace")
    gram = eigenvectors.T @ eigenvectors
    if np.max(np.abs(gram - np.eye(x.n_variables))) > 1e-10:
        raise RuntimeError("eigenvector matrix lost orthonormality")

    return PcaModel(
        means=means,
        scales=scales,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        loadings=eigenvectors.copy(),
        mode=mode,
    )


def select_components(model: PcaModel, rule: str, threshold: float | None = None,
                      k: int | None = None) -> int:
    """Pick the retained component count.

    rule='kaiser' counts eigenvalues > 1 (never fewer than one component);
    rule='cumulative' takes the smallest k whose explained-variance sum
    reaches `threshold`; rule='fixed' returns `k` unchanged.
    """
    n = model.eigenvalues.shape[0]
    if rule == "kaiser":
        return max(1, int(np.sum(model.eigenvalues > 1.0)))
    if rule == "cumulative":
        if threshold is None or not 0 < threshold <= 1:
            raise ValueError(f"cumulative rule needs threshold in (0, 1], got {threshold}")
        _, cumulative = explained_variance(model)
        reached = np.flatnonzero(cumulative >= threshold)
        # fp summation can leave the final cumulative a hair under 1.0.
        return int(reached[0]) + 1 if reached.size else n
    if rule == "fixed":
        if k is None or not 1 <= k <= n:
            raise ValueError(f"fixed rule needs k in [1, {n}], got {k}")
        return int(k)
    raise ValueError(f"unknown selection rule: {rule!r}")


def project(model: PcaModel, x: DataMatrix, k: int) -> np.ndarray:
    """Project observations onto the first k components.

    Returns the k x m score matrix E[:, :k]^T @ standardized(x), using the
    statistics stored at fit time.
    """
    if x.n_variables != model.n_variables:
        raise ValueError(
            f"model was fitted on {model.n_variables} variables, got {x.n_variables}"
        )
    if not 1 <= k <= model.n_variables:
        raise ValueError(f"k must lie in [1, {model.n_variables}], got {k}")
    standardized = (x.values - model.means[:, None]) / model.scales[:, None]
    return model.eigenvectors[:, :k].T @ standardized


def explained_variance(model: PcaModel):
    """Per-component variance ratios and their running sum."""
    total = float(model.eigenvalues.sum())
    if total == 0.0:
        raise ValueError("all eigenvalues are zero; explained variance is undefined")
    ratios = model.eigenvalues / total
    return ratios, np.cumsum(ratios)


SCREE_CSV_HEADER = "component,eigenvalue,variance_ratio,cumulative_ratio"


def scree_to_csv(model: PcaModel) -> str:
    """Scree-plot data: one row per component, leading component first."""
    ratios, cumulative = explained_variance(model)
    lines = [SCREE_CSV_HEADER]
    for i, (ev, r, c) in enumerate(zip(model.eigenvalues, ratios, cumulative), start=1):
        lines.append(f"{i},{float(ev)!r},{float(r)!r},{float(c)!r}")
    return "\n".join(lines) + "\n"


def model_to_jsonable(model: PcaModel) -> dict:
    return {
        "means": model.means.tolist(),
        "scales": model.scales.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "eigenvectors": model.eigenvectors.tolist(),
        "loadings": model.loadings.tolist(),
        "mode": model.mode,
    }


def model_from_jsonable(doc: dict) -> PcaModel:
    return PcaModel(
        means=np.asarray(doc["means"], dtype=float),
        scales=np.asarray(doc["scales"], dtype=float),
        eigenvalues=np.asarray(doc["eigenvalues"], dtype=float),
        eigenvectors=np.asarray(doc["eigenvectors"], dtype=float),
        loadings=np.asarray(doc["loadings"], dtype=float),
        mode=doc["mode"],
    )


def model_to_json(model: PcaModel) -> str:
    return json.dumps(model_to_jsonable(model), sort_keys=True)


def model_from_json(text: str) -> PcaModel:
    return model_from_jsonable(json.loads(text))

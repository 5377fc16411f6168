"""Visibility-driven atmospheric extinction and attenuation for FSO paths.

The channel model is Beer-Lambert only: transmittance Gamma = exp(-beta * L)
with the extinction coefficient beta tied to meteorological visibility. The
wavelength dependence enters through the particle-size exponent q(V), for
which two empirical piecewise models are provided (Kruse and the Kim
refinement for low visibility).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# Visibility V is the path length at which transmittance drops to the 2%
# visual threshold, so the extinction at the reference wavelength is
# -ln(0.02)/V. The commonly quoted 3.912/V is the rounded form; the exact
# constant is kept so that transmittance(lambda_o, L=V) is 0.02 to machine
# precision.
VISUAL_THRESHOLD = 0.02
EXTINCTION_CONST = -math.log(VISUAL_THRESHOLD)  # 3.9120230054281455 Np
NP_TO_DB = 10.0 * math.log10(math.e)            # 4.342944819032518 dB per Np

DEFAULT_REFERENCE_WAVELENGTH_NM = 550.0


class SizeModel(Enum):
    """Particle-size exponent model selection."""

    KRUSE = "kruse"
    KIM = "kim"


@dataclass(frozen=True)
class OpticalPath:
    """Geometry and weather state of one optical propagation path.

    wavelength_nm: carrier wavelength in nm.
    visibility_km: meteorological visibility in km (2% threshold definition).
    length_km: propagation distance in km.
    reference_wavelength_nm: wavelength at which visibility is measured.
    """

    wavelength_nm: float
    visibility_km: float
    length_km: float
    reference_wavelength_nm: float = DEFAULT_REFERENCE_WAVELENGTH_NM

    def __post_init__(self):
        if not self.wavelength_nm > 0:
            raise ValueError(f"wavelength_nm must be > 0, got {self.wavelength_nm}")
        if not self.visibility_km > 0:
            raise ValueError(f"visibility_km must be > 0, got {self.visibility_km}")
        if self.length_km < 0:
            raise ValueError(f"length_km must be >= 0, got {self.length_km}")
        if not self.reference_wavelength_nm > 0:
            raise ValueError(
                f"reference_wavelength_nm must be > 0, got {self.reference_wavelength_nm}"
            )


def kruse_q(visibility_km: float) -> float:
    """Kruse particle-size exponent q(V).

    1.6 for V > 50 km, 1.3 for 6 < V <= 50 km, 0.585 * V^(1/3) below.
    Upper branch bounds are inclusive so the function is total on V > 0.
    """
    if not visibility_km > 0:
        raise ValueError(f"visibility must be > 0 km, got {visibility_km}")
    if visibility_km > 50.0:
        return 1.6
    if visibility_km > 6.0:
        return 1.3
    return 0.585 * visibility_km ** (1.0 / 3.0)


def kim_q(visibility_km: float) -> float:
    """Kim particle-size exponent q(V), the low-visibility refinement.

    Adds 0.16*V + 0.34 on 1 < V <= 6, V - 0.5 on 0.5 < V <= 1 and 0 at or
    below 0.5 km; continuous at V = 0.5, 1 and 6 (the jump at 50 km is in
    the source model).
    """
    if not visibility_km > 0:
        raise ValueError(f"visibility must be > 0 km, got {visibility_km}")
    if visibility_km > 50.0:
        return 1.6
    if visibility_km > 6.0:
        return 1.3
    if visibility_km > 1.0:
        return 0.16 * visibility_km + 0.34
    if visibility_km > 0.5:
        return visibility_km - 0.5
    return 0.0


def _q(visibility_km: float, model: SizeModel) -> float:
    if model is SizeModel.KRUSE:
        return kruse_q(visibility_km)
    if model is SizeModel.KIM:
        return kim_q(visibility_km)
    raise ValueError(f"unknown size model: {model!r}")


def extinction_coefficient(path: OpticalPath, model: SizeModel) -> float:
    """Extinction coefficient beta in Np/km.

    beta = (-ln(0.02) / V) * (lambda / lambda_o)^(-q(V)).
    """
    q = _q(path.visibility_km, model)
    ratio = path.wavelength_nm / path.reference_wavelength_nm
    return EXTINCTION_CONST / path.visibility_km * ratio ** (-q)


def transmittance(path: OpticalPath, model: SizeModel) -> float:
    """Atmospheric transmittance Gamma = exp(-beta * L), in (0, 1]."""
    return math.exp(-extinction_coefficient(path, model) * path.length_km)


def attenuation_db(path: OpticalPath, model: SizeModel) -> float:
    """Path attenuation in dB: 10*log10(e) * beta * L."""
    return NP_TO_DB * extinction_coefficient(path, model) * path.length_km


def attenuation_sweep(
    visibilities_km,
    wavelengths_nm,
    model: SizeModel,
    length_km: float = 1.0,
    reference_wavelength_nm: float = DEFAULT_REFERENCE_WAVELENGTH_NM,
):
    """Tabulate (V, lambda, beta, attenuation_dB) over a grid.

    Rows are emitted visibility-major: for each visibility, every wavelength
    in order. The default 1 km path makes the attenuation column read as
    dB/km. Returns a list of (visibility_km, wavelength_nm, beta_np_per_km,
    atten_db) tuples.
    """
    visibilities_km = list(visibilities_km)
    wavelengths_nm = list(wavelengths_nm)
    if not visibilities_km or not wavelengths_nm:
        raise ValueError("attenuation_sweep requires nonempty visibility and wavelength lists")
    rows = []
    for vis in visibilities_km:
        for lam in wavelengths_nm:
            path = OpticalPath(
                wavelength_nm=lam,
                visibility_km=vis,
                length_km=length_km,
                reference_wavelength_nm=reference_wavelength_nm,
            )
            beta = extinction_coefficient(path, model)
            rows.append((vis, lam, beta, NP_TO_DB * beta * length_km))
    return rows


SWEEP_CSV_HEADER = "visibility_km,wavelength_nm,beta_np_per_km,atten_db"


def sweep_to_csv(rows) -> str:
    """Render sweep rows as CSV with fixed 6-decimal notation."""
    lines = [SWEEP_CSV_HEADER]
    for vis, lam, beta, atten in rows:
        lines.append(f"{vis:.6f},{lam:.6f},{beta:.6f},{atten:.6f}")
    return "\n".join(lines) + "\n"

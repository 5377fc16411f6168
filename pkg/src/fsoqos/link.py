"""Link-budget SNR for an FSO connection.

The budget is an additive dB accounting:

    Q_snr = P_tx[dBm] - 30 - 10log10(G_tx) + 10log10(G_rx)
            - 20log10(4*pi/lambda) - 10log10(B * T * k)
            - tau - NF - FM

with tau the total path attenuation in dB (from :mod:`fsoqos.atmos`). The
-30 converts dBm to dBW. The transmit-gain term is *subtracted*, which is
unusual but kept as published; the sign lives in ``TX_GAIN_SIGN`` so a
corrected variant is a one-line change.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

from . import atmos

# Sign applied to the 10log10(G_tx) term. The published budget subtracts it.
TX_GAIN_SIGN = -1.0

BOLTZMANN_J_PER_K = 1.380649e-23


def _default_aux() -> dict:
    # Operating-table extras carried for provenance; not used by snr_db.
    return {
        "divergence_mrad": 3.0,
        "tx_efficiency": 0.8,
        "rx_efficiency": 0.8,
        "rx_sensitivity_dbm": -40.0,
        "data_rate": 1e9,
        "load_ohm": 1000.0,
        "dark_current_na": 10.0,
        "responsivity_a_per_w": 0.7,
        "elec_bandwidth_ghz": 0.5,
        "photodiode_temp_k": 298.0,
    }


@dataclass(frozen=True)
class LinkParams:
    """Operating parameters of one FSO link.

    Power is in dBm (the 5-100 mW operating range is roughly 7-20 dBm).
    Gains, noise figure and fade margin default to 0 dB: they have no
    published values and must be configured per deployment.
    """

    power_tx_dbm: float = 20.0
    gain_tx_db: float = 0.0
    gain_rx_db: float = 0.0
    wavelength_m: float = 1550e-9
    bandwidth_hz: float = 1e6
    ambient_temp_k: float = 298.0
    boltzmann_j_per_k: float = BOLTZMANN_J_PER_K
    noise_figure_db: float = 0.0
    fade_margin_db: float = 0.0
    aux: dict = field(default_factory=_default_aux)

    def __post_init__(self):
        for name in ("wavelength_m", "bandwidth_hz", "ambient_temp_k", "boltzmann_j_per_k"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 1e-7 < self.wavelength_m < 1e-5:
            raise ValueError(
                f"wavelength_m must lie in (1e-7, 1e-5) m, got {self.wavelength_m}"
            )
        if self.noise_figure_db < 0:
            raise ValueError(f"noise_figure_db must be >= 0, got {self.noise_figure_db}")
        if self.fade_margin_db < 0:
            raise ValueError(f"fade_margin_db must be >= 0, got {self.fade_margin_db}")
        for eff in ("tx_efficiency", "rx_efficiency"):
            value = self.aux.get(eff)
            if value is not None and not 0 < value <= 1:
                raise ValueError(f"aux[{eff!r}] must lie in (0, 1], got {value}")


def snr_db(params: LinkParams, total_attenuation_db: float) -> float:
    """Link SNR in dB for a given total path attenuation tau (dB).

    tau, the noise figure and the fade margin all enter linearly with
    coefficient -1; transmitted power enters with +1.
    """
    if total_attenuation_db < 0:
        raise ValueError(
            f"total_attenuation_db must be >= 0, got {total_attenuation_db}"
        )
    gain_tx_lin = 10.0 ** (params.gain_tx_db / 10.0)
    gain_rx_lin = 10.0 ** (params.gain_rx_db / 10.0)
    q = (
        params.power_tx_dbm
        - 30.0
        + TX_GAIN_SIGN * 10.0 * math.log10(gain_tx_lin)
        + 10.0 * math.log10(gain_rx_lin)
        - 20.0 * math.log10(4.0 * math.pi / params.wavelength_m)
        - 10.0 * math.log10(
            params.bandwidth_hz * params.ambient_temp_k * params.boltzmann_j_per_k
        )
        - total_attenuation_db
        - params.noise_figure_db
        - params.fade_margin_db
    )
    if not math.isfinite(q):
        raise ArithmeticError(f"SNR evaluated to a non-finite value: {q}")
    return q


def snr_sweep(params: LinkParams, attenuations_db):
    """Tabulate (tau, Q_snr) over an attenuation list."""
    attenuations_db = list(attenuations_db)
    if not attenuations_db:
        raise ValueError("snr_sweep requires a nonempty attenuation list")
    return [(tau, snr_db(params, tau)) for tau in attenuations_db]


def snr_sweep_over_visibility(
    params: LinkParams,
    visibilities_km,
    model: atmos.SizeModel,
    wavelength_nm: float | None = None,
    length_km: float = 1.0,
):
    """Tabulate (tau, Q_snr) by composing the attenuation model over visibility.

    Rows follow the visibility order, so tau decreases and Q_snr increases
    along increasing visibility. The optical wavelength defaults to the link
    carrier.
    """
    visibilities_km = list(visibilities_km)
    if not visibilities_km:
        raise ValueError("snr_sweep_over_visibility requires a nonempty visibility list")
    if wavelength_nm is None:
        wavelength_nm = params.wavelength_m * 1e9
    rows = []
    for vis in visibilities_km:
        path = atmos.OpticalPath(
            wavelength_nm=wavelength_nm, visibility_km=vis, length_km=length_km
        )
        tau = atmos.attenuation_db(path, model)
        rows.append((tau, snr_db(params, tau)))
    return rows


SNR_CSV_HEADER = "tau_db,snr_db"


def snr_sweep_to_csv(rows) -> str:
    """Render (tau, snr) rows as CSV; values use shortest round-trip form."""
    lines = [SNR_CSV_HEADER]
    for tau, q in rows:
        lines.append(f"{float(tau)!r},{float(q)!r}")
    return "\n".join(lines) + "\n"


def params_to_json(params: LinkParams) -> str:
    """Serialize to a flat JSON object keyed exactly by field names."""
    doc = {}
    for f in fields(LinkParams):
        value = getattr(params, f.name)
        doc[f.name] = dict(value) if f.name == "aux" else value
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def params_from_json(text: str) -> LinkParams:
    """Parse a LinkParams JSON document; unknown keys are rejected by name."""
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("link config must be a JSON object")
    known = {f.name for f in fields(LinkParams)}
    for key in doc:
        if key not in known:
            raise ValueError(f"unknown link config key: {key!r}")
    if "aux" in doc and not isinstance(doc["aux"], dict):
        raise ValueError("link config key 'aux' must be an object")
    base = LinkParams()
    merged = {}
    for f in fields(LinkParams):
        if f.name in doc:
            merged[f.name] = doc[f.name]
        elif f.name == "aux":
            merged[f.name] = dict(base.aux)
    return replace(base, **merged)

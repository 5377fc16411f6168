import json

import numpy as np
import pytest

from fsoqos import atmos, link
from fsoqos.link import LinkParams

# Frozen before the build from an independent term-by-term evaluation:
# 20 - 30 - 20log10(4*pi/1.55e-6) - 10log10(1e6 * 298 * 1.380649e-23)
SNR_BASELINE_ORACLE = -4.3205587845809825

BASE = LinkParams(
    power_tx_dbm=20.0, gain_tx_db=0.0, gain_rx_db=0.0, wavelength_m=1550e-9,
    bandwidth_hz=1e6, ambient_temp_k=298.0, boltzmann_j_per_k=1.380649e-23,
    noise_figure_db=0.0, fade_margin_db=0.0,
)


class TestLinkParams:
    def test_defaults_match_operating_table(self):
        p = LinkParams()
        assert p.bandwidth_hz == 1e6
        assert p.ambient_temp_k == 298.0
        assert p.boltzmann_j_per_k == 1.380649e-23
        assert p.aux["divergence_mrad"] == 3.0
        assert p.aux["tx_efficiency"] == 0.8
        assert p.aux["rx_sensitivity_dbm"] == -40.0
        assert p.aux["responsivity_a_per_w"] == 0.7

    @pytest.mark.parametrize("kwargs", [
        {"wavelength_m": 0.0},
        {"wavelength_m": 1e-2},        # outside the optical window
        {"bandwidth_hz": -1.0},
        {"ambient_temp_k": 0.0},
        {"noise_figure_db": -1.0},
        {"fade_margin_db": -0.5},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            LinkParams(**kwargs)

    def test_aux_efficiency_validation(self):
        bad = dict(link._default_aux(), tx_efficiency=1.5)
        with pytest.raises(ValueError):
            LinkParams(aux=bad)


class TestSnrDb:
    def test_baseline_oracle_value(self):
        assert link.snr_db(BASE, 0.0) == pytest.approx(SNR_BASELINE_ORACLE, abs=1e-9)

    def test_attenuation_enters_linearly(self):
        drop = link.snr_db(BASE, 4.10) - link.snr_db(BASE, 5.55)
        assert drop == pytest.approx(1.45, abs=1e-12)

    def test_fade_margin_enters_linearly(self):
        for margin in (0.5, 3.0, 10.0):
            with_margin = LinkParams(fade_margin_db=margin)
            assert link.snr_db(BASE, 1.0) - link.snr_db(with_margin, 1.0) == \
                pytest.approx(margin, abs=1e-12)

    def test_power_enters_linearly(self):
        p_hi = LinkParams(power_tx_dbm=23.0)
        assert link.snr_db(p_hi, 2.0) - link.snr_db(BASE, 2.0) == \
            pytest.approx(3.0, abs=1e-12)

    def test_tx_gain_sign_as_published(self):
        gained = LinkParams(gain_tx_db=10.0)
        assert link.snr_db(gained, 0.0) - link.snr_db(BASE, 0.0) == \
            pytest.approx(link.TX_GAIN_SIGN * 10.0, abs=1e-12)

    def test_rx_gain_adds(self):
        gained = LinkParams(gain_rx_db=10.0)
        assert link.snr_db(gained, 0.0) - link.snr_db(BASE, 0.0) == \
            pytest.approx(10.0, abs=1e-12)

    def test_bandwidth_doubling_costs_3db(self):
        doubled = LinkParams(bandwidth_hz=2e6)
        drop = link.snr_db(BASE, 0.0) - link.snr_db(doubled, 0.0)
        assert drop == pytest.approx(10.0 * np.log10(2.0), abs=1e-12)

    def test_independent_of_aux_fields(self):
        tweaked = LinkParams(aux=dict(link._default_aux(), dark_current_na=99.0,
                                      load_ohm=7.0, data_rate=5.0))
        assert link.snr_db(tweaked, 1.5) == link.snr_db(BASE, 1.5)

    def test_negative_attenuation_rejected(self):
        with pytest.raises(ValueError):
            link.snr_db(BASE, -0.1)


class TestSnrSweep:
    def test_unit_steps(self):
        rows = link.snr_sweep(BASE, [0.0, 1.0, 2.0])
        assert len(rows) == 3
        assert rows[0][1] - rows[1][1] == pytest.approx(1.0, abs=1e-12)
        assert rows[1][1] - rows[2][1] == pytest.approx(1.0, abs=1e-12)

    def test_power_offset_shifts_whole_column(self):
        taus = [0.0, 2.5, 7.0]
        lo = link.snr_sweep(LinkParams(power_tx_dbm=10.0), taus)
        hi = link.snr_sweep(LinkParams(power_tx_dbm=17.0), taus)
        for (_, q_lo), (_, q_hi) in zip(lo, hi):
            assert q_hi - q_lo == pytest.approx(7.0, abs=1e-12)

    def test_monotone_in_tau(self):
        rows = link.snr_sweep(BASE, np.linspace(0, 20, 17))
        snrs = [q for _, q in rows]
        assert all(a > b for a, b in zip(snrs, snrs[1:]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            link.snr_sweep(BASE, [])

    def test_visibility_composition(self):
        rows = link.snr_sweep_over_visibility(
            BASE, range(1, 11), atmos.SizeModel.KRUSE, wavelength_nm=1550.0
        )
        assert len(rows) == 10
        snrs = [q for _, q in rows]
        assert all(a < b for a, b in zip(snrs, snrs[1:]))
        # row 0 must agree with the direct composition
        tau = atmos.attenuation_db(atmos.OpticalPath(1550, 1, 1), atmos.SizeModel.KRUSE)
        assert rows[0][0] == tau
        assert rows[0][1] == link.snr_db(BASE, tau)

    def test_csv_round_trips_exactly(self):
        rows = link.snr_sweep(BASE, [0.0, 1.37, 9.215])
        lines = link.snr_sweep_to_csv(rows).splitlines()
        assert lines[0] == "tau_db,snr_db"
        for (tau, q), line in zip(rows, lines[1:]):
            tau_text, q_text = line.split(",")
            assert float(tau_text) == tau
            assert float(q_text) == q


class TestParamsJson:
    def test_round_trip(self):
        params = LinkParams(power_tx_dbm=13.0, gain_rx_db=40.0, fade_margin_db=3.0)
        assert link.params_from_json(link.params_to_json(params)) == params

    def test_keys_are_field_names(self):
        doc = json.loads(link.params_to_json(LinkParams()))
        assert set(doc) == {
            "power_tx_dbm", "gain_tx_db", "gain_rx_db", "wavelength_m",
            "bandwidth_hz", "ambient_temp_k", "boltzmann_j_per_k",
            "noise_figure_db", "fade_margin_db", "aux",
        }

    def test_partial_config_gets_defaults(self):
        params = link.params_from_json('{"power_tx_dbm": 7.0}')
        assert params.power_tx_dbm == 7.0
        assert params.bandwidth_hz == 1e6

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ValueError, match="transmit_power"):
            link.params_from_json('{"transmit_power": 5}')

    def test_non_object_rejected(self):
        with pytest.raises(ValueError):
            link.params_from_json("[1, 2]")

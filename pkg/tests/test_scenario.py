"""Tests for configuration handling, placement, fading, and pilot assignment."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starcf.errors import ConfigError
from starcf.scenario import (
    AP_REGION,
    REFLECT_REGION,
    SURFACE_POSITION,
    TRANSMIT_REGION,
    SystemConfig,
    ap_correlation,
    dbm_to_mw,
    mw_to_dbm,
    place_scenario,
    three_slope_gain_db,
)


def cost_hata_constant(f_mhz, h_ap, h_user):
    """Oracle: fixed term of the far-field slope, computed independently."""
    return (
        46.3
        + 33.9 * math.log10(f_mhz)
        - 13.82 * math.log10(h_ap)
        - (1.1 * math.log10(f_mhz) - 0.7) * h_user
        + (1.56 * math.log10(f_mhz) - 0.8)
    )


class TestPowerConversion:
    def test_known_values(self):
        assert dbm_to_mw(0.0) == pytest.approx(1.0)
        assert dbm_to_mw(20.0) == pytest.approx(100.0)
        assert dbm_to_mw(-100.0) == pytest.approx(1e-10)

    @given(st.floats(min_value=-150.0, max_value=60.0))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, p):
        assert mw_to_dbm(dbm_to_mw(p)) == pytest.approx(p, abs=1e-12)


class TestThreeSlopeGain:
    CFG = SystemConfig()

    def test_far_slope_matches_oracle(self):
        want = -cost_hata_constant(1900.0, 15.0, 1.65) - 35.0 * math.log10(1.0)
        got = three_slope_gain_db(1000.0, self.CFG)
        assert got == pytest.approx(want, abs=1e-9)

    def test_continuity_at_breakpoints(self):
        for d in (self.CFG.d0_m, self.CFG.d1_m):
            below = three_slope_gain_db(d * (1 - 1e-9), self.CFG)
            above = three_slope_gain_db(d * (1 + 1e-9), self.CFG)
            assert below == pytest.approx(above, abs=1e-6)

    def test_monotone_nonincreasing(self):
        d = np.linspace(0.5, 2000.0, 400)
        g = np.array([three_slope_gain_db(v, self.CFG) for v in d])
        assert np.all(np.diff(g) <= 1e-12)

    def test_constant_inside_near_field(self):
        assert three_slope_gain_db(1.0, self.CFG) == three_slope_gain_db(
            9.0, self.CFG
        )


class TestSystemConfig:
    def test_defaults(self):
        cfg = SystemConfig()
        assert cfg.m_aps == 10
        assert cfg.n_antennas == 4
        assert cfg.k_users == 10
        assert cfg.k_reflection == 5 and cfg.k_transmission == 5
        assert cfg.l_elements == 64
        assert cfg.pilot_length == 5
        assert cfg.block_length == 182
        assert cfg.carrier_hz == 1.9e9
        assert cfg.symbol_time_s == 1e-5
        assert cfg.pilot_power_dbm == 20.0
        assert cfg.downlink_power_dbm == 23.0
        assert cfg.noise_power_dbm == -91.0
        assert cfg.dynamic_noise_power_dbm == -100.0
        assert cfg.u_split == 0.5
        assert cfg.ap_corr_coeff == 0.7
        assert cfg.spacing_wavelengths == 0.25

    def test_derived_quantities(self):
        cfg = SystemConfig()
        assert cfg.wavelength_m == pytest.approx(3e8 / 1.9e9)
        assert cfg.element_area_m2 == pytest.approx((0.25 * cfg.wavelength_m) ** 2)
        assert cfg.estimation_instant == cfg.pilot_length + 1
        assert cfg.pilot_power_mw == pytest.approx(100.0)

    def test_velocity_broadcast(self):
        assert SystemConfig(velocity_kmh=60.0).velocities().tolist() == [60.0] * 10
        vs = SystemConfig(velocity_kmh=[1.0] * 4 + [2.0] * 6).velocities()
        assert vs.tolist() == [1.0] * 4 + [2.0] * 6

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="bogus_key"):
            SystemConfig.from_dict({"bogus_key": 3})

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"m_aps": 7, "amplification": 2.0}))
        cfg = SystemConfig.from_file(path)
        assert cfg.m_aps == 7 and cfg.amplification == 2.0
        assert cfg.n_antennas == 4  # untouched default

    @pytest.mark.parametrize(
        "bad",
        [
            {"k_reflection": 4},  # K_r + K_t != K
            {"l_horizontal": 5},  # L_h * L_v != L
            {"amplification": 0.5},  # below passive
            {"u_split": 1.5},
            {"phase_model": "cauchy"},
            {"kappa": -0.1},
            {"block_length": 5},  # shorter than pilot phase
            {"velocity_kmh": [1.0, 2.0]},  # wrong length
            {"m_aps": 0},
            {"ris_path_loss": "hata"},
        ],
    )
    def test_invalid_values_rejected(self, bad):
        with pytest.raises(ConfigError):
            SystemConfig.from_dict(bad)

    def test_hash_stable_and_sensitive(self):
        a = SystemConfig().config_hash()
        b = SystemConfig().config_hash()
        c = SystemConfig(m_aps=11).config_hash()
        assert a == b and a != c


class TestApCorrelation:
    def test_entries_and_psd(self):
        r = ap_correlation(4, 0.7)
        assert r[0, 0] == 1.0
        assert r[0, 3] == pytest.approx(0.7**3)
        assert r[2, 1] == pytest.approx(0.7)
        assert np.linalg.eigvalsh(r).min() > 0

    def test_identity_when_uncorrelated(self):
        assert np.array_equal(ap_correlation(3, 0.0), np.eye(3))


class TestPlacement:
    def scenario(self, seed=0, **kw):
        return place_scenario(SystemConfig(seed=seed, **kw))

    def test_regions(self):
        sc = self.scenario()
        ap = sc.ap_positions
        assert np.all(ap >= AP_REGION[0]) and np.all(ap <= AP_REGION[1])
        refl = sc.user_positions[sc.is_reflection]
        tran = sc.user_positions[~sc.is_reflection]
        assert np.all(refl[:, 0] >= REFLECT_REGION[0][0])
        assert np.all(refl[:, 0] <= REFLECT_REGION[0][1])
        assert np.all(refl[:, 1] >= REFLECT_REGION[1][0])
        assert np.all(refl[:, 1] < REFLECT_REGION[1][1])
        assert np.all(tran[:, 0] >= TRANSMIT_REGION[0][0])
        assert np.all(tran[:, 0] <= TRANSMIT_REGION[0][1])
        assert np.all(tran[:, 1] > TRANSMIT_REGION[1][0])
        assert np.all(tran[:, 1] <= TRANSMIT_REGION[1][1])
        assert sc.is_reflection.sum() == 5
        assert tuple(SURFACE_POSITION) == (500.0, 100.0)

    def test_deterministic_given_seed(self):
        a = self.scenario(seed=3)
        b = self.scenario(seed=3)
        c = self.scenario(seed=4)
        assert np.array_equal(a.user_positions, b.user_positions)
        assert np.array_equal(a.beta_mk, b.beta_mk)
        assert not np.array_equal(a.user_positions, c.user_positions)

    def test_betas_positive_and_shapes(self):
        sc = self.scenario()
        assert sc.beta_mk.shape == (10, 10)
        assert sc.beta_m.shape == (10,)
        assert sc.beta_k.shape == (10,)
        assert np.all(sc.beta_mk > 0)
        assert np.all(sc.beta_m > 0)
        assert np.all(sc.beta_k > 0)

    def test_surface_links_deterministic(self):
        # Same positions with and without shadowing: surface links unchanged.
        a = self.scenario(seed=9, shadowing=True)
        b = self.scenario(seed=9, shadowing=False)
        assert np.allclose(a.beta_m, b.beta_m, rtol=1e-12, atol=0)
        assert np.allclose(a.beta_k, b.beta_k, rtol=1e-12, atol=0)
        assert not np.allclose(a.beta_mk, b.beta_mk, rtol=1e-6, atol=0)

    def test_surface_link_gain_scaling(self):
        # The calibrated link gain scales surface links only, by 10^(g/10).
        base = self.scenario(seed=4, ris_link_gain_db=0.0)
        boosted = self.scenario(seed=4, ris_link_gain_db=16.0)
        factor = 10.0 ** 1.6
        assert np.allclose(boosted.beta_m, base.beta_m * factor, rtol=1e-12)
        assert np.allclose(boosted.beta_k, base.beta_k * factor, rtol=1e-12)
        assert np.allclose(boosted.beta_mk, base.beta_mk, rtol=1e-12)
        with pytest.raises(ConfigError):
            SystemConfig(ris_link_gain_db=float("nan"))

    def test_pilot_round_robin_and_copilot_sets(self):
        sc = self.scenario()
        assert sc.pilot_index.tolist() == [0, 1, 2, 3, 4, 0, 1, 2, 3, 4]
        for k in range(10):
            mates = sc.copilot(k)
            assert k in mates
            for j in mates:
                assert sc.pilot_index[j] == sc.pilot_index[k]

    def test_pilot_lag_range(self):
        sc = self.scenario()
        lags = sc.pilot_lag
        assert np.all(lags >= 1) and np.all(lags <= 5)
        # User 0 sends on the first instant, so its estimate is the oldest.
        assert lags[0] == 5 and lags[4] == 1

    def test_beta_columns_follow_user_permutation(self):
        cfg = SystemConfig(seed=1, shadowing=False)
        sc = place_scenario(cfg)
        perm = np.array([3, 1, 4, 2, 0, 9, 6, 5, 8, 7])
        sc2 = sc.with_user_order(perm)
        assert np.allclose(sc2.beta_mk, sc.beta_mk[:, perm])
        assert np.allclose(sc2.beta_k, sc.beta_k[perm])
        assert np.array_equal(sc2.user_positions, sc.user_positions[perm])

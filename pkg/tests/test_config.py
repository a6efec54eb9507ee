"""Declarative JSON config parsing shared by simulator, service and CLI."""

import json

import pytest

from octodaq.config import (
    ConfigError,
    acquisition_config_from_json,
    acquisition_config_to_json,
    load_sim_config,
    parse_map,
    parse_service_settings,
    parse_sim_config,
)
from octodaq.conversion import HUMIDITY, TEMPERATURE
from octodaq.simulator import RampSource, SineSource


class TestMapParsing:
    def test_presets(self):
        assert parse_map("temperature") == TEMPERATURE
        assert parse_map("humidity") == HUMIDITY

    def test_explicit(self):
        m = parse_map({"v_lo": 0.5, "v_hi": 4.5, "q_lo": 0, "q_hi": 100,
                       "unit": "kPa"})
        assert m.unit == "kPa"
        assert m.slope == pytest.approx(25.0)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            parse_map("pressure")

    def test_missing_field_named(self):
        with pytest.raises(ConfigError) as exc:
            parse_map({"v_lo": 0.0, "v_hi": 5.0, "q_lo": 0.0})
        assert "q_hi" in str(exc.value)


class TestSimConfig:
    def test_parse_full(self, tmp_path):
        doc = {
            "rng_seed": 3,
            "clock": "virtual",
            "poll_period_s": 0.5,
            "channels": {
                "0": {"kind": "ramp", "start": 0, "end": 50,
                      "duration_s": 100, "map": "temperature"},
                "3": {"kind": "sine", "offset": 50, "amplitude": 20,
                      "period_s": 60, "noise_sigma": 0.5,
                      "noise_limit": 1.9, "map": "humidity"},
            },
        }
        path = tmp_path / "sim.json"
        path.write_text(json.dumps(doc))
        cfg = load_sim_config(path)
        assert cfg.rng_seed == 3
        assert isinstance(cfg.sources[0], RampSource)
        assert isinstance(cfg.sources[3], SineSource)
        assert cfg.sources[3].noise_limit == 1.9

    def test_bad_kind(self):
        with pytest.raises(ConfigError):
            parse_sim_config({"channels": {"0": {"kind": "square",
                                                 "map": "temperature"}}})

    def test_missing_map(self):
        with pytest.raises(ConfigError):
            parse_sim_config({"channels": {"0": {"kind": "constant",
                                                 "level": 1.0}}})

    def test_bad_channel_id(self):
        with pytest.raises(ConfigError):
            parse_sim_config({"channels": {"8": {"kind": "constant",
                                                 "level": 1.0,
                                                 "map": "temperature"}}})

    def test_replay_inline_series(self):
        cfg = parse_sim_config({"channels": {"2": {
            "kind": "replay", "series": [[0, 10.0], [1, 11.0]],
            "map": "humidity"}}})
        assert cfg.sources[2].truth_at(0.5) == pytest.approx(10.5)


class TestAcquisitionJson:
    def test_round_trip(self):
        doc = {
            "poll_period_ms": 500,
            "response_timeout_ms": 100,
            "enabled_channels": [0, 3],
            "channel_maps": [{"channel": 3, "v_lo": 1.0, "v_hi": 5.0,
                              "q_lo": 10.0, "q_hi": 90.0, "unit": "%RH"}],
        }
        cfg = acquisition_config_from_json(doc)
        back = acquisition_config_to_json(cfg)
        assert back["poll_period_ms"] == 500
        assert back["enabled_channels"] == [0, 3]
        assert back["channel_maps"][0]["unit"] == "%RH"

    def test_preset_in_channel_maps(self):
        cfg = acquisition_config_from_json(
            {"channel_maps": [{"channel": 0, "preset": "temperature"}]}
        )
        assert cfg.channel_maps[0] == TEMPERATURE

    def test_multiple_errors_collected(self):
        with pytest.raises(ConfigError) as exc:
            acquisition_config_from_json(
                {"poll_period_ms": "soon", "bogus": 1}
            )
        fields = {e["field"] for e in exc.value.errors}
        assert {"poll_period_ms", "bogus"} <= fields

    def test_invariant_violation_is_config_error(self):
        with pytest.raises(ConfigError):
            acquisition_config_from_json(
                {"poll_period_ms": 100, "response_timeout_ms": 100}
            )


class TestServiceSettings:
    def test_defaults_and_overrides(self):
        s = parse_service_settings({
            "listen": "0.0.0.0:9000",
            "device": "127.0.0.1:9787",
            "acquisition": {"poll_period_ms": 250, "response_timeout_ms": 50},
            "log": {"directory": "/tmp/logs", "precision": 4},
        })
        assert s.listen == "0.0.0.0:9000"
        assert s.acquisition.poll_period_ms == 250
        assert s.log.value_places == 4

    def test_unknown_top_level_field(self):
        with pytest.raises(ConfigError):
            parse_service_settings({"listenn": "x"})

    def test_log_precision_minimum_enforced(self):
        with pytest.raises(ConfigError):
            parse_service_settings({"log": {"precision": 1}})

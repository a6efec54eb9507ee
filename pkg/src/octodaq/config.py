"""Declarative JSON configuration shared by the simulator, service and CLI.

Calibration maps may be given as a preset name ("temperature",
"humidity") or spelled out as {v_lo, v_hi, q_lo, q_hi, unit}; the
explicit form is what the service's GET /config always returns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .acquisition import AcquisitionConfig
from .codec import NUM_CHANNELS
from .conversion import PRESETS, LinearMap
from .csvlog import LogPolicy
from .simulator import (
    ChannelSource,
    ConstantSource,
    RampSource,
    ReplaySource,
    SimConfig,
    SineSource,
)


class ConfigError(ValueError):
    """Invalid configuration; carries per-field messages for API replies."""

    def __init__(self, errors: list[dict]):
        super().__init__("; ".join(f"{e['field']}: {e['message']}" for e in errors))
        self.errors = errors


def _fail(fieldname: str, message: str):
    raise ConfigError([{"field": fieldname, "message": message}])


def parse_map(obj, fieldname: str = "map") -> LinearMap:
    if isinstance(obj, str):
        preset = PRESETS.get(obj)
        if preset is None:
            _fail(fieldname, f"unknown preset {obj!r}; known: {sorted(PRESETS)}")
        return preset
    if isinstance(obj, dict):
        allowed = {"v_lo", "v_hi", "q_lo", "q_hi", "unit", "preset", "channel"}
        unknown = set(obj) - allowed
        if unknown:
            _fail(fieldname, f"unknown map fields {sorted(unknown)}")
        if "preset" in obj:
            return parse_map(obj["preset"], fieldname)
        try:
            return LinearMap(
                v_lo=float(obj["v_lo"]),
                v_hi=float(obj["v_hi"]),
                q_lo=float(obj["q_lo"]),
                q_hi=float(obj["q_hi"]),
                unit=str(obj.get("unit", "")),
            )
        except KeyError as exc:
            _fail(fieldname, f"missing map field {exc.args[0]!r}")
        except ValueError as exc:
            _fail(fieldname, str(exc))
    _fail(fieldname, "map must be a preset name or an object")


def map_to_json(m: LinearMap) -> dict:
    return {"v_lo": m.v_lo, "v_hi": m.v_hi, "q_lo": m.q_lo, "q_hi": m.q_hi,
            "unit": m.unit}


def _parse_channel_id(key, fieldname: str) -> int:
    try:
        ch = int(key)
    except (TypeError, ValueError):
        _fail(fieldname, f"channel id {key!r} is not an integer")
    if not 0 <= ch < NUM_CHANNELS:
        _fail(fieldname, f"channel id {ch} outside 0..{NUM_CHANNELS - 1}")
    return ch


# ---------------------------------------------------------------- simulator

_SOURCE_KINDS = {"constant", "sine", "ramp", "replay"}


def parse_source(obj: dict, fieldname: str) -> ChannelSource:
    kind = obj.get("kind")
    if kind not in _SOURCE_KINDS:
        _fail(f"{fieldname}.kind", f"kind must be one of {sorted(_SOURCE_KINDS)}")
    if "map" not in obj:
        _fail(f"{fieldname}.map", "each source needs a calibration map")
    m = parse_map(obj["map"], f"{fieldname}.map")
    noise = {
        "noise_sigma": float(obj.get("noise_sigma", 0.0)),
        "noise_limit": (float(obj["noise_limit"])
                        if obj.get("noise_limit") is not None else None),
    }
    try:
        if kind == "constant":
            return ConstantSource(float(obj["level"]), m, **noise)
        if kind == "sine":
            return SineSource(float(obj["offset"]), float(obj["amplitude"]),
                              float(obj["period_s"]), m, **noise)
        if kind == "ramp":
            return RampSource(float(obj["start"]), float(obj["end"]),
                              float(obj["duration_s"]), m, **noise)
        series = obj.get("series")
        if series is None and "file" in obj:
            from .csvlog import read_series

            s = read_series(obj["file"], int(obj.get("channel", 0)),
                            time_base=obj.get("time_base", "wall"))
            series = list(zip(s.times.tolist(), s.values.tolist()))
        if series is None:
            _fail(f"{fieldname}.series", "replay needs 'series' pairs or a 'file'")
        return ReplaySource(series, m, **noise)
    except KeyError as exc:
        _fail(f"{fieldname}.{exc.args[0]}", f"missing parameter for {kind} source")
    except (TypeError, ValueError) as exc:
        _fail(fieldname, str(exc))


def parse_sim_config(data: dict) -> SimConfig:
    if not isinstance(data, dict):
        _fail("config", "simulator config must be a JSON object")
    sources = {}
    for key, src_obj in (data.get("channels") or {}).items():
        ch = _parse_channel_id(key, "channels")
        if ch in sources:
            _fail("channels", f"channel {ch} assigned more than once")
        sources[ch] = parse_source(src_obj, f"channels.{ch}")
    try:
        return SimConfig(
            sources=sources,
            rng_seed=int(data.get("rng_seed", 0)),
            clock=data.get("clock", "virtual"),
            poll_period_s=float(data.get("poll_period_s", 1.0)),
            drop_every=int(data.get("drop_every", 0)),
        )
    except (TypeError, ValueError) as exc:
        _fail("config", str(exc))


def load_sim_config(path) -> SimConfig:
    with open(path) as fh:
        return parse_sim_config(json.load(fh))


# -------------------------------------------------------------- acquisition

def acquisition_config_from_json(data: dict,
                                 base: AcquisitionConfig | None = None) -> AcquisitionConfig:
    """Build an AcquisitionConfig from the documented JSON field names.

    Collects every invariant violation into one ConfigError so an API
    reply can name all offending fields at once.
    """
    if not isinstance(data, dict):
        raise ConfigError([{"field": "config", "message": "must be a JSON object"}])
    base = base or AcquisitionConfig()
    known = {"poll_period_ms", "response_timeout_ms", "enabled_channels",
             "channel_maps", "buffer_capacity", "paced"}
    errors = [{"field": k, "message": "unknown field"} for k in sorted(set(data) - known)]

    kwargs = dict(
        poll_period_ms=base.poll_period_ms,
        response_timeout_ms=base.response_timeout_ms,
        enabled_channels=base.enabled_channels,
        channel_maps=dict(base.channel_maps),
        buffer_capacity=base.buffer_capacity,
        paced=base.paced,
    )
    for key in ("poll_period_ms", "response_timeout_ms", "buffer_capacity"):
        if key in data:
            try:
                kwargs[key] = int(data[key])
            except (TypeError, ValueError):
                errors.append({"field": key, "message": "must be an integer"})
    if "paced" in data:
        if not isinstance(data["paced"], bool):
            errors.append({"field": "paced", "message": "must be a boolean"})
        else:
            kwargs["paced"] = data["paced"]
    if "enabled_channels" in data:
        try:
            kwargs["enabled_channels"] = tuple(int(c) for c in data["enabled_channels"])
        except (TypeError, ValueError):
            errors.append({"field": "enabled_channels",
                           "message": "must be a list of channel ids"})
    if "channel_maps" in data:
        entries = data["channel_maps"]
        if not isinstance(entries, list):
            errors.append({"field": "channel_maps", "message": "must be a list"})
        else:
            maps = {}
            for i, entry in enumerate(entries):
                label = f"channel_maps[{i}]"
                try:
                    if not isinstance(entry, dict) or "channel" not in entry:
                        _fail(label, "each entry needs a 'channel' field")
                    ch = _parse_channel_id(entry["channel"], label)
                    if ch in maps:
                        _fail(label, f"channel {ch} mapped more than once")
                    maps[ch] = parse_map(
                        {k: v for k, v in entry.items() if k != "channel"}
                        if len(entry) > 2 or "preset" not in entry
                        else entry["preset"],
                        label,
                    )
                except ConfigError as exc:
                    errors.extend(exc.errors)
            kwargs["channel_maps"] = maps
    if errors:
        raise ConfigError(errors)
    try:
        return AcquisitionConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError([{"field": "config", "message": str(exc)}]) from None


def acquisition_config_to_json(cfg: AcquisitionConfig) -> dict:
    return {
        "poll_period_ms": cfg.poll_period_ms,
        "response_timeout_ms": cfg.response_timeout_ms,
        "enabled_channels": list(cfg.enabled_channels),
        "channel_maps": [
            {"channel": ch, **map_to_json(m)}
            for ch, m in sorted(cfg.channel_maps.items())
        ],
        "buffer_capacity": cfg.buffer_capacity,
        "paced": cfg.paced,
    }


# ------------------------------------------------------------------ service

@dataclass
class ServiceSettings:
    listen: str = "127.0.0.1:8787"
    device: str = "127.0.0.1:9787"
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    log: LogPolicy | None = None
    assets_dir: str | None = None


def parse_service_settings(data: dict) -> ServiceSettings:
    known = {"listen", "device", "acquisition", "log", "assets_dir"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([{"field": k, "message": "unknown field"} for k in unknown])
    settings = ServiceSettings()
    if "listen" in data:
        settings.listen = str(data["listen"])
    if "device" in data:
        settings.device = str(data["device"])
    if "acquisition" in data:
        settings.acquisition = acquisition_config_from_json(data["acquisition"])
    if data.get("log") is not None:
        settings.log = parse_log_policy(data["log"])
    if data.get("assets_dir") is not None:
        settings.assets_dir = str(data["assets_dir"])
    return settings


def parse_log_policy(data: dict) -> LogPolicy:
    known = {"directory", "pattern", "flush_interval", "precision", "volts_precision"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([{"field": f"log.{k}", "message": "unknown field"}
                           for k in unknown])
    try:
        return LogPolicy(
            directory=str(data.get("directory", ".")),
            pattern=str(data.get("pattern", "acq_{stamp}.csv")),
            flush_interval=int(data.get("flush_interval", 100)),
            value_places=int(data.get("precision", 3)),
            volts_places=int(data.get("volts_precision", 4)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError([{"field": "log", "message": str(exc)}]) from None


def log_policy_to_json(policy: LogPolicy | None) -> dict | None:
    if policy is None:
        return None
    return {
        "directory": policy.directory,
        "pattern": policy.pattern,
        "flush_interval": policy.flush_interval,
        "precision": policy.value_places,
        "volts_precision": policy.volts_places,
    }


def load_service_settings(path) -> ServiceSettings:
    with open(path) as fh:
        return parse_service_settings(json.load(fh))

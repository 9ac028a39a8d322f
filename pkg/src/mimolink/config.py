"""System configuration: case-study preset, validation, YAML config files."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

# Rounded propagation speed; paper-style arithmetic (100 km/h at 2 GHz -> ~185 Hz).
SPEED_OF_LIGHT = 3.0e8


class ConfigError(ValueError):
    """A configuration failed validation."""


def doppler_from_velocity(velocity_kmh, carrier_hz=2e9):
    """Maximum Doppler shift f_d = v * f_c / c for a velocity in km/h."""
    if velocity_kmh <= 0:
        raise ConfigError(
            "velocity must be positive; at standstill the link is in the "
            "low-velocity regime (CSI feedback / scheduling), which this "
            "simulator does not model"
        )
    return (velocity_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT


@dataclass
class SystemConfig:
    """Every knob of the simulated MIMO-OFDM link.

    Defaults reproduce the LTE-flavored case study: 15 kHz tones, 71.5 us
    symbols, 600 usable tones, 12-tone/1-ms resource blocks (168 symbols),
    6 incremental-redundancy H-ARQ rounds spaced 6 ms apart, 12-ray TU
    power delay profile, Clarke-Jakes Doppler at 185 Hz, uncorrelated
    4x4 antennas, 1% outage target.
    """

    n_t: int = 4
    n_r: int = 4
    tone_spacing_hz: float = 15e3
    symbol_duration_s: float = 71.5e-6
    usable_tones: int = 600
    rb_tones: int = 12
    rb_duration_ms: float = 1.0
    symbols_per_rb: int = 14
    harq_rounds: int = 6
    round_spacing_ms: float = 6.0
    max_doppler_hz: float = 185.0
    velocity_kmh: float | None = None  # if set, overrides max_doppler_hz
    carrier_hz: float = 2e9
    profile: str = "TU12"
    generator_order: int = 64
    epsilon: float = 0.01
    snr_grid_db: tuple[float, ...] | None = None  # None -> per-command default
    trials: int = 2000
    master_seed: int = 20260809
    # extra named profiles: name -> {"delay_us": [...], "power_db": [...]}
    custom_profiles: dict = field(default_factory=dict)

    @property
    def effective_doppler_hz(self) -> float:
        if self.velocity_kmh is not None:
            return doppler_from_velocity(self.velocity_kmh, self.carrier_hz)
        return self.max_doppler_hz

    @property
    def slots_per_round(self) -> int:
        return self.rb_tones * self.symbols_per_rb

    def validate(self) -> "SystemConfig":
        if self.n_t < 1 or self.n_r < 1:
            raise ConfigError("antenna counts must be >= 1")
        if self.tone_spacing_hz <= 0 or self.symbol_duration_s <= 0:
            raise ConfigError("tone spacing and symbol duration must be positive")
        if not 1 <= self.rb_tones <= self.usable_tones:
            raise ConfigError("need 1 <= rb_tones <= usable_tones")
        if self.symbols_per_rb < 1:
            raise ConfigError("symbols_per_rb must be >= 1")
        if self.harq_rounds < 1:
            raise ConfigError("harq_rounds must be >= 1")
        if self.harq_rounds > 1 and self.round_spacing_ms <= 0:
            raise ConfigError("round_spacing_ms must be positive with H-ARQ")
        span_ms = (self.harq_rounds - 1) * self.round_spacing_ms + self.rb_duration_ms
        if span_ms > 32.0:
            raise ConfigError(f"coded block spans {span_ms} ms, above the 32 ms delay budget")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.epsilon * self.trials < 1.0:
            raise ConfigError(
                f"epsilon * trials must be >= 1 for quantile estimation "
                f"(epsilon={self.epsilon}, trials={self.trials})"
            )
        if self.generator_order < 8:
            raise ConfigError("generator_order must be >= 8")
        if self.effective_doppler_hz <= 0:
            raise ConfigError("maximum Doppler frequency must be positive")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        if self.snr_grid_db is not None and len(self.snr_grid_db) == 0:
            raise ConfigError("snr_grid_db must not be empty")
        return self


PRESETS = {
    "lte-tu-4x4": SystemConfig,
}


def preset(name: str) -> SystemConfig:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
    return factory()


_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}


def load_config(path) -> SystemConfig:
    """Read a YAML config file; keys mirror SystemConfig fields.

    A `preset` key selects the base configuration (default lte-tu-4x4) that
    the remaining keys override. A `profiles` mapping may define additional
    power delay profiles as {name: {delay_us: [...], power_db: [...]}}.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = preset(raw.pop("preset", "lte-tu-4x4"))
    profiles = raw.pop("profiles", {})
    if not isinstance(profiles, dict):
        raise ConfigError(f"{path}: profiles must be a mapping")
    updates = {}
    for key, value in raw.items():
        if key not in _FIELDS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if key == "snr_grid_db" and value is not None:
            value = tuple(float(v) for v in value)
        updates[key] = value
    cfg = dataclasses.replace(base, custom_profiles=dict(profiles), **updates)
    return cfg.validate()

"""Model parameters, ADC distortion lookup and the random user-drop scenario."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping, Sequence

import numpy as np

INF_BITS = math.inf

# Inverse SQNR of a b-bit non-uniform quantizer with Gaussian input, b <= 5.
MU_TABLE = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}


class ConfigError(ValueError):
    """Base class for invalid model parameters."""


class InvalidAdcBits(ConfigError):
    pass


class PilotTooShort(ConfigError):
    pass


class RfScaleOutOfRange(ConfigError):
    pass


class NegativePower(ConfigError):
    pass


class NegativeVariance(ConfigError):
    pass


class InvalidCount(ConfigError):
    pass


class LargeScaleMismatch(ConfigError):
    pass


class InvalidScenario(ConfigError):
    pass


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def parse_bits(value: Any) -> float | int:
    """Accept an int, ``inf`` or one of the strings "inf"/"infinite"/"∞"."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"inf", "infinite", "infinity", "∞"}:
            return INF_BITS
        value = int(text)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF_BITS
        if not value.is_integer():
            raise InvalidAdcBits(f"adc_bits must be an integer, got {value}")
        value = int(value)
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    raise InvalidAdcBits(f"cannot interpret adc_bits={value!r}")


def format_bits(bits: float | int) -> str:
    return "inf" if math.isinf(bits) else str(int(bits))


def quantization_params(adc_bits: float | int) -> tuple[float, float]:
    """Return ``(mu, eta)`` for a ``adc_bits``-bit ADC under the AQNM.

    Tabulated values are used up to 5 bits, the high-resolution
    approximation ``mu = (pi*sqrt(3)/2) * 2**(-2b)`` above, and ``(0, 1)``
    for an ideal converter.
    """
    bits = parse_bits(adc_bits)
    if math.isinf(bits):
        return 0.0, 1.0
    if bits < 1:
        raise InvalidAdcBits(f"adc_bits must be >= 1, got {bits}")
    if bits <= 5:
        mu = MU_TABLE[bits]
    else:
        mu = math.pi * math.sqrt(3.0) / 2.0 * 2.0 ** (-2 * bits)
    return mu, 1.0 - mu


@dataclass(frozen=True)
class SystemConfig:
    num_antennas: int
    num_users: int
    pilot_length: int
    adc_bits: float | int
    rf_scale_magnitude: float
    rf_phase: float
    rf_noise_var: float
    pilot_power: float
    data_power: float
    large_scale: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "large_scale", tuple(float(b) for b in self.large_scale))
        object.__setattr__(self, "adc_bits", parse_bits(self.adc_bits))

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["adc_bits"] = format_bits(self.adc_bits) if math.isinf(self.adc_bits) else int(self.adc_bits)
        out["large_scale"] = list(self.large_scale)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown SystemConfig fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ValidatedConfig:
    """A :class:`SystemConfig` that passed :func:`validate_config`, with cached
    derived quantities. Attribute access falls through to the raw config."""

    cfg: SystemConfig
    mu: float
    eta: float
    chi: complex
    chi_sq: float
    beta: np.ndarray = field(repr=False)
    beta_sum: float

    def __getattr__(self, name):
        # only called when normal lookup fails
        if name == "cfg":
            raise AttributeError(name)
        return getattr(self.cfg, name)

    @property
    def M(self) -> int:
        return self.cfg.num_antennas

    @property
    def K(self) -> int:
        return self.cfg.num_users

    @property
    def tau(self) -> int:
        return self.cfg.pilot_length

    def with_(self, **changes) -> "ValidatedConfig":
        return validate_config(replace(self.cfg, **changes))


def validate_config(cfg: SystemConfig | ValidatedConfig) -> ValidatedConfig:
    if isinstance(cfg, ValidatedConfig):
        return cfg
    for name in ("num_antennas", "num_users", "pilot_length"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise InvalidCount(f"{name} must be a positive integer, got {value!r}")
    if cfg.pilot_length < cfg.num_users:
        raise PilotTooShort(
            f"pilot_length={cfg.pilot_length} < num_users={cfg.num_users}"
        )
    if not 0.0 < cfg.rf_scale_magnitude <= 1.0:
        raise RfScaleOutOfRange(
            f"rf_scale_magnitude must lie in (0, 1], got {cfg.rf_scale_magnitude}"
        )
    if not math.isfinite(cfg.rf_phase):
        raise ConfigError(f"rf_phase must be finite, got {cfg.rf_phase}")
    if not cfg.rf_noise_var >= 0.0:
        raise NegativeVariance(f"rf_noise_var must be >= 0, got {cfg.rf_noise_var}")
    for name in ("pilot_power", "data_power"):
        value = getattr(cfg, name)
        if not (value >= 0.0 and math.isfinite(value)):
            raise NegativePower(f"{name} must be finite and >= 0, got {value}")
    if len(cfg.large_scale) != cfg.num_users:
        raise LargeScaleMismatch(
            f"large_scale has {len(cfg.large_scale)} entries, expected {cfg.num_users}"
        )
    beta = np.asarray(cfg.large_scale, dtype=float)
    if np.any(~np.isfinite(beta)) or np.any(beta < 0):
        raise NegativePower("large_scale entries must be finite and >= 0")
    mu, eta = quantization_params(cfg.adc_bits)
    chi = cfg.rf_scale_magnitude * complex(math.cos(cfg.rf_phase), math.sin(cfg.rf_phase))
    beta.setflags(write=False)
    return ValidatedConfig(
        cfg=cfg,
        mu=mu,
        eta=eta,
        chi=chi,
        chi_sq=cfg.rf_scale_magnitude**2,
        beta=beta,
        beta_sum=float(beta.sum()),
    )


@dataclass(frozen=True)
class ScenarioSpec:
    """Single-cell drop: users uniform by area in the annulus
    ``hole_radius <= r <= cell_radius`` with log-normal shadowing."""

    cell_radius: float = 900.0
    hole_radius: float = 100.0
    shadow_std_db: float = 8.0
    path_loss_exp: float = 3.8
    num_users: int = 10

    def validate(self) -> "ScenarioSpec":
        if not 0.0 < self.hole_radius < self.cell_radius:
            raise InvalidScenario(
                f"need 0 < hole_radius < cell_radius, got {self.hole_radius}, {self.cell_radius}"
            )
        if not self.path_loss_exp > 0:
            raise InvalidScenario(f"path_loss_exp must be > 0, got {self.path_loss_exp}")
        if not self.shadow_std_db >= 0:
            raise InvalidScenario(f"shadow_std_db must be >= 0, got {self.shadow_std_db}")
        if self.num_users < 1:
            raise InvalidScenario(f"num_users must be >= 1, got {self.num_users}")
        return self

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown ScenarioSpec fields: {sorted(unknown)}")
        return cls(**data)


def large_scale_from_distance(
    distance: np.ndarray | float,
    hole_radius: float,
    path_loss_exp: float,
    shadow_db: np.ndarray | float = 0.0,
) -> np.ndarray:
    """``beta = z / (r / r_h)**v`` with ``10 log10 z = shadow_db``."""
    z = 10.0 ** (np.asarray(shadow_db, dtype=float) / 10.0)
    return z / (np.asarray(distance, dtype=float) / hole_radius) ** path_loss_exp


def drop_distances(spec: ScenarioSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    # inverse CDF of the area-uniform radius on the annulus
    u = rng.random(size)
    r_h2, r_c2 = spec.hole_radius**2, spec.cell_radius**2
    return np.sqrt(r_h2 + u * (r_c2 - r_h2))


def draw_geometry(spec: ScenarioSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """User distances (m) and shadowing (dB) of one drop."""
    spec.validate()
    r = drop_distances(spec, rng, spec.num_users)
    shadow = spec.shadow_std_db * rng.standard_normal(spec.num_users)
    return r, shadow


def drop_users(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw ``spec.num_users`` large-scale fading coefficients."""
    r, shadow = draw_geometry(spec, rng)
    return large_scale_from_distance(r, spec.hole_radius, spec.path_loss_exp, shadow)


def default_config(large_scale: Sequence[float] | None = None, **overrides) -> SystemConfig:
    """Desk-scale defaults: K = 10 users, tau = K, 2-bit ADCs, 10 dB powers."""
    num_users = overrides.pop("num_users", 10)
    if large_scale is None:
        large_scale = [1.0] * num_users
    base = dict(
        num_antennas=64,
        num_users=num_users,
        pilot_length=num_users,
        adc_bits=2,
        rf_scale_magnitude=0.9,
        rf_phase=0.0,
        rf_noise_var=0.1,
        pilot_power=10.0,
        data_power=10.0,
        large_scale=tuple(large_scale),
    )
    base.update(overrides)
    return SystemConfig(**base)

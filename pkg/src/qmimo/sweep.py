"""Parameter sweeps pairing each analytic metric with its Monte Carlo estimate."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

from .config import (
    ConfigError,
    ScenarioSpec,
    SystemConfig,
    db_to_linear,
    parse_bits,
    validate_config,
)
from .estimation import FloorUndefined, analytic_mse, mse_floor
from .rate import rate_approx, rate_perfect_csi_bound, rate_simplified
from .simulate import empirical_mse, ergodic_rate_mc

NAN = float("nan")

# axis name -> (SystemConfig field, value transform)
AXES = {
    "pilot_power_db": ("pilot_power", db_to_linear),
    "data_power_db": ("data_power", db_to_linear),
    "pilot_power": ("pilot_power", float),
    "data_power": ("data_power", float),
    "num_antennas": ("num_antennas", int),
    "pilot_length": ("pilot_length", int),
    "adc_bits": ("adc_bits", parse_bits),
    "rf_scale_magnitude": ("rf_scale_magnitude", float),
    "rf_phase": ("rf_phase", float),
    "rf_noise_var": ("rf_noise_var", float),
}

METRICS = ("mse", "mse_floor", "sum_rate", "sum_rate_perfect_csi", "sum_rate_simplified")


class EmptySweep(ValueError):
    pass


class UnknownAxis(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    base_config: SystemConfig
    axis: str
    values: Sequence[float]
    trials: int
    master_seed: int
    mode: str = "fixed"  # "fixed" or "scenario"
    scenario: ScenarioSpec | None = None
    metrics: Sequence[str] = METRICS

    def validate(self) -> "SweepSpec":
        if self.axis not in AXES:
            raise UnknownAxis(f"unknown axis {self.axis!r}; choose from {sorted(AXES)}")
        if len(self.values) == 0:
            raise EmptySweep("sweep has no axis values")
        keys = [_sort_key(v) for v in self.values]
        increasing = all(a < b for a, b in zip(keys, keys[1:]))
        decreasing = all(a > b for a, b in zip(keys, keys[1:]))
        if not (increasing or decreasing):
            raise ValueError("axis values must be strictly ordered")
        if self.trials < 2:
            raise ValueError(f"trials must be >= 2, got {self.trials}")
        if self.mode not in ("fixed", "scenario"):
            raise ValueError(f"mode must be 'fixed' or 'scenario', got {self.mode!r}")
        if self.mode == "scenario" and self.scenario is None:
            raise ValueError("scenario mode needs a ScenarioSpec")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        return self


def _sort_key(value) -> float:
    return float(parse_bits(value)) if isinstance(value, str) else float(value)


@dataclass(frozen=True)
class SweepRow:
    axis_value: object
    metric: str
    analytic: float
    mc: float
    ci95: float
    trials: int
    seed: int
    error: str = ""


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow] = field(default_factory=list)

    COLUMNS = ("axis_value", "metric", "analytic", "mc", "ci95", "trials", "seed", "error")

    def select(self, metric: str) -> list[SweepRow]:
        return [r for r in self.rows if r.metric == metric]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow((self.axis,) + self.COLUMNS[1:])
            for r in self.rows:
                writer.writerow(
                    [fmt(r.axis_value), r.metric, fmt(r.analytic), fmt(r.mc), fmt(r.ci95), r.trials, r.seed, r.error]
                )


def fmt(value) -> str:
    """17 significant digits for floats, plain text for everything else."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def point_config(base: SystemConfig, axis: str, value) -> SystemConfig:
    name, conv = AXES[axis]
    return base.with_(**{name: conv(value)})


def _evaluate_point(spec: SweepSpec, cfg: SystemConfig, value, threads: int) -> list[SweepRow]:
    vc = validate_config(cfg)
    seed, trials = spec.master_seed, spec.trials
    rows = []

    def row(metric, analytic, mc=NAN, ci=NAN, n=0, error=""):
        rows.append(SweepRow(value, metric, float(analytic), float(mc), float(ci), n, seed, error))

    scenario = spec.scenario if spec.mode == "scenario" else None
    if "mse" in spec.metrics:
        if scenario is not None:
            row("mse", NAN, error="empirical MSE needs fixed-beta mode")
        else:
            est = empirical_mse(vc, trials, seed, threads)
            row("mse", analytic_mse(vc), est.mean, est.ci95, est.trials)
    if "mse_floor" in spec.metrics:
        try:
            row("mse_floor", mse_floor(vc))
        except FloorUndefined as exc:
            row("mse_floor", NAN, error=str(exc))
    if "sum_rate" in spec.metrics:
        report = ergodic_rate_mc(vc, trials, seed, threads, scenario=scenario)
        row("sum_rate", report.sum_approx, report.sum_mc, report.sum_ci95, report.trials)
    if "sum_rate_perfect_csi" in spec.metrics:
        row("sum_rate_perfect_csi", rate_perfect_csi_bound(vc).sum())
    if "sum_rate_simplified" in spec.metrics:
        row("sum_rate_simplified", rate_simplified(vc).sum())
    return rows


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate every metric at every axis value.

    A point whose derived configuration is invalid yields one ``error`` row and
    the sweep moves on.
    """
    spec.validate()
    result = SweepResult(axis=spec.axis)
    for value in spec.values:
        try:
            cfg = point_config(spec.base_config, spec.axis, value)
            result.rows.extend(_evaluate_point(spec, cfg, value, threads))
        except (ConfigError, ValueError) as exc:
            result.rows.append(
                SweepRow(value, "error", NAN, NAN, NAN, 0, spec.master_seed, f"{type(exc).__name__}: {exc}")
            )
    return result

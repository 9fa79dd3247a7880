"""Trading ADC resolution against RF quality at equal closed-form sum rate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .config import SystemConfig, ValidatedConfig, validate_config
from .rate import rate_approx

MIN_SCALE = 1e-6


@dataclass(frozen=True)
class CompensationResult:
    bits: float | int
    rf_scale: float  # nan when no admissible scale exists
    status: str  # "matched", "unreachable" or "curve_mismatch"
    # for "unreachable" pairs the curve is the best admissible one, |chi| = 1
    antennas: tuple[int, ...]
    curve: np.ndarray
    reference_curve: np.ndarray

    @property
    def rel_dev(self) -> np.ndarray:
        return self.curve / self.reference_curve - 1.0

    @property
    def max_rel_dev(self) -> float:
        return float(np.max(np.abs(self.rel_dev)))


def sum_rate_curve(cfg: SystemConfig | ValidatedConfig, antennas: Sequence[int]) -> np.ndarray:
    vc = validate_config(cfg)
    return np.array([rate_approx(vc.with_(num_antennas=int(m))).sum() for m in antennas])


def match_rf_scale(
    reference: SystemConfig | ValidatedConfig,
    bits: float | int,
    antennas: Sequence[int],
    match_antennas: int | None = None,
    tolerance: float = 0.005,
) -> CompensationResult:
    """Find the RF scale ``|chi|`` at which ``bits``-bit ADCs reach the reference sum rate.

    The closed-form sum rate increases with ``|chi|``, so the root is
    bracketed on ``[MIN_SCALE, 1]`` and found by bracketing root search at
    ``match_antennas`` (default: the median of ``antennas``). The matched
    configuration is then compared with the reference over all of
    ``antennas``.
    """
    ref = validate_config(reference)
    antennas = tuple(int(m) for m in antennas)
    if match_antennas is None:
        match_antennas = antennas[len(antennas) // 2]
    ref_curve = sum_rate_curve(ref, antennas)
    target = rate_approx(ref.with_(num_antennas=match_antennas)).sum()
    alt = ref.with_(adc_bits=bits)

    def gap(scale):
        cfg = alt.with_(rf_scale_magnitude=float(scale), num_antennas=match_antennas)
        return rate_approx(cfg).sum() - target

    hi = gap(1.0)
    if hi < 0:
        if -hi <= tolerance * target:
            scale = 1.0
        else:
            return CompensationResult(
                bits, float("nan"), "unreachable", antennas,
                sum_rate_curve(alt.with_(rf_scale_magnitude=1.0), antennas), ref_curve,
            )
    elif gap(MIN_SCALE) > 0:
        scale = MIN_SCALE
    else:
        scale = brentq(gap, MIN_SCALE, 1.0, xtol=1e-14, rtol=1e-14)
    curve = sum_rate_curve(alt.with_(rf_scale_magnitude=float(scale)), antennas)
    status = "matched" if np.all(np.abs(curve / ref_curve - 1.0) <= tolerance) else "curve_mismatch"
    return CompensationResult(bits, float(scale), status, antennas, curve, ref_curve)

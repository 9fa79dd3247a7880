"""Rayleigh channel draws, the EEVM RF front end and the AQNM quantizer.

Every random draw takes its own ``numpy.random.Generator``. Passing ``None``
for a noise source switches that source off, which the tests use to isolate
individual terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ValidatedConfig, SystemConfig, validate_config


def complex_normal(rng: np.random.Generator, shape, var=1.0) -> np.ndarray:
    """Circularly symmetric CN(0, var) samples; ``var`` broadcasts against ``shape``."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return np.sqrt(np.asarray(var, dtype=float) / 2.0) * z


@dataclass(frozen=True)
class ChannelRealization:
    G: np.ndarray
    P: np.ndarray

    @property
    def num_antennas(self) -> int:
        return self.G.shape[0]

    @property
    def num_users(self) -> int:
        return self.G.shape[1]


@dataclass(frozen=True)
class NoiseSources:
    """Independent generators for each noise process of the receive chain."""

    rf: np.random.Generator | None = None
    thermal: np.random.Generator | None = None
    quant: np.random.Generator | None = None


@dataclass(frozen=True)
class FrontEndSample:
    y_rf: np.ndarray
    y_q: np.ndarray
    nq_cov_diag: np.ndarray


def draw_channel(
    beta, rng: np.random.Generator, num_antennas: int, chi: complex = 1.0
) -> ChannelRealization:
    """Draw ``G = H diag(beta)^(1/2)`` with i.i.d. CN(0, 1) ``H``, and ``P = chi*G``."""
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 1 or np.any(beta < 0):
        raise ValueError("beta must be a 1-D vector of nonnegative values")
    H = complex_normal(rng, (num_antennas, beta.size))
    G = H * np.sqrt(beta)
    return ChannelRealization(G=G, P=chi * G)


def draw_channel_for(cfg: SystemConfig | ValidatedConfig, rng: np.random.Generator) -> ChannelRealization:
    vc = validate_config(cfg)
    return draw_channel(vc.beta, rng, vc.M, vc.chi)


def rf_frontend_output(
    P: np.ndarray,
    x: np.ndarray,
    rho: float,
    rf_noise_var: float,
    noise: NoiseSources,
) -> np.ndarray:
    """``y_RF = sqrt(rho) P x + n_RF + n``.

    ``x`` is either a length-K vector or a K x T block of T transmit vectors;
    the output has matching shape M or M x T.
    """
    P = np.asarray(P)
    x = np.asarray(x)
    if P.ndim != 2 or x.shape[0] != P.shape[1]:
        raise ValueError(f"dimension mismatch: P is {P.shape}, x is {x.shape}")
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    y = np.sqrt(rho) * (P @ x)
    y = y.astype(complex, copy=False)
    shape = y.shape
    if noise.rf is not None and rf_noise_var > 0:
        y = y + complex_normal(noise.rf, shape, rf_noise_var)
    if noise.thermal is not None:
        y = y + complex_normal(noise.thermal, shape)
    return y


def effective_noise_cov(P: np.ndarray, rho: float, eta: float, rf_noise_var: float) -> np.ndarray:
    """Diagonal of the AQNM covariance written in terms of ``P = chi*G``."""
    row_power = np.sum(np.abs(P) ** 2, axis=1)
    return eta * (1.0 - eta) * (rho * row_power + 1.0 + rf_noise_var)


def aqnm_noise_cov(G: np.ndarray, rho: float, cfg: SystemConfig | ValidatedConfig) -> np.ndarray:
    """Diagonal of ``eta(1-eta) diag{rho chi G G^H chi^H + (1 + sigma^2) I}``."""
    vc = validate_config(cfg)
    row_power = vc.chi_sq * np.sum(np.abs(G) ** 2, axis=1)
    return vc.eta * (1.0 - vc.eta) * (rho * row_power + 1.0 + vc.rf_noise_var)


def quantize_aqnm(
    y_rf: np.ndarray,
    nq_cov_diag: np.ndarray,
    eta: float,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """``y_q = eta*y_RF + n_q`` with Gaussian ``n_q`` drawn independently of ``y_RF``.

    ``nq_cov_diag`` holds one variance per antenna (row of ``y_rf``).
    """
    var = np.asarray(nq_cov_diag, dtype=float)
    if np.any(var < 0):
        raise ValueError("quantization noise variances must be nonnegative")
    y_rf = np.asarray(y_rf)
    if var.shape[0] != y_rf.shape[0]:
        raise ValueError(f"dimension mismatch: {var.shape} vs {y_rf.shape}")
    y_q = eta * y_rf
    if rng is None or eta == 1.0:
        return y_q
    var = var.reshape(var.shape + (1,) * (y_rf.ndim - 1))
    return y_q + complex_normal(rng, y_rf.shape, var)


def receive(
    realization: ChannelRealization,
    x: np.ndarray,
    rho: float,
    cfg: SystemConfig | ValidatedConfig,
    noise: NoiseSources,
) -> FrontEndSample:
    """Push ``x`` through the RF chain and the quantizer of one coherence block."""
    vc = validate_config(cfg)
    y_rf = rf_frontend_output(realization.P, x, rho, vc.rf_noise_var, noise)
    cov = aqnm_noise_cov(realization.G, rho, vc)
    y_q = quantize_aqnm(y_rf, cov, vc.eta, noise.quant)
    return FrontEndSample(y_rf=y_rf, y_q=y_q, nq_cov_diag=cov)

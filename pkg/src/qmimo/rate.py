"""MRC reception with imperfect CSI and the uplink achievable rate.

The closed forms come in three algebraically equivalent or limiting shapes:
:func:`rate_approx` (general), :func:`rate_simplified` (the same expression
normalised by ``eta*rho_u*|chi|^2``) and :func:`rate_perfect_csi_bound`
(``alpha = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, NoiseSources, complex_normal, receive
from .config import SystemConfig, ValidatedConfig, validate_config
from .estimation import estimation_accuracy

LOG2 = np.log(2.0)


@dataclass(frozen=True)
class RateReport:
    per_user_mc: np.ndarray
    per_user_approx: np.ndarray
    sum_mc: float
    sum_approx: float
    ci95: np.ndarray
    sum_ci95: float
    trials: int


@dataclass(frozen=True)
class SymbolLevelResult:
    signal_power: np.ndarray
    residual_var: np.ndarray

    @property
    def sinr(self) -> np.ndarray:
        return self.signal_power / self.residual_var


def log2_1p(x):
    return np.log1p(x) / LOG2


def mrc_combine(p_hat: np.ndarray, y_q: np.ndarray) -> np.ndarray:
    """``r = P_hat^H y_q``; ``y_q`` may hold one received vector per column."""
    p_hat = np.asarray(p_hat)
    y_q = np.asarray(y_q)
    if p_hat.ndim != 2 or y_q.shape[0] != p_hat.shape[0]:
        raise ValueError(f"dimension mismatch: P_hat is {p_hat.shape}, y_q is {y_q.shape}")
    return p_hat.conj().T @ y_q


def _interference_terms(p_hat, p, vc: ValidatedConfig):
    """Signal power and noise-plus-interference power of every user."""
    eta, rho = vc.eta, vc.data_power
    cross = p_hat.conj().T @ p  # [n, k] = p_hat_n^H p_k
    gain2 = np.abs(cross) ** 2
    own = np.diag(gain2)
    nq = eta * (1.0 - eta) * (rho * np.sum(np.abs(p) ** 2, axis=1) + 1.0 + vc.rf_noise_var)
    p_hat_pow = np.abs(p_hat) ** 2
    noise = eta**2 * (vc.rf_noise_var + 1.0) * p_hat_pow.sum(axis=0)
    quant = nq @ p_hat_pow
    interference = eta**2 * rho * (gain2.sum(axis=1) - own)
    return rho * eta**2 * own, noise + quant + interference


def noise_plus_interference(p_hat, p, cfg, user: int) -> float:
    """Variance of the residual ``xi`` in the MRC output of ``user``.

    The quantization noise covariance is conditioned on the realization and
    evaluated at the data power.
    """
    vc = validate_config(cfg)
    return float(_interference_terms(np.asarray(p_hat), np.asarray(p), vc)[1][user])


def sinr_all(p_hat, p, cfg) -> np.ndarray:
    vc = validate_config(cfg)
    signal, ig = _interference_terms(np.asarray(p_hat), np.asarray(p), vc)
    out = np.zeros_like(signal)
    # a zero estimate column carries no signal; its SINR is 0 by convention
    ok = ig > 0
    out[ok] = signal[ok] / ig[ok]
    return out


def instantaneous_sinr(p_hat, p, cfg, user: int) -> float:
    return float(sinr_all(p_hat, p, cfg)[user])


def symbol_level_sinr_oracle(
    realization: ChannelRealization,
    p_hat: np.ndarray,
    cfg: SystemConfig | ValidatedConfig,
    trials: int,
    symbols: np.random.Generator,
    noise: NoiseSources,
) -> SymbolLevelResult:
    """Measure the MRC output statistics by simulating ``trials`` data symbols.

    Gaussian unit-power symbols are pushed through the full receive chain at
    the data power; the residual of each user's output after removing its own
    useful term is averaged over the draws.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 symbol draws, got {trials}")
    vc = validate_config(cfg)
    x = complex_normal(symbols, (vc.K, trials))
    sample = receive(realization, x, vc.data_power, vc, noise)
    r = mrc_combine(p_hat, sample.y_q)
    useful = np.diag(p_hat.conj().T @ realization.P)
    xi = r - vc.eta * np.sqrt(vc.data_power) * useful[:, None] * x
    return SymbolLevelResult(
        signal_power=vc.data_power * vc.eta**2 * np.abs(useful) ** 2,
        residual_var=np.mean(np.abs(xi) ** 2, axis=1),
    )


def _alpha(vc, alpha):
    if alpha is None:
        return estimation_accuracy(vc)
    return np.broadcast_to(np.asarray(alpha, dtype=float), vc.beta.shape)


def _hardware_term(vc) -> float:
    # (1 + sigma^2) / (eta rho_u |chi|^2), infinite when nothing is transmitted
    scale = vc.eta * vc.data_power * vc.chi_sq
    return (1.0 + vc.rf_noise_var) / scale if scale > 0 else math.inf


def rate_approx(cfg, alpha=None) -> np.ndarray:
    """Closed-form approximation of each user's ergodic rate (bits/s/Hz)."""
    vc = validate_config(cfg)
    a = _alpha(vc, alpha)
    eta, rho, c2, beta, M = vc.eta, vc.data_power, vc.chi_sq, vc.beta, vc.M
    num = eta * rho * c2 * beta * (a * M + 1.0)
    den = (
        rho * c2 * (vc.beta_sum - eta * beta)
        + (1.0 - eta) * a * rho * c2 * beta
        + vc.rf_noise_var
        + 1.0
    )
    return log2_1p(num / den)


def rate_perfect_csi_bound(cfg) -> np.ndarray:
    vc = validate_config(cfg)
    eta, beta = vc.eta, vc.beta
    hw = _hardware_term(vc)
    den = vc.beta_sum / eta + (1.0 / eta - 2.0) * beta + hw
    return log2_1p((beta + vc.M * beta) / den)


def rate_simplified(cfg, alpha=None) -> np.ndarray:
    vc = validate_config(cfg)
    a = _alpha(vc, alpha)
    eta, beta = vc.eta, vc.beta
    hw = _hardware_term(vc)
    den = vc.beta_sum / eta + a * beta / eta - (1.0 + a) * beta + hw
    return log2_1p(beta * (a * vc.M + 1.0) / den)


def ideal_hardware(cfg) -> ValidatedConfig:
    """Same geometry and powers with ideal ADCs and RF chains."""
    vc = validate_config(cfg)
    return vc.with_(adc_bits="inf", rf_scale_magnitude=1.0, rf_phase=0.0, rf_noise_var=0.0)

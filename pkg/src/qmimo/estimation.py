"""Pilot training and LMMSE estimation of the effective channel ``P = chi*G``.

Two estimators are provided. :func:`lmmse_dense` builds the full
``M*tau x M*tau`` observation covariance and solves it directly; it is the
reference for small problems. :func:`lmmse_fast` exploits the Kronecker
structure and pilot orthogonality and reduces to a matched filter followed by
a per-user scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, NoiseSources, receive
from .config import SystemConfig, ValidatedConfig, validate_config

DENSE_LIMIT = 4096


class FloorUndefined(ValueError):
    """The high-SNR error floor is only derived for ``pilot_length == num_users``."""


@dataclass(frozen=True)
class PilotBlock:
    phi: np.ndarray
    z_q: np.ndarray


@dataclass(frozen=True)
class ChannelEstimate:
    p_hat: np.ndarray
    alpha: np.ndarray
    analytic_mse: float


def dft_pilots(tau: int, k: int) -> np.ndarray:
    """First ``k`` columns of the unnormalised ``tau``-point DFT matrix."""
    if k < 1 or tau < k:
        raise ValueError(f"need 1 <= k <= tau, got tau={tau}, k={k}")
    t = np.arange(tau)[:, None]
    j = np.arange(k)[None, :]
    angle = -2.0 * np.pi * ((t * j) % tau) / tau
    re, im = np.cos(angle), np.sin(angle)
    # snap the ~1e-16 residues at multiples of pi/2 to exact zeros
    re[np.abs(re) < 1e-15] = 0.0
    im[np.abs(im) < 1e-15] = 0.0
    return re + 1j * im


def collect_pilot_block(
    realization: ChannelRealization,
    cfg: SystemConfig | ValidatedConfig,
    noise: NoiseSources,
) -> PilotBlock:
    """Quantized observations of ``tau`` pilot transmissions.

    At pilot slot ``t`` the users send row ``t`` of the pilot matrix at power
    ``pilot_power``; the quantization noise variance is evaluated at that
    power.
    """
    vc = validate_config(cfg)
    phi = dft_pilots(vc.tau, vc.K)
    sample = receive(realization, phi.T, vc.pilot_power, vc, noise)
    return PilotBlock(phi=phi, z_q=sample.y_q)


def _observation_noise_level(vc: ValidatedConfig) -> float:
    # eta * ((1 - eta) rho_p |chi|^2 sum(beta) + sigma^2 + 1)
    return vc.eta * (
        (1.0 - vc.eta) * vc.pilot_power * vc.chi_sq * vc.beta_sum + vc.rf_noise_var + 1.0
    )


def lmmse_dense(block: PilotBlock, cfg: SystemConfig | ValidatedConfig) -> np.ndarray:
    """``vec(P_hat) = C_pz C_z^{-1} vec(Z_q)`` with every covariance built explicitly."""
    vc = validate_config(cfg)
    M, tau = block.z_q.shape
    K = block.phi.shape[1]
    if M * tau > DENSE_LIMIT:
        raise ValueError(f"dense LMMSE limited to M*tau <= {DENSE_LIMIT}, got {M * tau}")
    eye_m = np.eye(M)
    phi_bar = np.kron(block.phi, eye_m)
    c_p = vc.chi_sq * np.kron(np.diag(vc.beta), eye_m)
    c_rf = (
        vc.pilot_power * phi_bar @ c_p @ phi_bar.conj().T
        + (1.0 + vc.rf_noise_var) * np.eye(M * tau)
    )
    # quantization noise is uncorrelated with the RF output; its covariance is
    # eta(1-eta) times the diagonal of the RF output covariance
    c_z = vc.eta**2 * c_rf + vc.eta * (1.0 - vc.eta) * np.diag(np.diag(c_rf).real)
    c_pz = vc.eta * np.sqrt(vc.pilot_power) * c_p @ phi_bar.conj().T
    z = block.z_q.reshape(-1, order="F")
    try:
        cho = np.linalg.cholesky(c_z)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("observation covariance is not positive definite") from exc
    w = np.linalg.solve(cho.conj().T, np.linalg.solve(cho, z))
    return (c_pz @ w).reshape((M, K), order="F")


def lmmse_gains(cfg: SystemConfig | ValidatedConfig) -> np.ndarray:
    """Per-user scaling applied to the matched-filter output ``Z_q conj(Phi)``.

    Equal to ``alpha_k / (eta sqrt(rho_p) tau)`` whenever ``rho_p > 0``.
    """
    vc = validate_config(cfg)
    num = vc.eta * np.sqrt(vc.pilot_power) * vc.chi_sq * vc.beta
    den = vc.eta**2 * vc.pilot_power * vc.tau * vc.chi_sq * vc.beta + _observation_noise_level(vc)
    return num / den


def lmmse_fast(block: PilotBlock, cfg: SystemConfig | ValidatedConfig) -> np.ndarray:
    return (block.z_q @ block.phi.conj()) * lmmse_gains(cfg)


def estimation_accuracy(cfg: SystemConfig | ValidatedConfig) -> np.ndarray:
    """Per-user accuracy ``alpha_k`` in [0, 1]; 1 means perfect CSI."""
    vc = validate_config(cfg)
    signal = vc.eta * vc.pilot_power * vc.tau * vc.chi_sq * vc.beta
    distortion = (1.0 - vc.eta) * vc.pilot_power * vc.chi_sq * vc.beta_sum
    return signal / (signal + distortion + vc.rf_noise_var + 1.0)


def analytic_mse(cfg: SystemConfig | ValidatedConfig) -> float:
    """Normalised estimation MSE ``E||p_hat - p||^2 / (M K)``."""
    vc = validate_config(cfg)
    alpha = estimation_accuracy(vc)
    return float(np.mean(vc.beta * vc.chi_sq - alpha * vc.beta * vc.chi_sq))


def mse_floor(cfg: SystemConfig | ValidatedConfig) -> float:
    """Limit of :func:`analytic_mse` as the pilot power grows without bound."""
    vc = validate_config(cfg)
    if vc.tau != vc.K:
        raise FloorUndefined(
            f"error floor requires pilot_length == num_users, got {vc.tau} != {vc.K}"
        )
    K = vc.K
    den = vc.eta * K * vc.beta + (1.0 - vc.eta) * vc.beta_sum
    # 1/K - eta*beta_k/den, rearranged so that eta = 1 gives exactly zero
    with np.errstate(invalid="ignore", divide="ignore"):
        residual = np.where(den > 0, (1.0 - vc.eta) * vc.beta_sum / (K * den), 0.0)
    return float(np.sum(residual * vc.beta * vc.chi_sq))


def estimate_channel(block: PilotBlock, cfg: SystemConfig | ValidatedConfig) -> ChannelEstimate:
    vc = validate_config(cfg)
    return ChannelEstimate(
        p_hat=lmmse_fast(block, vc),
        alpha=estimation_accuracy(vc),
        analytic_mse=analytic_mse(vc),
    )

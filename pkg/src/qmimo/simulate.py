"""Monte Carlo counterparts of the analytic MSE and rate results."""

from __future__ import annotations

import numpy as np

from .channel import draw_channel
from .config import ScenarioSpec, SystemConfig, ValidatedConfig, drop_users, validate_config
from .estimation import collect_pilot_block, lmmse_fast
from .rate import RateReport, log2_1p, rate_approx, sinr_all
from .streams import Tag, Z95, noise_sources, run_trials, substream, summarize, MCEstimate


def _trial_config(vc: ValidatedConfig, scenario: ScenarioSpec | None, seed: int, trial: int):
    if scenario is None:
        return vc
    beta = drop_users(scenario, substream(seed, trial, Tag.DROP))
    return vc.with_(large_scale=tuple(beta), num_users=len(beta))


def estimation_trial(vc: ValidatedConfig, seed: int, trial: int):
    """One coherence block: returns ``(realization, p_hat)``."""
    realization = draw_channel(vc.beta, substream(seed, trial, Tag.CHANNEL), vc.M, vc.chi)
    block = collect_pilot_block(realization, vc, noise_sources(seed, trial))
    return realization, lmmse_fast(block, vc)


def empirical_mse(
    cfg: SystemConfig | ValidatedConfig, trials: int, seed: int, threads: int = 1
) -> MCEstimate:
    """Average of ``||P_hat - P||_F^2 / (M K)`` over independent blocks."""
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    vc = validate_config(cfg)

    def one(i):
        realization, p_hat = estimation_trial(vc, seed, i)
        return np.sum(np.abs(p_hat - realization.P) ** 2) / (vc.M * vc.K)

    return summarize(run_trials(one, trials, threads))


def ergodic_rate_mc(
    cfg: SystemConfig | ValidatedConfig,
    trials: int,
    seed: int,
    threads: int = 1,
    scenario: ScenarioSpec | None = None,
) -> RateReport:
    """Per-user ``E{log2(1 + SINR)}`` with LMMSE estimates and MRC.

    With ``scenario`` set, the user drop is redrawn every trial and the
    closed-form column is averaged over the same drops.
    """
    if trials < 2:
        raise ValueError(f"trials must be >= 2, got {trials}")
    vc = validate_config(cfg)

    def one(i):
        tc = _trial_config(vc, scenario, seed, i)
        realization, p_hat = estimation_trial(tc, seed, i)
        rates = log2_1p(sinr_all(p_hat, realization.P, tc))
        return rates, rate_approx(tc)

    results = run_trials(one, trials, threads)
    mc = np.stack([r[0] for r in results])
    approx = np.stack([r[1] for r in results]).mean(axis=0)
    sums = mc.sum(axis=1)
    n = mc.shape[0]
    return RateReport(
        per_user_mc=mc.mean(axis=0),
        per_user_approx=approx,
        sum_mc=float(sums.mean()),
        sum_approx=float(approx.sum()),
        ci95=Z95 * mc.std(axis=0, ddof=1) / np.sqrt(n),
        sum_ci95=Z95 * float(sums.std(ddof=1)) / np.sqrt(n),
        trials=n,
    )

"""Uplink simulation of a massive MIMO array with coarse ADCs and impaired RF chains."""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    FrontEndSample,
    NoiseSources,
    aqnm_noise_cov,
    draw_channel,
    quantize_aqnm,
    rf_frontend_output,
)
from .config import (
    ScenarioSpec,
    SystemConfig,
    ValidatedConfig,
    default_config,
    drop_users,
    quantization_params,
    validate_config,
)
from .estimation import (
    ChannelEstimate,
    PilotBlock,
    analytic_mse,
    collect_pilot_block,
    dft_pilots,
    estimation_accuracy,
    lmmse_dense,
    lmmse_fast,
    mse_floor,
)
from .rate import (
    RateReport,
    instantaneous_sinr,
    mrc_combine,
    noise_plus_interference,
    rate_approx,
    rate_perfect_csi_bound,
    rate_simplified,
    symbol_level_sinr_oracle,
)
from .simulate import empirical_mse, ergodic_rate_mc
from .streams import substream
from .sweep import SweepResult, SweepSpec, run_sweep

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmimo.channel import NoiseSources, draw_channel
from qmimo.config import default_config, validate_config
from qmimo.estimation import (
    FloorUndefined,
    PilotBlock,
    analytic_mse,
    collect_pilot_block,
    dft_pilots,
    estimation_accuracy,
    lmmse_dense,
    lmmse_fast,
    mse_floor,
)
from qmimo.simulate import empirical_mse, estimation_trial


def _noise(seed):
    rngs = np.random.SeedSequence(seed).spawn(3)
    return NoiseSources(*(np.random.default_rng(s) for s in rngs))


def test_dft_two_point():
    np.testing.assert_array_equal(dft_pilots(2, 2), np.array([[1, 1], [1, -1]], dtype=complex))


def test_dft_single():
    np.testing.assert_array_equal(dft_pilots(1, 1), np.array([[1.0 + 0j]]))


@pytest.mark.parametrize("tau,k", [(4, 2), (5, 5), (8, 3), (13, 7), (10, 10)])
def test_dft_orthogonal(tau, k):
    phi = dft_pilots(tau, k)
    np.testing.assert_allclose(phi.conj().T @ phi, tau * np.eye(k), atol=1e-12)
    np.testing.assert_allclose(np.abs(phi), 1.0, rtol=1e-15)


def test_dft_rejects_short_pilots():
    with pytest.raises(ValueError):
        dft_pilots(3, 4)


def test_noiseless_pilot_block(small_cfg, rng):
    vc = small_cfg.with_(adc_bits="inf", rf_noise_var=0.0)
    real = draw_channel(vc.beta, rng, vc.M, vc.chi)
    block = collect_pilot_block(real, vc, NoiseSources())
    np.testing.assert_allclose(block.z_q, np.sqrt(vc.pilot_power) * real.P @ block.phi.T, rtol=1e-15)


def _scalar_cfg():
    return validate_config(
        default_config(large_scale=[0.7], num_users=1, num_antennas=2, pilot_length=1,
                       adc_bits=2, rf_scale_magnitude=0.85, rf_phase=-0.6,
                       rf_noise_var=0.25, pilot_power=3.0)
    )


def test_dense_scalar_oracle(rng):
    vc = _scalar_cfg()
    z = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
    block = PilotBlock(phi=np.ones((1, 1), dtype=complex), z_q=z)
    # scalar LMMSE assembled by hand: cov(p, z) / var(z)
    eta, rho, c2, b, s2 = vc.eta, 3.0, 0.85**2, 0.7, 0.25
    var_rf = rho * c2 * b + 1 + s2
    var_z = eta**2 * var_rf + eta * (1 - eta) * var_rf
    cov_pz = eta * np.sqrt(rho) * c2 * b
    expected = cov_pz / var_z * z
    np.testing.assert_allclose(lmmse_dense(block, vc), expected, rtol=1e-13)
    alpha = estimation_accuracy(vc)[0]
    np.testing.assert_allclose(expected, alpha / (eta * np.sqrt(rho)) * z, rtol=1e-13)


def test_dense_zero_observation(small_cfg):
    block = PilotBlock(phi=dft_pilots(2, 2), z_q=np.zeros((4, 2), dtype=complex))
    np.testing.assert_array_equal(lmmse_dense(block, small_cfg), np.zeros((4, 2)))


def test_dense_size_guard(small_cfg):
    vc = small_cfg.with_(num_antennas=1000, pilot_length=5)
    block = PilotBlock(phi=dft_pilots(5, 2), z_q=np.zeros((1000, 5), dtype=complex))
    with pytest.raises(ValueError):
        lmmse_dense(block, vc)


def test_fast_equals_dense(small_cfg, rng):
    real = draw_channel(small_cfg.beta, rng, small_cfg.M, small_cfg.chi)
    block = collect_pilot_block(real, small_cfg, _noise(1))
    fast, dense = lmmse_fast(block, small_cfg), lmmse_dense(block, small_cfg)
    assert np.linalg.norm(fast - dense) / np.linalg.norm(dense) < 1e-10


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 6), k=st.integers(1, 4), extra=st.integers(0, 3),
    bits=st.sampled_from([1, 2, 3, 5, 7, "inf"]),
    kappa=st.floats(0.05, 1.0), sigma2=st.floats(0.0, 2.0),
    rho_db=st.floats(-20, 50), seed=st.integers(0, 2**32 - 1),
)
def test_fast_equals_dense_property(m, k, extra, bits, kappa, sigma2, rho_db, seed):
    r = np.random.default_rng(seed)
    vc = validate_config(default_config(
        large_scale=10 ** r.uniform(-3, 0.5, k), num_users=k, num_antennas=m, pilot_length=k + extra,
        adc_bits=bits, rf_scale_magnitude=kappa, rf_phase=r.uniform(-3, 3), rf_noise_var=sigma2,
        pilot_power=10 ** (rho_db / 10),
    ))
    real = draw_channel(vc.beta, r, vc.M, vc.chi)
    block = collect_pilot_block(real, vc, NoiseSources(r, r, r))
    dense = lmmse_dense(block, vc)
    assert np.linalg.norm(lmmse_fast(block, vc) - dense) <= 1e-8 * np.linalg.norm(dense)


def test_zero_pilot_power(small_cfg, rng):
    vc = small_cfg.with_(pilot_power=0.0)
    np.testing.assert_array_equal(estimation_accuracy(vc), 0.0)
    real = draw_channel(vc.beta, rng, vc.M, vc.chi)
    block = collect_pilot_block(real, vc, _noise(2))
    np.testing.assert_array_equal(lmmse_fast(block, vc), 0.0)


def test_alpha_ideal_hardware():
    vc = validate_config(default_config(large_scale=[1.0, 0.2, 0.05], num_users=3, adc_bits="inf",
                                        rf_scale_magnitude=1.0, rf_noise_var=0.0, pilot_power=2.0))
    snr = 2.0 * 3 * vc.beta
    np.testing.assert_allclose(estimation_accuracy(vc), snr / (snr + 1), rtol=1e-15)


def test_alpha_symmetric_half():
    vc = validate_config(default_config(large_scale=[1.0], num_users=1, pilot_length=1, adc_bits="inf",
                                        rf_scale_magnitude=1.0, rf_noise_var=0.0, pilot_power=1.0))
    assert estimation_accuracy(vc)[0] == 0.5


def test_alpha_high_snr_limit():
    beta = np.array([1.0, 0.5, 0.1, 0.02])
    vc = validate_config(default_config(large_scale=beta, num_users=4, adc_bits=2, pilot_power=1e6))
    eta, K = vc.eta, 4
    limit = eta * K * beta / (eta * K * beta + (1 - eta) * beta.sum())
    np.testing.assert_allclose(estimation_accuracy(vc), limit, rtol=1e-5)
    assert np.all(limit < 1)


@settings(max_examples=200, deadline=None)
@given(
    k=st.integers(1, 12), extra=st.integers(0, 5), bits=st.sampled_from([1, 2, 3, 4, 5, 8, "inf"]),
    kappa=st.floats(0.01, 1.0), sigma2=st.floats(0.0, 10.0), rho_db=st.floats(-30, 80),
    seed=st.integers(0, 2**32 - 1),
)
def test_alpha_in_unit_interval(k, extra, bits, kappa, sigma2, rho_db, seed):
    beta = 10 ** np.random.default_rng(seed).uniform(-6, 1, k)
    vc = default_config(large_scale=beta, num_users=k, pilot_length=k + extra, adc_bits=bits,
                        rf_scale_magnitude=kappa, rf_noise_var=sigma2, pilot_power=10 ** (rho_db / 10))
    alpha = estimation_accuracy(vc)
    assert np.all((alpha >= 0) & (alpha <= 1))
    assert analytic_mse(vc) >= 0


def test_mse_perfect_estimation_zero():
    # eta = 1 and no noise left: alpha -> 1 as pilot power grows
    vc = default_config(adc_bits="inf", rf_noise_var=0.0, pilot_power=1e300)
    assert analytic_mse(vc) == pytest.approx(0.0, abs=1e-290)


def test_mse_half():
    vc = default_config(large_scale=[1.0], num_users=1, pilot_length=1, adc_bits="inf",
                        rf_scale_magnitude=1.0, rf_noise_var=0.0, pilot_power=1.0)
    assert analytic_mse(vc) == 0.5


def test_floor_one_bit_equal_beta():
    vc = default_config(adc_bits=1, rf_scale_magnitude=1.0, large_scale=[1.0] * 10)
    assert mse_floor(vc) == pytest.approx(0.3634, rel=1e-14)


def test_floor_equal_beta_general():
    vc = validate_config(default_config(adc_bits=3, rf_scale_magnitude=0.7, large_scale=[0.4] * 10))
    assert mse_floor(vc) == pytest.approx(vc.mu * 0.4 * 0.49, rel=1e-13)


def test_floor_ideal_adc_zero():
    assert mse_floor(default_config(adc_bits="inf")) == 0.0


def test_floor_requires_square_pilots():
    with pytest.raises(FloorUndefined):
        mse_floor(default_config(pilot_length=12))


@pytest.mark.parametrize("bits", [1, 2, 4])
def test_floor_is_limit(bits):
    beta = [1.0, 0.3, 0.05, 0.6, 0.01]
    vc = default_config(large_scale=beta, num_users=5, pilot_length=5, adc_bits=bits, pilot_power=1e8)
    assert analytic_mse(vc) == pytest.approx(mse_floor(vc), rel=1e-4)


def test_mse_monotone_in_parameters():
    base = default_config(large_scale=[1.0, 0.2, 0.03], num_users=3, pilot_length=3)
    powers = [analytic_mse(base.with_(pilot_power=10 ** (d / 10))) for d in range(-20, 81, 5)]
    assert all(a >= b for a, b in zip(powers, powers[1:]))
    taus = [analytic_mse(base.with_(pilot_length=t)) for t in range(3, 30)]
    assert all(a >= b for a, b in zip(taus, taus[1:]))
    bits = [analytic_mse(base.with_(adc_bits=b)) for b in list(range(1, 12)) + ["inf"]]
    assert all(a >= b for a, b in zip(bits, bits[1:]))


def test_empirical_mse_ideal_near_zero():
    vc = default_config(adc_bits="inf", rf_noise_var=0.0, rf_scale_magnitude=1.0,
                        pilot_power=1e6, num_antennas=8)
    est = empirical_mse(vc, 50, seed=3)
    assert est.mean < 1e-6


def test_empirical_mse_rejects_one_trial():
    with pytest.raises(ValueError):
        empirical_mse(default_config(), 1, seed=0)


def test_empirical_mse_matches_theory():
    vc = default_config(num_antennas=16, large_scale=[1.0, 0.5, 0.2, 0.1, 0.05] * 2)
    est = empirical_mse(vc, 2000, seed=5)
    assert est.mean == pytest.approx(analytic_mse(vc), rel=0.02)
    assert est.ci95 < 0.02 * est.mean


@pytest.mark.slow
def test_empirical_floors_ordered():
    floors = {}
    for bits in (1, 5):
        vc = default_config(num_antennas=16, adc_bits=bits, pilot_power=1e6)
        est = empirical_mse(vc, 2000, seed=6)
        assert est.mean == pytest.approx(mse_floor(vc), rel=0.03)
        floors[bits] = est.mean
    assert floors[1] > floors[5]


def test_estimate_covariance_and_orthogonality(small_cfg):
    vc = small_cfg
    n = 8_000
    p_hat = np.empty((n, vc.M, vc.K), dtype=complex)
    err = np.empty_like(p_hat)
    for i in range(n):
        real, est = estimation_trial(vc, 77, i)
        p_hat[i], err[i] = est, real.P - est
    alpha = estimation_accuracy(vc)
    np.testing.assert_allclose(np.mean(np.abs(p_hat) ** 2, axis=(0, 1)), vc.chi_sq * vc.beta * alpha, rtol=0.03)
    # estimate and error uncorrelated, entrywise
    cross = np.mean(p_hat.conj() * err, axis=0)
    scale = np.sqrt(vc.chi_sq * vc.beta * alpha * vc.chi_sq * vc.beta * (1 - alpha))
    assert np.max(np.abs(cross) / scale) < 0.05

import numpy as np
import pytest

from dftbeam import (
    LosModel,
    RiceanParams,
    analog_beamformer,
    build_dft,
    effective_channel,
    gen_los,
    sample_channel,
)
from dftbeam.channel import sample_channels

from conftest import crandn


def test_ula_broadside():
    np.testing.assert_allclose(gen_los(LosModel("ula", (0.0,)), 4, 1), np.ones((4, 1)))


def test_ula_steering_phase():
    theta = 0.3
    col = gen_los(LosModel("ula", (theta,)), 6, 1)[:, 0]
    np.testing.assert_allclose(col, np.exp(1j * np.pi * np.arange(6) * np.sin(theta)))


def test_ula_angle_range():
    with pytest.raises(ValueError):
        LosModel("ula", (2.0,))


def test_gaussian_los_power():
    M = 8
    # M >= N_u is required, so collect 10^4 columns from 1250 seeds
    H = np.hstack([gen_los(LosModel(), M, M, seed=s) for s in range(1250)])
    assert np.mean(np.sum(np.abs(H) ** 2, axis=0)) == pytest.approx(M, rel=0.05)


def test_gaussian_los_deterministic():
    a = gen_los(LosModel(), 16, 3, seed=11)
    assert np.array_equal(a, gen_los(LosModel(), 16, 3, seed=11))
    assert not np.array_equal(a, gen_los(LosModel(), 16, 3, seed=12))


def test_los_dimension_errors():
    with pytest.raises(ValueError):
        gen_los(LosModel(), 2, 3)
    with pytest.raises(ValueError):
        gen_los(LosModel("ula", (0.1,)), 4, 2)


def test_params_validation(rng):
    los = crandn(rng, 4, 2)
    with pytest.raises(ValueError):
        RiceanParams([1, -1], [0, 0], los)
    with pytest.raises(ValueError):
        RiceanParams([1, 1], [0, np.inf], los)
    with pytest.raises(ValueError):
        RiceanParams([1], [0], los)


def test_large_k_approaches_los(rng):
    los = crandn(rng, 8, 2)
    p = RiceanParams([1, 1], [1e8, 1e8], los)
    G = sample_channel(p, seed=3, drop=0)
    assert np.max(np.abs(G - los)) < 1e-3


def test_rayleigh_covariance():
    M = 4
    p = RiceanParams([1.0], [0.0], np.zeros((M, 1)))
    G = sample_channels(p, seed=1, drops=10_000)[:, :, 0]
    cov = G.T @ G.conj() / G.shape[0]
    assert np.max(np.abs(cov - np.eye(M))) < 0.05


def test_beta_scaling():
    M = 6
    p = RiceanParams([4.0], [0.0], np.zeros((M, 1)))
    G = sample_channels(p, seed=2, drops=10_000)
    assert np.mean(np.sum(np.abs(G) ** 2, axis=(1, 2))) == pytest.approx(4 * M, rel=0.05)


def test_drop_reproducible_and_order_free(rng):
    p = RiceanParams([1.0, 2.0], [3.0, 0.5], crandn(rng, 8, 2))
    stack = sample_channels(p, 7, [4, 0, 9])
    for i, d in enumerate([4, 0, 9]):
        assert np.array_equal(stack[i], sample_channel(p, 7, d))
    assert np.array_equal(sample_channel(p, 7, 9), sample_channel(p, 7, 9))
    assert not np.array_equal(sample_channel(p, 7, 9), sample_channel(p, 7, 8))


def test_mean_decomposition(rng):
    p = RiceanParams([2.0, 0.5], [4.0, 1.0], crandn(rng, 6, 2))
    G = sample_channels(p, 4, 20_000)
    expected = p.los * np.sqrt(p.kappas / (p.kappas + 1)) * np.sqrt(p.betas)
    # per-entry standard error is sqrt(beta / (K + 1) / drops) <= 0.006
    assert np.max(np.abs(G.mean(axis=0) - expected)) < 0.03


def test_beamformed_noise_is_white():
    M, cb = 16, build_dft(16)
    F = analog_beamformer(cb, [0, 3, 7, 12])
    z = crandn(np.random.default_rng(9), 10_000, M)
    y = z @ F.matrix.T
    cov = y.T @ y.conj() / y.shape[0]
    assert np.max(np.abs(cov - np.eye(4))) < 0.05


def test_effective_channel_full_projection():
    M = 8
    U = build_dft(M).entries
    g = (np.sqrt(M) * np.conj(U[0]))[:, None]
    geq = effective_channel(analog_beamformer(build_dft(M), [0]), g)
    np.testing.assert_allclose(geq, [[np.sqrt(M)]], atol=1e-12)


def test_effective_channel_isometry(rng):
    M = 8
    G = crandn(rng, M, 3)
    geq = effective_channel(analog_beamformer(build_dft(M), range(M)), G)
    assert abs(np.linalg.norm(geq) - np.linalg.norm(G)) < 1e-10


def test_effective_channel_product(rng):
    G = crandn(rng, 4, 3)
    cb = build_dft(4)
    F = analog_beamformer(cb, [1, 3])
    explicit = np.array([[sum(cb.entries[r, m] * G[m, k] for m in range(4)) for k in range(3)]
                         for r in (1, 3)])
    np.testing.assert_allclose(effective_channel(F, G), explicit, atol=1e-12)


def test_effective_channel_mismatch(rng):
    with pytest.raises(ValueError):
        effective_channel(analog_beamformer(build_dft(4), [0]), crandn(rng, 5, 2))

#!/usr/bin/env python3
"""Tests for the Rayleigh uplink channel and the received-signal model."""

import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from noma import (
    ChannelRealization,
    ConfigurationError,
    Modulation,
    Scenario,
    UsageError,
    UserSpec,
    add_noise,
    sample_channel,
    superimpose,
)
from noma.channel import sample_gains


def test_gain_statistics(rng):
    scenario = Scenario(users=(UserSpec(mod_order=4), UserSpec(mod_order=4)), antennas=4)
    gains = sample_gains(rng, scenario, 250_000)
    components = gains.reshape(-1)
    assert np.mean(np.abs(components) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(components.real) == pytest.approx(0.5, abs=0.005)
    energy = (np.abs(gains[:, 0]) ** 2).sum(axis=1)
    assert energy.mean() == pytest.approx(4.0, abs=0.02)
    cross = np.mean(gains[:, 0, 0] * np.conj(gains[:, 1, 0]))
    assert abs(cross) < 0.01


def test_gain_norm_is_chi_square(rng):
    scenario = Scenario(
        users=(UserSpec(mod_order=16, channel_var=0.5),), antennas=3
    )
    gains = sample_gains(rng, scenario, 100_000)[:, 0]
    statistic = 2 * (np.abs(gains) ** 2).sum(axis=1) / 0.5
    result = stats.kstest(statistic, stats.chi2(df=6).cdf)
    assert result.pvalue > 0.01


def test_effective_gain_consistency(rng):
    scenario = Scenario(
        users=(UserSpec(mod_order=4, power=4.0), UserSpec(mod_order=4, power=2.0)), antennas=2
    )
    realization = sample_channel(rng, scenario)
    norms = (np.abs(realization.effective) ** 2).sum(axis=1) / scenario.powers
    assert_allclose(norms, (np.abs(realization.gains) ** 2).sum(axis=1))


def test_sample_channel_reproducible(qpsk_pair):
    first = sample_channel(np.random.default_rng(7), qpsk_pair)
    second = sample_channel(np.random.default_rng(7), qpsk_pair)
    assert_array_equal(first.gains, second.gains)


class TestSuperimpose:
    def test_identity_channel(self):
        realization = ChannelRealization(gains=np.array([[1, 0, 0]]), powers=np.array([1.0]))
        assert_allclose(superimpose(realization, [1 + 1j]), [1 + 1j, 0, 0])

    def test_cancellation(self):
        gains = np.array([[0.3 - 0.2j, 1.1j], [0.3 - 0.2j, 1.1j]])
        realization = ChannelRealization(gains=gains, powers=np.ones(2))
        assert_allclose(superimpose(realization, [1 - 3j, -1 + 3j]), [0, 0])

    def test_three_users(self):
        gains = np.array([[1, 2j], [0.5, -1], [1j, 1 + 1j]])
        powers = np.array([4.0, 1.0, 0.25])
        realization = ChannelRealization(gains=gains, powers=powers)
        symbols = np.array([1 + 1j, -3 + 1j, 1 - 1j])
        expected = sum(np.sqrt(p) * g * x for g, p, x in zip(gains, powers, symbols))
        assert_allclose(superimpose(realization, symbols), expected)

    def test_symbol_count(self):
        realization = ChannelRealization(gains=np.ones((2, 1)), powers=np.ones(2))
        with pytest.raises(UsageError):
            superimpose(realization, [1])


class TestNoise:
    def test_noiseless(self, rng):
        signal = np.array([1 + 2j, -3j])
        assert_array_equal(add_noise(signal, 0.0, rng), signal)

    def test_variance_and_mean(self, rng):
        noise = add_noise(np.zeros(1_000_000), 2.0, rng)
        assert np.mean(np.abs(noise) ** 2) == pytest.approx(2.0, abs=0.02)
        assert abs(noise.mean()) < 0.005
        assert np.var(noise.imag) == pytest.approx(1.0, abs=0.01)

    def test_negative_psd(self, rng):
        with pytest.raises(ConfigurationError):
            add_noise(np.zeros(2), -1.0, rng)


class TestScenario:
    def test_ordering_enforced(self):
        with pytest.raises(ConfigurationError, match="non-increasing"):
            Scenario(users=(UserSpec(mod_order=4, channel_var=0.5), UserSpec(mod_order=4)), antennas=1)

    def test_invalid_values(self):
        with pytest.raises(ConfigurationError):
            UserSpec(mod_order=4, power=0)
        with pytest.raises(ConfigurationError):
            Scenario(users=(UserSpec(mod_order=4),), antennas=0)
        with pytest.raises(ConfigurationError, match="user 1"):
            Scenario(users=(UserSpec(mod_order=8),), antennas=1)

    def test_pam_scenario(self):
        scenario = Scenario(users=(UserSpec(mod_order=8),), antennas=1, modulation=Modulation.PAM)
        assert scenario.constellations()[0].order == 8

    def test_at_ebn0(self, qpsk_single):
        assert qpsk_single.at_ebn0(10).noise_psd == pytest.approx(0.1)
        assert qpsk_single.at_ebn0(10).ebn0_db == pytest.approx(10)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))

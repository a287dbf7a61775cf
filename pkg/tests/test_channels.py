"""Tests for channel realizations."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from irs_secrecy_lab.actions import ReflectionConfig
from irs_secrecy_lab.channels import draw_channels
from irs_secrecy_lab.numerics import make_rng


class TestDrawChannels:
    """Tests for draw_channels."""

    def test_shapes(self, tiny, channels):
        """Test the shapes of every drawn link."""
        z, n, p, s = tiny.n_irs, tiny.n_elements, tiny.n_pbs_antennas, tiny.n_sbs_antennas
        assert channels.pbs_irs.shape == (z, n, p)
        assert channels.irs_sbs.shape == (z, n, s)
        assert channels.sbs_irs.shape == (z, n, s)
        assert channels.pbs_sbs.shape == (p, s)
        assert channels.sbs_su.shape == (tiny.n_su, s)
        assert channels.irs_su.shape == (z, tiny.n_su, n)
        assert channels.sbs_eve.shape == (tiny.n_eve, s)
        assert channels.irs_pu.shape == (z, tiny.n_pu, n)
        assert channels.pbs_beams.shape == (tiny.n_pu, p)
        assert channels.occupancy.shape == (tiny.n_pu, tiny.n_subchannels)

    def test_deterministic_under_seed(self, tiny):
        """Test deterministic under seed."""
        a = draw_channels(tiny, make_rng(3, 1, 4))
        b = draw_channels(tiny, make_rng(3, 1, 4))
        np.testing.assert_array_equal(a.sbs_su, b.sbs_su)
        np.testing.assert_array_equal(a.irs_eve, b.irs_eve)
        np.testing.assert_array_equal(a.occupancy, b.occupancy)

    def test_pbs_beams_spend_full_power(self, tiny, channels):
        """Test PBS beams spend full power."""
        powers = np.sum(np.abs(channels.pbs_beams) ** 2, axis=1)
        np.testing.assert_allclose(powers, tiny.pbs_power_w)

    def test_at_most_one_active_pu_per_subchannel(self, tiny):
        """Test at most one active PU per subchannel."""
        for episode in range(20):
            occupancy = draw_channels(tiny, make_rng(1, episode)).occupancy
            assert np.all(occupancy.sum(axis=0) <= 1)
            for d, c in zip(*np.nonzero(occupancy)):
                assert tiny.licensed_subchannel(int(d)) == int(c)

    def test_always_idle_subchannels(self, tiny):
        """Bypasses validation: priors of exactly one never draw an active PU."""
        idle = dataclasses.replace(tiny, idle_priors=(1.0, 1.0))
        for episode in range(10):
            assert not draw_channels(idle, make_rng(2, episode)).occupancy.any()

    def test_activity_frequency_matches_prior(self, tiny):
        """Test activity frequency matches prior."""
        draws = np.array([draw_channels(tiny, make_rng(9, e)).occupancy.sum() for e in range(400)])
        busy_rate = draws.mean() / tiny.n_subchannels
        assert busy_rate == pytest.approx(1.0 - tiny.idle_priors[0], abs=0.06)


class TestCompositeLinks:
    """Tests for the reflected composite links."""

    def test_irs_off_leaves_direct_path(self, tiny, channels):
        """Test IRS off leaves direct path."""
        off = ReflectionConfig.off(tiny.n_irs, tiny.n_elements)
        np.testing.assert_allclose(channels.sbs_to_su(0, 1, off.phi(1)), channels.sbs_su[0])
        np.testing.assert_allclose(channels.sensing_matrix(0, off.phi(0)), channels.pbs_sbs.conj().T)

    def test_reflected_term_is_linear_in_coefficients(self, tiny, channels):
        """Test reflected term is linear in coefficients."""
        phi = np.exp(1j * np.linspace(0.0, 1.0, tiny.n_elements))
        full = channels.sbs_to_eve(0, 0, phi) - channels.sbs_eve[0]
        half = channels.sbs_to_eve(0, 0, 0.5 * phi) - channels.sbs_eve[0]
        np.testing.assert_allclose(half, 0.5 * full)

    def test_sensing_matrix_shape(self, tiny, channels):
        """Test sensing matrix shape."""
        phi = ReflectionConfig.identity(tiny.n_irs, tiny.n_elements).phi(0)
        assert channels.sensing_matrix(0, phi).shape == (tiny.n_sbs_antennas, tiny.n_pbs_antennas)

    def test_subchannel_beam_falls_back_to_licensed_pu(self, tiny, channels):
        """Test subchannel beam falls back to licensed PU."""
        idle = dataclasses.replace(channels, occupancy=np.zeros_like(channels.occupancy))
        np.testing.assert_array_equal(idle.subchannel_beam(1, tiny), channels.pbs_beams[1])

    def test_subchannel_without_licensed_pu(self, tiny, channels):
        """Test subchannel without licensed PU."""
        wide = dataclasses.replace(tiny, n_subchannels=3, idle_priors=(0.8, 0.8, 0.8))
        idle = dataclasses.replace(channels, occupancy=np.zeros((tiny.n_pu, 3), dtype=np.int64))
        assert idle.subchannel_beam(2, wide) is None

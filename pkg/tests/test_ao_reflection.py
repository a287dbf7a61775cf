"""Tests for the reflection block."""

from __future__ import annotations

import numpy as np
import pytest

from irs_secrecy_lab.actions import ReflectionConfig
from irs_secrecy_lab.ao_reflection import (
    SurrogatePoint,
    phase_aligned_start,
    sca_reflection,
    taylor_lower_bound,
)
from irs_secrecy_lab.rates import secrecy_rate
from irs_secrecy_lab.sensing import sense


class TestTaylorBound:
    """Tests for the first-order power bound."""

    def test_never_above_power(self):
        """Test never above power."""
        rng = np.random.default_rng(0)
        mu, lam, mu0, lam0 = rng.uniform(-5.0, 5.0, (4, 1000))
        bound = taylor_lower_bound(mu, lam, mu0, lam0)
        assert np.all(bound <= mu**2 + lam**2 + 1e-12)

    def test_tight_at_expansion_point(self):
        """Test tight at expansion point."""
        assert taylor_lower_bound(1.5, -2.0, 1.5, -2.0) == pytest.approx(1.5**2 + 2.0**2)

    def test_surrogate_point(self):
        """Test the surrogate expansion point and its validity check."""
        point = SurrogatePoint.at(np.array([1.0 + 2.0j, -0.5j]))
        np.testing.assert_allclose(point.kappa, [5.0, 0.25])
        assert point.is_valid()
        assert not SurrogatePoint(point.mu, point.lam, point.kappa + 1.0).is_valid()


class TestScaReflection:
    """Tests for sca_reflection."""

    def test_never_worse_than_start(self, tiny, channels, base_action, small_ao):
        """Test never worse than start."""
        sensing = sense(channels, base_action.theta, base_action.tau, tiny)
        start = secrecy_rate(channels, base_action, sensing, tiny)

        result = sca_reflection(channels, base_action, tiny, small_ao)

        assert result.objective >= start
        assert result.history[0] == pytest.approx(start)
        assert np.all(np.diff(result.history) > 0.0)
        assert result.rounds >= 1

    def test_objective_matches_returned_reflection(self, tiny, channels, base_action, small_ao):
        """Test objective matches returned reflection."""
        result = sca_reflection(channels, base_action, tiny, small_ao)
        sensing = sense(channels, result.theta, base_action.tau, tiny)
        assert result.objective == pytest.approx(
            secrecy_rate(channels, base_action.replace_theta(result.theta), sensing, tiny)
        )

    def test_coefficients_stay_in_unit_disk(self, tiny, channels, base_action, small_ao):
        """Test coefficients stay in unit disk."""
        theta = sca_reflection(channels, base_action, tiny, small_ao).theta
        assert theta.is_valid(atol=1e-12)

    def test_custom_start(self, tiny, channels, base_action, small_ao):
        """Test SCA never ends below a custom starting reflection."""
        off = ReflectionConfig.off(tiny.n_irs, tiny.n_elements)
        result = sca_reflection(channels, base_action, tiny, small_ao, theta_init=off)
        sensing = sense(channels, off, base_action.tau, tiny)
        assert result.objective >= secrecy_rate(channels, base_action.replace_theta(off), sensing, tiny)

    def test_phase_aligned_start(self, channels, base_action):
        """Test phase aligned start."""
        start = phase_aligned_start(channels, base_action, [0, 1])
        np.testing.assert_allclose(np.abs(start), 1.0)
        beam = base_action.beams[0]
        through = channels.irs_su[0, 0] * (channels.sbs_irs[0] @ beam)
        direct = channels.sbs_su[0] @ beam
        np.testing.assert_allclose(np.exp(1j * np.angle(through * start[0])), np.exp(1j * np.angle(direct)))


@pytest.mark.slow
class TestReflectionOracle:
    """SCA against a random search over unit-modulus reflections."""

    def test_not_beaten_by_random_phases(self, tiny, channels, base_action, small_ao):
        """Test not beaten by random phases."""
        result = sca_reflection(channels, base_action, tiny, small_ao)
        rng = np.random.default_rng(0)
        values = []
        for _ in range(300):
            phases = rng.uniform(0.0, 2.0 * np.pi, (tiny.n_irs, tiny.n_elements))
            theta = ReflectionConfig(np.ones_like(phases), phases)
            sensing = sense(channels, theta, base_action.tau, tiny)
            values.append(secrecy_rate(channels, base_action.replace_theta(theta), sensing, tiny))
        assert result.objective >= np.mean(values)
        assert result.objective >= 0.9 * max(values)

"""Tests for the benchmark scheme profiles."""

from __future__ import annotations

import numpy as np
import pytest

from irs_secrecy_lab.config import ConfigError
from irs_secrecy_lab.options import OptionCatalog
from irs_secrecy_lab.schemes import PROFILES, SchemeId, profile_for


class TestSchemeId:
    """Tests for scheme parsing."""

    def test_every_scheme_has_a_profile(self):
        """Test every scheme has a profile."""
        assert set(PROFILES) == set(SchemeId)

    @pytest.mark.parametrize("name", ["proposed", " Proposed ", "PROPOSED"])
    def test_parse_normalizes(self, name):
        """Test parse normalizes."""
        assert SchemeId.parse(name) is SchemeId.PROPOSED

    def test_parse_passes_members_through(self):
        """Test parse passes members through."""
        assert SchemeId.parse(SchemeId.AO) is SchemeId.AO

    def test_unknown_scheme_lists_choices(self):
        """Test unknown scheme lists choices."""
        with pytest.raises(ConfigError, match="Unknown scheme: h2dt. Available: proposed, ao"):
            SchemeId.parse("h2dt")


class TestProfiles:
    """Tests for the restrictions of each scheme."""

    def test_only_ao_skips_the_agent(self):
        """Test only AO skips the agent."""
        assert [s for s, p in PROFILES.items() if not p.uses_agent] == [SchemeId.AO]

    def test_without_irs(self, tiny, base_action):
        """Test without_irs switches every element off."""
        constrained = profile_for("without_irs").constrain(base_action, tiny)
        np.testing.assert_array_equal(constrained.theta.amplitudes, 0.0)
        np.testing.assert_array_equal(constrained.beams, base_action.beams)

    def test_fixed_irs(self, tiny, base_action):
        """Test fixed_irs forces identity reflection."""
        theta = base_action.theta.with_irs(0, np.full(tiny.n_elements, 0.3), np.full(tiny.n_elements, 1.0))
        constrained = profile_for("fixed_irs").constrain(base_action.replace_theta(theta), tiny)
        np.testing.assert_array_equal(constrained.theta.amplitudes, 1.0)
        np.testing.assert_array_equal(constrained.theta.phases, 0.0)

    def test_proposed_leaves_action(self, tiny, base_action):
        """Test the proposed scheme passes the action through."""
        assert profile_for("proposed").constrain(base_action, tiny) is base_action

    def test_nearest_irs_options(self, tiny):
        """Test nearest IRS options."""
        catalog = OptionCatalog(tiny)
        allowed = profile_for("nearest_irs").allowed_options(catalog, tiny)
        assert allowed == catalog.with_pairing((0, 1))
        assert profile_for("proposed").allowed_options(catalog, tiny) is None

    def test_transmit_modes(self):
        """Test transmit modes."""
        assert profile_for("opportunistic").transmit_mode == "opportunistic"
        assert profile_for("random_choice").option_policy == "uniform"
        assert profile_for("proposed").transmit_mode == "sensing_enhanced"

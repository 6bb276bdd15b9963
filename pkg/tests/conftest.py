"""Shared fixtures: group contexts, seeded randomness and one small election."""

import pytest

from verivote.config import ElectionConfig
from verivote.groups import SecurityProfile, setup_group
from verivote.services.election_runner import ElectionRunner
from verivote.utils.randomness import DeterministicRandom


@pytest.fixture(scope="session")
def toy_ctx():
    """Order-11 subgroup of Z_23*, g = 2, h = 13"""
    return setup_group(SecurityProfile.TOY, "toy")


@pytest.fixture(scope="session")
def ctx():
    return setup_group(SecurityProfile.TEST, "verivote-tests")


@pytest.fixture
def rng(request):
    """A stream of its own for every test"""
    return DeterministicRandom(b"verivote-tests", request.node.nodeid)


@pytest.fixture(scope="session")
def small_config():
    return ElectionConfig.build(
        booths=2,
        voters_per_booth=6,
        candidates=3,
        seed="unit-election",
        audit_fraction=0.2,
    )


@pytest.fixture(scope="session")
def small_election(small_config):
    return ElectionRunner(small_config).run()

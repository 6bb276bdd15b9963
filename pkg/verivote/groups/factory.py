"""
Group context factory.

Builds the GroupContext for a named security profile.
"""

import hashlib
import logging
from functools import lru_cache
from typing import Union

from verivote.constants import DST_HASH_TO_GROUP
from verivote.groups.base import GroupError, UnsupportedProfileError
from verivote.groups.context import BackendId, GroupContext, SecurityProfile
from verivote.groups.elements import GroupElement
from verivote.groups.mock_backend import MockBackend

logger = logging.getLogger(__name__)

# Toy multiplicative subgroup: order-11 subgroup of Z_23*
TOY_Q = 11
TOY_MODULUS = 23
TOY_G = 2
TOY_H = 13

# Order of the BLS12-381 prime subgroup, used as q by the test profile
BLS12_381_ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001


def _normalize_seed(seed: Union[bytes, str]) -> bytes:
    if isinstance(seed, str):
        seed = seed.encode("utf-8")
    return seed


@lru_cache(maxsize=16)
def _build(profile: SecurityProfile, seed: bytes, pairing: bool) -> GroupContext:
    if profile == SecurityProfile.TOY:
        backend = MockBackend(TOY_Q, "toy-z23", modulus=TOY_MODULUS, generator_value=TOY_G)
        h_raw = backend.from_residue(TOY_H)
        backend_id = BackendId.MOCK
    elif profile == SecurityProfile.TEST:
        backend = MockBackend(BLS12_381_ORDER, "test-bls-order")
        digest = hashlib.sha512(DST_HASH_TO_GROUP + seed).digest()
        h_raw = int.from_bytes(digest, "big") % backend.q
        backend_id = BackendId.MOCK
    elif profile == SecurityProfile.PRODUCTION:
        # py_ecc is only imported when the production curve is requested
        from verivote.groups.pairing_backend import PairingBackend

        backend = PairingBackend()
        h_raw = backend.hash_to_element(seed)
        backend_id = BackendId.PRODUCTION
    else:
        raise UnsupportedProfileError(f"Unknown security profile: {profile}", value=profile)

    g = GroupElement(backend, backend.generator())
    h = GroupElement(backend, h_raw)
    if h.is_identity() or h == g:
        raise GroupError("derived second generator is degenerate; choose another seed")

    return GroupContext(
        profile=profile,
        backend_id=backend_id,
        backend=backend,
        g=g,
        h=h,
        seed=seed,
        pairing_enabled=pairing,
    )


def setup_group(security_profile: Union[SecurityProfile, str], seed: Union[bytes, str],
                pairing: bool = True) -> GroupContext:
    """
    Build the group context for a security profile.

    Args:
        security_profile: 'toy', 'test' or 'production'
        seed: Public seed from which h is derived
        pairing: Whether pairings may be evaluated in this context

    Returns:
        GroupContext, identical for identical arguments

    Raises:
        UnsupportedProfileError: If the profile is unknown
        GroupError: If the seed is empty or yields a degenerate generator
    """
    try:
        profile = SecurityProfile(security_profile)
    except ValueError as exc:
        raise UnsupportedProfileError(
            f"Unknown security profile: {security_profile}. Supported: toy, test, production",
            value=security_profile,
        ) from exc

    seed = _normalize_seed(seed)
    if not seed:
        raise GroupError("seed must be non-empty", field="seed")

    logger.info(f"Initializing group context: {profile.value}")
    return _build(profile, seed, pairing)

"""
Protocol-wide constants for verivote
"""

# Domain separation tags for every hash used in the protocol
DST_SCHNORR = b"verivote/schnorr/v1"
DST_BLIND = b"verivote/blind-schnorr/v1"
DST_RING = b"verivote/ring/v1"
DST_HYBRID = b"verivote/hybrid/v1"
DST_MEMBERSHIP = b"verivote/membership-fs/v1"
DST_TOKEN = b"verivote/token/v1"
DST_RECEIPT = b"verivote/receipt/v1"
DST_HASH_TO_GROUP = b"verivote/hash-to-group/v1"

# Canonical record hash encoding: 32-byte rid || 4-byte vote
RECORD_RID_WIDTH = 32
RECORD_VOTE_WIDTH = 4
RECORD_HASH_SIZE = 32

# Small integers (u', w', v, N_k, nonce indices) on the wire
SMALL_INT_WIDTH = 4

# Length prefix of every serialized field
LENGTH_PREFIX_WIDTH = 4

# Largest printable token part
TOKEN_PART_MAX_BYTES = 1024

# Reference widths for a 1024-bit pairing curve with a 160-bit group order
REFERENCE_ELEMENT_WIDTH = 2 * 128
REFERENCE_SCALAR_WIDTH = 20
REFERENCE_SIGNATURE_WIDTH = 256

# Default number of tokens printed per expected voter
DEFAULT_TOKEN_MULTIPLE = 2.0

# CLI exit codes
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_MALFORMED_INPUT = 2

# Ring-signed messages
DST_RECORD = b"verivote/record/v1"
DST_BOOTH_HASH = b"verivote/booth-hash/v1"
DST_BOOTH_COUNT = b"verivote/booth-count/v1"

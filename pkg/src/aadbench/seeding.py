"""Seed derivation and the shared pseudo-random generator.

All randomness flows through :func:`make_rng`, a numpy ``Generator`` backed
by PCG64 (a 64-bit permuted congruential generator). Child seeds are derived
with :func:`derive_seed`: the BLAKE2b hash (8-byte digest) of the canonical
JSON encoding of the key parts, read as an unsigned little-endian integer.
Because the key is hashed by content, adding a sibling key never changes the
seeds of existing keys.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(*parts) -> int:
    """Return a 64-bit seed from an ordered tuple of JSON-serializable parts."""
    key = json.dumps(list(parts), sort_keys=True, separators=(",", ":"))
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))

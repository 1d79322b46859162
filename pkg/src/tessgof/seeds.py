"""Splittable, documented seed derivation for parallel replications.

Every replication draws its RNG from ``derive_seed(master_seed, *tags)``
where the tags name the phase, model and replication index.  The scheme is
a BLAKE2b hash of the UTF-8 encoding of the tag tuple, truncated to 63
bits, so seed streams are reproducible across runs, platforms and worker
counts.
"""

import hashlib

import numpy as np

__all__ = ["derive_seed", "rng_for"]


def derive_seed(master_seed, *tags):
    """Derive a 63-bit child seed from a master seed and a tag tuple."""
    text = repr((int(master_seed),) + tuple(tags))
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def rng_for(master_seed, *tags):
    """Generator seeded from the derived child seed."""
    return np.random.default_rng(derive_seed(master_seed, *tags))

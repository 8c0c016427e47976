"""Per-unit seed derivation so every stage draws from its own reproducible stream."""

import hashlib

import numpy as np


def derive_seed(master, *unit):
    """64-bit seed from blake2b over the master seed and a unit id path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master).to_bytes(8, "little", signed=False))
    for part in unit:
        h.update(b"\x1f" + str(part).encode())
    return int.from_bytes(h.digest(), "little")


def unit_rng(master, *unit):
    return np.random.Generator(np.random.PCG64(derive_seed(master, *unit)))

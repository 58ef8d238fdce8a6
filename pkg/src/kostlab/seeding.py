"""Stable 64-bit seed derivation and counter-based generators."""
import hashlib
import struct

import numpy as np


def substream_seed(*parts):
    """Hash ints/strings into a stable unsigned 64-bit seed (blake2b)."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, str):
            b = p.encode()
            h.update(b"s" + struct.pack("<Q", len(b)) + b)
        else:
            h.update(b"i" + int(p).to_bytes(16, "little", signed=True))
    return struct.unpack("<Q", h.digest())[0]


def philox(seed, *key):
    """Philox generator for ``seed`` and an integer stream key."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))

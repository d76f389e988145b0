"""Named, seedable counter-based random streams.

Every source of randomness in a run is a Philox stream derived from
(seed, name), so schedules, preference draws, dropout masks, and
parameter init are reproducible independently of call order between
streams.
"""

import hashlib

import numpy as np


def named_stream(seed: int, name: str) -> np.random.Generator:
    """A Philox generator keyed by the run seed and a stream name."""
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))

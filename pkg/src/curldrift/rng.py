"""Keyed random streams.

Every random draw in the library comes from a Philox generator keyed by
``(master_seed, replica_id, stream_id)``. Each replica therefore owns
independent streams whose contents do not depend on scheduling.
"""

from __future__ import annotations

import numpy as np

MODES = 0
INIT = 1
ENV_NOISE = 2
BROWNIAN = 3


def stream(master_seed: int, replica_id: int = 0, stream_id: int = 0) -> np.random.Generator:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError("master_seed must be a 64-bit unsigned integer")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replica_id), int(stream_id)))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed, replica_id: int, stream_id: int) -> np.random.Generator:
    """Accept either an integer master seed or a ready generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed), replica_id, stream_id)

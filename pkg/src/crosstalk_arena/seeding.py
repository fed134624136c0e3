"""Order-independent seed derivation."""

import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """A 63-bit seed fixed by ``master`` and ``keys`` alone."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))

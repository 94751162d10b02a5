"""Named, seeded random substreams.

One master 64-bit seed drives the whole run.  Every noise source draws
from its own named substream so that adding a source never perturbs the
draws of existing ones, and so that paired controller comparisons can
reuse identical noise realizations (common random numbers).
"""

import hashlib
import struct

import numpy as np


def _name_key(name: str) -> tuple[int, ...]:
    # stable 128-bit digest -> four uint32 words for SeedSequence spawn_key
    digest = hashlib.sha256(name.encode("utf-8")).digest()[:16]
    return struct.unpack("<4I", digest)


class RandomStreams:
    """Factory of independent `numpy` generators keyed by (replication, name)."""

    def __init__(self, master_seed: int, replication: int = 0):
        if master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        self.master_seed = int(master_seed)
        self.replication = int(replication)

    def stream(self, name: str) -> np.random.Generator:
        """Return a fresh generator for the named source.

        Repeated calls with the same name restart the same stream, so a
        stream should be created once per run and then consumed.
        """
        seq = np.random.SeedSequence(
            entropy=self.master_seed,
            spawn_key=(self.replication,) + _name_key(name),
        )
        return np.random.default_rng(seq)

    def normals(self, name: str, shape) -> np.ndarray:
        return self.stream(name).standard_normal(shape)

    def uniforms(self, name: str, shape) -> np.ndarray:
        return self.stream(name).random(shape)

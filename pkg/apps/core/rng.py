"""
Addressable random streams.

Every draw in a run is made from a ``RngHandle``: a (seed, stream) address
that always yields the same sequence, however trials are scheduled across
workers. Child streams are derived deterministically from a parent address
and any number of integer keys (trial, step, role, ...).
"""
from dataclasses import dataclass

import numpy as np

from core.constants import STREAM_WORDS

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngHandle:
    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def seed_sequence(self):
        return np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))

    def generator(self):
        """A fresh counter-based generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def derive(self, *keys):
        """Child handle addressed by ``keys``; same parent and keys give the same child."""
        words = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.stream,) + tuple(int(k) & _MASK64 for k in keys),
        ).generate_state(STREAM_WORDS, dtype=np.uint64)
        return RngHandle(self.seed, int(words[0]))

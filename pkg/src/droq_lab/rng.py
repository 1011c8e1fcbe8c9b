"""Explicit, splittable random streams.

Every consumer of randomness receives its own :class:`RandomStream`; nothing
in the package touches numpy's global RNG. Streams are backed by the
counter-based Philox generator and split through ``SeedSequence`` spawning,
so children are statistically independent and reproducible from the root
seed alone.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

# Above this rate a dense uniform draw is cheaper than geometric gaps.
_DENSE_RATE = 0.25


class RandomStream:
    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            self._seq = np.random.SeedSequence(int(seed))
        self.gen = np.random.Generator(np.random.Philox(self._seq))

    def split(self, n: int) -> list[RandomStream]:
        """Return ``n`` fresh independent child streams."""
        return [RandomStream(s) for s in self._seq.spawn(n)]

    def child(self, key: str | int) -> RandomStream:
        """Deterministic named child; the same key always gives the same stream.

        Unlike :meth:`split`, this does not advance any spawn counter, so the
        set of named children can grow without perturbing existing ones.
        """
        if isinstance(key, str):
            key = zlib.crc32(key.encode("utf-8"))
        seq = np.random.SeedSequence(
            self._seq.entropy, spawn_key=tuple(self._seq.spawn_key) + (0x5EED, int(key))
        )
        return RandomStream(seq)

    def clone(self) -> RandomStream:
        """Copy including the current position in the stream."""
        out = RandomStream.__new__(RandomStream)
        out._seq = self._seq
        bitgen = np.random.Philox(self._seq)
        bitgen.state = self.gen.bit_generator.state
        out.gen = np.random.Generator(bitgen)
        return out

    def drop_indices(self, n: int, rate: float) -> np.ndarray:
        """Sorted flat indices of the entries dropped by an i.i.d. Bernoulli(rate) mask.

        For small rates the dropped positions are found by summing geometric
        gaps, which draws about ``n * rate`` numbers instead of ``n``. Both
        branches give exactly independent Bernoulli(rate) entries.
        """
        if rate <= 0.0 or n == 0:
            return np.empty(0, dtype=np.int64)
        if rate >= _DENSE_RATE:
            return np.flatnonzero(self.gen.random(n) < rate)
        expected = n * rate
        chunk = int(expected + 6.0 * math.sqrt(expected) + 8)
        pos = np.cumsum(self.gen.geometric(rate, chunk)) - 1
        while pos[-1] < n:
            pos = np.concatenate([pos, pos[-1] + np.cumsum(self.gen.geometric(rate, chunk))])
        return pos[: np.searchsorted(pos, n)]

    def keep_mask(self, shape, rate: float) -> np.ndarray:
        """Boolean mask whose entries are True with probability 1 - rate."""
        mask = np.ones(int(np.prod(shape)), dtype=bool)
        mask[self.drop_indices(mask.size, rate)] = False
        return mask.reshape(shape)

    def random(self, size=None) -> np.ndarray:
        return self.gen.random(size)

    def normal(self, size=None) -> np.ndarray:
        return self.gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self.gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.gen.permutation(n)

"""Deterministic, independently-addressable random streams.

Every stream is identified by a master seed plus a lineage path of tags
(small integers or short strings).  Identical lineages yield identical draw
sequences; distinct lineages are statistically independent.  This is what
makes whole optimization runs reproducible from a single seed.
"""

from __future__ import annotations

import zlib

import numpy as np

_WORD = 2**32


def _encode_tag(tag) -> int:
    if isinstance(tag, bool):
        raise TypeError("bool is not a valid stream tag")
    if isinstance(tag, (int, np.integer)):
        v = int(tag)
        if 0 <= v < _WORD:
            return v
        return zlib.crc32(repr(v).encode())
    if isinstance(tag, str):
        return zlib.crc32(tag.encode())
    raise TypeError(f"stream tags must be int or str, got {type(tag).__name__}")


class RandomStream:
    """A seeded random source addressed by (master_seed, *lineage)."""

    def __init__(self, master_seed: int, *lineage):
        self.master_seed = int(master_seed)
        self.lineage = tuple(lineage)
        key = tuple(_encode_tag(t) for t in self.lineage)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=key)
        self.generator = np.random.default_rng(seq)

    def child(self, *path) -> "RandomStream":
        """Derive an independent stream whose lineage extends this one's."""
        return RandomStream(self.master_seed, *self.lineage, *path)

    # Draw methods delegate to the numpy generator (numpy semantics:
    # ``integers`` excludes ``high`` unless endpoint=True).
    def integers(self, low, high=None, size=None, endpoint=False):
        return self.generator.integers(low, high, size=size, endpoint=endpoint)

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size)

    def choice(self, seq, size=None, replace=True):
        return self.generator.choice(seq, size=size, replace=replace)

    def permutation(self, n):
        return self.generator.permutation(n)

    def __repr__(self):
        return f"RandomStream({self.master_seed}, lineage={self.lineage!r})"

"""Counter-based, splittable random streams.

Every stream is a Philox generator keyed by a ``SeedSequence`` whose spawn key
records the path of splits from the master seed.  Replica ``r`` of an
experiment always receives the same stream, so results do not depend on how
replicas are scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SplitStream", "as_generator"]


@dataclass(frozen=True)
class SplitStream:
    """Immutable handle on a tree of independent Philox streams."""

    seed: int
    key: tuple[int, ...] = ()

    def split(self, *index: int) -> "SplitStream":
        return SplitStream(self.seed, self.key + tuple(int(i) for i in index))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))

    def replica(self, r: int) -> np.random.Generator:
        return self.split(r).generator()


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, a SplitStream or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SplitStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return SplitStream(0 if rng is None else int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def as_stream(rng) -> SplitStream:
    if isinstance(rng, SplitStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return SplitStream(int(rng))
    raise TypeError(
        "replica experiments need a SplitStream or an integer seed, "
        f"got {type(rng).__name__}"
    )

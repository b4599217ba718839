"""Reproducible random streams.

Every stochastic routine in the package takes an explicit :class:`RngStream`.
A stream is a ``(seed, stream_id)`` pair that keys a counter-based Philox
generator, so the same pair always yields the same draws and distinct
``stream_id`` values give independent streams.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) < _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *path: int) -> "RngStream":
        """Deterministically derived sub-stream.

        The child keeps the seed and hashes ``(stream_id, *path)`` into a new
        stream id, so children of different parents or paths do not collide
        in practice.
        """
        ss = np.random.SeedSequence([self.seed, self.stream_id, *(int(p) for p in path)])
        return RngStream(self.seed, int(ss.generate_state(1, dtype=np.uint64)[0]))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()

"""Reproducible random streams keyed by (master_seed, stream_index).

Every source of randomness in this package flows through a StreamSpec.
Trial-parallel operations hand each trial its own stream index, so results
are reproducible regardless of execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SEED_MASK = (1 << 64) - 1


def derive_stream(master_seed: int, stream_index: int) -> np.random.Generator:
    """Return the generator for stream ``stream_index`` under ``master_seed``.

    The same pair always yields the identical sequence; distinct indices
    yield statistically independent streams (SeedSequence keying).
    """
    if stream_index < 0:
        raise ValueError(f"stream_index must be >= 0, got {stream_index}")
    key = np.random.SeedSequence([master_seed & _SEED_MASK, stream_index])
    return np.random.default_rng(key)


@dataclass(frozen=True)
class StreamSpec:
    """Address of one reproducible random stream."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be >= 0")

    def rng(self) -> np.random.Generator:
        return derive_stream(self.master_seed, self.stream_index)

    def shifted(self, offset: int) -> "StreamSpec":
        """Spec for the stream ``offset`` places after this one.

        Multi-trial operations give trial t the stream ``spec.shifted(t)``,
        consuming a contiguous block of indices starting at this spec.
        """
        return StreamSpec(self.master_seed, self.stream_index + offset)


StreamLike = StreamSpec | np.random.Generator


def as_rng(stream: StreamLike) -> np.random.Generator:
    """Accept either a StreamSpec or an already-derived generator."""
    if isinstance(stream, StreamSpec):
        return stream.rng()
    return stream

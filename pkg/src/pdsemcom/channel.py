"""Binary symmetric channel simulation over framed bit streams.

Flips are drawn from a counter-based generator with a per-object substream
(seed plus the object id as spawn key), so any subset of a sweep reproduces
the same noise regardless of iteration order or parallelism. Frame metadata
passes through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec.bitstream import BitStream


@dataclass(frozen=True)
class BscChannel:
    """Memoryless bit-flipping channel with crossover probability alpha."""

    alpha: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError(
                f"crossover probability must lie in [0, 0.5), got {self.alpha}"
            )


def _substream(channel: BscChannel, key: tuple) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=channel.seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def flip_mask(channel: BscChannel, n_bits: int, key: tuple = ()) -> np.ndarray:
    """Deterministic Bernoulli(alpha) mask for the given substream key."""
    if channel.alpha == 0.0:
        return np.zeros(n_bits, dtype=np.uint8)
    rng = _substream(channel, key)
    return (rng.random(n_bits) < channel.alpha).astype(np.uint8)


def transmit_bits(channel: BscChannel, bits: np.ndarray,
                  key: tuple = ()) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    return bits ^ flip_mask(channel, len(bits), key)


def transmit(channel: BscChannel, stream: BitStream) -> BitStream:
    """Corrupt each object's payload under its own substream."""
    out = []
    for frame, payload in stream.payloads():
        out.append(transmit_bits(channel, payload, key=(frame.object_id,)))
    corrupted = np.concatenate(out) if out else np.empty(0, dtype=np.uint8)
    return BitStream(bits=corrupted, frames=stream.frames)

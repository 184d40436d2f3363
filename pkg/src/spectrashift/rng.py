"""Counter-based random streams.

Every stochastic step in the toolkit draws from a Philox generator keyed
by (seed, tag, payload). Streams are independent of each other and of the
order in which they are created, which is what makes parallel generation
bit-reproducible: the worker that happens to produce sample 17 always
gets the same draws.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_PAYLOAD_BITS = 56

# Substream tags. The payload carries the per-item index where one exists.
TAG_SAMPLE_SEEN = 1
TAG_SAMPLE_UNSEEN = 2
TAG_DELTA = 3
TAG_SPLIT_SEEN = 4
TAG_SPLIT_UNSEEN = 5
TAG_CORPUS_SPLIT = 6
TAG_HEAD_TRAIN = 7
TAG_RUN_SEED = 8
TAG_RANDOM_PROJECTION = 9


def substream(seed: int, tag: int, payload: int = 0) -> np.random.Generator:
    """Return the generator for (seed, tag, payload).

    The same triple always yields the same draw sequence, regardless of
    thread schedule or how many other streams were consumed before it.
    """
    if not 0 <= tag <= 0xFF:
        raise ValueError(f"tag must fit one byte, got {tag}")
    if not 0 <= payload < (1 << _PAYLOAD_BITS):
        raise ValueError(f"payload out of range: {payload}")
    key = np.array(
        [seed & _MASK64, ((tag & 0xFF) << _PAYLOAD_BITS) | payload],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, tag: int, payload: int = 0) -> int:
    """Draw a fresh 63-bit seed from the (seed, tag, payload) stream."""
    return int(substream(seed, tag, payload).integers(0, 1 << 63))

"""Reproducible random streams derived from one master seed."""

import hashlib

import numpy as np

__all__ = ["derive_rng", "stream_key", "as_generator"]

_MASK64 = (1 << 64) - 1


def stream_key(*labels):
    """Map a tuple of stream labels to a tuple of 32-bit words."""
    words = []
    for label in labels:
        digest = hashlib.sha256(str(label).encode("utf-8")).digest()
        words.append(int.from_bytes(digest[:4], "little"))
    return tuple(words)


def derive_rng(master, *labels):
    """Return a Generator fully determined by ``(master, labels)``.

    Distinct label tuples give statistically independent streams, so the
    harness can evaluate cells in any order or in parallel.
    """
    master = int(master)
    if master < 0 or master > _MASK64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master}")
    seq = np.random.SeedSequence(entropy=master, spawn_key=stream_key(*labels))
    return np.random.Generator(np.random.PCG64(seq))


def as_generator(random_state):
    """Coerce ``None``/int/Generator into a ``numpy.random.Generator``."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)

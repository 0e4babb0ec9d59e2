"""Counter-based random streams keyed by (seed, replication).

Each replication owns a Philox generator whose 128-bit key is the pair
``(seed, rep)``, so a replication draws the same numbers whatever block,
order or process it is simulated in.
"""

from __future__ import annotations

import os

import numpy as np

_MASK = (1 << 64) - 1


def resolve_seed(seed: int | None) -> int:
    """``BANDIT_SEED`` in the environment wins over the argument."""
    env = os.environ.get("BANDIT_SEED")
    if env is not None and env.strip():
        return int(env) & _MASK
    return 0 if seed is None else int(seed) & _MASK


def stream(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed & _MASK, rep & _MASK], dtype=np.uint64)))


class BlockStreams:
    """Generators for replications ``start, ..., stop - 1`` read column-chunk by chunk."""

    def __init__(self, seed: int, start: int, stop: int):
        self.gens = [stream(seed, r) for r in range(start, stop)]

    def __len__(self):
        return len(self.gens)

    def uniform(self, cols: int) -> np.ndarray:
        out = np.empty((len(self.gens), cols))
        for i, g in enumerate(self.gens):
            out[i] = g.random(cols)
        return out

    def normal(self, cols: int) -> np.ndarray:
        out = np.empty((len(self.gens), cols))
        for i, g in enumerate(self.gens):
            out[i] = g.standard_normal(cols)
        return out


def blocks(reps: int, block: int):
    for start in range(0, reps, block):
        yield start, min(reps, start + block)

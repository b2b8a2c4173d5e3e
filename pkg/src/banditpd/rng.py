"""Counter-based random substreams.

Every random draw in a simulation comes from a Philox-4x64 generator whose
128-bit key is derived from ``(master_seed, purpose, agent, round)``:

    key[0] = master_seed (64 bit)
    key[1] = purpose << 56 | agent << 32 | round

Substreams are therefore independent of evaluation order and of how work is
split across workers. Gaussian variates come from numpy's
``Generator.standard_normal`` (ziggurat) applied to that bit stream.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

_MASK64 = (1 << 64) - 1


class Purpose(IntEnum):
    GRAPH = 1
    DATA = 2
    SPHERE = 3
    INIT = 4
    MONTE_CARLO = 5
    TARGET = 6


def substream(seed: int, purpose: int, agent: int = 0, t: int = 0) -> np.random.Generator:
    if not 0 <= agent < (1 << 24):
        raise ValueError(f"agent index {agent} out of range")
    if not 0 <= t < (1 << 32):
        raise ValueError(f"round index {t} out of range")
    if not 0 <= int(purpose) < (1 << 8):
        raise ValueError(f"purpose code {purpose} out of range")
    # Philox reads an int key as little-endian 64-bit words
    key = (int(seed) & _MASK64) | (((int(purpose) << 56) | (agent << 32) | t) << 64)
    return np.random.Generator(np.random.Philox(key=key))


class Streams:
    """Factory of substreams for one master seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def __call__(self, purpose: Purpose, agent: int = 0, t: int = 0) -> np.random.Generator:
        return substream(self.seed, purpose, agent, t)

    def __repr__(self):
        return f"Streams(seed={self.seed})"

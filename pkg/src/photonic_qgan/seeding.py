"""Counter-based random streams derived from one root seed.

Every random draw in a run comes from ``derive_rng(root, stream, *counters)``,
i.e. a fresh PCG64 seeded with ``SeedSequence([root, stream_id, *counters])``.
Draws therefore depend only on (root seed, purpose, position), never on how
many draws happened before, which makes checkpoint resumption and reordered
or parallel evaluation reproduce the same numbers.
"""

from __future__ import annotations

import numpy as np

STREAMS = {
    "init": 0,  # discriminator weights and generator initialization
    "disc": 1,  # noise and real batch of a discriminator step
    "gen": 2,  # noise batch of an SPSA step
    "spsa": 3,  # perturbation directions
    "shots": 4,  # measurement shot sampling
    "snapshot": 5,  # fixed noise for periodic image snapshots
    "sample": 6,  # sampling from a trained model
}


def derive_seed(root: int, stream: str, *counters: int) -> np.random.SeedSequence:
    if root < 0:
        raise ValueError(f"seed must be non-negative, got {root}")
    return np.random.SeedSequence([int(root), STREAMS[stream], *(int(c) for c in counters)])


def derive_rng(root: int, stream: str, *counters: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(root, stream, *counters)))

"""Reproducible random streams.

All randomness in the package flows through Philox, a counter-based 64-bit
bit generator, keyed through ``numpy.random.SeedSequence`` spawn keys.  A
stream is addressed by a root seed plus an integer path, so independent
components (simulated panels, per-hypothesis multiplier draws, Monte-Carlo
replications) get non-overlapping streams that do not depend on scheduling.

Path conventions used by the package:

* ``(STREAM_PANEL,)`` — data simulation for a panel.
* ``(STREAM_MULTIPLIER, hyp_id)`` — Gaussian multiplier draws for the
  hypothesis with that id; the global test uses ``hyp_id = 0``.
* ``(STREAM_REPLICATION, rep)`` — derives the per-replication root seed of
  a Monte-Carlo experiment.
"""

from __future__ import annotations

import numpy as np

STREAM_PANEL = 0
STREAM_MULTIPLIER = 1
STREAM_REPLICATION = 2


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the Philox generator addressed by ``seed`` and ``path``."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in path))
    return np.random.Generator(np.random.Philox(seq))


def replication_seed(seed: int, rep: int) -> int:
    """Derive the 64-bit root seed for replication ``rep`` of an experiment."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(STREAM_REPLICATION, int(rep)))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def as_generator(rng: np.random.Generator | int) -> np.random.Generator:
    """Accept either a ready generator or an integer seed (panel stream)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return substream(int(rng), STREAM_PANEL)

"""Deterministic, splittable random substreams.

Every randomized routine in the toolkit derives per-task generators from an
integer address ``(seed, *path)``. The same address always yields the same
stream, so serial and parallel execution produce bit-identical results no
matter how work is scheduled.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator addressed by (seed, *path)."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))

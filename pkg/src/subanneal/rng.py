"""Splittable, counter-based random streams derived from one integer seed.

Every stream is ``Philox(SeedSequence(seed, spawn_key=path))`` for an integer
tuple ``path`` naming its purpose, so streams are independent of the order in
which they are created and of how work is distributed across processes.
"""
from __future__ import annotations

import numpy as np

SPLIT = 0
CHAIN = 1
TOY = 2
HYPER_INIT = 3


def stream(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))))

"""Seeded generator construction shared by every module.

All randomness flows through :func:`make_rng`, which derives an independent
Philox (counter-based) stream from a root seed plus an optional key path, e.g.
``make_rng(seed, trial, slot)``. Streams for different keys never overlap, so
trials and slots can be evaluated in any order with identical results.
"""
import numpy as np


def make_rng(seed, *key):
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive keyed streams from a Generator")
        return seed
    if seed is None:
        seed = 0
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))

"""Seeded random streams.

Every stochastic operation in the package takes an integer seed and
builds its own PCG64 generator from it, so repeated calls with the same
seed are bit-identical on any platform and separate operations never
share hidden state.

Derived streams (one per mesh, per epoch, ...) come from SeedSequence
spawn keys.  The first spawn-key component is a stream label below, so
draws of different kinds can never collide even when their indices do.
Subsampling streams are keyed by (dataset seed, mesh index) only; the
subsample mode and mixing weight are deliberately NOT part of the key,
which is what makes a hybrid draw at weight 0 or 1 reproduce the pure
modes bit for bit.
"""

from __future__ import annotations

import numpy as np

STREAM_SURFACE = 1    # mesh surface sampling
STREAM_SUBSAMPLE = 2  # picking network inputs out of a ground-truth cloud
STREAM_SPLIT = 3      # dataset shuffling before the split
STREAM_SHUFFLE = 4    # per-epoch batch order
STREAM_INIT = 5       # parameter initialization
STREAM_DATA = 6       # procedural shape generation
STREAM_REFERENCE = 7  # dense reference samplings for evaluation


def make_rng(seed: int) -> np.random.Generator:
    """Fresh generator for a root seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the child stream identified by key under seed."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """64-bit integer seed for the child stream, for APIs that take a
    seed rather than a generator."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(2, np.uint64)[0])

"""Deterministic, schedule-independent random streams.

Every stochastic work item (trial, repetition, sample batch) derives its own
generator from the master seed and its integer coordinates.  Streams depend
only on (seed, key), never on thread count or execution order, so parallel
runs reproduce serial runs bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for work item `key` under `master_seed`."""
    master_seed = int(master_seed)
    if master_seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {master_seed}")
    spawn = tuple(int(k) for k in key)
    if any(k < 0 for k in spawn):
        raise ConfigError(f"stream key must be nonnegative integers, got {key}")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=spawn)
    return np.random.default_rng(seq)

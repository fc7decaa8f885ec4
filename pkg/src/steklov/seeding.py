"""Deterministic per-stage random streams.

Every stochastic stage derives its own generator from the single run
seed plus a list of labels (stage name, size, ...), hashed with
SHA-256. The derivation is stable across platforms and processes, so
per-stage jobs can run in parallel without changing any output.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(root_seed: int, *labels) -> int:
    """Map (root_seed, labels...) to a stable 64-bit sub-seed."""
    text = repr((int(root_seed),) + tuple(labels))
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(root_seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root_seed, *labels))

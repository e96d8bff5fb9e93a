"""Deterministic child-seed derivation.

One master seed drives the whole pipeline; every stage, group, tree or
repeat derives its own child seed from (master, name tokens) via SHA-256,
so parallel and serial execution orders agree bit-for-bit and reruns are
reproducible across machines.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(master: int, *tokens: object) -> int:
    """Derive a 63-bit seed from a master seed and a token path."""
    text = str(int(master)) + "/" + "/".join(str(t) for t in tokens)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_for(master: int, *tokens: object) -> np.random.Generator:
    """Generator seeded by :func:`child_seed`."""
    return np.random.default_rng(child_seed(master, *tokens))

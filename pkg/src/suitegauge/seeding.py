"""Deterministic derivation of child RNG seeds.

Every stochastic component takes an explicit seed. Sub-seeds for cells of a
comparison matrix, repeated samplings, or per-tree streams are derived by
hashing the master seed together with stable string tokens, so results do
not depend on evaluation order and are reproducible across platforms.
"""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, *tokens: object) -> int:
    """Return a 64-bit seed determined by ``master_seed`` and ``tokens``."""
    h = hashlib.sha256(str(int(master_seed)).encode("utf-8"))
    for tok in tokens:
        h.update(b"\x1f")
        h.update(str(tok).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")

"""Seed derivation and exact-rational sampling helpers.

All randomness in the package flows from a single 64-bit master seed.  Each
component derives a private subseed by hashing a component label together
with the master seed (sha256, first 8 bytes), so adding a new component never
perturbs the draws of an existing one.

Sampling against rational probabilities uses integer draws only
(``randrange`` on the exact denominator), so a Bernoulli(p/q) event happens
with probability exactly p/q, not its float approximation.
"""

from __future__ import annotations

import hashlib
import math
import random
from fractions import Fraction
from typing import Sequence

__all__ = ["subseed", "derived_rng", "bernoulli", "categorical", "two_sided_geometric"]


def subseed(master_seed: int, label: str) -> int:
    """Derive a 64-bit subseed from the master seed and a component label."""
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derived_rng(master_seed: int, label: str) -> random.Random:
    return random.Random(subseed(master_seed, label))


def bernoulli(rng: random.Random, p: Fraction) -> bool:
    """True with probability exactly p (0 <= p <= 1)."""
    if not 0 <= p <= 1:
        raise ValueError(f"probability out of range: {p}")
    return rng.randrange(p.denominator) < p.numerator


def categorical(rng: random.Random, weights: Sequence[Fraction]) -> int:
    """Index drawn with probability weights[i] / sum(weights), exactly.

    Works by clearing denominators and drawing one integer below the total.
    """
    if not weights:
        raise ValueError("empty weight vector")
    if any(w < 0 for w in weights):
        raise ValueError("negative weight")
    denom = 1
    for w in weights:
        denom = denom * w.denominator // math.gcd(denom, w.denominator)
    scaled = [int(w * denom) for w in weights]
    total = sum(scaled)
    if total == 0:
        raise ValueError("all weights zero")
    draw = rng.randrange(total)
    acc = 0
    for i, s in enumerate(scaled):
        acc += s
        if draw < acc:
            return i
    raise AssertionError("unreachable")


def two_sided_geometric(rng: random.Random, alpha: Fraction) -> int:
    """Integer noise with P(k) = ((1-alpha)/(1+alpha)) * alpha**|k|.

    Sampled as the difference of two iid geometric(1-alpha) counts, each
    drawn by exact Bernoulli trials, so the distribution is exact and the
    draw sequence is deterministic for a given rng state.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    return _geometric(rng, alpha) - _geometric(rng, alpha)


def _geometric(rng: random.Random, alpha: Fraction) -> int:
    n = 0
    while bernoulli(rng, alpha):
        n += 1
    return n

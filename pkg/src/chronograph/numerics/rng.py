"""Deterministic random streams.

All randomness in the toolkit flows from a single 64-bit seed through named
child streams, so that any pipeline stage can be re-run in isolation and
reproduce its draws exactly. Streams are backed by the counter-based Philox
generator, which produces identical sequences across platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np


class RngStream:
    """A named, derivable random stream.

    ``child(label)`` derives an independent stream whose draws depend only on
    the root seed and the path of labels, never on how much the parent has
    been consumed.
    """

    def __init__(self, seed: int, path: tuple[str, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(path)
        digest = hashlib.sha256(
            ("%d/" % self.seed + "/".join(self.path)).encode("utf-8")
        ).digest()
        key = int.from_bytes(digest[:16], "little")
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def child(self, label: str) -> "RngStream":
        return RngStream(self.seed, self.path + (str(label),))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    # Thin pass-throughs for the draws the toolkit actually uses.
    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def normal(self, loc: float, scale: float, size) -> np.ndarray:
        return self._gen.normal(loc, scale, size)

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        return self._gen.choice(n, size=size, replace=replace)


def glorot_uniform(rng: RngStream, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out)), shape (fan_in, fan_out)."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, (fan_in, fan_out))

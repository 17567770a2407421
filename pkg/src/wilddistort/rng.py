"""Deterministic random streams shared by every stochastic operation.

All randomness in this package flows through :class:`SeededRng`, a thin
wrapper around numpy's Philox 4x64-10 counter-based generator.  Philox is
keyed, not seeded: the 128-bit key is the first 16 bytes of

    SHA-256("wilddistort" \\x1f str(seed) \\x1f path[0] \\x1f path[1] ...)

interpreted as two little-endian uint64 words.  ``derive(child_key)``
appends one path component, so ``(seed, child_key)`` always names the same
independent stream regardless of platform, thread count, or call order.
"""

from __future__ import annotations

import hashlib

import numpy as np

_DOMAIN = b"wilddistort"
_SEP = b"\x1f"


def _philox_key(seed: int, path: tuple[str, ...]) -> np.ndarray:
    material = _DOMAIN + _SEP + str(int(seed)).encode("ascii")
    for part in path:
        material += _SEP + part.encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return np.frombuffer(digest[:16], dtype="<u8")


class SeededRng:
    """Reproducible Philox stream addressed by (seed, derivation path)."""

    def __init__(self, seed: int, _path: tuple[str, ...] = ()):
        self.seed = int(seed)
        self.path = _path
        self._gen = np.random.Generator(np.random.Philox(key=_philox_key(seed, _path)))

    def derive(self, child_key: str) -> "SeededRng":
        """Independent child stream; same (seed, path) always yields the same draws."""
        return SeededRng(self.seed, self.path + (str(child_key),))

    # Draw helpers (thin passthroughs to the numpy Generator).

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def random(self, size=None):
        return self._gen.random(size=size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size=size)

    def poisson(self, lam, size=None):
        return self._gen.poisson(lam, size=size)

    def choice(self, seq, size=None, replace=True):
        return self._gen.choice(seq, size=size, replace=replace)

    def permutation(self, x):
        return self._gen.permutation(x)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, path={'/'.join(self.path) or '<root>'})"

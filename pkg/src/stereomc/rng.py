"""Deterministic, splittable random-number streams.

Every stochastic operation in the package draws from an :class:`RngStream`.
A stream is identified by ``(seed, stream_id)`` and is backed by the Philox
counter-based generator, so identical identifiers and call sequences give
identical output on every platform.  Independent sub-streams are produced by
:meth:`RngStream.split`, which derives fresh stream ids with a splitmix-style
mixer; distinct Philox keys yield statistically independent streams by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(a: int, b: int) -> int:
    """splitmix64 finalizer of a combined word; deterministic child-id derivation."""
    x = (a ^ (b * _GOLDEN)) & _MASK64
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass
class RngStream:
    """A seedable, splittable stream of random variates.

    Parameters
    ----------
    seed : int
        64-bit master seed shared by every stream of one experiment.
    stream_id : int
        64-bit identifier of this stream within the experiment.
    """

    seed: int
    stream_id: int = 0
    _n_spawned: int = field(default=0, repr=False)
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        """The underlying numpy generator (for bulk draws in hot loops)."""
        return self._gen

    def normal(self) -> float:
        return float(self._gen.standard_normal())

    def normal_vec(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(n)

    def exponential(self, rate: float) -> float:
        if not rate > 0:
            raise DomainError(f"exponential rate must be positive, got {rate}")
        return float(self._gen.standard_exponential() / rate)

    def uniform(self) -> float:
        return float(self._gen.random())

    def split(self, k: int) -> list["RngStream"]:
        """Derive ``k`` independent child streams.

        Children receive stream ids mixed from this stream's id and a running
        spawn counter, so repeated splits never collide.
        """
        if k < 1:
            raise DomainError(f"split count must be >= 1, got {k}")
        children = []
        for i in range(k):
            child_id = _mix64(self.stream_id, self._n_spawned + i + 1)
            children.append(RngStream(self.seed, child_id))
        self._n_spawned += k
        return children

"""Seedable noise primitives: standard Laplace and Student's t with 3 dof.

Every draw is produced from raw 64-bit PCG64 output through transforms
defined in this module, so a ``(seed, key)`` pair reproduces the same
sequence on any platform regardless of numpy's own sampler internals:

* uniform doubles take the top 53 bits of a raw word;
* standard normals use the Box-Muller transform, consuming two uniforms
  per pair of normals;
* Laplace draws are a signed standard exponential (one raw word each:
  the low bit selects the sign, the top 53 bits the magnitude).

Seeded streams exist for simulation and testing. A deployed private
release must be fed from ``RandomStream.from_entropy()``; anyone who knows
the seed can subtract the noise. The samplers also make no attempt to
defend against floating-point side channels in real-valued noise.
"""

from __future__ import annotations

import math
import secrets

import numpy as np

from .errors import ParameterError

_TWO_POW_M53 = 2.0**-53


class RandomStream:
    """A reproducible stream of random bits keyed by ``(seed, key)``.

    ``key`` is a tuple of non-negative integers (the stream id). Streams
    with the same seed and different keys are statistically independent;
    :meth:`child` derives one per trial without any shared state.
    """

    def __init__(self, seed: int, key: tuple[int, ...] | int = ()):
        if isinstance(key, int):
            key = (key,)
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if any(int(k) < 0 for k in key):
            raise ParameterError(f"stream key entries must be non-negative, got {key}")
        self.seed = seed
        self.key = tuple(int(k) for k in key)
        self._bitgen = np.random.PCG64(np.random.SeedSequence(seed, spawn_key=self.key))
        self._generator = None

    @classmethod
    def from_entropy(cls) -> "RandomStream":
        return cls(secrets.randbits(64))

    def child(self, *key: int) -> "RandomStream":
        return RandomStream(self.seed, self.key + tuple(key))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, key={self.key})"

    def raw(self, size=None):
        """Raw uint64 words straight from the bit generator."""
        if size is None:
            return np.uint64(self._bitgen.random_raw())
        return self._bitgen.random_raw(size)

    def uniform(self, size=None):
        """Doubles in [0, 1) with 53 random bits."""
        words = np.asarray(self.raw(size), dtype=np.uint64)
        u = (words >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
        return float(u) if size is None else u

    @property
    def generator(self) -> np.random.Generator:
        """A numpy Generator sharing this stream's bits.

        Meant for combinatorial utility draws (subsets, permutations) in
        tests and audits; the noise samplers never go through it.
        """
        if self._generator is None:
            self._generator = np.random.Generator(self._bitgen)
        return self._generator


def _open_uniform(words):
    # (0, 1]: safe to take a log of.
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_M53


def standard_normal(rng: RandomStream, size=None):
    """Standard normal draws via Box-Muller."""
    count = 1 if size is None else int(np.prod(size))
    pairs = (count + 1) // 2
    words = rng.raw(2 * pairs).reshape(2, pairs)
    radius = np.sqrt(-2.0 * np.log(_open_uniform(words[0])))
    angle = 2.0 * math.pi * (words[1] >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    z = z[:count]
    return float(z[0]) if size is None else z.reshape(size)


def sample_laplace(rng: RandomStream, scale: float = 1.0, size=None):
    """Draw ``scale * Z`` with Z standard Laplace (density ~ exp(-|z|)).

    Raises:
        ParameterError: if ``scale`` is not a positive finite number.
    """
    if not (scale > 0 and math.isfinite(scale)):
        raise ParameterError(f"Laplace scale must be positive and finite, got {scale}")
    words = np.asarray(rng.raw(1 if size is None else size), dtype=np.uint64)
    magnitude = -np.log(_open_uniform(words))
    sign = np.where((words & np.uint64(1)) == 1, -1.0, 1.0)
    z = scale * sign * magnitude
    return float(z[0]) if size is None else z


def sample_student_t3(rng: RandomStream, size=None):
    """Standard Student's t with 3 degrees of freedom.

    Returned as ``X / sqrt((Y1^2 + Y2^2 + Y3^2) / 3)`` for independent
    standard normals ``X, Y1, Y2, Y3``: mean 0, variance 3, density
    proportional to ``(1 + z^2/3)^-2``. Without the ``/ 3`` the ratio would
    have variance 1. An exactly-zero denominator is re-drawn.
    """
    count = 1 if size is None else int(np.prod(size))
    normals = standard_normal(rng, 4 * count).reshape(count, 4)
    denom = np.sqrt(np.sum(normals[:, 1:] ** 2, axis=1))
    bad = denom == 0.0
    while np.any(bad):
        fresh = standard_normal(rng, 4 * int(bad.sum())).reshape(-1, 4)
        normals[bad] = fresh
        denom[bad] = np.sqrt(np.sum(fresh[:, 1:] ** 2, axis=1))
        bad = denom == 0.0
    z = math.sqrt(3.0) * normals[:, 0] / denom
    return float(z[0]) if size is None else z.reshape(size)

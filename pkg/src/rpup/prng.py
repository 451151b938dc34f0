"""Hierarchical, counter-based random source and the rotation-angle sampler.

Bit-exact contract (so other implementations can reproduce every draw)::

    GOLDEN = 0x9E3779B97F4A7C15
    mix64(z):                         # SplitMix64 finalizer, all mod 2**64
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

    derive_child_seed(root, k) = mix64(root + (k + 1) * GOLDEN)

A :class:`Stream` with key ``K`` returns ``mix64(K + n * GOLDEN)`` as its
n-th 64-bit word (n = 1, 2, ...).  From a word ``w``:

* ``uniform_unit`` is ``(w >> 11) * 2**-53``, in [0, 1);
* ``sample_sign`` is ``-1`` when bit 63 of ``w`` is set, else ``+1``;
* a standard normal uses two uniforms u1, u2:
  ``sqrt(-2 log(1 - u1)) * cos(2 pi u2)``;
* Gamma(a) is Marsaglia-Tsang (one normal, then one uniform per attempt),
  with ``a < 1`` drawn as ``Gamma(a + 1) * (1 - u) ** (1 / a)``;
* ``sample_angle(d)`` draws X, Y ~ Gamma(d/2) in that order and returns
  ``asin((X - Y) / (X + Y))``, redrawing both if the ratio rounds to +-1.

For an M-point transform the rotation angles are split into ``N_s``
contiguous subsets.  Subset k has seed ``S_k = derive_child_seed(root, k)``
and its local angle t is drawn from ``Stream(derive_child_seed(S_k, t))``.
The reflection signs come from
``Stream(derive_child_seed(root, SIGN_STREAM_INDEX))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from ._backend import kernels

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
SIGN_STREAM_INDEX = 1 << 63

_TWO_PI = 2.0 * math.pi
_THIRD = 1.0 / 3.0


class InvalidSpanError(ValueError):
    """Raised for a rotation span ``d < 1``."""


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_child_seed(root: int, index: int) -> int:
    """Seed of child ``index`` of ``root``; a bijection in ``index`` mod 2**64."""
    return mix64(root + (index + 1) * GOLDEN)


def parse_seed(text: str | int) -> int:
    """Accept a 64-bit seed as an int or a hexadecimal string (``0x`` optional)."""
    if isinstance(text, int):
        value = text
    else:
        value = int(text, 16)
    if not 0 <= value <= MASK64:
        raise ValueError(f"seed {text!r} does not fit in 64 bits")
    return value


class Stream:
    """Sequential reader of one counter-based SplitMix64 stream.

    Not thread-safe; give each thread its own stream.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.key + self.counter * GOLDEN)

    def uniform_array(self, n: int) -> np.ndarray:
        """The next ``n`` uniforms at once (same values as ``n`` scalar draws)."""
        ctr = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        words = _mix_array(self.key, ctr)
        return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def __repr__(self):
        return f"Stream(key={self.key:#018x}, counter={self.counter})"


def _mix_array(key: int, ctr: np.ndarray) -> np.ndarray:
    z = np.uint64(key) + ctr * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def uniform_unit(stream: Stream) -> float:
    return (stream.next_u64() >> 11) * 2.0**-53


def sample_sign(stream: Stream) -> int:
    return -1 if stream.next_u64() >> 63 else 1


def _normal(stream: Stream) -> float:
    u1 = uniform_unit(stream)
    u2 = uniform_unit(stream)
    return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(_TWO_PI * u2)


def _gamma(stream: Stream, a: float) -> float:
    boost = a < 1.0
    aa = a + 1.0 if boost else a
    dd = aa - _THIRD
    c = 1.0 / math.sqrt(9.0 * dd)
    while True:
        while True:
            z = _normal(stream)
            v = 1.0 + c * z
            if v > 0.0:
                break
        v = v * v * v
        u = uniform_unit(stream)
        x = z * z
        if u < 1.0 - 0.0331 * (x * x):
            break
        if u <= 0.0 or math.log(u) < 0.5 * x + dd * (1.0 - v + math.log(v)):
            break
    g = dd * v
    if boost:
        g = g * (1.0 - uniform_unit(stream)) ** (1.0 / a)
    return g


def sample_angle(stream: Stream, d: int) -> float:
    """Draw a rotation angle for a plane of span ``d``.

    The density on (-pi/2, pi/2) is proportional to ``cos(theta)**(d - 1)``
    (see :func:`angle_density`).  ``sin(theta)`` is ``2B - 1`` with
    ``B ~ Beta(d/2, d/2)``, and B is formed as a ratio of two gamma draws.
    """
    if d < 1:
        raise InvalidSpanError(f"rotation span must be >= 1, got {d}")
    a = 0.5 * d
    while True:
        x = _gamma(stream, a)
        y = _gamma(stream, a)
        t = (x - y) / (x + y)
        if abs(t) < 1.0:
            return math.asin(t)


def angle_density(theta, d: int):
    """Normalized angle density for span ``d``, zero outside (-pi/2, pi/2)."""
    if d < 1:
        raise InvalidSpanError(f"rotation span must be >= 1, got {d}")
    theta = np.asarray(theta, dtype=np.float64)
    log_norm = gammaln((d + 1) / 2) - 0.5 * math.log(math.pi) - gammaln(d / 2)
    inside = np.abs(theta) < math.pi / 2
    c = np.where(inside, np.cos(theta), 1.0)
    return np.where(inside, np.exp(log_norm) * c ** (d - 1), 0.0)


@dataclass(frozen=True)
class SeedHierarchy:
    """Root seed plus ``num_subsets`` child seeds over ``total_angles`` angles.

    Subset k covers angle indices ``[k * subset_size, (k + 1) * subset_size)``
    clipped to ``total_angles``; trailing subsets may be short or empty.
    """

    root_seed: int
    num_subsets: int
    total_angles: int

    def __post_init__(self):
        if not 0 <= self.root_seed <= MASK64:
            raise ValueError("root_seed must be a 64-bit unsigned integer")
        if self.num_subsets < 1:
            raise ValueError("num_subsets must be positive")
        if self.total_angles < 0:
            raise ValueError("total_angles must be non-negative")

    @property
    def subset_size(self) -> int:
        return -(-self.total_angles // self.num_subsets)

    def child_seed(self, k: int) -> int:
        if not 0 <= k < self.num_subsets:
            raise IndexError(f"subset {k} out of range [0, {self.num_subsets})")
        return derive_child_seed(self.root_seed, k)

    def subset_range(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.num_subsets:
            raise IndexError(f"subset {k} out of range [0, {self.num_subsets})")
        size = self.subset_size
        return min(k * size, self.total_angles), min((k + 1) * size, self.total_angles)

    def seeds(self) -> np.ndarray:
        out = np.empty(self.num_subsets, dtype=np.uint64)
        kernels.child_seeds(np.uint64(self.root_seed), out)
        return out


def angle_subset(h: SeedHierarchy, k: int, order: str, spans: Sequence[int]) -> np.ndarray:
    """Regenerate the angles of subset ``k``.

    ``spans`` holds ``d = j - i`` for every angle of the subset, in
    generation order.  ``order="reverse"`` returns the same values reversed.
    """
    start, stop = h.subset_range(k)
    spans = np.asarray(spans, dtype=np.int64)
    if spans.shape != (stop - start,):
        raise ValueError(
            f"subset {k} holds {stop - start} angles but {spans.shape[0]} spans were given"
        )
    if spans.size and spans.min() < 1:
        raise InvalidSpanError("rotation spans must be >= 1")
    if order not in ("forward", "reverse"):
        raise ValueError(f"order must be 'forward' or 'reverse', got {order!r}")
    out = np.empty(spans.shape[0])
    kernels.angles_for_spans(np.uint64(h.child_seed(k)), 0, spans, out)
    return out if order == "forward" else out[::-1]


def reference_angles(h: SeedHierarchy, spans: Sequence[int]) -> list[float]:
    """All angles of ``h`` from the scalar reference sampler, one at a time."""
    if len(spans) != h.total_angles:
        raise ValueError("need one span per angle")
    size = h.subset_size
    out = []
    for g, d in enumerate(spans):
        k, t = divmod(g, size)
        key = derive_child_seed(derive_child_seed(h.root_seed, k), t)
        out.append(sample_angle(Stream(key), int(d)))
    return out

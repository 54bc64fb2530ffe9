import math
from dataclasses import dataclass, field

import numpy as np

from ..core.errors import DimensionError
from ..models import is_power_of_two


def gray_encode(n):
    return n ^ (n >> 1)


def gray_decode(g):
    g = np.asarray(g, dtype=np.int64).copy()
    shift = g >> 1
    while np.any(shift):
        g ^= shift
        shift >>= 1
    return g


@dataclass(frozen=True)
class Constellation:
    """Unit-circle M-PSK, x_m = exp(j 2 pi m / M), Gray labelled around the circle."""

    M: int
    points: np.ndarray = field(init=False, repr=False, compare=False)
    labels: np.ndarray = field(init=False, repr=False, compare=False)
    label_to_index: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not is_power_of_two(self.M):
            raise ValueError(f"M must be a power of two >= 2, got {self.M}")
        idx = np.arange(self.M)
        object.__setattr__(self, "points", np.exp(2j * np.pi * idx / self.M))
        object.__setattr__(self, "labels", gray_encode(idx))
        object.__setattr__(self, "label_to_index", gray_decode(idx))

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.M))

    def label_bits(self, indices) -> np.ndarray:
        """Gray label bits (MSB first) of constellation indices, shape (..., k)."""
        lab = self.labels[np.asarray(indices, dtype=np.int64)]
        k = self.bits_per_symbol
        shifts = np.arange(k - 1, -1, -1)
        return ((lab[..., None] >> shifts) & 1).astype(np.uint8)

    def bit_distance(self, a, b) -> np.ndarray:
        diff = self.labels[np.asarray(a, dtype=np.int64)] ^ self.labels[np.asarray(b, dtype=np.int64)]
        return sum((diff >> s) & 1 for s in range(self.bits_per_symbol))

    def nearest(self, y, tie_tol: float = 1e-12) -> np.ndarray:
        """Minimum-distance decision; exact ties go to the smaller index."""
        y = np.asarray(y, dtype=np.complex128)
        d = np.abs(y[..., None] - self.points) ** 2
        best = d.min(axis=-1, keepdims=True)
        return np.argmax(d <= best + tie_tol * np.maximum(best, 1.0), axis=-1)

    def sector(self, y) -> np.ndarray:
        """Phase-sector decision, equivalent to :meth:`nearest` off the boundaries."""
        ang = np.angle(np.asarray(y, dtype=np.complex128))
        return np.mod(np.rint(ang * self.M / (2 * np.pi)).astype(np.int64), self.M)


def bits_to_indices(bits, c: Constellation) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64).ravel()
    k = c.bits_per_symbol
    if b.size % k:
        raise DimensionError(f"{b.size} bits are not a multiple of log2(M)={k}")
    if np.any((b != 0) & (b != 1)):
        raise ValueError("bits must be 0 or 1")
    groups = b.reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    return c.label_to_index[groups @ weights]


def bits_to_symbols(bits, c: Constellation) -> np.ndarray:
    """Consecutive log2(M)-bit groups, MSB first, through the Gray map to points."""
    return c.points[bits_to_indices(bits, c)]


def symbols_to_bits(indices, c: Constellation) -> np.ndarray:
    return c.label_bits(np.asarray(indices).ravel()).ravel()

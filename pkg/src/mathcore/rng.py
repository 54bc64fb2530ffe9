import zlib
from typing import Tuple, Union

import numpy as np

SEED_BITS = 64


def stable_key(name: str) -> int:
    """Order- and process-independent integer for naming sub-streams."""
    return zlib.crc32(name.encode("utf-8"))


class RandomStream:
    """Counter-based random stream: Philox keyed by ``(seed, key)``.

    Two streams with the same seed and key produce identical draws. Child
    streams from :meth:`derive` depend only on their own key path, so trial
    ``k`` sees the same numbers whatever order trials run in.
    """

    def __init__(self, seed: int, key: Tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**SEED_BITS:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._bitgen = np.random.Philox(ss)
        self.generator = np.random.Generator(self._bitgen)

    def derive(self, *key: Union[int, str]) -> "RandomStream":
        parts = tuple(stable_key(k) if isinstance(k, str) else int(k) for k in key)
        return RandomStream(self.seed, self.key + parts)

    @property
    def counter(self) -> int:
        return int(self._bitgen.state["state"]["counter"][0])

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, key={self.key})"


def sample_complex_gaussian(stream: RandomStream, n, variance: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian draws, ``variance`` total per entry."""
    if not variance > 0:
        raise ValueError(f"variance must be > 0, got {variance}")
    g = stream.generator
    re = g.standard_normal(n)
    im = g.standard_normal(n)
    return (re + 1j * im) * np.sqrt(variance / 2.0)

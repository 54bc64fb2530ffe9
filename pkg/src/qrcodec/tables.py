"""Symbol geometry and block structure for versions 1 to 6."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

from ..models import EcLevel

MIN_VERSION = 1
MAX_VERSION = 6

MODE_BYTE = 0b0100
CHAR_COUNT_BITS = 8
PAD_BYTES = (0xEC, 0x11)

FORMAT_GENERATOR = 0x537
FORMAT_XOR = 0x5412

# two-bit level indicator carried in the format information
EC_FORMAT_BITS: Dict[EcLevel, int] = {EcLevel.L: 1, EcLevel.M: 0, EcLevel.Q: 3, EcLevel.H: 2}

#                         v1  v2  v3  v4  v5  v6
_EC_PER_BLOCK: Dict[EcLevel, Tuple[int, ...]] = {
    EcLevel.L: (7, 10, 15, 20, 26, 18),
    EcLevel.M: (10, 16, 26, 18, 24, 16),
    EcLevel.Q: (13, 22, 18, 26, 18, 24),
    EcLevel.H: (17, 28, 22, 16, 22, 28),
}

_NUM_BLOCKS: Dict[EcLevel, Tuple[int, ...]] = {
    EcLevel.L: (1, 1, 1, 1, 1, 2),
    EcLevel.M: (1, 1, 1, 2, 2, 4),
    EcLevel.Q: (1, 1, 2, 2, 4, 4),
    EcLevel.H: (1, 1, 2, 4, 4, 4),
}

ALIGNMENT_POSITIONS: Dict[int, Tuple[int, ...]] = {
    1: (),
    2: (6, 18),
    3: (6, 22),
    4: (6, 26),
    5: (6, 30),
    6: (6, 34),
}


@dataclass(frozen=True)
class BlockLayout:
    version: int
    ec_level: EcLevel
    raw_codewords: int
    ec_per_block: int
    blocks: int

    @property
    def short_blocks(self) -> int:
        return self.blocks - self.raw_codewords % self.blocks

    @property
    def short_block_len(self) -> int:
        return self.raw_codewords // self.blocks

    @property
    def data_codewords(self) -> int:
        return self.raw_codewords - self.ec_per_block * self.blocks

    @property
    def byte_capacity(self) -> int:
        return (self.data_codewords * 8 - 4 - CHAR_COUNT_BITS) // 8

    def data_len(self, block: int) -> int:
        return self.short_block_len - self.ec_per_block + (0 if block < self.short_blocks else 1)


def check_version(version: int) -> None:
    if not MIN_VERSION <= version <= MAX_VERSION:
        raise ValueError(f"version must be in [{MIN_VERSION}, {MAX_VERSION}], got {version}")


def symbol_side(version: int) -> int:
    check_version(version)
    return 4 * version + 17


def raw_data_modules(version: int) -> int:
    """Data-plus-EC module count after function patterns, remainder bits included."""
    check_version(version)
    result = (16 * version + 128) * version + 64
    if version >= 2:
        numalign = version // 7 + 2
        result -= (25 * numalign - 10) * numalign - 55
    return result


@lru_cache(maxsize=None)
def block_layout(version: int, ec_level: EcLevel) -> BlockLayout:
    check_version(version)
    ec_level = EcLevel(ec_level)
    return BlockLayout(
        version=version,
        ec_level=ec_level,
        raw_codewords=raw_data_modules(version) // 8,
        ec_per_block=_EC_PER_BLOCK[ec_level][version - 1],
        blocks=_NUM_BLOCKS[ec_level][version - 1],
    )


def byte_capacity(version: int, ec_level: EcLevel) -> int:
    return block_layout(version, ec_level).byte_capacity

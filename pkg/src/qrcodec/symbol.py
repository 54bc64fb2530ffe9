"""Byte-mode QR symbols, versions 1 to 6, on a known grid (no image-plane search).

Module arrays are indexed ``[y, x]`` with ``x`` the column; dark = 1. The
optional border pads light modules on the bottom and right edges only.
"""

import itertools
from functools import lru_cache
from typing import List, Optional, Tuple, Union

import numpy as np

from ..core.errors import CapacityError, DecodeError
from ..models import EcLevel, QrDecodeResult, QrSpec
from ..modem import ModuleMatrix
from .reed_solomon import rs_decode, rs_encode
from .tables import (
    ALIGNMENT_POSITIONS,
    CHAR_COUNT_BITS,
    EC_FORMAT_BITS,
    FORMAT_GENERATOR,
    FORMAT_XOR,
    MODE_BYTE,
    PAD_BYTES,
    BlockLayout,
    block_layout,
    check_version,
    symbol_side,
)

PENALTY_N1 = 3
PENALTY_N2 = 3
PENALTY_N3 = 40
PENALTY_N4 = 10

MAX_FORMAT_DISTANCE = 3

_MASKS = (
    lambda x, y: (x + y) % 2,
    lambda x, y: y % 2,
    lambda x, y: x % 3,
    lambda x, y: (x + y) % 3,
    lambda x, y: (x // 3 + y // 2) % 2,
    lambda x, y: x * y % 2 + x * y % 3,
    lambda x, y: (x * y % 2 + x * y % 3) % 2,
    lambda x, y: ((x + y) % 2 + x * y % 3) % 2,
)

_FINDER_LIKE = (
    np.array([1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0], dtype=np.uint8),
    np.array([0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1], dtype=np.uint8),
)


def format_bits(ec_level: EcLevel, mask: int) -> int:
    """15-bit BCH(15,5) format word, already XORed with the fixed mask."""
    data = EC_FORMAT_BITS[EcLevel(ec_level)] << 3 | mask
    rem = data
    for _ in range(10):
        rem = (rem << 1) ^ ((rem >> 9) * FORMAT_GENERATOR)
    return (data << 10 | rem) ^ FORMAT_XOR


def _format_positions(size: int) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    """(x, y) of format bit i for both copies."""
    first = [(8, i) for i in range(6)] + [(8, 7), (8, 8), (7, 8)] + [(14 - i, 8) for i in range(9, 15)]
    second = [(size - 1 - i, 8) for i in range(8)] + [(8, size - 15 + i) for i in range(8, 15)]
    return first, second


@lru_cache(maxsize=None)
def _function_template(version: int) -> Tuple[np.ndarray, np.ndarray]:
    """Light/dark function modules (format area zeroed) and the function-module mask."""
    size = symbol_side(version)
    modules = np.zeros((size, size), dtype=np.uint8)
    isfunc = np.zeros((size, size), dtype=bool)

    def put(x: int, y: int, dark: bool) -> None:
        modules[y, x] = 1 if dark else 0
        isfunc[y, x] = True

    for i in range(size):
        put(6, i, i % 2 == 0)
        put(i, 6, i % 2 == 0)
    for cx, cy in ((3, 3), (size - 4, 3), (3, size - 4)):
        for dy in range(-4, 5):
            for dx in range(-4, 5):
                x, y = cx + dx, cy + dy
                if 0 <= x < size and 0 <= y < size:
                    put(x, y, max(abs(dx), abs(dy)) not in (2, 4))
    pos = ALIGNMENT_POSITIONS[version]
    last = len(pos) - 1
    for i, j in itertools.product(range(len(pos)), repeat=2):
        if (i, j) in ((0, 0), (0, last), (last, 0)):
            continue
        for dy in range(-2, 3):
            for dx in range(-2, 3):
                put(pos[i] + dx, pos[j] + dy, max(abs(dx), abs(dy)) != 1)
    first, second = _format_positions(size)
    for x, y in first + second:
        put(x, y, False)
    put(8, size - 8, True)
    modules.setflags(write=False)
    isfunc.setflags(write=False)
    return modules, isfunc


@lru_cache(maxsize=None)
def _data_coords(version: int) -> Tuple[np.ndarray, np.ndarray]:
    """(ys, xs) of data modules in zigzag placement order."""
    size = symbol_side(version)
    _, isfunc = _function_template(version)
    ys: List[int] = []
    xs: List[int] = []
    for right in range(size - 1, 0, -2):
        if right <= 6:
            right -= 1
        upward = (right + 1) & 2 == 0
        for vert in range(size):
            y = size - 1 - vert if upward else vert
            for j in range(2):
                x = right - j
                if not isfunc[y, x]:
                    ys.append(y)
                    xs.append(x)
    return np.array(ys), np.array(xs)


@lru_cache(maxsize=None)
def _mask_pattern(version: int, mask: int) -> np.ndarray:
    """Modules flipped by ``mask``: pattern condition true and not a function module."""
    size = symbol_side(version)
    _, isfunc = _function_template(version)
    y, x = np.indices((size, size))
    flip = (_MASKS[mask](x, y) == 0) & ~isfunc
    flip.setflags(write=False)
    return flip


def penalty_score(grid: np.ndarray) -> int:
    """Mask-selection penalty: runs, 2x2 blocks, finder-like runs and dark balance."""
    g = np.asarray(grid, dtype=np.uint8)
    size = g.shape[0]
    score = 0
    for line in itertools.chain(g, g.T):
        edges = np.flatnonzero(np.diff(line)) + 1
        runs = np.diff(np.concatenate(([0], edges, [size])))
        long_runs = runs[runs >= 5]
        score += int(np.sum(PENALTY_N1 + long_runs - 5))
    same = (g[:-1, :-1] == g[:-1, 1:]) & (g[:-1, :-1] == g[1:, :-1]) & (g[:-1, :-1] == g[1:, 1:])
    score += PENALTY_N2 * int(np.count_nonzero(same))
    if size >= 11:
        for view in (
            np.lib.stride_tricks.sliding_window_view(g, 11, axis=1),
            np.lib.stride_tricks.sliding_window_view(g.T, 11, axis=1),
        ):
            for pattern in _FINDER_LIKE:
                score += PENALTY_N3 * int(np.count_nonzero(np.all(view == pattern, axis=-1)))
    dark = int(g.sum())
    total = size * size
    k = 0
    while not (9 - k) * total <= dark * 20 <= (11 + k) * total:
        score += PENALTY_N4
        k += 1
    return score


def _data_codewords(payload: bytes, layout: BlockLayout) -> List[int]:
    if len(payload) > layout.byte_capacity:
        raise CapacityError(
            f"payload of {len(payload)} bytes exceeds the {layout.byte_capacity}-byte capacity "
            f"of version {layout.version}-{layout.ec_level.value}"
        )
    bits: List[int] = []

    def append(value: int, n: int) -> None:
        bits.extend((value >> i) & 1 for i in reversed(range(n)))

    append(MODE_BYTE, 4)
    append(len(payload), CHAR_COUNT_BITS)
    for b in payload:
        append(b, 8)
    capacity = layout.data_codewords * 8
    append(0, min(4, capacity - len(bits)))
    append(0, -len(bits) % 8)
    for pad in itertools.cycle(PAD_BYTES):
        if len(bits) >= capacity:
            break
        append(pad, 8)
    return [int("".join(map(str, bits[i : i + 8])), 2) for i in range(0, len(bits), 8)]


def _interleave_order(layout: BlockLayout) -> List[Tuple[int, int]]:
    """(block, index) of every transmitted codeword, in transmission order."""
    gap = layout.short_block_len - layout.ec_per_block
    order = []
    for i in range(layout.short_block_len + 1):
        for j in range(layout.blocks):
            if i != gap or j >= layout.short_blocks:
                order.append((j, i))
    return order


def _with_error_correction(data: List[int], layout: BlockLayout) -> List[int]:
    blocks: List[List[int]] = []
    k = 0
    for j in range(layout.blocks):
        dat = data[k : k + layout.data_len(j)]
        k += len(dat)
        ecc = list(rs_encode(dat, layout.ec_per_block))
        # short blocks get a placeholder so every block has the same length
        blocks.append(dat + ([0] if j < layout.short_blocks else []) + ecc)
    return [blocks[j][i] for j, i in _interleave_order(layout)]


def _draw(version: int, codewords: List[int]) -> np.ndarray:
    base, _ = _function_template(version)
    grid = base.copy()
    ys, xs = _data_coords(version)
    bits = np.unpackbits(np.array(codewords, dtype=np.uint8))
    grid[ys[: bits.size], xs[: bits.size]] = bits
    return grid


def _finish(grid: np.ndarray, version: int, ec_level: EcLevel, mask: int) -> np.ndarray:
    out = grid ^ _mask_pattern(version, mask).astype(np.uint8)
    word = format_bits(ec_level, mask)
    for positions in _format_positions(out.shape[0]):
        for i, (x, y) in enumerate(positions):
            out[y, x] = (word >> i) & 1
    return out


def encode_symbol(payload: Union[bytes, str], version: int, ec_level: EcLevel, mask: Optional[int] = None) -> Tuple[np.ndarray, int]:
    """Bare symbol (no border) and the mask that was applied."""
    check_version(version)
    data = payload.encode("utf-8") if isinstance(payload, str) else bytes(payload)
    layout = block_layout(version, ec_level)
    grid = _draw(version, _with_error_correction(_data_codewords(data, layout), layout))
    if mask is not None:
        if not 0 <= mask <= 7:
            raise ValueError(f"mask must be in [0, 7], got {mask}")
        return _finish(grid, version, layout.ec_level, mask), mask
    candidates = [_finish(grid, version, layout.ec_level, m) for m in range(8)]
    scores = [penalty_score(c) for c in candidates]
    best = int(np.argmin(scores))
    return candidates[best], best


def add_border(symbol: np.ndarray, border: int) -> ModuleMatrix:
    """Quiet zone of light modules along the bottom and right edges."""
    if border < 0:
        raise ValueError(f"border must be >= 0, got {border}")
    return ModuleMatrix(np.pad(symbol, ((0, border), (0, border))))


def qr_encode(payload: Union[bytes, str], spec: QrSpec) -> ModuleMatrix:
    symbol, _ = encode_symbol(payload, spec.version, spec.ec_level, spec.mask)
    return add_border(symbol, spec.border)


def strip_border(m: ModuleMatrix, border: int) -> np.ndarray:
    if border < 0 or border >= m.n:
        raise ValueError(f"border {border} does not fit a {m.n}x{m.n} grid")
    return m.cells[: m.n - border, : m.n - border]


def read_format(grid: np.ndarray) -> Tuple[EcLevel, int, int]:
    """Nearest valid format word over both copies; (level, mask, distance)."""
    size = grid.shape[0]
    words = []
    for positions in _format_positions(size):
        words.append(sum(int(grid[y, x]) << i for i, (x, y) in enumerate(positions)))
    best: Optional[Tuple[int, EcLevel, int]] = None
    for level in EcLevel:
        for mask in range(8):
            ref = format_bits(level, mask)
            d = min(bin(ref ^ w).count("1") for w in words)
            if best is None or d < best[0]:
                best = (d, level, mask)
    assert best is not None
    if best[0] > MAX_FORMAT_DISTANCE:
        raise DecodeError(f"format information unreadable (distance {best[0]})")
    return best[1], best[2], best[0]


def _deinterleave(codewords: List[int], layout: BlockLayout) -> List[List[int]]:
    blocks: List[List[int]] = [[0] * (layout.short_block_len + 1) for _ in range(layout.blocks)]
    for value, (j, i) in zip(codewords, _interleave_order(layout)):
        blocks[j][i] = value
    gap = layout.short_block_len - layout.ec_per_block
    return [blk[:gap] + blk[gap + 1 :] if j < layout.short_blocks else blk for j, blk in enumerate(blocks)]


def _parse_segments(data: bytes) -> bytes:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))

    def read(pos: int, n: int) -> int:
        return int("".join(map(str, bits[pos : pos + n])) or "0", 2)

    mode = read(0, 4)
    if mode != MODE_BYTE:
        raise DecodeError(f"unsupported segment mode {mode:04b}")
    count = read(4, CHAR_COUNT_BITS)
    start = 4 + CHAR_COUNT_BITS
    if start + 8 * count > bits.size:
        raise DecodeError(f"character count {count} overruns the data codewords")
    return bytes(read(start + 8 * i, 8) for i in range(count))


def decode_symbol(grid: np.ndarray) -> Tuple[bytes, int, int, EcLevel, int]:
    """Raw symbol to (payload, corrected, version, level, mask); raises DecodeError."""
    size = grid.shape[0]
    version, rem = divmod(size - 17, 4)
    if rem or not 1 <= version <= 6:
        raise DecodeError(f"{size}x{size} is not a version 1-6 symbol")
    level, mask, _ = read_format(grid)
    layout = block_layout(version, level)
    unmasked = grid ^ _mask_pattern(version, mask).astype(np.uint8)
    ys, xs = _data_coords(version)
    bits = unmasked[ys, xs][: layout.raw_codewords * 8]
    codewords = np.packbits(bits).tolist()
    data = bytearray()
    corrected = 0
    for j, block in enumerate(_deinterleave(codewords, layout)):
        try:
            chunk, fixed = rs_decode(block, layout.ec_per_block)
        except DecodeError as e:
            raise DecodeError(f"block {j}: {e.reason}") from e
        data.extend(chunk)
        corrected += fixed
    return _parse_segments(bytes(data)), corrected, version, level, mask


def qr_decode(m: ModuleMatrix, border: int = 0) -> QrDecodeResult:
    """Recognition on a grid-aligned symbol; failures come back as ``success=False``."""
    try:
        grid = strip_border(m, border)
        payload, corrected, version, level, mask = decode_symbol(grid)
    except (DecodeError, ValueError) as e:
        return QrDecodeResult(success=False, error_message=str(e))
    return QrDecodeResult(success=True, payload=payload, corrected=corrected, version=version, ec_level=level, mask=mask)

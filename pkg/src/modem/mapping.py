import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DimensionError
from ..models import MappingPlan, block_grid
from .bitmap import ModuleMatrix
from .constellation import Constellation


@dataclass(frozen=True, eq=False)
class ThetaFrame:
    """One displayed IRS frame: per-element reflection coefficients plus the
    constellation indices of the symbol slots (elements, or blocks in block mode)."""

    theta: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.complex128)
        if theta.ndim != 1:
            raise DimensionError("theta must be a vector")
        if np.any(np.abs(theta) > 1.0 + 1e-12):
            raise ValueError("reflection coefficients must have magnitude <= 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))

    @property
    def elements(self) -> int:
        return self.theta.size


def slot_grid(plan: MappingPlan) -> Tuple[int, int]:
    if plan.block_count is None:
        return plan.irs_side, plan.irs_side
    grid = block_grid(plan.irs_side, plan.block_count)
    if grid is None:
        raise DimensionError(f"block_count={plan.block_count} cannot tile the element grid")
    return grid


def element_blocks(elements: int, block_count: Optional[int] = None) -> np.ndarray:
    """Slot index of every element, row-major; blocks need a square element grid."""
    if block_count is None:
        return np.arange(elements)
    side = math.isqrt(elements)
    if side * side != elements:
        raise DimensionError(f"elements={elements} is not a square element grid")
    grid = block_grid(side, block_count)
    if grid is None:
        raise DimensionError(f"block_count={block_count} cannot tile a {side}x{side} element grid")
    rows_b, cols_b = grid
    r, c = np.divmod(np.arange(elements), side)
    return (r // (side // rows_b)) * cols_b + (c // (side // cols_b))


def block_assignment(plan: MappingPlan) -> np.ndarray:
    return element_blocks(plan.elements, plan.block_count)


def block_expander(elements: int, block_count: Optional[int] = None) -> np.ndarray:
    """L x S 0/1 matrix with theta = B @ s."""
    assign = element_blocks(elements, block_count)
    b = np.zeros((elements, int(assign.max()) + 1))
    b[np.arange(elements), assign] = 1.0
    return b


def _subblock_side(plan: MappingPlan) -> int:
    """Side of the square module sub-block per slot, or 0 when run-length grouping applies."""
    k = plan.bits_per_symbol
    r = math.isqrt(k)
    rows, cols = slot_grid(plan)
    if r * r != k or rows != cols or plan.frame_count != 1:
        return 0
    return r if plan.module_side == rows * r else 0


def _check(plan: MappingPlan, c: Constellation) -> None:
    if plan.bits_per_symbol != c.bits_per_symbol:
        raise DimensionError(f"plan carries {plan.bits_per_symbol} bits per slot but M={c.M} needs {c.bits_per_symbol}")


def modules_to_slot_bits(m: ModuleMatrix, plan: MappingPlan) -> np.ndarray:
    """Module bits grouped as (frames, slots, k)."""
    if m.n != plan.module_side:
        raise DimensionError(f"module grid is {m.n}x{m.n} but the plan expects side {plan.module_side}")
    k, s = plan.bits_per_symbol, plan.slots
    r = _subblock_side(plan)
    if r:
        g = plan.module_side // r
        blocks = m.cells.reshape(g, r, g, r).transpose(0, 2, 1, 3)
        return blocks.reshape(1, s, k)
    flat = m.flat()
    total = plan.frame_count * s * k
    padded = np.zeros(total, dtype=np.uint8)
    padded[: flat.size] = flat
    return padded.reshape(plan.frame_count, s, k)


def slot_bits_to_modules(bits: np.ndarray, plan: MappingPlan) -> ModuleMatrix:
    k, s, n = plan.bits_per_symbol, plan.slots, plan.module_side
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1, s, k)
    r = _subblock_side(plan)
    if r:
        g = n // r
        cells = bits.reshape(g, g, r, r).transpose(0, 2, 1, 3).reshape(n, n)
        return ModuleMatrix(cells)
    return ModuleMatrix(bits.ravel()[: n * n].reshape(n, n))


def modules_to_frame(m: ModuleMatrix, plan: MappingPlan, c: Constellation) -> List[ThetaFrame]:
    """Module grid to the minimal sequence of frames, row-major module order
    across frames; in block mode every element of a block shows its slot's point."""
    _check(plan, c)
    bits = modules_to_slot_bits(m, plan)
    weights = 1 << np.arange(plan.bits_per_symbol - 1, -1, -1)
    indices = c.label_to_index[bits.astype(np.int64) @ weights]
    assign = block_assignment(plan)
    return [ThetaFrame(theta=c.points[idx][assign], indices=idx) for idx in indices]


def frame_to_modules(symbols_hat, plan: MappingPlan, c: Constellation) -> ModuleMatrix:
    """Inverse of :func:`modules_to_frame` on decided slot indices (frames x slots)."""
    _check(plan, c)
    idx = np.atleast_2d(np.asarray(symbols_hat, dtype=np.int64))
    if idx.shape != (plan.frame_count, plan.slots):
        raise DimensionError(f"expected {plan.frame_count} frame(s) of {plan.slots} symbols, got shape {idx.shape}")
    if np.any((idx < 0) | (idx >= c.M)):
        raise ValueError("symbol index outside the constellation")
    return slot_bits_to_modules(c.label_bits(idx), plan)


def apply_block_reduction(m: ModuleMatrix, plan: MappingPlan, c: Constellation) -> ThetaFrame:
    """Single-frame block mode: the module grid is the reduced block grid."""
    if plan.block_count is None:
        raise DimensionError("block reduction needs plan.block_count")
    if plan.frame_count != 1 or not _subblock_side(plan):
        raise DimensionError(
            f"module side {plan.module_side} does not match the {slot_grid(plan)} block grid "
            f"with {plan.bits_per_symbol} bit(s) per block"
        )
    return modules_to_frame(m, plan, c)[0]


def obstruction_mask(plan: MappingPlan) -> np.ndarray:
    """True for elements inside the D x D square at the bottom-right corner."""
    side, d = plan.irs_side, plan.obstruction_side
    if not 0 <= d <= side:
        raise ValueError(f"obstruction side {d} outside [0, {side}]")
    r, c = np.divmod(np.arange(plan.elements), side)
    return (r >= side - d) & (c >= side - d)


def frames_to_slot_indices(frames: Sequence[ThetaFrame]) -> np.ndarray:
    return np.stack([f.indices for f in frames])

from .bitmap import ModuleMatrix
from .constellation import Constellation, bits_to_indices, bits_to_symbols, gray_decode, gray_encode, symbols_to_bits
from .mapping import (
    ThetaFrame,
    apply_block_reduction,
    block_assignment,
    block_expander,
    element_blocks,
    frame_to_modules,
    frames_to_slot_indices,
    modules_to_frame,
    obstruction_mask,
    slot_grid,
)

__all__ = [
    "Constellation",
    "ModuleMatrix",
    "ThetaFrame",
    "apply_block_reduction",
    "bits_to_indices",
    "bits_to_symbols",
    "block_assignment",
    "block_expander",
    "element_blocks",
    "frame_to_modules",
    "frames_to_slot_indices",
    "gray_decode",
    "gray_encode",
    "modules_to_frame",
    "obstruction_mask",
    "slot_grid",
    "symbols_to_bits",
]

from .gf import EXP, LOG, gf_div, gf_inv, gf_mul, gf_mul_reduce, gf_pow
from .reed_solomon import berlekamp_massey, rs_decode, rs_encode, rs_generator, syndromes
from .symbol import add_border, decode_symbol, encode_symbol, format_bits, penalty_score, qr_decode, qr_encode, read_format, strip_border
from .tables import BlockLayout, block_layout, byte_capacity, symbol_side

__all__ = [
    "BlockLayout",
    "add_border",
    "EXP",
    "LOG",
    "berlekamp_massey",
    "block_layout",
    "byte_capacity",
    "decode_symbol",
    "encode_symbol",
    "format_bits",
    "gf_div",
    "gf_inv",
    "gf_mul",
    "gf_mul_reduce",
    "gf_pow",
    "penalty_score",
    "qr_decode",
    "qr_encode",
    "read_format",
    "rs_decode",
    "rs_encode",
    "rs_generator",
    "strip_border",
    "symbol_side",
    "syndromes",
]

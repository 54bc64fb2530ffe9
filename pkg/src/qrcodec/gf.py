"""GF(2^8) arithmetic with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1."""

from typing import List, Tuple

PRIMITIVE = 0x11D
GENERATOR = 0x02


def _build_tables() -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    exp = [0] * 512
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return tuple(exp), tuple(log)


EXP, LOG = _build_tables()


def _check(*values: int) -> None:
    for v in values:
        if not 0 <= v <= 0xFF:
            raise ValueError(f"field element out of range: {v}")


def gf_mul(a: int, b: int) -> int:
    _check(a, b)
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_mul_reduce(a: int, b: int) -> int:
    """Shift-and-add product with explicit reduction; no tables."""
    _check(a, b)
    z = 0
    for i in reversed(range(8)):
        z = (z << 1) ^ ((z >> 7) * PRIMITIVE)
        z ^= ((b >> i) & 1) * a
    return z


def gf_inv(a: int) -> int:
    _check(a)
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return EXP[255 - LOG[a]]


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by 0 in GF(256)")
    if a == 0:
        return 0
    return EXP[(LOG[a] - LOG[b]) % 255]


def gf_pow(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return EXP[(LOG[a] * n) % 255]


def poly_eval(coeffs: List[int], x: int) -> int:
    """Horner evaluation, coefficients in ascending powers."""
    r = 0
    for c in reversed(coeffs):
        r = gf_mul(r, x) ^ c
    return r


def poly_mul(p: List[int], q: List[int]) -> List[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] ^= gf_mul(a, b)
    return out

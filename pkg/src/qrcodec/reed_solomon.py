"""Reed-Solomon over GF(256), generator roots alpha^0 .. alpha^(ec-1)."""

from functools import lru_cache
from typing import List, Sequence, Tuple

from ..core.errors import DecodeError
from .gf import EXP, gf_div, gf_inv, gf_mul, poly_eval, poly_mul


@lru_cache(maxsize=None)
def rs_generator(ec_count: int) -> Tuple[int, ...]:
    """Product of (x - alpha^i), leading 1 dropped, descending powers."""
    if not 1 <= ec_count <= 254:
        raise ValueError(f"ec_count must be in [1, 254], got {ec_count}")
    coeffs = [0] * (ec_count - 1) + [1]
    root = 1
    for _ in range(ec_count):
        for j in range(ec_count):
            coeffs[j] = gf_mul(coeffs[j], root)
            if j + 1 < ec_count:
                coeffs[j] ^= coeffs[j + 1]
        root = gf_mul(root, 0x02)
    return tuple(coeffs)


def rs_encode(data: Sequence[int], ec_count: int) -> bytes:
    """EC codewords: remainder of data(x) * x^ec_count modulo the generator."""
    gen = rs_generator(ec_count)
    rem = [0] * ec_count
    for b in data:
        factor = b ^ rem.pop(0)
        rem.append(0)
        for i, g in enumerate(gen):
            rem[i] ^= gf_mul(g, factor)
    return bytes(rem)


def syndromes(received: Sequence[int], ec_count: int) -> List[int]:
    # received[0] is the coefficient of x^(n-1)
    out = []
    for j in range(ec_count):
        x = EXP[j]
        s = 0
        for c in received:
            s = gf_mul(s, x) ^ c
        out.append(s)
    return out


def berlekamp_massey(synd: Sequence[int]) -> List[int]:
    """Error locator Lambda(x) in ascending powers, Lambda(0) = 1."""
    n = len(synd)
    c = [1] + [0] * n
    b_poly = [1] + [0] * n
    degree, shift, last = 0, 1, 1
    for k in range(n):
        d = synd[k]
        for i in range(1, degree + 1):
            d ^= gf_mul(c[i], synd[k - i])
        if d == 0:
            shift += 1
            continue
        coef = gf_div(d, last)
        prev = list(c)
        for i in range(n + 1 - shift):
            c[i + shift] ^= gf_mul(coef, b_poly[i])
        if 2 * degree <= k:
            degree = k + 1 - degree
            b_poly = prev
            last = d
            shift = 1
        else:
            shift += 1
    return c[: degree + 1]


def rs_decode(received: Sequence[int], ec_count: int) -> Tuple[bytes, int]:
    """Correct up to ec_count // 2 byte errors.

    Returns ``(data, corrected)``; raises :class:`DecodeError` when the word is
    not within the correction radius of a codeword it can identify.
    """
    r = list(received)
    n = len(r)
    if ec_count < 1 or n < ec_count + 1 or n > 255:
        raise ValueError(f"invalid block: {n} codewords with ec_count={ec_count}")
    synd = syndromes(r, ec_count)
    if not any(synd):
        return bytes(r[: n - ec_count]), 0
    locator = berlekamp_massey(synd)
    errors = len(locator) - 1
    if errors > ec_count // 2:
        raise DecodeError(f"{errors} errors exceed the correction capacity {ec_count // 2}")

    # Chien search: position p carries locator X = alpha^(n-1-p)
    positions = [p for p in range(n) if poly_eval(locator, gf_inv(EXP[n - 1 - p])) == 0]
    if len(positions) != errors:
        raise DecodeError("error locator roots do not match its degree")

    omega = poly_mul(synd, locator)[:ec_count]
    deriv = [locator[i] if i % 2 else 0 for i in range(1, len(locator))]
    for p in positions:
        x = EXP[n - 1 - p]
        x_inv = gf_inv(x)
        den = poly_eval(deriv, x_inv)
        if den == 0:
            raise DecodeError("error evaluator denominator vanished")
        r[p] ^= gf_mul(x, gf_div(poly_eval(omega, x_inv), den))

    if any(syndromes(r, ec_count)):
        raise DecodeError("correction left a non-zero syndrome")
    return bytes(r[: n - ec_count]), errors

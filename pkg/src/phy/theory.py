import math

import numpy as np

from ..mathcore import mpsk_sep_exact, q_function
from ..models import is_power_of_two


def _check(m: int) -> None:
    if not is_power_of_two(int(m)):
        raise ValueError(f"modulation order must be a power of two >= 2, got {m}")


def _positive(c_ll) -> np.ndarray:
    c = np.asarray(c_ll, dtype=float)
    if np.any(~(c > 0)):
        raise ValueError("C_ll must be > 0")
    return c


def abep_theoretical(c_ll, m: int):
    """Closed-form per-element ABEP at post-equalization noise variance ``c_ll``.

    BPSK is exact; QPSK and M > 4 use the nearest-neighbour approximations
    Q(sqrt((1 - cos(pi/2))/C)) and (2/log2 M)[Q(sqrt((1 - cos(2pi/M))/C)) + Q(sqrt((1 - cos(4pi/M))/C))].
    Vectorized over ``c_ll``.
    """
    _check(m)
    c = _positive(c_ll)
    if m == 2:
        out = q_function(np.sqrt(2.0 / c))
    elif m == 4:
        out = q_function(np.sqrt((1.0 - math.cos(math.pi / 2)) / c))
    else:
        k = math.log2(m)
        out = (2.0 / k) * (
            q_function(np.sqrt((1.0 - math.cos(2 * math.pi / m)) / c))
            + q_function(np.sqrt((1.0 - math.cos(4 * math.pi / m)) / c))
        )
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def asep_theoretical(c_ll: float, m: int) -> float:
    """Exact M-PSK symbol error probability at per-element SNR 1/C_ll."""
    _check(m)
    c = float(_positive(c_ll))
    snr = 1.0 / c
    if m == 2:
        return q_function(math.sqrt(2.0 * snr))
    if m == 4:
        q = q_function(math.sqrt(snr))
        return 2.0 * q - q * q
    return mpsk_sep_exact(snr, m)

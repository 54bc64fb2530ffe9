import math

import numpy as np
from scipy import integrate, special

from ..models import is_power_of_two


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Evaluated as erfc(x/sqrt(2))/2, which keeps full relative precision in the
    upper tail. Accepts scalars or arrays.
    """
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def mpsk_sep_exact(snr: float, m: int) -> float:
    """Exact M-PSK symbol error probability in circular Gaussian noise.

    ``snr`` is the symbol SNR Es/N0. Uses the single finite-range integral
    (1/pi) * int_0^{pi(M-1)/M} exp(-snr sin^2(pi/M) / sin^2(phi)) dphi.
    """
    if not is_power_of_two(int(m)):
        raise ValueError(f"modulation order must be a power of two >= 2, got {m}")
    if not snr > 0 or not math.isfinite(snr):
        raise ValueError(f"snr must be a positive finite number, got {snr}")
    s2 = math.sin(math.pi / m) ** 2
    upper = math.pi * (m - 1) / m

    def integrand(phi: float) -> float:
        sp = math.sin(phi)
        if sp == 0.0:
            return 0.0
        return math.exp(-snr * s2 / (sp * sp))

    value, _ = integrate.quad(integrand, 0.0, upper, epsabs=1e-13, epsrel=1e-12, limit=200)
    return min(1.0, max(0.0, value / math.pi))

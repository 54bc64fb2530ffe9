from typing import Optional

import numpy as np
from scipy import constants

from ..core.errors import ConfigError
from ..models import NoiseMode, NoiseModel

BOLTZMANN = constants.k  # 1.380649e-23 J/K, exact in SI


def thermal_noise_power(temperature_k: float, bandwidth_hz: float) -> float:
    return BOLTZMANN * temperature_k * bandwidth_hz


def noise_variance(model: NoiseModel, calib: Optional[np.ndarray] = None) -> float:
    """Noise variance sigma^2.

    Physical mode: k_B * T * B. Target mode: ``calib`` is the diagonal of U U^H
    (g_l); sigma^2 = sum_l(1/g_l) / (gamma * L) puts the element-average of the
    post-equalization SNR 1/(sigma^2 g_l) exactly at gamma.
    """
    if model.mode == NoiseMode.PHYSICAL:
        return thermal_noise_power(model.temperature_k, model.bandwidth_hz)
    if calib is None:
        raise ConfigError("target_snr noise needs the equalizer calibration diagonal")
    g = np.asarray(calib, dtype=float).ravel()
    if g.size == 0 or np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise ConfigError("calibration diagonal must be positive and finite")
    return float(np.sum(1.0 / g) / (model.gamma_linear * g.size))

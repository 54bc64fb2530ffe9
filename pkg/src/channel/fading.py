import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.errors import DimensionError
from ..mathcore import ComplexMatrix, RandomStream, sample_complex_gaussian
from ..models import PathLossModel, RicianParams


@dataclass(frozen=True)
class ChannelPair:
    """Cascaded channel: H is L x N_t (TX -> IRS), F is N_r x L (IRS -> RX)."""

    H: ComplexMatrix
    F: ComplexMatrix

    def __post_init__(self):
        if self.H.ndim != 2 or self.F.ndim != 2:
            raise DimensionError("H and F must be 2-D")
        if self.H.shape[0] != self.F.shape[1]:
            raise DimensionError(f"H has {self.H.shape[0]} rows but F has {self.F.shape[1]} columns")
        if not (np.all(np.isfinite(self.H)) and np.all(np.isfinite(self.F))):
            raise ValueError("channel entries must be finite")

    @property
    def elements(self) -> int:
        return self.H.shape[0]

    @property
    def n_tx(self) -> int:
        return self.H.shape[1]

    @property
    def n_rx(self) -> int:
        return self.F.shape[0]


def path_loss_db(model: PathLossModel, d_m: float) -> float:
    if d_m < model.d0_m:
        raise ValueError(f"distance {d_m} m is below the reference distance {model.d0_m} m")
    return model.pl0_db - model.slope * math.log10(d_m / model.d0_m)


def path_loss_linear(model: PathLossModel, d_m: float) -> float:
    """Linear power gain PL(d) = 10^{(PL0 - slope*log10(d/d0))/10}."""
    return 10.0 ** (path_loss_db(model, d_m) / 10.0)


def steering_vector(n: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response, unit-modulus entries."""
    return np.exp(1j * math.pi * np.arange(n) * math.cos(angle))


def rician_matrix(stream: RandomStream, rows: int, cols: int, kappa: float, gain: float) -> ComplexMatrix:
    """sqrt(gain) * (sqrt(k/(1+k)) * LOS + sqrt(1/(1+k)) * NLOS), rank-1 random-angle LOS."""
    g = stream.generator
    phi, psi = g.uniform(0.0, math.pi, size=2)
    los = np.outer(steering_vector(rows, phi), steering_vector(cols, psi).conj())
    nlos = sample_complex_gaussian(stream, (rows, cols), 1.0)
    mix = math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * nlos
    return math.sqrt(gain) * mix


def draw_channel_pair(
    stream: RandomStream,
    dims: Tuple[int, int, int],
    ric: RicianParams,
    pl: PathLossModel,
) -> ChannelPair:
    """Independent Rician draws for both hops; ``dims`` is (L, N_t, N_r)."""
    elements, n_tx, n_rx = (int(d) for d in dims)
    if min(elements, n_tx, n_rx) < 1:
        raise DimensionError(f"channel dimensions must be >= 1, got {dims}")
    h = rician_matrix(stream.derive("H"), elements, n_tx, ric.kappa, path_loss_linear(pl, ric.tx_distance_m))
    f = rician_matrix(stream.derive("F"), n_rx, elements, ric.kappa, path_loss_linear(pl, ric.rx_distance_m))
    return ChannelPair(H=h, F=f)

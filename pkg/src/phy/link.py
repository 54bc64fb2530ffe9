from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..channel import ChannelPair, noise_variance
from ..core.errors import DimensionError, SingularMatrixError
from ..core.logs import get_logger
from ..mathcore import ComplexMatrix, ComplexVector, RandomStream, left_pseudo_inverse, principal_eigenvector, sample_complex_gaussian
from ..models import NoiseMode, NoiseModel
from ..modem import Constellation, ThetaFrame, block_expander

log = get_logger(__name__)

FrameInput = Union[ThetaFrame, Sequence[ThetaFrame]]


@dataclass(frozen=True, eq=False)
class LinkState:
    """Derived operators of one channel realization.

    ``V`` is the element-level channel F diag(Hw) (N_r x L); ``V_eff = V @ B``
    folds equal-coefficient blocks into S slots (B is the identity outside
    block mode). ``U`` is the left pseudo-inverse of ``V_eff``.
    """

    w: ComplexVector
    V: ComplexMatrix
    B: np.ndarray
    V_eff: ComplexMatrix
    U: ComplexMatrix
    g_diag: np.ndarray
    sigma2: float
    C_diag: np.ndarray

    @property
    def elements(self) -> int:
        return self.V.shape[1]

    @property
    def slots(self) -> int:
        return self.V_eff.shape[1]

    @property
    def n_rx(self) -> int:
        return self.V.shape[0]

    def zf_residual(self) -> float:
        return float(np.max(np.abs(self.U @ self.V_eff - np.eye(self.slots))))


@dataclass(frozen=True, eq=False)
class RxObservation:
    """Received samples, one row per frame (frames x N_r), with the true slot indices."""

    y: np.ndarray
    true_indices: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.y)):
            raise ValueError("received samples must be finite")

    @property
    def frames(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True, eq=False)
class DetectionReport:
    y_eq: np.ndarray
    theta_hat_indices: np.ndarray
    symbol_errors: int
    bit_errors: int

    @property
    def symbols(self) -> int:
        return int(self.theta_hat_indices.size)


def design_beamformer(ch: ChannelPair) -> ComplexVector:
    """Unit-norm principal eigenvector of H^H F^H F H."""
    g = ch.F @ ch.H
    w, _ = principal_eigenvector(g.conj().T @ g)
    return w / np.linalg.norm(w)


def build_link(
    ch: ChannelPair,
    w: ComplexVector,
    noise: NoiseModel,
    block_count: Optional[int] = None,
) -> LinkState:
    w = np.asarray(w, dtype=np.complex128).ravel()
    if w.size != ch.n_tx:
        raise DimensionError(f"beamformer has {w.size} entries for {ch.n_tx} transmit antennas")
    v = ch.F * (ch.H @ w)[None, :]
    b = block_expander(ch.elements, block_count) if block_count is not None else np.eye(ch.elements)
    v_eff = v @ b if block_count is not None else v
    slots = v_eff.shape[1]
    if ch.n_rx < slots:
        hint = "" if block_count is not None else "; enable block reduction with block_count <= N_r"
        raise DimensionError(f"N_r={ch.n_rx} receive antennas cannot separate {slots} slots{hint}")
    try:
        u = left_pseudo_inverse(v_eff)
    except SingularMatrixError as e:
        log.warning("link.rank_deficient", slots=slots, n_rx=ch.n_rx, condition=e.condition)
        raise
    g = np.sum(np.abs(u) ** 2, axis=1)
    if noise.mode == NoiseMode.PHYSICAL:
        sigma2 = noise_variance(noise) / noise.tx_power_w
    else:
        sigma2 = noise_variance(noise, g)
    return LinkState(w=w, V=v, B=b, V_eff=v_eff, U=u, g_diag=g, sigma2=sigma2, C_diag=sigma2 * g)


def _theta_matrix(frame: FrameInput) -> tuple:
    frames = [frame] if isinstance(frame, ThetaFrame) else list(frame)
    if not frames:
        raise DimensionError("at least one frame is required")
    theta = np.stack([f.theta for f in frames])
    indices = np.stack([f.indices for f in frames])
    return theta, indices


def transmit(
    link: LinkState,
    frame: FrameInput,
    mask: Optional[np.ndarray],
    stream: RandomStream,
) -> RxObservation:
    """y = V_masked theta + z for each frame; masked elements reflect nothing."""
    theta, indices = _theta_matrix(frame)
    if theta.shape[1] != link.elements:
        raise DimensionError(f"frame has {theta.shape[1]} elements but the link has {link.elements}")
    v = link.V
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (link.elements,):
            raise DimensionError(f"obstruction mask must have {link.elements} entries")
        v = np.where(mask[None, :], 0.0, v)
    z = sample_complex_gaussian(stream, (theta.shape[0], link.n_rx), link.sigma2)
    return RxObservation(y=theta @ v.T + z, true_indices=indices)


def detect(link: LinkState, obs: RxObservation, c: Constellation) -> DetectionReport:
    """Zero-forcing then per-slot nearest-point decision, scored against the truth."""
    if obs.y.shape[1] != link.n_rx:
        raise DimensionError(f"observation has {obs.y.shape[1]} samples per frame, link expects {link.n_rx}")
    if obs.true_indices.shape[1] != link.slots:
        raise DimensionError(f"ground truth has {obs.true_indices.shape[1]} slots, link has {link.slots}")
    y_eq = obs.y @ link.U.T
    hat = c.nearest(y_eq)
    sym_err = int(np.count_nonzero(hat != obs.true_indices))
    bit_err = int(np.sum(c.bit_distance(hat, obs.true_indices)))
    return DetectionReport(y_eq=y_eq, theta_hat_indices=hat, symbol_errors=sym_err, bit_errors=bit_err)

import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class Scenario(str, Enum):
    ABEP_SNR = "abep_snr"
    ABEP_NTX = "abep_ntx"
    ABEP_KAPPA = "abep_kappa"
    QR_SNR = "qr_snr"
    QR_OBSTRUCTION = "qr_obstruction"
    QR_NTX = "qr_ntx"
    QR_KAPPA = "qr_kappa"

    @property
    def is_qr(self) -> bool:
        return self.value.startswith("qr_")

    @property
    def swept(self) -> str:
        return {
            "snr": "gamma_db",
            "ntx": "n_tx",
            "kappa": "kappa",
            "obstruction": "obstruction",
        }[self.value.split("_", 1)[1]]


class NoiseMode(str, Enum):
    PHYSICAL = "physical"
    TARGET_SNR = "target_snr"


class EcLevel(str, Enum):
    L = "L"
    M = "M"
    Q = "Q"
    H = "H"


class ResultMetric(str, Enum):
    ABEP_THEORY = "abep_theory"
    ABEP_SIM = "abep_sim"
    STDERR = "stderr"
    RECOVERY_PROB = "recovery_prob"
    RECOGNITION_PROB = "recognition_prob"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSONL = "jsonl"


def is_power_of_two(m: int) -> bool:
    return m >= 2 and (m & (m - 1)) == 0


def block_grid(side: int, count: int) -> Optional[Tuple[int, int]]:
    """Blocks along (rows, cols) tiling a side x side element grid into ``count`` equal
    rectangles; square tiling wins when it exists, otherwise the most square factor pair."""
    if count < 1 or side < 1:
        return None
    best: Optional[Tuple[int, int]] = None
    for rows in range(1, count + 1):
        if count % rows:
            continue
        cols = count // rows
        if side % rows or side % cols:
            continue
        if best is None or abs(rows - cols) < abs(best[0] - best[1]) or (
            abs(rows - cols) == abs(best[0] - best[1]) and rows > best[0]
        ):
            best = (rows, cols)
    return best


class RicianParams(BaseModel):
    kappa: float = Field(default=0.1, ge=0.0)
    tx_distance_m: float = Field(default=50.0, gt=0.0)
    rx_distance_m: float = Field(default=50.0, gt=0.0)


class PathLossModel(BaseModel):
    pl0_db: float = -30.0
    slope: float = Field(default=25.0, ge=0.0)
    d0_m: float = Field(default=1.0, gt=0.0)


class NoiseModel(BaseModel):
    mode: NoiseMode = NoiseMode.TARGET_SNR
    temperature_k: float = Field(default=300.0, gt=0.0)
    bandwidth_hz: float = Field(default=1e6, gt=0.0)
    gamma_db: Optional[float] = 15.0
    tx_power_dbm: float = 30.0

    @model_validator(mode="after")
    def _mode_fields(self) -> "NoiseModel":
        if self.mode == NoiseMode.TARGET_SNR and self.gamma_db is None:
            raise ValueError("gamma_db is required in target_snr mode")
        return self

    @property
    def gamma_linear(self) -> float:
        return 10.0 ** ((self.gamma_db or 0.0) / 10.0)

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** ((self.tx_power_dbm - 30.0) / 10.0)


class MappingPlan(BaseModel):
    elements: int = Field(gt=0)
    bits_per_symbol: int = Field(default=1, ge=1)
    module_side: int = Field(gt=0)
    block_count: Optional[int] = Field(default=None, ge=1)
    obstruction_side: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _geometry(self) -> "MappingPlan":
        side = math.isqrt(self.elements)
        if side * side != self.elements:
            raise ValueError(f"elements={self.elements} is not a square element grid")
        if self.obstruction_side > side:
            raise ValueError(f"obstruction_side={self.obstruction_side} exceeds irs_side={side}")
        if self.block_count is not None:
            if self.elements % self.block_count:
                raise ValueError(f"elements={self.elements} not divisible by block_count={self.block_count}")
            if block_grid(side, self.block_count) is None:
                raise ValueError(f"block_count={self.block_count} cannot tile a {side}x{side} grid in equal blocks")
        return self

    @property
    def irs_side(self) -> int:
        return math.isqrt(self.elements)

    @property
    def slots(self) -> int:
        return self.block_count if self.block_count is not None else self.elements

    @property
    def modules_per_frame(self) -> int:
        return self.slots * self.bits_per_symbol

    @property
    def frame_count(self) -> int:
        return -(-(self.module_side * self.module_side) // self.modules_per_frame)


class QrSpec(BaseModel):
    version: int = Field(default=5, ge=1, le=6)
    ec_level: EcLevel = EcLevel.H
    mask: Optional[int] = Field(default=None, ge=0, le=7)
    border: int = Field(default=1, ge=0)

    @property
    def side(self) -> int:
        return 4 * self.version + 17

    @property
    def grid_side(self) -> int:
        return self.side + self.border


class QrDecodeResult(BaseModel):
    success: bool
    payload: Optional[bytes] = None
    corrected: int = 0
    version: Optional[int] = None
    ec_level: Optional[EcLevel] = None
    mask: Optional[int] = None
    error_message: Optional[str] = None


class AbepEstimate(BaseModel):
    abep_mc: float
    abep_theory_mean: float
    stderr: float
    asep_mc: float = 0.0
    asep_theory_mean: float = 0.0
    bits: int = 0
    bit_errors: int = 0
    symbols: int = 0
    symbol_errors: int = 0


# default Monte-Carlo budget: trial count for QR points, bit count for ABEP points
QR_DEFAULT_TRIALS = 10_000
ABEP_DEFAULT_TRIALS = 100
ABEP_MIN_BITS = 1_000_000

_DEFAULT_SWEEPS = {
    "gamma_db": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    "n_tx": [8, 16, 32, 64, 128],
    "kappa": [0.0, 0.1, 1.0, 10.0],
    "obstruction": [0, 5, 10, 15, 20],
}


class SweepConfig(BaseModel):
    scenario: Scenario = Scenario.ABEP_SNR
    elements: int = Field(default=64, gt=0)
    n_tx: int = Field(default=64, gt=0)
    n_rx: int = Field(default=64, gt=0)
    modulations: List[int] = Field(default_factory=lambda: [2, 4, 8, 16])
    rician: RicianParams = Field(default_factory=RicianParams)
    path_loss: PathLossModel = Field(default_factory=PathLossModel)
    noise: NoiseModel = Field(default_factory=NoiseModel)
    gamma_db_range: Optional[List[float]] = None
    n_tx_range: Optional[List[int]] = None
    kappa_range: Optional[List[float]] = None
    obstruction_range: Optional[List[int]] = None
    obstruction_side: int = Field(default=0, ge=0)
    block_count: Optional[int] = Field(default=None, ge=1)
    groups: int = Field(default=1, ge=1)
    trials: int = Field(default=ABEP_DEFAULT_TRIALS, ge=1, description="QR scenarios default to 10^4")
    frames: int = Field(default=1, ge=1, description="ABEP scenarios default to at least 10^6 bits per point")
    seed: int = Field(default=1, ge=0, lt=2**64)
    qr: QrSpec = Field(default_factory=QrSpec)
    payload: str = "IRS microwave QR code"
    output: Optional[str] = None
    output_format: OutputFormat = OutputFormat.CSV
    bitmap_dir: Optional[str] = None

    @field_validator("modulations")
    @classmethod
    def _modulations(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("at least one modulation order is required")
        bad = [m for m in v if not is_power_of_two(m)]
        if bad:
            raise ValueError(f"modulation orders must be powers of two >= 2, got {bad}")
        return v

    @field_validator("gamma_db_range", "n_tx_range", "kappa_range", "obstruction_range")
    @classmethod
    def _increasing(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("sweep range must be non-empty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"sweep range must be strictly increasing, got {v}")
        return v

    @field_validator("n_tx_range")
    @classmethod
    def _positive_ntx(cls, v):
        if v is not None and min(v) < 1:
            raise ValueError("n_tx values must be >= 1")
        return v

    @field_validator("kappa_range")
    @classmethod
    def _kappa_nonneg(cls, v):
        if v is not None and min(v) < 0:
            raise ValueError("kappa values must be >= 0")
        return v

    @field_validator("obstruction_range")
    @classmethod
    def _obstruction_nonneg(cls, v):
        if v is not None and min(v) < 0:
            raise ValueError("obstruction sides must be >= 0")
        return v

    @model_validator(mode="after")
    def _groups_divide(self) -> "SweepConfig":
        if self.elements % self.groups:
            raise ValueError(f"groups={self.groups} must divide elements={self.elements}")
        return self

    @model_validator(mode="after")
    def _default_budget(self) -> "SweepConfig":
        if "trials" not in self.model_fields_set and self.scenario.is_qr:
            self.trials = QR_DEFAULT_TRIALS
        if "frames" not in self.model_fields_set and not self.scenario.is_qr:
            bits_per_frame = self.slots_per_frame * int(math.log2(min(self.modulations)))
            self.frames = max(1, math.ceil(ABEP_MIN_BITS / (self.trials * bits_per_frame)))
        return self

    @property
    def slots_per_frame(self) -> int:
        """Symbols detected per frame over all groups; blocks when N_r is short of a group."""
        if self.block_count is not None:
            return self.block_count
        if self.n_rx < self.elements // self.groups:
            return self.n_rx
        return self.elements

    def sweep_values(self) -> List[float]:
        key = self.scenario.swept
        given = {
            "gamma_db": self.gamma_db_range,
            "n_tx": self.n_tx_range,
            "kappa": self.kappa_range,
            "obstruction": self.obstruction_range,
        }[key]
        return list(given if given is not None else _DEFAULT_SWEEPS[key])


class ResultRow(BaseModel):
    scenario: Scenario
    x: float
    modulation: int
    metric: ResultMetric
    value: float
    trials: int = Field(ge=1, description="Bernoulli samples behind the value: bits for ABEP rows, trials for QR rows")
    seed: int = Field(ge=0)

    @model_validator(mode="after")
    def _value_range(self) -> "ResultRow":
        if self.metric == ResultMetric.STDERR:
            if self.value < 0:
                raise ValueError("stderr must be >= 0")
        elif not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.metric.value} must lie in [0, 1], got {self.value}")
        return self

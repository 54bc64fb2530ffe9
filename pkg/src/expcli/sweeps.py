import asyncio
import math
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from ..core.config import worker_count
from ..core.errors import ConfigError, DimensionError
from ..core.logs import get_logger
from ..mathcore import RandomStream, stable_key
from ..models import (
    AbepEstimate,
    MappingPlan,
    NoiseMode,
    ResultMetric,
    ResultRow,
    Scenario,
    SweepConfig,
    block_grid,
)
from ..modem import Constellation, ModuleMatrix, ThetaFrame, frame_to_modules, modules_to_frame, obstruction_mask
from ..phy import detect, realize_link, simulate_abep, transmit
from ..qrcodec import qr_decode, qr_encode

log = get_logger(__name__)

ABEP_SCENARIOS = (Scenario.ABEP_SNR, Scenario.ABEP_NTX, Scenario.ABEP_KAPPA)
QR_SCENARIOS = (Scenario.QR_SNR, Scenario.QR_OBSTRUCTION, Scenario.QR_NTX, Scenario.QR_KAPPA)


@dataclass(frozen=True, eq=False)
class SampleBitmap:
    """Original symbol grid and the trial-0 reconstruction for one sweep point."""

    x: float
    modulation: int
    original: ModuleMatrix
    recovered: ModuleMatrix
    recognizable: bool


@dataclass
class QrExperiment:
    rows: List[ResultRow]
    bitmaps: List[SampleBitmap] = field(default_factory=list)
    written: List[Path] = field(default_factory=list)


def point_config(cfg: SweepConfig, x: float) -> SweepConfig:
    """Copy of ``cfg`` with the swept variable set to ``x``."""
    swept = cfg.scenario.swept
    if swept == "gamma_db":
        if cfg.noise.mode != NoiseMode.TARGET_SNR:
            raise ConfigError(f"{cfg.scenario.value} sweeps the target SNR; noise.mode must be target_snr")
        return cfg.model_copy(update={"noise": cfg.noise.model_copy(update={"gamma_db": float(x)})})
    if swept == "n_tx":
        return cfg.model_copy(update={"n_tx": int(x)})
    if swept == "kappa":
        return cfg.model_copy(update={"rician": cfg.rician.model_copy(update={"kappa": float(x)})})
    return cfg.model_copy(update={"obstruction_side": int(x)})


def resolve_block_count(cfg: SweepConfig) -> Optional[int]:
    """Explicit block_count, else N_r whenever the receiver is narrower than a group."""
    group_elements = cfg.elements // cfg.groups
    blocks = cfg.block_count
    if blocks is None and cfg.n_rx < group_elements:
        blocks = cfg.n_rx
    if blocks is None:
        return None
    if cfg.groups > 1:
        raise ConfigError("block reduction and frequency groups cannot be combined")
    side = math.isqrt(cfg.elements)
    if side * side != cfg.elements or block_grid(side, blocks) is None:
        raise ConfigError(f"block_count={blocks} cannot tile {cfg.elements} elements into equal blocks")
    return blocks


def _scenario_stream(cfg: SweepConfig) -> RandomStream:
    return RandomStream(cfg.seed, key=(stable_key(cfg.scenario.value),))


def _executor(executor: Optional[Executor]) -> Tuple[Executor, bool]:
    if executor is not None:
        return executor, False
    return ThreadPoolExecutor(max_workers=worker_count()), True


def _abep_point(cfg: SweepConfig, stream: RandomStream, m: int) -> AbepEstimate:
    return simulate_abep(
        (cfg.elements, cfg.n_tx, cfg.n_rx),
        cfg.rician,
        cfg.path_loss,
        cfg.noise,
        m,
        cfg.trials,
        stream=stream,
        frames=cfg.frames,
        block_count=resolve_block_count(cfg),
        groups=cfg.groups,
    )


async def run_abep_sweep_async(cfg: SweepConfig, executor: Optional[Executor] = None) -> List[ResultRow]:
    if cfg.scenario not in ABEP_SCENARIOS:
        raise ConfigError(f"run_abep_sweep needs an ABEP scenario, got {cfg.scenario.value}")
    xs = cfg.sweep_values()
    points = [point_config(cfg, x) for x in xs]
    base = _scenario_stream(cfg)
    log.info("sweep.start", scenario=cfg.scenario.value, points=len(xs), modulations=cfg.modulations, trials=cfg.trials)
    pool, owned = _executor(executor)
    loop = asyncio.get_running_loop()
    try:
        jobs = [
            loop.run_in_executor(pool, partial(_abep_point, pc, base.derive(i), m))
            for i, pc in enumerate(points)
            for m in cfg.modulations
        ]
        estimates = await asyncio.gather(*jobs)
    finally:
        if owned:
            pool.shutdown(wait=True)

    rows: List[ResultRow] = []
    it = iter(estimates)
    for x in xs:
        for m in cfg.modulations:
            est = next(it)
            log.info("sweep.point", x=x, M=m, abep_sim=est.abep_mc, abep_theory=est.abep_theory_mean, bits=est.bits)
            for metric, value in (
                (ResultMetric.ABEP_THEORY, est.abep_theory_mean),
                (ResultMetric.ABEP_SIM, est.abep_mc),
                (ResultMetric.STDERR, est.stderr),
            ):
                # n behind the binomial stderr is the bit count, not the realization count
                rows.append(
                    ResultRow(scenario=cfg.scenario, x=x, modulation=m, metric=metric, value=value, trials=est.bits, seed=cfg.seed)
                )
    log.info("sweep.done", scenario=cfg.scenario.value, rows=len(rows))
    return rows


def run_abep_sweep(cfg: SweepConfig, executor: Optional[Executor] = None) -> List[ResultRow]:
    return asyncio.run(run_abep_sweep_async(cfg, executor))


def mapping_plan(cfg: SweepConfig, m: int) -> MappingPlan:
    try:
        return MappingPlan(
            elements=cfg.elements,
            bits_per_symbol=int(math.log2(m)),
            module_side=cfg.qr.grid_side,
            block_count=resolve_block_count(cfg),
            obstruction_side=cfg.obstruction_side,
        )
    except ValidationError as e:
        raise DimensionError(f"QR grid of side {cfg.qr.grid_side} does not map onto {cfg.elements} elements: {e}") from e


def _qr_trial(
    cfg: SweepConfig,
    plan: MappingPlan,
    c: Constellation,
    original: ModuleMatrix,
    frames: List[ThetaFrame],
    mask: np.ndarray,
    stream: RandomStream,
) -> Tuple[bool, bool, ModuleMatrix]:
    """One realization: show every frame, detect, reassemble, try to decode."""
    groups = cfg.groups
    width = cfg.elements // groups
    theta = np.stack([f.theta for f in frames])
    indices = np.stack([f.indices for f in frames])
    decided = []
    for gi in range(groups):
        gs = stream.derive("group", gi) if groups > 1 else stream
        link = realize_link(gs, (width, cfg.n_tx, cfg.n_rx), cfg.rician, cfg.path_loss, cfg.noise, plan.block_count)
        # block mode runs with a single group, where cols spans every slot
        cols = slice(gi * width, (gi + 1) * width)
        sub = [ThetaFrame(theta=t, indices=i) for t, i in zip(theta[:, cols], indices[:, cols])]
        report = detect(link, transmit(link, sub, mask[cols], gs.derive("noise")), c)
        decided.append(report.theta_hat_indices)
    recovered = frame_to_modules(np.concatenate(decided, axis=1), plan, c)
    result = qr_decode(recovered, cfg.qr.border)
    payload = cfg.payload.encode("utf-8")
    recognized = result.success and result.payload == payload
    if not recognized:
        log.debug("qr.trial_failed", reason=result.error_message or "payload mismatch")
    return recovered.equals(original), recognized, recovered


def _qr_point(cfg: SweepConfig, m: int, stream: RandomStream) -> Tuple[int, int, ModuleMatrix, ModuleMatrix, bool]:
    plan = mapping_plan(cfg, m)
    c = Constellation(m)
    original = qr_encode(cfg.payload, cfg.qr)
    frames = modules_to_frame(original, plan, c)
    mask = obstruction_mask(plan)
    recovered_count = recognized_count = 0
    first: Optional[Tuple[ModuleMatrix, bool]] = None
    for t in range(cfg.trials):
        ok, recog, recovered = _qr_trial(cfg, plan, c, original, frames, mask, stream.derive(t))
        recovered_count += ok
        recognized_count += recog
        if first is None:
            first = (recovered, recog)
    assert first is not None
    return recovered_count, recognized_count, original, first[0], first[1]


def bitmap_name(scenario: Scenario, x: float, m: int, kind: str) -> str:
    return f"{scenario.value}_M{m}_x{x:g}_{kind}.pbm"


def write_bitmaps(bitmaps: List[SampleBitmap], scenario: Scenario, directory: str) -> List[Path]:
    out: List[Path] = []
    root = Path(directory)
    for b in bitmaps:
        tag = "recognizable" if b.recognizable else "unrecognizable"
        out.append(b.original.save(root / bitmap_name(scenario, b.x, b.modulation, "original"), comment="original"))
        out.append(b.recovered.save(root / bitmap_name(scenario, b.x, b.modulation, f"recovered_{tag}"), comment=f"recovered {tag}"))
    log.info("bitmaps.written", directory=str(root), files=len(out))
    return out


async def run_qr_experiment_async(cfg: SweepConfig, executor: Optional[Executor] = None) -> QrExperiment:
    if cfg.scenario not in QR_SCENARIOS:
        raise ConfigError(f"run_qr_experiment needs a QR scenario, got {cfg.scenario.value}")
    xs = cfg.sweep_values()
    points = [point_config(cfg, x) for x in xs]
    # geometry problems surface before any work is scheduled
    for pc in points:
        for m in cfg.modulations:
            mapping_plan(pc, m)
    qr_encode(cfg.payload, cfg.qr)
    base = _scenario_stream(cfg)
    log.info("sweep.start", scenario=cfg.scenario.value, points=len(xs), modulations=cfg.modulations, trials=cfg.trials)
    pool, owned = _executor(executor)
    loop = asyncio.get_running_loop()
    try:
        jobs = [
            loop.run_in_executor(pool, partial(_qr_point, pc, m, base.derive(i, m)))
            for i, pc in enumerate(points)
            for m in cfg.modulations
        ]
        outcomes = await asyncio.gather(*jobs)
    finally:
        if owned:
            pool.shutdown(wait=True)

    rows: List[ResultRow] = []
    bitmaps: List[SampleBitmap] = []
    it = iter(outcomes)
    for x in xs:
        for m in cfg.modulations:
            recovered, recognized, original, sample, recognizable = next(it)
            p_rec, p_recog = recovered / cfg.trials, recognized / cfg.trials
            log.info("sweep.point", x=x, M=m, recovery_prob=p_rec, recognition_prob=p_recog)
            for metric, value in ((ResultMetric.RECOVERY_PROB, p_rec), (ResultMetric.RECOGNITION_PROB, p_recog)):
                rows.append(
                    ResultRow(scenario=cfg.scenario, x=x, modulation=m, metric=metric, value=value, trials=cfg.trials, seed=cfg.seed)
                )
            bitmaps.append(
                SampleBitmap(x=x, modulation=m, original=original, recovered=sample, recognizable=recognizable)
            )
    result = QrExperiment(rows=rows, bitmaps=bitmaps)
    if cfg.bitmap_dir:
        result.written = write_bitmaps(bitmaps, cfg.scenario, cfg.bitmap_dir)
    log.info("sweep.done", scenario=cfg.scenario.value, rows=len(rows))
    return result


def run_qr_experiment(cfg: SweepConfig, executor: Optional[Executor] = None) -> QrExperiment:
    return asyncio.run(run_qr_experiment_async(cfg, executor))


async def run_sweep_async(cfg: SweepConfig, executor: Optional[Executor] = None) -> QrExperiment:
    """Dispatch on scenario; ABEP sweeps come back with no bitmaps."""
    if cfg.scenario.is_qr:
        return await run_qr_experiment_async(cfg, executor)
    return QrExperiment(rows=await run_abep_sweep_async(cfg, executor))

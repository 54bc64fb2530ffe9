import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..channel import draw_channel_pair
from ..core.errors import DimensionError
from ..mathcore import RandomStream
from ..models import AbepEstimate, NoiseModel, PathLossModel, RicianParams
from ..modem import Constellation, ThetaFrame, element_blocks
from .link import LinkState, build_link, design_beamformer, detect, transmit
from .theory import abep_theoretical, asep_theoretical

Dims = Tuple[int, int, int]


@dataclass(frozen=True)
class TrialOutcome:
    bits: int
    bit_errors: int
    symbols: int
    symbol_errors: int
    abep_theory: float
    asep_theory: float = 0.0


def realize_link(
    stream: RandomStream,
    dims: Dims,
    ric: RicianParams,
    pl: PathLossModel,
    noise: NoiseModel,
    block_count: Optional[int] = None,
) -> LinkState:
    """Draw both channels, steer the beamformer and build the ZF link."""
    ch = draw_channel_pair(stream.derive("channel"), dims, ric, pl)
    return build_link(ch, design_beamformer(ch), noise, block_count=block_count)


def random_frames(stream: RandomStream, c: Constellation, elements: int, frames: int, block_count: Optional[int] = None) -> List[ThetaFrame]:
    assign = element_blocks(elements, block_count)
    slots = int(assign.max()) + 1
    idx = stream.generator.integers(0, c.M, size=(frames, slots))
    return [ThetaFrame(theta=c.points[row][assign], indices=row) for row in idx]


def _group_dims(dims: Dims, groups: int) -> Dims:
    elements, n_tx, n_rx = dims
    if groups < 1 or elements % groups:
        raise DimensionError(f"groups={groups} must divide elements={elements}")
    return elements // groups, n_tx, n_rx


def run_trial(
    stream: RandomStream,
    dims: Dims,
    ric: RicianParams,
    pl: PathLossModel,
    noise: NoiseModel,
    c: Constellation,
    frames: int = 1,
    block_count: Optional[int] = None,
    groups: int = 1,
    with_asep: bool = False,
) -> TrialOutcome:
    """One channel realization: random frames through every frequency group."""
    sub = _group_dims(dims, groups)
    k = c.bits_per_symbol
    bits = bit_errors = symbols = symbol_errors = 0
    c_all = []
    for gi in range(groups):
        gs = stream.derive("group", gi) if groups > 1 else stream
        link = realize_link(gs, sub, ric, pl, noise, block_count=block_count)
        sent = random_frames(gs.derive("symbols"), c, link.elements, frames, block_count)
        report = detect(link, transmit(link, sent, None, gs.derive("noise")), c)
        bits += report.symbols * k
        bit_errors += report.bit_errors
        symbols += report.symbols
        symbol_errors += report.symbol_errors
        c_all.append(link.C_diag)
    c_diag = np.concatenate(c_all)
    theory = math.fsum(np.atleast_1d(abep_theoretical(c_diag, c.M))) / c_diag.size
    asep = math.fsum(asep_theoretical(x, c.M) for x in c_diag) / c_diag.size if with_asep else 0.0
    return TrialOutcome(bits, bit_errors, symbols, symbol_errors, theory, asep)


def aggregate(outcomes: List[TrialOutcome]) -> AbepEstimate:
    """Order-preserving reduction: integer counts summed, float means via fsum."""
    bits = sum(o.bits for o in outcomes)
    bit_errors = sum(o.bit_errors for o in outcomes)
    symbols = sum(o.symbols for o in outcomes)
    symbol_errors = sum(o.symbol_errors for o in outcomes)
    p = bit_errors / bits
    n = len(outcomes)
    return AbepEstimate(
        abep_mc=p,
        abep_theory_mean=min(1.0, math.fsum(o.abep_theory for o in outcomes) / n),
        stderr=math.sqrt(p * (1.0 - p) / bits),
        asep_mc=symbol_errors / symbols,
        asep_theory_mean=min(1.0, math.fsum(o.asep_theory for o in outcomes) / n),
        bits=bits,
        bit_errors=bit_errors,
        symbols=symbols,
        symbol_errors=symbol_errors,
    )


def simulate_abep(
    dims: Dims,
    ric: RicianParams,
    pl: PathLossModel,
    noise: NoiseModel,
    m: int,
    trials: int,
    *,
    seed: int = 1,
    stream: Optional[RandomStream] = None,
    frames: int = 1,
    block_count: Optional[int] = None,
    groups: int = 1,
    with_asep: bool = False,
    executor: Optional[Executor] = None,
) -> AbepEstimate:
    """Monte-Carlo ABEP next to the mean closed form over the same realizations.

    Trial ``t`` draws from ``stream.derive(t)``; the channel sub-stream does not
    depend on ``m``, so different modulation orders see identical channels.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if frames < 1:
        raise ValueError("frames must be >= 1")
    base = stream if stream is not None else RandomStream(seed)
    c = Constellation(m)

    def one(t: int) -> TrialOutcome:
        return run_trial(base.derive(t), dims, ric, pl, noise, c, frames, block_count, groups, with_asep)

    if executor is None:
        outcomes = [one(t) for t in range(trials)]
    else:
        outcomes = list(executor.map(one, range(trials)))
    return aggregate(outcomes)

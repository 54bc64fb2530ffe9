from .results import CSV_HEADER, emit_results, read_results
from .sweeps import (
    QrExperiment,
    SampleBitmap,
    mapping_plan,
    point_config,
    resolve_block_count,
    run_abep_sweep,
    run_abep_sweep_async,
    run_qr_experiment,
    run_qr_experiment_async,
    run_sweep_async,
    write_bitmaps,
)

__all__ = [
    "CSV_HEADER",
    "QrExperiment",
    "SampleBitmap",
    "emit_results",
    "mapping_plan",
    "point_config",
    "read_results",
    "resolve_block_count",
    "run_abep_sweep",
    "run_abep_sweep_async",
    "run_qr_experiment",
    "run_qr_experiment_async",
    "run_sweep_async",
    "write_bitmaps",
]

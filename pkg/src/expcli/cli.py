import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from ..core.config import Settings, load_config, merge_overrides
from ..core.errors import ConfigError, IrsQrError
from ..core.logs import configure_logging, get_logger
from ..models import EcLevel, OutputFormat, QrSpec, Scenario, SweepConfig
from ..modem import ModuleMatrix
from ..qrcodec import add_border, encode_symbol, qr_decode
from .results import emit_results
from .sweeps import run_abep_sweep, run_qr_experiment

log = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2

# 38 x 38 BPSK surface read by 38 antennas; 19 x 19 16-PSK surface read by 19
QR_PRESETS: Dict[int, Dict[str, Any]] = {
    2: {
        "elements": 38 * 38,
        "n_tx": 38,
        "n_rx": 38,
        "qr": {"version": 5, "ec_level": "H", "border": 1},
        "noise": {"gamma_db": 15.0},
        "obstruction_side": 10,
    },
    16: {
        "elements": 19 * 19,
        "n_tx": 19,
        "n_rx": 19,
        "qr": {"version": 1, "ec_level": "H", "border": 0},
        "noise": {"gamma_db": 30.0},
        "obstruction_side": 5,
        "payload": "IRS-QR",
    },
}

_SWEPT_FLAGS = {
    "gamma_db": ("snr_db", "gamma_db_range"),
    "n_tx": ("ntx", "n_tx_range"),
    "kappa": ("kappa", "kappa_range"),
    "obstruction": ("obstruction", "obstruction_range"),
}


def parse_range(text: str, cast: Callable[[str], Any] = float) -> List[Any]:
    """``a:b:step`` (inclusive), ``a:b`` (step 1), ``a,b,c`` or a single value."""
    text = text.strip()
    if "," in text:
        return [cast(t) for t in text.split(",") if t.strip()]
    parts = text.split(":")
    if len(parts) == 1:
        return [cast(parts[0])]
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected a:b:step, got {text!r}")
    start, stop = float(parts[0]), float(parts[1])
    step = float(parts[2]) if len(parts) == 3 else 1.0
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"range {text!r} must have step > 0 and b >= a")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [cast(round(start + i * step, 12)) for i in range(count)]


def _int_range(text: str) -> List[int]:
    return parse_range(text, int)


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON file mirroring SweepConfig")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--elements", type=int)
    p.add_argument("--ntx", type=_int_range)
    p.add_argument("--nrx", type=int)
    p.add_argument("--mod", type=int, action="append", choices=[2, 4, 8, 16, 32], dest="mod")
    p.add_argument("--kappa", type=parse_range)
    p.add_argument("--snr-db", type=parse_range, dest="snr_db")
    p.add_argument("--noise-mode", choices=["physical", "target_snr"], dest="noise_mode")
    p.add_argument("--tx-power-dbm", type=float, dest="tx_power_dbm")
    p.add_argument("--trials", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--groups", type=int)
    p.add_argument("--blocks", type=int, dest="block_count")
    p.add_argument("--out")
    p.add_argument("--format", choices=[f.value for f in OutputFormat], dest="output_format")
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irsqr", description="IRS microwave QR link simulator")
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--log-json", action="store_true", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    abep = sub.add_parser("abep", help="ABEP sweeps over SNR, TX count or Rician factor")
    _add_sweep_flags(abep)

    qr = sub.add_parser("qr", help="QR recovery and recognition experiments")
    _add_sweep_flags(qr)
    qr.add_argument("--version", type=int, dest="qr_version")
    qr.add_argument("--ec", choices=[e.value for e in EcLevel])
    qr.add_argument("--mask", type=int)
    qr.add_argument("--border", type=int)
    qr.add_argument("--payload")
    qr.add_argument("--obstruction", type=_int_range)
    qr.add_argument("--bitmap-dir", dest="bitmap_dir")

    enc = sub.add_parser("encode", help="encode a payload into a PBM module grid")
    enc.add_argument("--payload", required=True)
    enc.add_argument("--version", type=int, default=5, dest="qr_version")
    enc.add_argument("--ec", choices=[e.value for e in EcLevel], default="H")
    enc.add_argument("--mask", type=int)
    enc.add_argument("--border", type=int, default=0)
    enc.add_argument("--out", required=True)

    dec = sub.add_parser("decode", help="decode a PBM module grid")
    dec.add_argument("path")
    dec.add_argument("--border", type=int, default=0)
    return parser


def _base_config(args: argparse.Namespace, file_cfg: Dict[str, Any]) -> Dict[str, Any]:
    if args.command != "qr":
        return {}
    mods = args.mod or file_cfg.get("modulations") or [2]
    preset = QR_PRESETS.get(16 if mods[0] == 16 else 2, {})
    return merge_overrides({"scenario": Scenario.QR_OBSTRUCTION.value, "modulations": [mods[0]]}, preset)


def sweep_config_from_args(args: argparse.Namespace, settings: Settings) -> SweepConfig:
    """Defaults (and QR presets), then the JSON config file, then CLI flags."""
    path = args.config or settings.config_path
    file_cfg = load_config(path) if path else {}
    merged = merge_overrides(_base_config(args, file_cfg), file_cfg)
    scenario = Scenario(args.scenario or merged.get("scenario") or Scenario.ABEP_SNR.value)
    if scenario.is_qr != (args.command == "qr"):
        raise ConfigError(f"scenario {scenario.value} does not belong to the '{args.command}' command")

    flags: Dict[str, Any] = {
        "scenario": scenario.value,
        "elements": args.elements,
        "n_rx": args.nrx,
        "modulations": args.mod,
        "trials": args.trials,
        "frames": args.frames,
        "seed": args.seed,
        "groups": args.groups,
        "block_count": args.block_count,
        "output": args.out,
        "output_format": args.output_format,
        "noise": {"mode": args.noise_mode, "tx_power_dbm": args.tx_power_dbm},
    }
    if args.command == "qr":
        flags.update(
            payload=args.payload,
            bitmap_dir=args.bitmap_dir,
            qr={"version": args.qr_version, "ec_level": args.ec, "mask": args.mask, "border": args.border},
        )
    for var, (attr, range_key) in _SWEPT_FLAGS.items():
        values = getattr(args, attr, None)
        if values is None:
            continue
        if var == scenario.swept:
            flags[range_key] = values
        elif len(values) != 1:
            raise ConfigError(f"--{attr.replace('_', '-')} takes a single value unless {scenario.value} sweeps it")
        elif var == "gamma_db":
            flags["noise"]["gamma_db"] = values[0]
        elif var == "n_tx":
            flags["n_tx"] = values[0]
        elif var == "kappa":
            flags["rician"] = {"kappa": values[0]}
        else:
            flags["obstruction_side"] = values[0]
    return SweepConfig.model_validate(merge_overrides(merged, flags))


def _run_sweep(args: argparse.Namespace, settings: Settings) -> int:
    cfg = sweep_config_from_args(args, settings)
    with ThreadPoolExecutor(max_workers=max(1, args.threads or settings.threads)) as pool:
        if cfg.scenario.is_qr:
            rows = run_qr_experiment(cfg, pool).rows
        else:
            rows = run_abep_sweep(cfg, pool)
    if cfg.output:
        emit_results(rows, cfg.output, cfg.output_format)
    else:
        for r in rows:
            print(f"{r.scenario.value},{r.x!r},{r.modulation},{r.metric.value},{r.value!r},{r.trials},{r.seed}")
    return EXIT_OK


def _encode(args: argparse.Namespace) -> int:
    spec = QrSpec(version=args.qr_version, ec_level=args.ec, mask=args.mask, border=args.border)
    symbol, mask = encode_symbol(args.payload, spec.version, spec.ec_level, spec.mask)
    m = add_border(symbol, spec.border)
    path = m.save(args.out, comment=f"version {spec.version}-{spec.ec_level.value} mask {mask}")
    log.info("qr.encoded", path=str(path), side=m.n, mask=mask)
    return EXIT_OK


def _decode(args: argparse.Namespace) -> int:
    result = qr_decode(ModuleMatrix.load(args.path), args.border)
    if not result.success:
        log.error("qr.decode_failed", path=args.path, reason=result.error_message)
        return EXIT_ERROR
    assert result.payload is not None
    print(result.payload.decode("utf-8", errors="replace"))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings.from_env()
    configure_logging(args.log_level or settings.log_level, settings.log_json if args.log_json is None else args.log_json)
    try:
        if args.command == "encode":
            return _encode(args)
        if args.command == "decode":
            return _decode(args)
        return _run_sweep(args, settings)
    except (ValidationError, ConfigError) as e:
        log.error("config.invalid", error=str(e))
        return EXIT_CONFIG
    except (IrsQrError, OSError, ValueError) as e:
        log.error("run.failed", error=str(e), kind=type(e).__name__)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

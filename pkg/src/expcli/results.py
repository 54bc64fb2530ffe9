import csv
import json
from pathlib import Path
from typing import List, Optional, Sequence, Union

from ..core.logs import get_logger
from ..models import OutputFormat, ResultRow

log = get_logger(__name__)

CSV_HEADER = ("scenario", "x", "M", "metric", "value", "trials", "seed")


def _record(row: ResultRow) -> dict:
    return {
        "scenario": row.scenario.value,
        "x": float(row.x),
        "M": row.modulation,
        "metric": row.metric.value,
        "value": float(row.value),
        "trials": row.trials,
        "seed": row.seed,
    }


def _row(record: dict) -> ResultRow:
    return ResultRow(
        scenario=record["scenario"],
        x=float(record["x"]),
        modulation=int(record["M"]),
        metric=record["metric"],
        value=float(record["value"]),
        trials=int(record["trials"]),
        seed=int(record["seed"]),
    )


def infer_format(path: Union[str, Path]) -> OutputFormat:
    return OutputFormat.JSONL if Path(path).suffix.lower() in (".jsonl", ".json") else OutputFormat.CSV


def emit_results(
    rows: Sequence[ResultRow],
    path: Union[str, Path],
    fmt: Optional[OutputFormat] = None,
) -> Path:
    """Write one record per row; CSV uses CRLF line ends and minimal quoting."""
    if not rows:
        raise ValueError("no result rows to write")
    p = Path(path)
    fmt = OutputFormat(fmt) if fmt is not None else infer_format(p)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8", newline="") as f:
        if fmt == OutputFormat.CSV:
            writer = csv.writer(f, lineterminator="\r\n")
            writer.writerow(CSV_HEADER)
            for r in rows:
                rec = _record(r)
                writer.writerow([rec[k] if not isinstance(rec[k], float) else repr(rec[k]) for k in CSV_HEADER])
        else:
            for r in rows:
                f.write(json.dumps(_record(r)) + "\n")
    log.info("results.written", path=str(p), rows=len(rows), format=fmt.value)
    return p


def read_results(path: Union[str, Path], fmt: Optional[OutputFormat] = None) -> List[ResultRow]:
    p = Path(path)
    fmt = OutputFormat(fmt) if fmt is not None else infer_format(p)
    with p.open("r", encoding="utf-8", newline="") as f:
        if fmt == OutputFormat.CSV:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {reader.fieldnames}")
            return [_row(rec) for rec in reader]
        return [_row(json.loads(line)) for line in f if line.strip()]

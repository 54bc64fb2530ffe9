import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ..core.errors import DimensionError


@dataclass(frozen=True, eq=False)
class ModuleMatrix:
    """Square 0/1 module grid (1 = dark), row-major, the image shown on the IRS."""

    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise DimensionError(f"module matrix must be square and non-empty, got shape {c.shape}")
        if np.any((c != 0) & (c != 1)):
            raise ValueError("module values must be 0 or 1")
        c = c.astype(np.uint8)
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @classmethod
    def zeros(cls, n: int) -> "ModuleMatrix":
        return cls(np.zeros((n, n), dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    def flat(self) -> np.ndarray:
        return self.cells.ravel()

    def equals(self, other: "ModuleMatrix") -> bool:
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells))

    def differences(self, other: "ModuleMatrix") -> int:
        if self.cells.shape != other.cells.shape:
            raise DimensionError("module matrices differ in size")
        return int(np.count_nonzero(self.cells != other.cells))

    def to_pbm(self, comment: str = "") -> str:
        lines = ["P1"]
        if comment:
            lines.append(f"# {comment}")
        lines.append(f"{self.n} {self.n}")
        lines.extend("".join("1" if v else "0" for v in row) for row in self.cells)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_pbm(cls, text: str) -> "ModuleMatrix":
        body = re.sub(r"#[^\n]*", "", text)
        m = re.match(r"\s*P1\s+(\d+)\s+(\d+)(.*)\Z", body, flags=re.DOTALL)
        if not m:
            raise ValueError("not a plain (P1) PBM bitmap")
        width, height = int(m.group(1)), int(m.group(2))
        digits = re.sub(r"\s+", "", m.group(3))
        if len(digits) != width * height or set(digits) - {"0", "1"}:
            raise ValueError(f"PBM raster does not hold {width}x{height} binary pixels")
        arr = np.frombuffer(digits.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls(arr.reshape(height, width))

    def save(self, path: Union[str, Path], comment: str = "") -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(self.to_pbm(comment), encoding="ascii", newline="\n")
        return p

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ModuleMatrix":
        return cls.from_pbm(Path(path).read_text(encoding="ascii"))

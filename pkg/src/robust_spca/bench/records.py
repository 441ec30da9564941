"""Benchmark records and their CSV serialization."""

import csv
import math
from dataclasses import dataclass, fields

from ..errors import FormatError

COLUMNS = (
    "algo",
    "form",
    "n",
    "d",
    "k",
    "beta",
    "lambda",
    "delta",
    "s",
    "adversary",
    "adv_b",
    "adv_r",
    "trial",
    "seed",
    "corr2",
    "runtime_ms",
    "error",
)
_INT = {"n", "d", "k", "s", "adv_r", "trial", "seed"}
_FLOAT = {"beta", "lambda", "delta", "adv_b", "corr2", "runtime_ms"}


@dataclass(frozen=True)
class BenchRecord:
    algo: str
    form: str
    n: int
    d: int
    k: int
    beta: float
    lam: float
    delta: float
    s: int
    adversary: str
    adv_b: float
    adv_r: int
    trial: int
    seed: int
    corr2: float
    runtime_ms: float
    error: str = ""

    def row(self):
        out = []
        for col, f in zip(COLUMNS, fields(self)):
            out.append(_format(col, getattr(self, f.name)))
        return out

    def value(self, name):
        """Field lookup by CSV column name."""
        return self.lam if name == "lambda" else getattr(self, name)


def _format(col, value):
    if col in _FLOAT:
        value = float(value)
        return "nan" if math.isnan(value) else f"{value:.17g}"
    if col in _INT:
        return str(int(value))
    return str(value)


def write_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records:
            w.writerow(r.row())


def read_csv(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise FormatError(f"line 1: expected header {','.join(COLUMNS)}")
        for row in reader:
            line = reader.line_num
            if len(row) != len(COLUMNS):
                raise FormatError(f"line {line}: expected {len(COLUMNS)} fields, got {len(row)}")
            vals = []
            for col, raw in zip(COLUMNS, row):
                try:
                    if col in _INT:
                        vals.append(int(raw))
                    elif col in _FLOAT:
                        vals.append(float(raw))
                    else:
                        vals.append(raw)
                except ValueError:
                    raise FormatError(f"line {line}: bad value {raw!r} for column {col}") from None
            out.append(BenchRecord(*vals))
    return out

"""Signals, dataset ingestion and the least-squares line fit.

Line fits over any sample range ``i..j`` (inclusive, 0-based) are answered in
O(1) from :class:`PrefixSums`.  The arithmetic in :func:`fit_from_sums` is
mirrored operation-for-operation by the compiled kernels so that both
backends agree bit-for-bit.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np


class TraceParseError(ValueError):
    """Raised when a trace file cannot be parsed."""

    def __init__(self, path, row: int, column: Optional[int], message: str):
        loc = f"row {row}" if column is None else f"row {row}, column {column}"
        super().__init__(f"{path}: {loc}: {message}")
        self.path = str(path)
        self.row = row
        self.column = column


@dataclass(frozen=True, eq=False)
class Signal:
    """A finite sampled single-variable signal.

    ``times`` must be strictly increasing.  A signal of one sample has null
    duration.
    """

    times: np.ndarray
    values: np.ndarray
    id: str = ""
    label: Optional[str] = None

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size == 0:
            raise ValueError("a signal needs at least one sample")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("times and values must be finite")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, values, period: float = 1.0, id: str = "", label=None) -> "Signal":
        """Build a signal sampled every ``period`` seconds starting at 0."""
        if not period > 0:
            raise ValueError("period must be positive")
        values = np.asarray(values, dtype=np.float64)
        return cls(np.arange(values.size, dtype=np.float64) * period, values, id, label)

    @classmethod
    def from_samples(cls, samples, id: str = "") -> "Signal":
        samples = list(samples)
        return cls(
            np.array([s[0] for s in samples], dtype=np.float64),
            np.array([s[1] for s in samples], dtype=np.float64),
            id,
        )

    def __len__(self) -> int:
        return self.times.size

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.values.tolist()))

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @cached_property
    def prefix_sums(self) -> "PrefixSums":
        return PrefixSums.from_signal(self)


@dataclass(frozen=True)
class LineFit:
    """Least-squares line over a sample range.

    ``b`` is the fitted value at the range's first timestamp, ``d`` the range
    duration; ``mse`` is the mean squared residual over the range.
    """

    a: float
    b: float
    d: float
    mse: float


@dataclass(frozen=True, eq=False)
class PrefixSums:
    """Cumulative sums of 1, t, t^2, v, v^2 and t*v with a leading zero.

    Times are shifted by the first timestamp and values by their global mean
    before accumulating, which keeps the centered range statistics well
    conditioned.  ``sums[:, k]`` holds the totals over samples ``0..k-1``.
    """

    t: np.ndarray
    v: np.ndarray
    t_shift: float
    v_shift: float
    sums: np.ndarray = field(repr=False)

    @classmethod
    def from_signal(cls, sig: Signal) -> "PrefixSums":
        t_shift = float(sig.times[0])
        v_shift = float(np.mean(sig.values))
        tc = sig.times - t_shift
        vc = sig.values - v_shift
        n = tc.size
        sums = np.zeros((6, n + 1), dtype=np.float64)
        np.cumsum(np.ones(n), out=sums[0, 1:])
        np.cumsum(tc, out=sums[1, 1:])
        np.cumsum(tc * tc, out=sums[2, 1:])
        np.cumsum(vc, out=sums[3, 1:])
        np.cumsum(vc * vc, out=sums[4, 1:])
        np.cumsum(tc * vc, out=sums[5, 1:])
        sums.setflags(write=False)
        return cls(sig.times, sig.values, t_shift, v_shift, sums)

    def __len__(self) -> int:
        return self.t.size

    def range_sums(self, i: int, j: int) -> tuple[float, ...]:
        """(n, St, Stt, Sv, Svv, Stv) over samples ``i..j`` in shifted units."""
        s = self.sums
        return tuple(float(s[k, j + 1] - s[k, i]) for k in range(6))


def fit_from_sums(n, st, stt, sv, svv, stv, tc_i, v_i, v_shift):
    """OLS line from centered range sums.

    Returns ``(a, b, mse, sxx, sxy, syy, tbar, vbar)`` where ``tbar`` is the
    mean time relative to the range start and ``vbar`` the mean value in raw
    units; the extra terms feed the constrained fit.
    """
    if n == 1:
        return 0.0, v_i, 0.0, 0.0, 0.0, 0.0, 0.0, v_i
    mt = st / n
    mv = sv / n
    sxx = stt - st * mt
    sxy = stv - st * mv
    syy = svv - sv * mv
    a = sxy / sxx if sxx > 0.0 else 0.0
    tbar = mt - tc_i
    vbar = mv + v_shift
    b = vbar - a * tbar
    if n == 2:
        mse = 0.0
    else:
        mse = (syy - a * sxy) / n
        if mse < 0.0:
            mse = 0.0
    return a, b, mse, sxx, sxy, syy, tbar, vbar


def linefit(sig: Signal, i: int, j: int, ps: Optional[PrefixSums] = None) -> LineFit:
    """Least-squares line over samples ``i..j`` of ``sig`` (0-based, inclusive)."""
    if not 0 <= i <= j < len(sig):
        raise IndexError(f"invalid range [{i}, {j}] for a signal of {len(sig)} samples")
    ps = sig.prefix_sums if ps is None else ps
    n, st, stt, sv, svv, stv = ps.range_sums(i, j)
    a, b, mse, *_ = fit_from_sums(
        n, st, stt, sv, svv, stv,
        float(ps.t[i] - ps.t_shift), float(ps.v[i]), ps.v_shift,
    )
    return LineFit(a, b, float(ps.t[j] - ps.t[i]), mse)


# -- ingestion ---------------------------------------------------------------

_WS = re.compile(r"[\s,]+")


def _parse_float(cell: str, path, row: int, col: int) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise TraceParseError(path, row, col, f"non-numeric cell {cell!r}") from None
    if not math.isfinite(x):
        raise TraceParseError(path, row, col, f"non-finite value {cell!r}")
    return x


def _read_ucr(path: Path, period: float, labels) -> list[Signal]:
    signals = []
    with open(path) as fh:
        for row, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = _WS.split(line)
            label_cell = cells[0]
            label_value = _parse_float(label_cell, path, row, 1)
            label = str(int(label_value)) if label_value.is_integer() else label_cell
            if len(cells) < 2:
                raise TraceParseError(path, row, None, "row has a label but no values")
            values = [_parse_float(c, path, row, col) for col, c in enumerate(cells[1:], start=2)]
            if labels is not None and label not in labels:
                continue
            signals.append(Signal.uniform(values, period, id=f"{path.stem}:{row}", label=label))
    return signals


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_csv(path: Path, period: float) -> list[Signal]:
    signals = []
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    for row, cells in enumerate(rows, start=1):
        cells = [c.strip() for c in cells]
        if row == 1 and not any(_is_number(c) for c in cells):
            continue  # header
        values = [_parse_float(c, path, row, col) for col, c in enumerate(cells, start=1)]
        signals.append(Signal.uniform(values, period, id=f"{path.stem}:{row}"))
    return signals


def load_traces(path, format: str = "ucr-tsv", period: float = 1.0, labels=None) -> list[Signal]:
    """Load one signal per row from a UCR-style TSV or a CSV file.

    UCR rows are ``label v1 v2 ...`` separated by tabs or whitespace; the
    label is kept in :attr:`Signal.label` and may be used to select classes
    via ``labels``.  CSV rows hold values only, with an optional header row.
    Timestamps are synthesized as ``k * period``.
    """
    path = Path(path)
    if not period > 0:
        raise ValueError("period must be positive")
    if format == "ucr-tsv":
        labels = None if labels is None else {str(x) for x in labels}
        signals = _read_ucr(path, period, labels)
    elif format == "csv":
        signals = _read_csv(path, period)
    else:
        raise ValueError(f"unknown trace format {format!r}")
    if not signals:
        raise TraceParseError(path, 0, None, "no traces found")
    return signals

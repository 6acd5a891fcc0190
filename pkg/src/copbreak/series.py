"""Quarterly level series ingestion, growth rates, marginal descriptives and ACF."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

_QUARTER_RE = re.compile(r"^\s*(\d{4})Q([1-4])\s*$")

STAT_LABELS = ("Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max.")


class InputError(ValueError):
    """Malformed or unusable input data."""


@dataclass(frozen=True, order=True)
class Quarter:
    year: int
    q: int

    def __post_init__(self):
        if not 1 <= self.q <= 4:
            raise ValueError(f"quarter must be in 1..4, got {self.q}")

    @classmethod
    def parse(cls, text: str) -> "Quarter":
        m = _QUARTER_RE.match(text)
        if m is None:
            raise ValueError(f"malformed quarter {text!r}, expected YYYYQn")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.year}Q{self.q}"

    def ordinal(self) -> int:
        return self.year * 4 + (self.q - 1)

    @classmethod
    def from_ordinal(cls, k: int) -> "Quarter":
        return cls(k // 4, k % 4 + 1)

    def shift(self, n: int) -> "Quarter":
        return Quarter.from_ordinal(self.ordinal() + n)

    def next(self) -> "Quarter":
        return self.shift(1)


@dataclass(frozen=True)
class QuarterlySeries:
    start: Quarter
    values: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.values) == 0:
            raise InputError("series is empty")
        if not np.all(np.isfinite(self.values)):
            raise InputError("series contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> Quarter:
        return self.start.shift(len(self.values) - 1)


@dataclass(frozen=True)
class GrowthSeries:
    """Quarter-on-quarter growth rates.

    ``start`` is the quarter of the first growth observation, i.e. the second
    quarter of the level series it came from. ``level_base`` is the first
    quarter of that level series and anchors every observation index reported
    by the tests (index 1 = ``level_base``).
    """

    start: Quarter
    values: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.values) == 0:
            raise InputError("growth series is empty")
        if not np.all(np.isfinite(self.values)):
            raise InputError("growth series contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def level_base(self) -> Quarter:
        return self.start.shift(-1)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class MarginalTable:
    """Six summary statistics for each lag 0..max_lag."""

    lags: tuple[int, ...]
    stats: dict[str, tuple[float, ...]]
    n_obs: int

    def column(self, lag: int) -> dict[str, float]:
        k = self.lags.index(lag)
        return {name: self.stats[name][k] for name in STAT_LABELS}

    def to_dict(self) -> dict:
        return {
            "n_obs": self.n_obs,
            "lags": [-k for k in self.lags],
            "stats": {name: list(self.stats[name]) for name in STAT_LABELS},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self, digits: int | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Lag"] + [str(-k) for k in self.lags])
        for name in STAT_LABELS:
            vals = self.stats[name]
            if digits is None:
                w.writerow([name] + [repr(float(v)) for v in vals])
            else:
                w.writerow([name] + [f"{v:.{digits}f}" for v in vals])
        return buf.getvalue()


def parse_csv(stream: TextIO | str, label: str = "") -> QuarterlySeries:
    """Read a ``date,value`` CSV of contiguous ascending quarters.

    Row numbers in error messages count the header as row 0, so the first
    data row is row 1.
    """
    text = stream if isinstance(stream, str) else stream.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty input")
    header = [h.strip().lower() for h in lines[0].split(",")]
    if header != ["date", "value"]:
        raise InputError(f"row 0: expected header 'date,value', got {lines[0]!r}")
    if len(lines) == 1:
        raise InputError("empty body: no data rows")

    start = None
    prev = None
    values = []
    for row, line in enumerate(lines[1:], start=1):
        parts = line.split(",")
        if len(parts) != 2:
            raise InputError(f"row {row}: expected 2 fields, got {len(parts)}")
        try:
            q = Quarter.parse(parts[0])
        except ValueError:
            raise InputError(f"row {row}: malformed date {parts[0].strip()!r}") from None
        try:
            v = float(parts[1])
        except ValueError:
            raise InputError(f"row {row}: non-numeric value {parts[1].strip()!r}") from None
        if not np.isfinite(v):
            raise InputError(f"row {row}: non-finite value {parts[1].strip()!r}")
        if prev is not None:
            if q == prev:
                raise InputError(f"row {row}: duplicate quarter {q}")
            if q != prev.next():
                raise InputError(f"row {row}: gap or disorder, {q} does not follow {prev}")
        else:
            start = q
        prev = q
        values.append(v)
    return QuarterlySeries(start=start, values=tuple(values), label=label)


def read_csv(path: str, label: str | None = None) -> QuarterlySeries:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh, label=path if label is None else label)


def growth_rates(s: QuarterlySeries) -> GrowthSeries:
    """Simple growth rates ``x[t] / x[t-1] - 1`` (not log differences)."""
    if len(s) < 2:
        raise InputError("need at least 2 levels to form growth rates")
    x = np.asarray(s.values, dtype=float)
    bad = np.flatnonzero(x <= 0)
    if bad.size:
        raise InputError(f"nonpositive level at {s.start.shift(int(bad[0]))}")
    g = x[1:] / x[:-1] - 1.0
    return GrowthSeries(start=s.start.next(), values=tuple(g.tolist()), label=s.label)


def descriptives(g: GrowthSeries, max_lag: int) -> MarginalTable:
    """Summary statistics of each lagged component y_{t-k}, k = 0..max_lag.

    All columns use the rows of the depth ``max_lag + 1`` embedding, so every
    lag is summarised over the same number of observations. Quartiles use
    linear interpolation between order statistics.
    """
    if max_lag < 0:
        raise InputError("max_lag must be >= 0")
    y = g.array()
    n = len(y)
    if n <= max_lag + 1:
        raise InputError(f"max_lag={max_lag} too large for series of length {n}")
    m = n - max_lag
    cols = [y[max_lag - k: max_lag - k + m] for k in range(max_lag + 1)]
    stats = {name: [] for name in STAT_LABELS}
    for c in cols:
        q1, med, q3 = np.quantile(c, [0.25, 0.5, 0.75])
        stats["Min."].append(float(c.min()))
        stats["1st Qu."].append(float(q1))
        stats["Median"].append(float(med))
        stats["Mean"].append(float(c.mean()))
        stats["3rd Qu."].append(float(q3))
        stats["Max."].append(float(c.max()))
    return MarginalTable(
        lags=tuple(range(max_lag + 1)),
        stats={k: tuple(v) for k, v in stats.items()},
        n_obs=m,
    )


def acf(g: GrowthSeries | Iterable[float], max_lag: int) -> list[float]:
    """Sample autocorrelations rho(1..max_lag), mean-centred, biased (1/n) autocovariances."""
    y = g.array() if isinstance(g, GrowthSeries) else np.asarray(list(g), dtype=float)
    n = len(y)
    if n <= max_lag:
        raise InputError(f"series length {n} must exceed max_lag={max_lag}")
    z = y - y.mean()
    c0 = float(z @ z)
    if c0 <= 0.0:
        raise InputError("zero-variance series has no autocorrelation")
    return [float(z[k:] @ z[:-k]) / c0 for k in range(1, max_lag + 1)]


def index_to_quarter(i: int, base: Quarter) -> Quarter:
    """Quarter of observation ``i`` on a timeline where index 1 is ``base``."""
    return base.shift(i - 1)


def quarter_to_index(q: Quarter, base: Quarter) -> int:
    return q.ordinal() - base.ordinal() + 1

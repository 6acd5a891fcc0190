"""Lag embedding, rank pseudo-observations and empirical copula evaluation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .series import GrowthSeries, InputError

MIN_D, MAX_D = 2, 10
TIE_RULES = ("average", "min", "max", "ordinal")


@dataclass(frozen=True, eq=False)
class LagMatrix:
    """Rows ``(y_t, y_{t-1}, ..., y_{t-d+1})``, zero lag first.

    ``row_base_index`` is the level-timeline index of the ``y_t`` coordinate of
    the first row; row ``r`` (1-based) therefore sits at level index
    ``row_base_index + r - 1``.
    """

    rows: np.ndarray
    row_base_index: int = 1

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2:
            raise InputError("lag matrix must be 2-dimensional")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def level_index(self, r: int) -> int:
        """Level-timeline index of 1-based row ``r``."""
        return self.row_base_index + r - 1

    def take(self, order) -> "LagMatrix":
        return LagMatrix(self.rows[np.asarray(order)], self.row_base_index)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index"] + [f"lag{j}" for j in range(self.d)])
        for r, row in enumerate(self.rows, start=1):
            w.writerow([self.level_index(r)] + [repr(float(v)) for v in row])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class PseudoSample:
    points: np.ndarray
    tie_rule: str = "average"

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def embed(g: GrowthSeries, d: int) -> LagMatrix:
    """Depth-``d`` sliding lag embedding of a growth series."""
    if not MIN_D <= d <= MAX_D:
        raise InputError(f"embedding dimension d={d} outside [{MIN_D}, {MAX_D}]")
    y = g.array()
    if len(y) < d + 10:
        raise InputError(f"series of length {len(y)} too short for d={d} (need >= {d + 10})")
    n = len(y) - d + 1
    rows = np.column_stack([y[d - 1 - j: d - 1 - j + n] for j in range(d)])
    # growth value k (0-based) lives at level index k + 2
    return LagMatrix(rows, row_base_index=d + 1)


def ranks(column, tie_rule: str = "average") -> np.ndarray:
    """Ranks 1..m; ties get midranks under the default rule."""
    if tie_rule not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    return rankdata(np.asarray(column, dtype=float), method=tie_rule)


def pseudo_obs(rows, tie_rule: str = "average") -> PseudoSample:
    """Column-wise ranks divided by ``m + 1``, ranked within ``rows`` only."""
    x = rows.rows if isinstance(rows, LagMatrix) else np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m = x.shape[0]
    if m < 1:
        raise InputError("pseudo-observations need at least one row")
    if tie_rule not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    u = rankdata(x, method=tie_rule, axis=0) / (m + 1)
    return PseudoSample(u, tie_rule)


def ecop_eval(p: PseudoSample, u) -> float | np.ndarray:
    """Empirical copula: fraction of points componentwise ``<= u``.

    ``u`` may be a single point of length d or a (q, d) batch.
    """
    q = np.asarray(u, dtype=float)
    single = q.ndim == 1
    q = np.atleast_2d(q)
    if q.shape[1] != p.d:
        raise ValueError(f"dimension mismatch: point has {q.shape[1]} coords, sample has {p.d}")
    dominated = np.all(p.points[None, :, :] <= q[:, None, :], axis=2)
    out = dominated.mean(axis=1)
    return float(out[0]) if single else out

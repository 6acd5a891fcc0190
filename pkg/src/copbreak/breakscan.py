"""Two-segment empirical copula scan for a single structural break.

For every candidate split ``l`` the rows before and after the split are
re-ranked separately, and the weighted sup-distance between the two empirical
copulas is recorded. The break estimate is the split with the largest value.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .embedding import LagMatrix, PseudoSample, ecop_eval, pseudo_obs
from .series import InputError, Quarter, index_to_quarter

NORMALIZATIONS = ("root-N", "as-printed")
SUP_MODES = ("exact-grid", "pooled-points")


@dataclass(frozen=True)
class ScanConfig:
    beta: float = 0.15
    normalization: str = "root-N"
    sup_mode: str = "exact-grid"
    tie_rule: str = "average"

    def __post_init__(self):
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 0.5), got {self.beta}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.sup_mode not in SUP_MODES:
            raise ValueError(f"unknown sup_mode {self.sup_mode!r}")

    def candidate_range(self, n: int) -> range:
        lo = math.floor(self.beta * n)
        hi = math.ceil((1.0 - self.beta) * n)
        if lo < 1 or hi > n - 1 or lo > hi:
            raise InputError(f"trimmed candidate range [{lo}, {hi}] invalid for N={n}")
        return range(lo, hi + 1)


@dataclass
class BreakScanResult:
    per_l: list[tuple[int, float]]
    T_N: float
    l_hat: int
    shift_index: int
    date_hat: Quarter | None
    n_rows: int
    d: int
    config: ScanConfig
    p_value: float | None = None
    n_perm: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "T_N": self.T_N,
            "l_hat": self.l_hat,
            "shift_index": self.shift_index,
            "date_hat": None if self.date_hat is None else str(self.date_hat),
            "n_rows": self.n_rows,
            "d": self.d,
            "config": asdict(self.config),
            "per_l": [[l, v] for l, v in self.per_l],
        }
        if self.p_value is not None:
            out["p_value"] = self.p_value
            out["n_perm"] = self.n_perm
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def profile_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "statistic"])
        for l, v in self.per_l:
            w.writerow([l, repr(v)])
        return buf.getvalue()


def weight(l: int, n: int, normalization: str = "root-N") -> float:
    if not 1 <= l <= n - 1:
        raise ValueError(f"split l={l} outside [1, {n - 1}]")
    if normalization == "root-N":
        return math.sqrt(l * (n - l) / n)
    if normalization == "as-printed":
        return math.sqrt(l * (n - l)) / n
    raise ValueError(f"unknown normalization {normalization!r}")


def psi_at(pre: PseudoSample, post: PseudoSample, u, l: int, n: int,
           normalization: str = "root-N"):
    """Weighted copula difference ``(D_pre(u) - D_post(u)) * w(l, N)``."""
    w = weight(l, n, normalization)
    return (ecop_eval(pre, u) - ecop_eval(post, u)) * w


def _cumulative_counts(pts: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    # counts[a, b] = #{points with x <= xs[a] and y <= ys[b]}
    ix = np.searchsorted(xs, pts[:, 0])
    iy = np.searchsorted(ys, pts[:, 1])
    h = np.bincount(ix * len(ys) + iy, minlength=len(xs) * len(ys)).reshape(len(xs), len(ys))
    return h.cumsum(axis=0).cumsum(axis=1)


def _sup_exact_grid(pre: np.ndarray, post: np.ndarray) -> float:
    # Both copulas are right-continuous step functions whose jumps lie on
    # the per-axis coordinates of either sample, so the sup of |difference|
    # is attained on that Cartesian grid (and is 0 left of all jumps).
    xs = np.unique(np.concatenate([pre[:, 0], post[:, 0]]))
    ys = np.unique(np.concatenate([pre[:, 1], post[:, 1]]))
    diff = _cumulative_counts(pre, xs, ys) / len(pre) - _cumulative_counts(post, xs, ys) / len(post)
    return float(np.abs(diff).max())


def _sup_pooled(pre: np.ndarray, post: np.ndarray) -> float:
    q = np.vstack([pre, post, np.ones((1, pre.shape[1]))])
    a = np.all(pre[None, :, :] <= q[:, None, :], axis=2).mean(axis=1)
    b = np.all(post[None, :, :] <= q[:, None, :], axis=2).mean(axis=1)
    return float(np.abs(a - b).max())


def sup_abs_psi(pre: PseudoSample, post: PseudoSample, l: int, n: int,
                config: ScanConfig = ScanConfig()) -> float:
    """sup over u of |psi(u)| under the configured evaluation set."""
    if pre.d != post.d:
        raise ValueError("segments have different dimensions")
    if pre.m != l or post.m != n - l:
        raise ValueError(f"segment sizes ({pre.m}, {post.m}) inconsistent with l={l}, N={n}")
    w = weight(l, n, config.normalization)
    if config.sup_mode == "exact-grid":
        if pre.d != 2:
            raise ValueError(f"exact-grid sup is implemented for d=2 only (got d={pre.d})")
        return _sup_exact_grid(pre.points, post.points) * w
    return _sup_pooled(pre.points, post.points) * w


def _segment_pseudo(x: np.ndarray, tie_rule: str) -> PseudoSample:
    # argsort ranks coincide with every tie rule when a segment has no ties
    order = np.argsort(x, axis=0, kind="stable")
    srt = np.take_along_axis(x, order, axis=0)
    if np.any(srt[1:] == srt[:-1]):
        return pseudo_obs(x, tie_rule)
    m = len(x)
    r = np.empty_like(x)
    np.put_along_axis(r, order, np.arange(1, m + 1, dtype=float)[:, None], axis=0)
    return PseudoSample(r / (m + 1), tie_rule)


def _split_stat(rows: np.ndarray, l: int, config: ScanConfig) -> float:
    n = len(rows)
    pre = _segment_pseudo(rows[:l], config.tie_rule)
    post = _segment_pseudo(rows[l:], config.tie_rule)
    return sup_abs_psi(pre, post, l, n, config)


def _profile(rows: np.ndarray, config: ScanConfig, workers: int) -> list[tuple[int, float]]:
    ls = list(config.candidate_range(len(rows)))
    if config.sup_mode == "exact-grid" and rows.shape[1] != 2:
        raise ValueError(f"exact-grid sup is implemented for d=2 only (got d={rows.shape[1]})")
    if workers <= 1:
        vals = [_split_stat(rows, l, config) for l in ls]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(lambda l: _split_stat(rows, l, config), ls))
    return list(zip(ls, vals))


def _argmax_first(per_l):
    best_l, best = per_l[0]
    for l, v in per_l[1:]:
        if v > best:
            best_l, best = l, v
    return best_l, best


def scan(rows: LagMatrix, config: ScanConfig = ScanConfig(),
         base: Quarter | None = None, workers: int = 1) -> BreakScanResult:
    """Scan all trimmed split points and locate the largest copula difference.

    ``base`` is the first quarter of the level timeline; when given, the
    estimated break is also reported as a calendar quarter. The reported
    ``shift_index`` is the level-timeline index of the last pre-break row.
    """
    per_l = _profile(rows.rows, config, workers)
    l_hat, t_n = _argmax_first(per_l)
    shift = rows.level_index(l_hat)
    return BreakScanResult(
        per_l=per_l,
        T_N=t_n,
        l_hat=l_hat,
        shift_index=shift,
        date_hat=None if base is None else index_to_quarter(shift, base),
        n_rows=rows.n,
        d=rows.d,
        config=config,
    )


def permutation_null(rows: LagMatrix, config: ScanConfig, n_perm: int, seed: int,
                     workers: int = 1) -> np.ndarray:
    """T_N for ``n_perm`` random row orderings; replicate i uses child seed i."""
    children = np.random.SeedSequence(seed).spawn(n_perm)
    x = rows.rows

    def one(ss):
        perm = np.random.default_rng(ss).permutation(len(x))
        return _argmax_first(_profile(x[perm], config, 1))[1]

    if workers <= 1:
        return np.array([one(ss) for ss in children])
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return np.array(list(ex.map(one, children)))


def permutation_pvalue(rows: LagMatrix, config: ScanConfig = ScanConfig(), n_perm: int = 999,
                       seed: int = 0, workers: int = 1, observed: float | None = None) -> float:
    """Row-permutation p-value ``(1 + #{T* >= T}) / (n_perm + 1)``."""
    if n_perm < 99:
        raise ValueError("n_perm must be >= 99")
    if observed is None:
        observed = _argmax_first(_profile(rows.rows, config, workers))[1]
    null = permutation_null(rows, config, n_perm, seed, workers)
    return (1 + int(np.count_nonzero(null >= observed))) / (n_perm + 1)

"""Rank-based copula independence test with Moebius subset statistics.

For each subset ``A`` of the embedded coordinates the Cramer-von Mises
functional of the Moebius-transformed empirical copula process is compared
with its simulated null distribution. Variables are numbered from 1, where
1 is the current value, 2 the first lag and so on.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .embedding import PseudoSample, embed, pseudo_obs
from .series import GrowthSeries, InputError

CRIT_ADJUSTMENTS = ("none", "sidak")


def subset_label(subset) -> str:
    return "{" + ",".join(str(j) for j in sorted(subset)) + "}"


def subset_mask(subset) -> int:
    return sum(1 << (j - 1) for j in subset)


def mask_subset(mask: int) -> tuple[int, ...]:
    return tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


def all_subsets(d: int, max_card: int) -> list[tuple[int, ...]]:
    return [s for k in range(2, max_card + 1) for s in combinations(range(1, d + 1), k)]


def cvm_kernel(a, b):
    """Integral over u in [0, 1] of (1{a <= u} - u)(1{b <= u} - u)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (1.0 - np.maximum(a, b)) - (1.0 - a * a) / 2.0 - (1.0 - b * b) / 2.0 + 1.0 / 3.0


def _kernel_matrix(col: np.ndarray) -> np.ndarray:
    h = (1.0 - col * col) / 2.0
    return (1.0 - np.maximum.outer(col, col)) - h[:, None] - h[None, :] + 1.0 / 3.0


def mobius_stat(p: PseudoSample | np.ndarray, subset) -> float:
    """``(1/n) sum_i sum_k prod_{j in A} K(U_ij, U_kj)``."""
    u = p.points if isinstance(p, PseudoSample) else np.asarray(p, dtype=float)
    subset = tuple(subset)
    if len(subset) < 2:
        raise ValueError("subset must contain at least 2 variables")
    if min(subset) < 1 or max(subset) > u.shape[1]:
        raise ValueError(f"subset {subset_label(subset)} outside 1..{u.shape[1]}")
    prod = _kernel_matrix(u[:, subset[0] - 1])
    for j in subset[1:]:
        prod = prod * _kernel_matrix(u[:, j - 1])
    return float(prod.sum() / u.shape[0])


@dataclass(frozen=True)
class NullDistribution:
    card: int
    crit_value: float
    sample: np.ndarray  # sorted ascending

    def p_value(self, observed: float) -> float:
        exceed = len(self.sample) - np.searchsorted(self.sample, observed, side="left")
        return (1 + int(exceed)) / (len(self.sample) + 1)


def _null_replicate(ss: np.random.SeedSequence, n: int, cards: list[int]) -> list[float]:
    rng = np.random.default_rng(ss)
    u = pseudo_obs(rng.random((n, max(cards)))).points
    out = []
    prod = _kernel_matrix(u[:, 0])
    for j in range(1, max(cards)):
        prod = prod * _kernel_matrix(u[:, j])
        if j + 1 in cards:
            out.append(float(prod.sum() / n))
    return out


def crit_level(alpha: float, n_subsets: int, crit_adjust: str = "none") -> float:
    """Quantile level used for the per-subset critical values.

    ``"sidak"`` gives simultaneous critical values, each subset being tested
    at level ``1 - (1 - alpha) ** (1 / n_subsets)``.
    """
    if crit_adjust == "none":
        return 1.0 - alpha
    if crit_adjust == "sidak":
        return (1.0 - alpha) ** (1.0 / n_subsets)
    raise ValueError(f"unknown crit_adjust {crit_adjust!r}")


def simulate_null(n: int, d: int, subsets, n_sim: int = 1000, alpha: float = 0.05,
                  seed: int = 0, workers: int = 1,
                  crit_adjust: str = "none") -> dict[tuple[int, ...], NullDistribution]:
    """Monte Carlo null of each subset statistic from ranked iid uniforms.

    The null law depends only on ``(n, |A|)``, so one sample per cardinality
    is simulated and shared by every subset of that size. Replicate ``i``
    draws from child seed ``i`` of ``seed``, whatever the worker count.
    """
    if n_sim < 99:
        raise ValueError("n_sim must be >= 99")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    subsets = [tuple(s) for s in subsets]
    for s in subsets:
        if len(s) < 2 or min(s) < 1 or max(s) > d:
            raise ValueError(f"invalid subset {subset_label(s)} for d={d}")
    level = crit_level(alpha, len(subsets), crit_adjust)
    cards = sorted({len(s) for s in subsets})
    children = np.random.SeedSequence(seed).spawn(n_sim)
    if workers <= 1:
        reps = [_null_replicate(ss, n, cards) for ss in children]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            reps = list(ex.map(lambda ss: _null_replicate(ss, n, cards), children))
    reps = np.array(reps)
    by_card = {}
    for c_idx, card in enumerate(cards):
        sample = np.sort(reps[:, c_idx])
        by_card[card] = NullDistribution(card, float(np.quantile(sample, level)), sample)
    return {s: by_card[len(s)] for s in subsets}


@dataclass(frozen=True)
class SubsetStat:
    subset: tuple[int, ...]
    statistic: float
    p_value: float
    crit_value: float

    @property
    def label(self) -> str:
        return subset_label(self.subset)

    @property
    def rejected(self) -> bool:
        return self.statistic > self.crit_value


@dataclass
class DependogramReport:
    n: int
    d: int
    alpha: float
    n_sim: int
    seed: int
    rows: list[SubsetStat]
    tie_rule: str = "average"
    crit_adjust: str = "none"
    extra: dict = field(default_factory=dict)

    def row(self, subset) -> SubsetStat:
        key = tuple(sorted(subset))
        for r in self.rows:
            if r.subset == key:
                return r
        raise KeyError(subset_label(key))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "alpha": self.alpha,
            "n_sim": self.n_sim,
            "seed": self.seed,
            "tie_rule": self.tie_rule,
            "crit_adjust": self.crit_adjust,
            "rows": [
                {
                    "subset": r.label,
                    "statistic": r.statistic,
                    "pvalue": r.p_value,
                    "critvalue": r.crit_value,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subset", "statistic", "pvalue", "critvalue"])
        for r in self.rows:
            w.writerow([r.label, repr(r.statistic), repr(r.p_value), repr(r.crit_value)])
        return buf.getvalue()

    def plot_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subset", "statistic", "critvalue"])
        for r in self.rows:
            w.writerow([r.label, repr(r.statistic), repr(r.crit_value)])
        return buf.getvalue()


def indep_report(g: GrowthSeries, d: int, max_card: int = 2, alpha: float = 0.05,
                 n_sim: int = 1000, seed: int = 0, subsets=None, workers: int = 1,
                 crit_adjust: str = "none") -> DependogramReport:
    if not 2 <= max_card <= d:
        raise InputError(f"max_card={max_card} must lie in [2, d={d}]")
    lm = embed(g, d)
    p = pseudo_obs(lm)
    subsets = all_subsets(d, max_card) if subsets is None else [tuple(sorted(s)) for s in subsets]
    null = simulate_null(lm.n, d, subsets, n_sim=n_sim, alpha=alpha, seed=seed, workers=workers,
                         crit_adjust=crit_adjust)
    rows = []
    for s in subsets:
        stat = mobius_stat(p, s)
        rows.append(SubsetStat(s, stat, null[s].p_value(stat), null[s].crit_value))
    return DependogramReport(n=lm.n, d=d, alpha=alpha, n_sim=n_sim, seed=seed, rows=rows,
                             tie_rule=p.tie_rule, crit_adjust=crit_adjust)

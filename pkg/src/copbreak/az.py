"""Andrews-Zivot style linear break benchmark and a small OLS engine."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .series import GrowthSeries, InputError, Quarter, index_to_quarter

SPECS = ("intercept", "trend", "both")


class NumericalError(ArithmeticError):
    pass


@dataclass
class OlsFit:
    names: list[str]
    coef: np.ndarray
    std_err: np.ndarray
    t_stat: np.ndarray
    p_value: np.ndarray
    resid: np.ndarray
    n_obs: int
    k: int
    r2: float
    adj_r2: float
    ser: float
    ssr: float
    log_lik: float
    aic: float
    sic: float
    dw: float
    f_stat: float
    f_prob: float
    mean_dep: float
    sd_dep: float

    def index(self, name: str) -> int:
        return self.names.index(name)

    def to_dict(self) -> dict:
        return {
            "variables": [
                {"name": nm, "coef": float(c), "std_err": float(s), "t_stat": float(t), "p_value": float(p)}
                for nm, c, s, t, p in zip(self.names, self.coef, self.std_err, self.t_stat, self.p_value)
            ],
            "n_obs": self.n_obs,
            "k": self.k,
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "ser": self.ser,
            "ssr": self.ssr,
            "log_lik": self.log_lik,
            "aic": self.aic,
            "sic": self.sic,
            "dw": self.dw,
            "f_stat": self.f_stat,
            "f_prob": self.f_prob,
            "mean_dep": self.mean_dep,
            "sd_dep": self.sd_dep,
        }

    def summary(self, sample: str | None = None) -> str:
        """Least-squares output block in the usual econometrics-package layout."""
        lines = ["Dependent Variable: Y", "Method: Least Squares"]
        if sample:
            lines.append(f"Sample(adjusted): {sample}")
        lines.append(f"Included observations: {self.n_obs}")
        lines.append("")
        lines.append(f"{'Variable':<12}{'Coefficient':>14}{'Std. Error':>14}{'t-Statistic':>14}{'Prob.':>10}")
        for nm, c, s, t, p in zip(self.names, self.coef, self.std_err, self.t_stat, self.p_value):
            lines.append(f"{nm:<12}{_fmt(c):>14}{_fmt(s):>14}{t:>14.6f}{p:>10.4f}")
        lines.append("")
        grid = [
            ("R-squared", self.r2, "Mean dependent var", self.mean_dep),
            ("Adjusted R-squared", self.adj_r2, "S.D. dependent var", self.sd_dep),
            ("S.E. of regression", self.ser, "Akaike info criterion", self.aic),
            ("Sum squared resid", self.ssr, "Schwarz criterion", self.sic),
            ("Log likelihood", self.log_lik, "F-statistic", self.f_stat),
            ("Durbin-Watson stat", self.dw, "Prob(F-statistic)", self.f_prob),
        ]
        for a, av, b, bv in grid:
            lines.append(f"{a:<22}{av:>12.6f}    {b:<24}{bv:>12.6f}")
        return "\n".join(lines)


def _fmt(x: float) -> str:
    return f"{x:.2E}" if x != 0 and abs(x) < 1e-3 else f"{x:.6f}"


def ols(y, X, names=None, intercept: int | None = 0) -> OlsFit:
    """OLS via Householder QR with the usual diagnostics.

    ``intercept`` is the column index of the constant (``None`` if absent);
    the F-statistic tests every other coefficient jointly.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    if n <= k:
        raise InputError(f"need more observations ({n}) than regressors ({k})")
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * max(n, k) * np.finfo(float).eps:
        raise NumericalError("design matrix is rank deficient")
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    df = n - k
    s2 = ssr / df
    rinv = np.linalg.solve(r, np.eye(k))
    cov = s2 * (rinv @ rinv.T)
    se = np.sqrt(np.diag(cov))
    t = coef / se
    pv = 2.0 * stats.t.sf(np.abs(t), df)

    ybar = float(y.mean())
    tss = float(((y - ybar) ** 2).sum()) if intercept is not None else float(y @ y)
    r2 = 1.0 - ssr / tss
    adj = 1.0 - (1.0 - r2) * (n - 1) / df
    # a perfect fit sends log-likelihood and F to +inf
    ll = -0.5 * n * (1.0 + math.log(2.0 * math.pi) + math.log(ssr / n)) if ssr > 0 else math.inf
    q_restr = k - 1 if intercept is not None else k
    if q_restr > 0:
        f = (r2 / q_restr) / ((1.0 - r2) / df) if r2 < 1.0 else math.inf
        fp = float(stats.f.sf(f, q_restr, df))
    else:
        f, fp = float("nan"), float("nan")
    return OlsFit(
        names=names,
        coef=coef,
        std_err=se,
        t_stat=t,
        p_value=pv,
        resid=resid,
        n_obs=n,
        k=k,
        r2=r2,
        adj_r2=adj,
        ser=math.sqrt(s2),
        ssr=ssr,
        log_lik=ll,
        aic=(-2.0 * ll + 2.0 * k) / n,
        sic=(-2.0 * ll + k * math.log(n)) / n,
        dw=float(np.sum(np.diff(resid) ** 2) / ssr) if ssr > 0 else float("nan"),
        f_stat=float(f),
        f_prob=fp,
        mean_dep=ybar,
        sd_dep=float(y.std(ddof=1)),
    )


def sample_indices(g: GrowthSeries) -> np.ndarray:
    """Level-timeline indices t of the regression sample (first growth obs dropped)."""
    # growth value k (0-based) sits at level index k + 2; Y(-1) needs k >= 1
    return np.arange(3, len(g) + 2)


def az_design(g: GrowthSeries, spec: str, l: int) -> tuple[np.ndarray, np.ndarray, list[str]]:
    if spec not in SPECS:
        raise InputError(f"unknown spec {spec!r}; expected one of {SPECS}")
    yv = g.array()
    t = sample_indices(g)
    if not t[0] <= l < t[-1]:
        raise InputError(f"break index {l} outside sample {t[0]}..{t[-1]}")
    y = yv[1:]
    ylag = yv[:-1]
    tf = t.astype(float)
    du = (t > l).astype(float)
    dt = np.where(t > l, tf - l, 0.0)
    cols = [("C", np.ones_like(tf))]
    if spec in ("intercept", "both"):
        cols.append((f"DU{l}", du))
    cols.append(("TR", tf))
    if spec in ("trend", "both"):
        cols.append((f"DT{l}", dt))
    cols.append(("Y(-1)", ylag))
    names = [c[0] for c in cols]
    return y, np.column_stack([c[1] for c in cols]), names


def candidate_breaks(g: GrowthSeries, trim: float) -> range:
    if not 0.0 < trim < 0.5:
        raise InputError(f"trim must lie in (0, 0.5), got {trim}")
    t = sample_indices(g)
    n = len(t)
    lo = math.floor(trim * n)
    hi = math.ceil((1.0 - trim) * n)
    lo, hi = max(lo, 1), min(hi, n - 1)
    if lo > hi:
        raise InputError("trimmed AZ candidate range is empty")
    # k-th sample observation (1-based) is the last pre-break point
    return range(int(t[lo - 1]), int(t[hi - 1]) + 1)


@dataclass
class AzResult:
    spec: str
    best_index: int
    best_date: Quarter | None
    min_t: float
    fit_at_best: OlsFit
    per_candidate: list[tuple[int, float]]
    trim: float
    extra: dict = field(default_factory=dict)

    def sample_label(self) -> str:
        return f"{self.extra.get('first', '')} {self.extra.get('last', '')}".strip()

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "trim": self.trim,
            "best_index": self.best_index,
            "best_date": None if self.best_date is None else str(self.best_date),
            "min_t": self.min_t,
            "fit_at_best": self.fit_at_best.to_dict(),
            "per_candidate": [[l, v] for l, v in self.per_candidate],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _t_phi(g: GrowthSeries, spec: str, l: int) -> float:
    y, X, names = az_design(g, spec, l)
    fit = ols(y, X, names)
    j = fit.index("Y(-1)")
    return float((fit.coef[j] - 1.0) / fit.std_err[j])


def az_scan(g: GrowthSeries, spec: str = "intercept", trim: float = 0.15,
            workers: int = 1) -> AzResult:
    """Minimise t = (phi - 1) / se(phi) over candidate break indices."""
    if spec not in SPECS:
        raise InputError(f"unknown spec {spec!r}; expected one of {SPECS}")
    ls = list(candidate_breaks(g, trim))
    if workers <= 1:
        ts = [_t_phi(g, spec, l) for l in ls]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            ts = list(ex.map(lambda l: _t_phi(g, spec, l), ls))
    best = 0
    for i in range(1, len(ts)):
        if ts[i] < ts[best]:
            best = i
    l_best = ls[best]
    y, X, names = az_design(g, spec, l_best)
    fit = ols(y, X, names)
    t = sample_indices(g)
    return AzResult(
        spec=spec,
        best_index=l_best,
        best_date=index_to_quarter(l_best, g.level_base),
        min_t=ts[best],
        fit_at_best=fit,
        per_candidate=list(zip(ls, ts)),
        trim=trim,
        extra={"first": int(t[0]), "last": int(t[-1])},
    )

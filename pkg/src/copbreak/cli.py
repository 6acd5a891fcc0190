"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .az import SPECS, NumericalError, az_scan
from .breakscan import NORMALIZATIONS, SUP_MODES, ScanConfig, permutation_pvalue, scan
from .embedding import MAX_D, MIN_D, embed
from .indep import indep_report
from .series import InputError, descriptives, growth_rates, read_csv

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    input: str
    d: int = 2
    beta: float = 0.15
    alpha: float = 0.05
    n_sim: int = 1000
    seed: int = 0
    normalization: str = "root-N"
    sup_mode: str | None = None
    max_card: int = 2
    trim: float = 0.15
    max_lag: int = 9
    spec: str = "intercept"
    n_perm: int = 0
    crit_adjust: str = "none"
    format: str = "text"
    plot_data: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.sup_mode is None:
            self.sup_mode = "exact-grid" if self.d == 2 else "pooled-points"

    def check(self):
        if not MIN_D <= self.d <= MAX_D:
            raise InputError(f"--d must lie in [{MIN_D}, {MAX_D}], got {self.d}")
        if not 0.0 < self.beta < 0.5:
            raise InputError(f"--beta must lie in (0, 0.5), got {self.beta}")
        if not 0.0 < self.alpha < 1.0:
            raise InputError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.trim < 0.5:
            raise InputError(f"--trim must lie in (0, 0.5), got {self.trim}")
        if self.n_sim < 99:
            raise InputError("--sims must be >= 99")
        if self.n_perm and self.n_perm < 99:
            raise InputError("--perm must be 0 or >= 99")
        if self.sup_mode == "exact-grid" and self.d != 2:
            raise InputError("--sup-mode exact-grid requires --d 2")
        if self.max_lag < 0:
            raise InputError("--max-lag must be >= 0")
        if self.workers < 1:
            raise InputError("--workers must be >= 1")

    def echo(self) -> dict:
        out = asdict(self)
        # execution-only settings; results do not depend on them
        out.pop("format")
        out.pop("workers")
        return out

    def header(self) -> str:
        return (f"# copbreak {__version__} {self.command}: input={self.input} d={self.d} "
                f"beta={self.beta} alpha={self.alpha} n_sim={self.n_sim} trim={self.trim} "
                f"normalization={self.normalization} sup_mode={self.sup_mode} "
                f"max_card={self.max_card} seed={self.seed}")


def _load(cfg: RunConfig):
    try:
        levels = read_csv(cfg.input)
    except FileNotFoundError:
        raise InputError(f"input file not found: {cfg.input}") from None
    except OSError as exc:
        raise InputError(f"cannot read {cfg.input}: {exc}") from None
    return growth_rates(levels)


def _document(cfg: RunConfig, result: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": cfg.command,
           "config": cfg.echo(), "result": result}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_plot(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_descriptives(cfg: RunConfig) -> str:
    g = _load(cfg)
    table = descriptives(g, cfg.max_lag)
    if cfg.format == "json":
        return _document(cfg, table.to_dict())
    if cfg.format == "csv":
        return table.to_csv()
    body = table.to_csv(digits=3).replace(",", "\t")
    return f"{cfg.header()}\n# observations per lag: {table.n_obs}\n{body}"


def cmd_indep(cfg: RunConfig) -> str:
    cfg.check()
    g = _load(cfg)
    rep = indep_report(g, cfg.d, max_card=cfg.max_card, alpha=cfg.alpha, n_sim=cfg.n_sim,
                       seed=cfg.seed, workers=cfg.workers, crit_adjust=cfg.crit_adjust)
    if cfg.plot_data:
        _write_plot(cfg.plot_data, rep.plot_csv())
    if cfg.format == "json":
        return _document(cfg, rep.to_dict())
    if cfg.format == "csv":
        return rep.to_csv()
    lines = [cfg.header(), f"# n={rep.n} crit_adjust={rep.crit_adjust}",
             f"{'subset':<16}{'statistic':>12}{'pvalue':>10}{'critvalue':>12}  dependent"]
    for r in rep.rows:
        lines.append(f"{r.label:<16}{r.statistic:>12.6f}{r.p_value:>10.5f}{r.crit_value:>12.6f}  "
                     f"{'yes' if r.rejected else 'no'}")
    return "\n".join(lines) + "\n"


def _breaktest(cfg: RunConfig, g):
    lm = embed(g, cfg.d)
    sc = ScanConfig(beta=cfg.beta, normalization=cfg.normalization, sup_mode=cfg.sup_mode)
    res = scan(lm, sc, base=g.level_base, workers=cfg.workers)
    if cfg.n_perm:
        res.p_value = permutation_pvalue(lm, sc, n_perm=cfg.n_perm, seed=cfg.seed,
                                         workers=cfg.workers, observed=res.T_N)
        res.n_perm = cfg.n_perm
    return res


def cmd_breaktest(cfg: RunConfig) -> str:
    cfg.check()
    g = _load(cfg)
    res = _breaktest(cfg, g)
    if cfg.plot_data:
        _write_plot(cfg.plot_data, res.profile_csv())
    if cfg.format == "json":
        return _document(cfg, res.to_dict())
    if cfg.format == "csv":
        return res.profile_csv()
    lines = [cfg.header(),
             f"rows N = {res.n_rows}, candidates l = {res.per_l[0][0]}..{res.per_l[-1][0]}",
             f"T_N = {res.T_N:.6f}",
             f"break row l = {res.l_hat}",
             f"shift observation = {res.shift_index}",
             f"shift date = {res.date_hat}"]
    if res.p_value is not None:
        lines.append(f"permutation p-value = {res.p_value:.6f} ({res.n_perm} permutations)")
    return "\n".join(lines) + "\n"


def cmd_az(cfg: RunConfig) -> str:
    cfg.check()
    if cfg.spec not in SPECS:
        raise InputError(f"unknown --spec {cfg.spec!r}; expected one of {', '.join(SPECS)}")
    g = _load(cfg)
    res = az_scan(g, cfg.spec, trim=cfg.trim, workers=cfg.workers)
    if cfg.plot_data:
        _write_plot(cfg.plot_data, _rows_csv(["index", "t"], res.per_candidate))
    if cfg.format == "json":
        return _document(cfg, res.to_dict())
    if cfg.format == "csv":
        return _rows_csv(["index", "t"], res.per_candidate)
    return (f"{cfg.header()}\n"
            f"spec = {res.spec}, break observation = {res.best_index} ({res.best_date}), "
            f"min t = {res.min_t:.4f}\n\n"
            f"{res.fit_at_best.summary(res.sample_label())}\n")


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_report(cfg: RunConfig) -> str:
    cfg.check()
    g = _load(cfg)
    cop = _breaktest(cfg, g)
    azs = {spec: az_scan(g, spec, trim=cfg.trim, workers=cfg.workers) for spec in SPECS}
    table = [["Copula", "Kolmogorov-Smirnov", cop.shift_index, str(cop.date_hat), cop.T_N]]
    labels = {"intercept": "Intercept", "trend": "Trend", "both": "Intercept + Trend"}
    for spec, r in azs.items():
        table.append(["Andrews-Zivot", labels[spec], r.best_index, str(r.best_date), r.min_t])
    header = ["test_type", "specification", "shift_observation", "shift_date", "statistic"]
    if cfg.format == "json":
        return _document(cfg, {
            "comparison": [dict(zip(header, row)) for row in table],
            "copula": cop.to_dict(),
            "andrews_zivot": {spec: r.to_dict() for spec, r in azs.items()},
        })
    if cfg.format == "csv":
        return _rows_csv(header, table)
    lines = [cfg.header(),
             f"{'Test Type':<15}{'Test Specification':<21}{'Shift Obs.':>11}{'Shift Date':>12}{'Statistic':>12}"]
    for row in table:
        lines.append(f"{row[0]:<15}{row[1]:<21}{row[2]:>11}{row[3]:>12}{row[4]:>12.4f}")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "descriptives": cmd_descriptives,
    "indep": cmd_indep,
    "breaktest": cmd_breaktest,
    "az": cmd_az,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="CSV with header 'date,value' (YYYYQn rows)")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--d", type=int, default=2, help="embedding depth")
    common.add_argument("--beta", type=float, default=0.15, help="trimming fraction of the copula scan")
    common.add_argument("--alpha", type=float, default=0.05)
    common.add_argument("--sims", dest="n_sim", type=int, default=1000, help="null replicates")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--normalization", choices=NORMALIZATIONS, default="root-N")
    common.add_argument("--sup-mode", choices=SUP_MODES, default=None,
                        help="default: exact-grid for d=2, pooled-points otherwise")
    common.add_argument("--max-card", type=int, default=2)
    common.add_argument("--crit-adjust", choices=("none", "sidak"), default="none")
    common.add_argument("--trim", type=float, default=0.15, help="trimming fraction of the AZ scan")
    common.add_argument("--max-lag", type=int, default=9)
    common.add_argument("--spec", default="intercept", help="AZ specification: " + ", ".join(SPECS))
    common.add_argument("--perm", dest="n_perm", type=int, default=0, help="row permutations for a p-value")
    common.add_argument("--plot-data", default=None, help="write plot coordinates to this CSV")
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="copbreak", description="Copula structural break test, copula independence test and Andrews-Zivot benchmark.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        out = COMMANDS[cfg.command](cfg)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"copbreak: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError) as exc:
        print(f"copbreak: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

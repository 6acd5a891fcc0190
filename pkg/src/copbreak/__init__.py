"""Copula-based structural break detection for univariate time series."""

__version__ = "0.1.0"

from .series import (  # noqa: E402
    GrowthSeries,
    InputError,
    MarginalTable,
    Quarter,
    QuarterlySeries,
    acf,
    descriptives,
    growth_rates,
    index_to_quarter,
    parse_csv,
    read_csv,
)
from .embedding import LagMatrix, PseudoSample, ecop_eval, embed, pseudo_obs, ranks  # noqa: E402
from .breakscan import (  # noqa: E402
    BreakScanResult,
    ScanConfig,
    permutation_pvalue,
    psi_at,
    scan,
    sup_abs_psi,
)
from .indep import DependogramReport, SubsetStat, cvm_kernel, indep_report, mobius_stat, simulate_null  # noqa: E402
from .az import AzResult, OlsFit, az_design, az_scan, ols  # noqa: E402

__all__ = [
    "AzResult", "BreakScanResult", "DependogramReport", "GrowthSeries", "InputError", "LagMatrix",
    "MarginalTable", "OlsFit", "PseudoSample", "Quarter", "QuarterlySeries", "ScanConfig", "SubsetStat",
    "acf", "az_design", "az_scan", "cvm_kernel", "descriptives", "ecop_eval", "embed", "growth_rates",
    "indep_report", "index_to_quarter", "mobius_stat", "ols", "parse_csv", "permutation_pvalue",
    "pseudo_obs", "psi_at", "ranks", "read_csv", "scan", "simulate_null", "sup_abs_psi",
]

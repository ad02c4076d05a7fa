"""Wigner-Ville screening of benchmark-rate submission panels.

Quotes are detrended against the benchmark (optionally with a fitted credit
proxy), each residual series is mapped to a Wigner-Ville array, the arrays are
thresholded to their tail events and entities are compared pairwise by the
correlation of the thresholded arrays.  Synthetic panels and null models
calibrate what correlation levels arise by chance.
"""

__version__ = "0.1.0"

from .aliasing import AliasedMap, densitogram, gaussian_smooth, threshold_alias
from .correlation import (
    CorrelationMatrix,
    DetectorConfig,
    NullSummary,
    array_correlation,
    detector,
    null_calibration,
)
from .detrend import (
    CreditProxy,
    RegressionResult,
    detrend_benchmark,
    detrend_with_credit,
    fit_credit_proxy,
    ols_fit,
)
from .dynamics import DiffusionGenerator, WignerField, diffusion_reduction_check, evolve
from .estimators import BenchmarkDetrender, TailAliaser, WignerVilleTransformer, WVFCorrelationDetector
from .fixing import CollusionSpec, gaussian_walk, levy_increments, synthesize_panel, trimmed_mean_fix
from .panel import CdsPanel, PanelSeries, align, parse_cds_csv, parse_panel_csv
from .wvf import (
    HermiteExpansion,
    LagCovariance,
    WvfArray,
    auto_wvf,
    cross_wvf,
    freq_marginal,
    gaussian_wigner_closed_form,
    hermite_expand,
    lag_covariance,
    matrix_wvf,
    time_marginal,
    wigner_from_expansion,
)

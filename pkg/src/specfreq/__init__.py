"""Frequency-domain inference for high-dimensional stationary time series.

The package estimates cross-spectral density matrices with a flat-top lag
window, runs Gaussian-multiplier-bootstrap global tests of a zero
cross-spectrum over chosen pairs and frequencies, and recovers supports
through an FDR-controlled multiple-testing batch.  A FastAPI service
(``specfreq.service``) exposes the pipeline over HTTP and the ``specfreq``
CLI acts as a thin client of that service.
"""

from .bootstrap import BootstrapDraws, MultiplierConfig, ToeplitzFactor, draw_multipliers, factor_theta, run_bootstrap, xi_draw
from .errors import (
    DimensionMismatch,
    EmptyInput,
    HypothesisBatchError,
    InsufficientLength,
    InvalidParameter,
    NonFiniteValue,
    NonNumericValue,
    NonPositiveAutoSpectrum,
    RaggedInput,
    SpecfreqError,
)
from .fdr import FdrReport, HypothesisSpec, MarginalResult, fdp_hat, fdr_procedure, marginal_pvalues, normal_quantiles, select_threshold
from .longrun import LagPanel, LongRunCov, andrews_bandwidth, build_lag_panel, estimate_longrun, qs_weight
from .simulate import DgpSpec, ExperimentResult, block_hypotheses, null_partition, run_fdr_experiment, run_power_experiment, run_size_experiment, simulate, true_spectrum
from .spectral import (
    BandwidthConfig,
    FlatTopKernel,
    FreqProjection,
    SpectralEstimate,
    coherence,
    default_bandwidth,
    estimate_spectrum,
    flat_top_weight,
    freq_projection,
)
from .testing import GlobalTestReport, InferenceConfig, critical_value, global_test, sup_max_statistic
from .timeseries import AutocovSet, FrequencySet, IndexSet, TimePanel, autocov, difference, load_csv, parse_csv

SCHEMA_VERSION = "specfreq/1"

__version__ = "0.1.0"

__all__ = [
    "AutocovSet",
    "BandwidthConfig",
    "BootstrapDraws",
    "DgpSpec",
    "DimensionMismatch",
    "EmptyInput",
    "ExperimentResult",
    "FdrReport",
    "FlatTopKernel",
    "FreqProjection",
    "FrequencySet",
    "GlobalTestReport",
    "HypothesisBatchError",
    "HypothesisSpec",
    "IndexSet",
    "InsufficientLength",
    "InvalidParameter",
    "LagPanel",
    "LongRunCov",
    "MarginalResult",
    "MultiplierConfig",
    "NonFiniteValue",
    "NonNumericValue",
    "NonPositiveAutoSpectrum",
    "RaggedInput",
    "SCHEMA_VERSION",
    "SpecfreqError",
    "SpectralEstimate",
    "InferenceConfig",
    "TimePanel",
    "ToeplitzFactor",
    "andrews_bandwidth",
    "autocov",
    "block_hypotheses",
    "build_lag_panel",
    "coherence",
    "critical_value",
    "default_bandwidth",
    "difference",
    "draw_multipliers",
    "estimate_longrun",
    "estimate_spectrum",
    "factor_theta",
    "fdp_hat",
    "fdr_procedure",
    "flat_top_weight",
    "freq_projection",
    "global_test",
    "load_csv",
    "marginal_pvalues",
    "normal_quantiles",
    "null_partition",
    "parse_csv",
    "qs_weight",
    "run_bootstrap",
    "run_fdr_experiment",
    "run_power_experiment",
    "run_size_experiment",
    "select_threshold",
    "simulate",
    "sup_max_statistic",
    "true_spectrum",
    "xi_draw",
]

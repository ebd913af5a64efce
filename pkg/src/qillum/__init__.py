"""Numerical engine for Gaussian-probe target detection in thermal noise,
evaluated through direct photon counting (on-off and number-resolving
detectors) with coincidence-counting and Fisher-information figures of
merit."""

from .bargmann import (BargmannForm, GridResourceError, ProbabilityGrid,
                       bargmann_of, number_prob, prob_grid)
from .detection import (OnOffStats, PnrStats, onoff_joint_from_grid,
                        onoff_stats, pnr_stats_joint, pnr_stats_single)
from .metrics import (ErrorProb, FiConvergenceError, SnrReport, SplitOptimum,
                      asymptotic_snr, error_prob, find_crossover,
                      optimize_ds_split, probe_family, snr, snr_cc, snr_fi)
from .oracle import DenseSeries, dense_expand, dense_number_prob, fi_analytic_check
from .states import (GaussianState, ProbeKind, ProbeSpec, Scenario,
                     build_cct_output, build_ds_output, build_input,
                     build_output, build_tmsv_output, gaussian_number_moment,
                     mandel_q, mean_photon)

__all__ = [
    "BargmannForm", "DenseSeries", "ErrorProb", "FiConvergenceError",
    "GaussianState", "GridResourceError", "OnOffStats", "PnrStats",
    "ProbabilityGrid", "ProbeKind", "ProbeSpec", "Scenario", "SnrReport",
    "SplitOptimum", "asymptotic_snr", "bargmann_of", "build_cct_output",
    "build_ds_output", "build_input", "build_output", "build_tmsv_output",
    "dense_expand", "dense_number_prob", "error_prob", "fi_analytic_check",
    "find_crossover", "gaussian_number_moment", "mandel_q", "mean_photon",
    "number_prob", "onoff_joint_from_grid", "onoff_stats", "optimize_ds_split",
    "pnr_stats_joint", "pnr_stats_single", "prob_grid", "probe_family",
    "snr", "snr_cc", "snr_fi",
]

__version__ = "0.1.0"

"""Change detection for multilook polarimetric SAR covariance data.

Implements the scaled complex Wishart model (density, exact sampling,
maximum-likelihood estimation), four two-sample test statistics (likelihood
ratio, Kullback-Leibler, Shannon entropy, Renyi entropy), Monte Carlo
size/power harnesses, and a sliding-window change detector producing p-value
maps and detection metrics.
"""

from . import (
    detector,
    errors,
    estimation,
    experiments,
    formats,
    hypotests,
    infotheory,
    mathcore,
    model,
    presets,
)
from .detector import ChangeMask, CovRaster, DetectionMetrics, PValueMap, detect, score, threshold
from .estimation import MLEstimate, estimate, estimate_looks, estimate_sigma, pooled_estimate
from .experiments import (
    ExperimentReport,
    PowerExperimentConfig,
    SizeExperimentConfig,
    run_power_experiment,
    run_same_target_experiment,
    run_size_experiment,
)
from .hypotests import entropy_statistic, kl_statistic, lr_statistic, two_sample_test
from .infotheory import entropy_variance, kl_distance, renyi_entropy, shannon_entropy
from .model import WishartParams, derive_seed, log_density, sample
from .presets import FLEVOLAND_B1
from .results import TestResult, decide

__version__ = "0.1.0"
FORMAT_VERSIONS = {"PCMR": 1, "PVM": 1}

__all__ = [
    "CovRaster",
    "ChangeMask",
    "DetectionMetrics",
    "ExperimentReport",
    "FLEVOLAND_B1",
    "FORMAT_VERSIONS",
    "MLEstimate",
    "PValueMap",
    "PowerExperimentConfig",
    "SizeExperimentConfig",
    "TestResult",
    "WishartParams",
    "decide",
    "derive_seed",
    "detect",
    "detector",
    "entropy_statistic",
    "entropy_variance",
    "errors",
    "estimate",
    "estimate_looks",
    "estimate_sigma",
    "estimation",
    "experiments",
    "formats",
    "hypotests",
    "infotheory",
    "kl_distance",
    "kl_statistic",
    "log_density",
    "lr_statistic",
    "mathcore",
    "model",
    "pooled_estimate",
    "presets",
    "renyi_entropy",
    "run_power_experiment",
    "run_same_target_experiment",
    "run_size_experiment",
    "sample",
    "score",
    "shannon_entropy",
    "threshold",
    "two_sample_test",
]

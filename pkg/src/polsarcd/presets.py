"""Named parameter presets for one-command experiments."""

from __future__ import annotations

import numpy as np

from .experiments import PowerExperimentConfig, SizeExperimentConfig
from .model import WishartParams

__all__ = [
    "FLEVOLAND_B1",
    "SIGMA_PRESETS",
    "preset_params",
    "size_preset",
    "power_preset",
]

# Sample covariance of an agricultural region of the Flevoland AIRSAR scene
# (HH, HV, VV channels), a standard 3-channel test matrix.  Its determinant
# is 7.78e-8.
FLEVOLAND_B1 = np.array(
    [
        [9.528e-3 + 0.0j, -3.469e-4 + 1.048e-4j, 1.439e-3 + 1.164e-3j],
        [-3.469e-4 - 1.048e-4j, 1.794e-3 + 0.0j, 8.551e-5 - 1.608e-5j],
        [1.439e-3 - 1.164e-3j, 8.551e-5 + 1.608e-5j, 4.955e-3 + 0.0j],
    ]
)
FLEVOLAND_B1.setflags(write=False)

SIGMA_PRESETS = {"flevoland-b1": FLEVOLAND_B1}


def preset_params(name: str, looks: float = 4.0) -> WishartParams:
    try:
        sigma = SIGMA_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(SIGMA_PRESETS)}") from None
    return WishartParams(sigma, looks)


def size_preset(
    replications: int = 5500,
    seed: int = 0,
    sample_sizes=tuple(range(10, 51)),
    looks_mode: str = "known",
) -> SizeExperimentConfig:
    """Small-sample test-size configuration on the flevoland-b1 covariance."""
    theta = preset_params("flevoland-b1", 4.0)
    return SizeExperimentConfig(
        theta=theta,
        sample_sizes=tuple(sample_sizes),
        levels=(0.01, 0.05, 0.10),
        replications=replications,
        looks=None if looks_mode == "estimated" else 4.0,
        seed=seed,
    )


def power_preset(
    replications: int = 5500,
    seed: int = 0,
    sample_sizes=tuple(range(10, 51)),
    contrast_factors=(0.2, 0.3, 0.4),
    level: float = 0.01,
    looks_mode: str = "known",
) -> PowerExperimentConfig:
    """Scaled-covariance power configuration on the flevoland-b1 covariance."""
    theta = preset_params("flevoland-b1", 4.0)
    return PowerExperimentConfig(
        theta=theta,
        contrast_factors=tuple(contrast_factors),
        sample_sizes=tuple(sample_sizes),
        level=level,
        replications=replications,
        looks=None if looks_mode == "estimated" else 4.0,
        seed=seed,
    )

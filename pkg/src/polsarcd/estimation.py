"""Maximum-likelihood estimation of the covariance and the number of looks.

The covariance estimate is the sample mean.  The looks estimate is the root
of the profile score

    g(L) = p log L + mean(log |Z_k|) - log |sigma_hat| - psi_p(L),

found by Newton-Raphson with a bisection fallback; g is strictly decreasing
for L > p - 1, so the root is unique whenever it exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mathcore
from .errors import DimensionMismatch, EmptySample, NoConvergence
from .model import WishartParams

__all__ = [
    "MLEstimate",
    "estimate_sigma",
    "estimate_looks",
    "estimate",
    "pooled_estimate",
]

_MAX_NEWTON_ITER = 100
_RESIDUAL_TOL = 1e-10
_STEP_TOL = 1e-12
_LOOKS_CEILING = 1e6


@dataclass(frozen=True)
class MLEstimate:
    """Fitted parameters plus the cached per-sample mean log-determinant."""

    params: WishartParams
    sample_size: int
    mean_logdet: float

    @property
    def sigma(self) -> np.ndarray:
        return self.params.sigma

    @property
    def looks(self) -> float:
        return self.params.looks


def _check_sample(sample: np.ndarray) -> np.ndarray:
    arr = np.asarray(sample, dtype=np.complex128)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatch(f"expected (n, p, p) observations, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptySample("cannot estimate from an empty sample")
    return arr


def estimate_sigma(sample: np.ndarray) -> np.ndarray:
    """Entrywise mean of the observations; Hermitian by construction."""
    arr = _check_sample(sample)
    mean = arr.mean(axis=0)
    return (mean + mean.conj().T) / 2.0


def mean_logdet(sample: np.ndarray) -> float:
    """Mean of log |Z_k| over the sample."""
    arr = _check_sample(sample)
    sign, ld = np.linalg.slogdet(arr)
    if np.any(sign.real <= 0.0):
        raise mathcore.NotPositiveDefinite("an observation has a non-positive determinant")
    return float(np.mean(ld.real))


def _score(p: int, gap: float, looks: float) -> float:
    # gap = log|sigma_hat| - mean(log|Z_k|) >= 0 for non-degenerate samples
    return p * math.log(looks) - mathcore.multivariate_polygamma(0, p, looks) - gap


def _score_derivative(p: int, looks: float) -> float:
    return p / looks - mathcore.multivariate_polygamma(1, p, looks)


def _solve_looks(p: int, gap: float, init: float) -> float:
    lo_edge = p - 1
    looks = max(init, lo_edge + 1e-3)
    clamped = False
    newton_ok = False
    for _ in range(_MAX_NEWTON_ITER):
        g = _score(p, gap, looks)
        if abs(g) < _RESIDUAL_TOL:
            newton_ok = True
            break
        step = g / _score_derivative(p, looks)
        nxt = looks - step
        if not (lo_edge < nxt < _LOOKS_CEILING):
            if clamped:
                break  # second excursion: hand over to bisection
            clamped = True
            nxt = lo_edge + 1e-3 if nxt <= lo_edge else _LOOKS_CEILING / 2.0
        if abs(nxt - looks) < _STEP_TOL:
            looks = nxt
            newton_ok = True
            break
        looks = nxt
    if newton_ok and abs(_score(p, gap, looks)) < 1e-9:
        return looks

    # Bisection bracket; g is decreasing, so a sign change pins the root.
    lo = lo_edge + 0.01
    hi = 100.0
    if _score(p, gap, hi) > 0.0:
        hi = _LOOKS_CEILING
    if not (_score(p, gap, lo) > 0.0 > _score(p, gap, hi)):
        raise NoConvergence(
            "the looks score has no root in "
            f"({lo:g}, {hi:g}); the sample may be degenerate (gap={gap:.3e})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = _score(p, gap, mid)
        if abs(g) < _RESIDUAL_TOL or (hi - lo) < _STEP_TOL * mid:
            return mid
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_looks(sample: np.ndarray, sigma_hat: np.ndarray, init: float = 4.0) -> float:
    """Root of the looks score equation for the given sample.

    Requires at least two observations; a sample of identical matrices has no
    finite root and raises NoConvergence.
    """
    arr = _check_sample(sample)
    if arr.shape[0] < 2:
        raise EmptySample("estimating looks requires at least two observations")
    gap = mathcore.logdet(sigma_hat) - mean_logdet(arr)
    return _solve_looks(arr.shape[1], gap, init)


def estimate(sample: np.ndarray, init_looks: float = 4.0, fix_looks: bool = False) -> MLEstimate:
    """Joint fit: sample-mean covariance plus the looks root (or a fixed value).

    With ``fix_looks`` the value ``init_looks`` is taken as known and only the
    covariance is estimated.
    """
    arr = _check_sample(sample)
    sigma_hat = estimate_sigma(arr)
    mld = mean_logdet(arr)
    if fix_looks:
        looks = float(init_looks)
    else:
        if arr.shape[0] < 2:
            raise EmptySample("estimating looks requires at least two observations")
        looks = _solve_looks(arr.shape[1], mathcore.logdet(sigma_hat) - mld, init_looks)
    return MLEstimate(WishartParams(sigma_hat, looks), arr.shape[0], mld)


def pooled_estimate(
    a: np.ndarray,
    b: np.ndarray,
    looks: float | None = None,
    init_looks: float = 4.0,
) -> MLEstimate:
    """Fit under the null hypothesis that both samples share one parameter pair.

    The pooled covariance is the sample mean of the concatenation; the pooled
    looks value is solved on the concatenation, or fixed to ``looks``.
    """
    a = _check_sample(a)
    b = _check_sample(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    merged = np.concatenate([a, b], axis=0)
    if looks is not None:
        return estimate(merged, init_looks=looks, fix_looks=True)
    return estimate(merged, init_looks=init_looks)

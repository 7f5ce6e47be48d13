"""The scaled complex Wishart distribution: density, exact sampler, marginals.

The L-look sample covariance matrix of jointly circular complex Gaussian
scattering vectors follows this law.  Its diagonal entries are Gamma
distributed, and the trace of the whitened observation gives a scalar
goodness-of-fit channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mathcore
from .errors import DimensionMismatch, DomainError, EmptySample
from .results import TestResult

__all__ = [
    "WishartParams",
    "as_sample",
    "derive_seed",
    "log_density",
    "sample",
    "gamma_marginal_log_density",
    "trace_transform",
    "ks_test_gamma",
]


@dataclass(frozen=True)
class WishartParams:
    """Parameter pair (covariance matrix, equivalent number of looks)."""

    sigma: np.ndarray
    looks: float
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sigma = mathcore.ensure_hermitian(self.sigma)
        chol = mathcore.cholesky(sigma)  # rejects non-PD covariances
        p = sigma.shape[0]
        if self.looks <= p - 1:
            raise DomainError(f"looks must exceed p - 1 = {p - 1}, got {self.looks}")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "looks", float(self.looks))
        object.__setattr__(self, "_chol", chol)

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    def scaled(self, factor: float) -> "WishartParams":
        """Same law with the covariance scaled by ``factor`` (> 0)."""
        if factor <= 0.0:
            raise DomainError(f"scale factor must be positive, got {factor}")
        return WishartParams(self.sigma * factor, self.looks)


def as_sample(observations) -> np.ndarray:
    """Validate and pack observations into a (n, p, p) complex array.

    Each observation is symmetrized under the ingest tolerance.  An empty
    collection raises EmptySample.
    """
    arr = np.asarray(observations, dtype=np.complex128)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionMismatch(f"expected (n, p, p) observations, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptySample("sample contains no observations")
    sym = (arr + np.conj(np.swapaxes(arr, 1, 2))) / 2.0
    scale = np.abs(arr).max(axis=(1, 2))
    dev = np.abs(arr - np.conj(np.swapaxes(arr, 1, 2))).max(axis=(1, 2))
    bad = dev > mathcore.HERMITIAN_INGEST_TOL * np.where(scale == 0.0, 1.0, scale)
    if bad.any():
        k = int(np.argmax(bad))
        raise mathcore.NotHermitian(
            f"observation {k} asymmetry {dev[k] / max(scale[k], 1e-300):.3e} "
            "exceeds the 1e-8 ingest bound"
        )
    return sym


def derive_seed(base, *key: int) -> np.random.SeedSequence:
    """Child seed for work unit ``key``; independent of scheduling order."""
    if isinstance(base, np.random.SeedSequence):
        return np.random.SeedSequence(base.entropy, spawn_key=base.spawn_key + tuple(key))
    return np.random.SeedSequence(base, spawn_key=tuple(key))


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def log_density(z: np.ndarray, params: WishartParams) -> float:
    """Log of the scaled complex Wishart density at observation ``z``."""
    z = np.asarray(z, dtype=np.complex128)
    p = params.p
    if z.shape != (p, p):
        raise DimensionMismatch(f"observation shape {z.shape} does not match p={p}")
    looks = params.looks
    return float(
        p * looks * math.log(looks)
        + (looks - p) * mathcore.logdet(z)
        - looks * mathcore.logdet(params.sigma)
        - mathcore.lngamma_p(p, looks)
        - looks * mathcore.trace_product(mathcore.inverse(params.sigma), z)
    )


def _real_block_covariance(sigma: np.ndarray) -> np.ndarray:
    """Real 2p x 2p covariance of the stacked (real, imaginary) Gaussian parts."""
    r = sigma.real
    i = sigma.imag
    return 0.5 * np.block([[r, -i], [i, r]])


def sample(params: WishartParams, n: int, seed) -> np.ndarray:
    """Draw ``n`` observations by averaging ``looks`` complex Gaussian outer products.

    Parameters
    ----------
    params :
        Target law.  ``looks`` must be an integer at least max(3, p); the
        look-summation construction does not extend to fractional looks.
    n :
        Number of observation matrices.
    seed :
        Integer, ``numpy.random.SeedSequence``, or ``numpy.random.Generator``.
        Equal (params, n, seed) triples produce bit-identical output.

    Returns
    -------
    numpy.ndarray
        Array of shape (n, p, p), complex128, Hermitian positive-definite.
    """
    p = params.p
    looks = params.looks
    if not float(looks).is_integer() or looks < max(3, p):
        raise DomainError(
            f"exact sampling requires an integer looks >= max(3, p) = {max(3, p)}, got {looks}"
        )
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    lint = int(looks)
    factor = np.linalg.cholesky(_real_block_covariance(params.sigma))
    rng = _generator(seed)
    x = rng.standard_normal((n, lint, 2 * p)) @ factor.T
    y = x[:, :, :p] + 1j * x[:, :, p:]
    z = np.einsum("nli,nlj->nij", y, y.conj()) / lint
    return (z + np.conj(np.swapaxes(z, 1, 2))) / 2.0


def gamma_marginal_log_density(z: float, theta: float, looks: float) -> float:
    """Log density of a diagonal channel: Gamma with shape ``looks`` and mean ``theta``."""
    if z <= 0.0 or theta <= 0.0 or looks <= 0.0:
        raise DomainError("z, theta and looks must all be positive")
    return float(
        looks * math.log(looks)
        + (looks - 1.0) * math.log(z)
        - mathcore.lngamma(looks)
        - looks * math.log(theta)
        - looks * z / theta
    )


def trace_transform(sample_arr: np.ndarray, sigma_hat: np.ndarray) -> np.ndarray:
    """Per-observation scalars tr(sigma_hat^{-1} Z_i).

    Under a well-fitted model these follow a Gamma law, which makes them a
    one-dimensional goodness-of-fit channel.
    """
    arr = np.asarray(sample_arr, dtype=np.complex128)
    if arr.ndim != 3:
        raise DimensionMismatch(f"expected (n, p, p) observations, got shape {arr.shape}")
    inv = mathcore.inverse(sigma_hat)
    if inv.shape[0] != arr.shape[1]:
        raise DimensionMismatch("sigma_hat dimension does not match the observations")
    values = np.einsum("ij,nji->n", inv, arr)
    return np.ascontiguousarray(values.real)


def _kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """Upper tail of the Kolmogorov law, truncated series."""
    if lam <= 0.0:
        return 1.0
    k = np.arange(1, terms + 1)
    s = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * (k * lam) ** 2))
    return float(min(1.0, max(0.0, s)))


def ks_test_gamma(values, shape: float, scale: float) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against Gamma(shape, scale).

    The p-value uses the asymptotic Kolmogorov series at sqrt(n) * D and is
    adequate for n >= 35.
    """
    import scipy.special

    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise EmptySample("no values to test")
    if shape <= 0.0 or scale <= 0.0:
        raise DomainError("shape and scale must be positive")
    if v[0] <= 0.0:
        raise DomainError("values must be positive")
    cdf = scipy.special.gammainc(shape, v / scale)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    p = _kolmogorov_sf(math.sqrt(n) * d)
    return TestResult(statistic=d, df=None, p_value=p, method="ks-gamma")

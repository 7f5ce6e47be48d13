"""Hermitian linear-algebra kernels and special functions.

Matrices are plain ``numpy`` arrays of ``complex128``; every operation here is
a pure function.  Positive-definiteness is defined operationally as Cholesky
success.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.special

from .errors import DimensionMismatch, DomainError, NotHermitian, NotPositiveDefinite

# Relative asymmetry tolerated when ingesting matrices from files or user input.
HERMITIAN_INGEST_TOL = 1e-8

_LOG_PI = float(np.log(np.pi))


def asymmetry(m: np.ndarray) -> float:
    """Largest deviation from Hermitian symmetry, relative to the largest entry."""
    m = np.asarray(m)
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return 0.0
    return float(np.abs(m - m.conj().T).max()) / scale


def ensure_hermitian(m: np.ndarray, tol: float = HERMITIAN_INGEST_TOL) -> np.ndarray:
    """Symmetrize ``m`` to (M + M*)/2, rejecting asymmetry beyond ``tol``.

    File round-trips introduce last-bit noise, so small asymmetry is repaired
    rather than rejected.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    a = asymmetry(m)
    if a >= tol:
        raise NotHermitian(f"asymmetry {a:.3e} exceeds tolerance {tol:.1e}")
    return (m + m.conj().T) / 2.0


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular factor G with G @ G* = m.

    Raises NotPositiveDefinite when the factorization fails, which is this
    package's operational test for positive-definiteness.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def is_positive_definite(m: np.ndarray) -> bool:
    try:
        cholesky(m)
    except NotPositiveDefinite:
        return False
    return True


def logdet(m: np.ndarray) -> float:
    """Natural log of the determinant of a positive-definite matrix."""
    g = cholesky(m)
    return float(2.0 * np.sum(np.log(np.real(np.diag(g)))))


def inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a Hermitian positive-definite matrix via its Cholesky factor."""
    g = cholesky(m)
    ident = np.eye(m.shape[0], dtype=np.complex128)
    inv = scipy.linalg.cho_solve((g, True), ident, check_finite=False)
    return (inv + inv.conj().T) / 2.0


def trace_product(a: np.ndarray, b: np.ndarray) -> float:
    """Real part of tr(a @ b); for Hermitian operands the trace is real."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    t = complex(np.einsum("ij,ji->", a, b))
    if abs(t.imag) >= 1e-10 * max(1.0, abs(t.real)):
        raise DomainError(f"trace has non-negligible imaginary part {t.imag:.3e}")
    return float(t.real)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with block (i, j) equal to a[i, j] * b."""
    return np.kron(np.asarray(a), np.asarray(b))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacked vector of a matrix (column-major order)."""
    return np.asarray(m).flatten(order="F")


def lngamma(x: float) -> float:
    """Log of the gamma function for x > 0."""
    if x <= 0.0:
        raise DomainError(f"lngamma requires x > 0, got {x}")
    return float(scipy.special.gammaln(x))


def digamma(x: float) -> float:
    if x <= 0.0:
        raise DomainError(f"digamma requires x > 0, got {x}")
    return float(scipy.special.psi(x))


def trigamma(x: float) -> float:
    if x <= 0.0:
        raise DomainError(f"trigamma requires x > 0, got {x}")
    return float(scipy.special.polygamma(1, x))


def multivariate_polygamma(v: int, p: int, looks: float) -> float:
    """Sum of the order-``v`` polygamma over the arguments looks - i, i < p."""
    if v not in (0, 1):
        raise DomainError(f"only orders 0 and 1 are supported, got {v}")
    if p < 1:
        raise DomainError(f"dimension must be positive, got {p}")
    if looks <= p - 1:
        raise DomainError(f"looks must exceed p - 1 = {p - 1}, got {looks}")
    args = looks - np.arange(p)
    fn = scipy.special.psi if v == 0 else lambda x: scipy.special.polygamma(1, x)
    return float(np.sum(fn(args)))


def lngamma_p(p: int, looks: float) -> float:
    """Log of the complex multivariate gamma function."""
    if looks <= p - 1:
        raise DomainError(f"looks must exceed p - 1 = {p - 1}, got {looks}")
    args = looks - np.arange(p)
    return float(p * (p - 1) / 2.0 * _LOG_PI + np.sum(scipy.special.gammaln(args)))


def chi2_sf(x: float, df: float) -> float:
    """Upper-tail probability of the chi-square law with ``df`` degrees of freedom."""
    if df <= 0.0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if x < 0.0:
        raise DomainError(f"statistic must be nonnegative, got {x}")
    return float(scipy.special.chdtrc(df, x))


def chi2_cdf(x: float, df: float) -> float:
    """Lower-tail complement of :func:`chi2_sf`."""
    if df <= 0.0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if x < 0.0:
        raise DomainError(f"statistic must be nonnegative, got {x}")
    return float(scipy.special.chdtr(df, x))

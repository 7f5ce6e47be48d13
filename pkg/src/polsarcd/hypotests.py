"""Two-sample (and r-sample) tests for a common scaled Wishart parameter pair.

Four statistics are provided: the likelihood ratio, a Kullback-Leibler
contrast, and contrasts built on the Shannon and Renyi entropies.  Each is
referred to its asymptotic chi-square law.

Looks handling: pass ``looks=L`` to treat the number of looks as known
(degrees of freedom p^2 for the likelihood-ratio and divergence tests), or
``looks=None`` to estimate it per sample (degrees of freedom p^2 + 1).  The
entropy statistics always use r - 1 degrees of freedom; their variance
denominators follow the estimation mode unless overridden via ``variance``.
"""

from __future__ import annotations

import math

import numpy as np

from . import estimation, infotheory, mathcore
from .errors import DimensionMismatch, DomainError
from .estimation import MLEstimate
from .results import TestResult, decide

__all__ = [
    "TestResult",
    "decide",
    "lr_statistic",
    "lr_log_lambda",
    "kl_statistic",
    "entropy_statistic",
    "two_sample_test",
    "METHODS",
]

# Normalization constant of the divergence statistic.  The Kullback-Leibler
# member of the (h, phi) divergence family has h'(0) = phi''(1) = 1.
KL_NORMALIZATION = 1.0

METHODS = ("lr", "kl", "shannon", "renyi")


def _fit(sample: np.ndarray, looks: float | None, init_looks: float) -> MLEstimate:
    if looks is None:
        return estimation.estimate(sample, init_looks=init_looks)
    return estimation.estimate(sample, init_looks=looks, fix_looks=True)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 3 or b.ndim != 3 or a.shape[1:] != b.shape[1:]:
        raise DimensionMismatch(f"incompatible sample shapes {a.shape} and {b.shape}")


def lr_log_lambda(e1: MLEstimate, e2: MLEstimate, ec: MLEstimate) -> float:
    """Log likelihood ratio from per-sample and pooled fits.

    Evaluates the general expression term by term; with equal looks across
    the three fits everything but the determinant contrast cancels.
    """
    p = e1.params.p
    n1, n2 = e1.sample_size, e2.sample_size
    nc = n1 + n2
    l1, l2, lc = e1.looks, e2.looks, ec.looks
    ld1 = mathcore.logdet(e1.sigma)
    ld2 = mathcore.logdet(e2.sigma)
    ldc = mathcore.logdet(ec.sigma)

    norm = p * (lc * nc * math.log(lc) - l1 * n1 * math.log(l1) - l2 * n2 * math.log(l2))
    norm += (
        n1 * mathcore.lngamma_p(p, l1)
        + n2 * mathcore.lngamma_p(p, l2)
        - nc * mathcore.lngamma_p(p, lc)
    )
    det_term = n1 * l1 * ld1 + n2 * l2 * ld2 - nc * lc * ldc
    sample_term = (lc - l1) * n1 * e1.mean_logdet + (lc - l2) * n2 * e2.mean_logdet

    inv_c = mathcore.inverse(ec.sigma)
    trace_term = (
        n1 * (l1 * p - lc * mathcore.trace_product(inv_c, e1.sigma))
        + n2 * (l2 * p - lc * mathcore.trace_product(inv_c, e2.sigma))
    )
    return norm + det_term + sample_term + trace_term


def lr_statistic(
    a: np.ndarray,
    b: np.ndarray,
    looks: float | None = None,
    init_looks: float = 4.0,
) -> TestResult:
    """Likelihood-ratio statistic -2 log lambda for a common parameter pair.

    In known-looks mode the normalizer and trace terms cancel analytically and
    the statistic reduces to a determinant contrast.
    """
    _check_pair(a, b)
    p = int(np.asarray(a).shape[1])
    n1, n2 = len(a), len(b)
    if looks is not None:
        s1 = estimation.estimate_sigma(a)
        s2 = estimation.estimate_sigma(b)
        ld1 = mathcore.logdet(s1)
        ld2 = mathcore.logdet(s2)
        ldc = mathcore.logdet((n1 * s1 + n2 * s2) / (n1 + n2))
        stat = -2.0 * looks * (n1 * ld1 + n2 * ld2 - (n1 + n2) * ldc)
        df = float(p * p)
    else:
        e1 = _fit(a, None, init_looks)
        e2 = _fit(b, None, init_looks)
        ec = estimation.pooled_estimate(a, b, init_looks=init_looks)
        stat = -2.0 * lr_log_lambda(e1, e2, ec)
        df = float(p * p + 1)
    stat = max(0.0, float(stat))
    return TestResult(stat, df, mathcore.chi2_sf(stat, df), "lr", looks=looks)


def kl_statistic(
    a: np.ndarray,
    b: np.ndarray,
    looks: float | None = None,
    init_looks: float = 4.0,
) -> TestResult:
    """Divergence statistic 2 N1 N2 / (N1 + N2) times the symmetrized distance."""
    _check_pair(a, b)
    e1 = _fit(a, looks, init_looks)
    e2 = _fit(b, looks, init_looks)
    n1, n2 = e1.sample_size, e2.sample_size
    dist = infotheory.kl_distance(e1.params, e2.params)
    stat = max(0.0, 2.0 * n1 * n2 / (n1 + n2) * dist / KL_NORMALIZATION)
    p = e1.params.p
    df = float(p * p) if looks is not None else float(p * p + 1)
    return TestResult(stat, df, mathcore.chi2_sf(stat, df), "kl", looks=looks)


def _entropy_and_variance(
    est: MLEstimate,
    kind: str,
    beta: float | None,
    include_looks_term: bool,
    quadratic_form: str,
) -> tuple[float, float]:
    if kind == "shannon":
        h = infotheory.shannon_entropy(est.params)
    elif kind == "renyi":
        if beta is None:
            raise DomainError("the Renyi statistic requires an order beta")
        h = infotheory.renyi_entropy(est.params, beta)
    else:
        raise DomainError(f"unknown entropy kind {kind!r}")
    var = infotheory.entropy_variance(
        est.params,
        kind,
        beta,
        include_looks_term=include_looks_term,
        quadratic_form=quadratic_form,
    )
    return h, var


def entropy_statistic(
    samples,
    kind: str = "shannon",
    beta: float | None = None,
    looks: float | None = None,
    init_looks: float = 4.0,
    variance: str = "auto",
    quadratic_form: str = "transpose",
) -> TestResult:
    """Entropy-contrast statistic over r >= 2 samples, chi-square with r - 1 df.

    Each sample contributes its fitted entropy weighted by the inverse of the
    estimator variance.  ``variance`` selects the variance denominator:

    - ``"auto"``: match the estimation mode (looks term included only when
      the number of looks is estimated);
    - ``"full"``: always include the looks term;
    - ``"profile"``: never include it.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise DomainError("the entropy statistic needs at least two samples")
    if variance not in ("auto", "full", "profile"):
        raise DomainError(f"unknown variance mode {variance!r}")
    include = variance == "full" or (variance == "auto" and looks is None)

    ests = [_fit(s, looks, init_looks) for s in samples]
    p = ests[0].params.p
    if any(e.params.p != p for e in ests):
        raise DimensionMismatch("samples do not share a common dimension")

    h = np.empty(len(ests))
    w = np.empty(len(ests))
    for i, e in enumerate(ests):
        hi, vi = _entropy_and_variance(e, kind, beta, include, quadratic_form)
        h[i] = hi
        w[i] = e.sample_size / vi
    pooled_mean = float(np.sum(w * h) / np.sum(w))
    stat = max(0.0, float(np.sum(w * (h - pooled_mean) ** 2)))
    df = float(len(ests) - 1)
    return TestResult(
        stat, df, mathcore.chi2_sf(stat, df), kind, looks=looks, beta=beta
    )


def two_sample_test(
    a: np.ndarray,
    b: np.ndarray,
    method: str,
    looks: float | None = None,
    beta: float = 0.1,
    init_looks: float = 4.0,
    variance: str = "auto",
) -> TestResult:
    """Dispatch a two-sample test by method name (lr, kl, shannon, renyi)."""
    if method == "lr":
        return lr_statistic(a, b, looks=looks, init_looks=init_looks)
    if method == "kl":
        return kl_statistic(a, b, looks=looks, init_looks=init_looks)
    if method == "shannon":
        return entropy_statistic(
            [a, b], "shannon", looks=looks, init_looks=init_looks, variance=variance
        )
    if method == "renyi":
        return entropy_statistic(
            [a, b], "renyi", beta=beta, looks=looks, init_looks=init_looks, variance=variance
        )
    raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")

"""Closed-form information measures for the scaled complex Wishart law.

Provides the symmetrized Kullback-Leibler distance, Shannon and Renyi
entropies, and the asymptotic variances of the entropy estimators.

The variance has two additive pieces: a covariance-estimation term and a
looks-estimation term.  The full form is the asymptotic variance of the
entropy evaluated at the joint maximum-likelihood estimate; when the number
of looks is treated as known, only the covariance term applies
(``include_looks_term=False``).
"""

from __future__ import annotations

import math

import numpy as np

from . import mathcore
from .errors import DimensionMismatch, DomainError
from .model import WishartParams

__all__ = [
    "kl_distance",
    "shannon_entropy",
    "renyi_entropy",
    "renyi_order_shift",
    "entropy_variance",
    "sigma_quadratic_form",
]

_LOG_PI = float(np.log(np.pi))


def kl_distance(a: WishartParams, b: WishartParams) -> float:
    """Symmetrized Kullback-Leibler distance between two parameter pairs.

    Symmetric by construction and zero iff the parameters coincide.
    """
    if a.p != b.p:
        raise DimensionMismatch(f"dimension mismatch: {a.p} vs {b.p}")
    p = a.p
    l1, l2 = a.looks, b.looks
    bracket = (
        mathcore.logdet(a.sigma)
        - mathcore.logdet(b.sigma)
        - p * (math.log(l1) - math.log(l2))
        + mathcore.multivariate_polygamma(0, p, l1)
        - mathcore.multivariate_polygamma(0, p, l2)
    )
    cross = l2 * mathcore.trace_product(mathcore.inverse(b.sigma), a.sigma) + l1 * (
        mathcore.trace_product(mathcore.inverse(a.sigma), b.sigma)
    )
    return float((l1 - l2) / 2.0 * bracket - p * (l1 + l2) / 2.0 + cross / 2.0)


def shannon_entropy(params: WishartParams) -> float:
    """Shannon entropy of the law, in nats."""
    p = params.p
    looks = params.looks
    gammas = float(np.sum([mathcore.lngamma(looks - k) for k in range(p)]))
    return float(
        p * (p - 1) / 2.0 * _LOG_PI
        - p * p * math.log(looks)
        + p * mathcore.logdet(params.sigma)
        + p * looks
        + (p - looks) * mathcore.multivariate_polygamma(0, p, looks)
        + gammas
    )


def renyi_order_shift(p: int, looks: float, beta: float) -> float:
    """The shifted argument q = L + (1 - beta)(p - L) used by the Renyi forms."""
    return looks + (1.0 - beta) * (p - looks)


def _check_beta(p: int, looks: float, beta: float) -> float:
    if beta <= 0.0 or beta == 1.0:
        raise DomainError(f"order must be positive and different from 1, got {beta}")
    q = renyi_order_shift(p, looks, beta)
    if q <= p - 1:
        raise DomainError(
            f"order {beta} is too far from 1 for p={p}, looks={looks}: "
            f"shifted argument {q:.4f} <= p - 1"
        )
    return q


def renyi_entropy(params: WishartParams, beta: float) -> float:
    """Renyi entropy of order ``beta``; tends to the Shannon entropy as beta -> 1."""
    p = params.p
    looks = params.looks
    q = _check_beta(p, looks, beta)
    gamma_sum = float(
        np.sum(
            [
                mathcore.lngamma(q - i) - beta * mathcore.lngamma(looks - i)
                for i in range(p)
            ]
        )
    )
    return float(
        p * (p - 1) / 2.0 * _LOG_PI
        - p * p * math.log(looks)
        + p * mathcore.logdet(params.sigma)
        - p * q * math.log(beta) / (1.0 - beta)
        + gamma_sum / (1.0 - beta)
    )


def sigma_quadratic_form(sigma: np.ndarray, convention: str = "transpose") -> float:
    """Quadratic form vec(S^{-1})* (K) vec(S^{-1}) with K a Kronecker square of S.

    ``convention="transpose"`` uses K = S^T (x) S, which is provably real and
    evaluates to the matrix dimension for every Hermitian positive-definite S.
    ``convention="literal"`` uses K = S (x) S and is retained for comparison;
    its value is convention-dependent for complex matrices.
    """
    inv = mathcore.inverse(sigma)
    v = mathcore.vec(inv)
    if convention == "transpose":
        k = mathcore.kron(np.asarray(sigma).T, sigma)
    elif convention == "literal":
        k = mathcore.kron(sigma, sigma)
    else:
        raise DomainError(f"unknown quadratic-form convention {convention!r}")
    val = complex(np.conj(v) @ k @ v)
    if convention == "transpose" and abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise DomainError(f"quadratic form should be real, got imaginary part {val.imag:.3e}")
    return float(val.real)


def _looks_term(p: int, looks: float, kind: str, beta: float | None) -> float:
    trig = mathcore.multivariate_polygamma(1, p, looks)
    denom = trig - p / looks
    if denom <= 0.0:
        raise DomainError(f"degenerate Fisher information at looks={looks}")
    if kind == "shannon":
        num = (p - looks) * trig + p - p * p / looks
    else:
        q = _check_beta(p, looks, beta)
        num = (
            beta
            / (1.0 - beta)
            * (
                mathcore.multivariate_polygamma(0, p, q)
                - mathcore.multivariate_polygamma(0, p, looks)
            )
            - p * beta * math.log(beta) / (1.0 - beta)
            - p * p / looks
        )
    return num * num / denom


def entropy_variance(
    params: WishartParams,
    kind: str = "shannon",
    beta: float | None = None,
    *,
    include_looks_term: bool = True,
    quadratic_form: str = "transpose",
) -> float:
    """Asymptotic variance of sqrt(N) times the entropy estimation error.

    With ``include_looks_term`` the value covers joint estimation of the
    covariance and the number of looks; without it, covariance-only
    estimation (looks known).  Strictly positive and invariant under scaling
    of the covariance.
    """
    if kind not in ("shannon", "renyi"):
        raise DomainError(f"unknown entropy kind {kind!r}")
    if kind == "renyi" and beta is None:
        raise DomainError("the Renyi variance requires an order beta")
    p = params.p
    looks = params.looks
    qf = sigma_quadratic_form(params.sigma, quadratic_form)
    value = p * p / looks * qf
    if include_looks_term:
        value += _looks_term(p, looks, kind, beta)
    return float(value)

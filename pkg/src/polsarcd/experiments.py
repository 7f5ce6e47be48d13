"""Monte Carlo harnesses for empirical test size and power.

Every replication draws its randomness from a seed derived as
``derive_seed(base, n_index, replication, side)``, so results are identical
regardless of execution order or thread count.  Reports aggregate rejection
counts and mean statistics and serialize to CSV with a fixed column set.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hypotests, model
from .errors import DomainError, RegionTooSmall
from .model import WishartParams, derive_seed

__all__ = [
    "SizeExperimentConfig",
    "PowerExperimentConfig",
    "ReportRow",
    "ExperimentReport",
    "run_size_experiment",
    "run_power_experiment",
    "run_same_target_experiment",
    "wilson_interval",
]

CSV_COLUMNS = ("method", "n", "level_or_k", "rate", "mean_stat", "ci_lo", "ci_hi")


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class SizeExperimentConfig:
    """Null-hypothesis experiment: both samples drawn from the same law."""

    theta: WishartParams
    sample_sizes: tuple[int, ...]
    levels: tuple[float, ...]
    replications: int
    methods: tuple[str, ...] = hypotests.METHODS
    beta: float = 0.1
    looks: float | None = None  # None: estimate per sample
    variance: str = "auto"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.replications < 1:
            raise DomainError("replications must be at least 1")
        if any(n < 2 for n in self.sample_sizes):
            raise DomainError("sample sizes must be at least 2")
        if any(not 0.0 < a < 1.0 for a in self.levels):
            raise DomainError("levels must lie in (0, 1)")
        for m in self.methods:
            if m not in hypotests.METHODS:
                raise DomainError(f"unknown method {m!r}")

    @classmethod
    def from_json(cls, path) -> "SizeExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(**_config_kwargs(doc))

    def describe(self) -> dict:
        return _describe_common(self)


@dataclass(frozen=True)
class PowerExperimentConfig:
    """Alternative-hypothesis experiment: the second sample's covariance is
    scaled by 1 + k for each contrast factor k."""

    theta: WishartParams
    contrast_factors: tuple[float, ...]
    sample_sizes: tuple[int, ...]
    level: float
    replications: int
    methods: tuple[str, ...] = hypotests.METHODS
    beta: float = 0.1
    looks: float | None = None
    variance: str = "auto"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "contrast_factors", tuple(float(k) for k in self.contrast_factors))
        object.__setattr__(self, "methods", tuple(self.methods))
        if any(k <= -1.0 for k in self.contrast_factors):
            raise DomainError("contrast factors must exceed -1")
        if not 0.0 < self.level < 1.0:
            raise DomainError("level must lie in (0, 1)")
        if self.replications < 1:
            raise DomainError("replications must be at least 1")

    @classmethod
    def from_json(cls, path) -> "PowerExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        kw = _config_kwargs(doc)
        kw["contrast_factors"] = tuple(doc["contrast_factors"])
        kw["level"] = float(doc.get("level", 0.01))
        kw.pop("levels", None)
        return cls(**kw)

    def describe(self) -> dict:
        d = _describe_common(self)
        d["contrast_factors"] = list(self.contrast_factors)
        d["level"] = self.level
        return d


def _config_kwargs(doc: dict) -> dict:
    sigma = _matrix_from_json(doc["sigma"])
    theta = WishartParams(sigma, float(doc["looks"]))
    kw = dict(
        theta=theta,
        sample_sizes=tuple(doc["sample_sizes"]),
        replications=int(doc["replications"]),
        methods=tuple(doc.get("methods", hypotests.METHODS)),
        beta=float(doc.get("beta", 0.1)),
        variance=doc.get("variance", "auto"),
        seed=int(doc.get("seed", 0)),
    )
    if "levels" in doc:
        kw["levels"] = tuple(doc["levels"])
    mode = doc.get("looks_mode", "known")
    kw["looks"] = None if mode == "estimated" else float(doc.get("test_looks", doc["looks"]))
    return kw


def _matrix_from_json(entries) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DomainError("matrix JSON must be a p x p grid of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _describe_common(cfg) -> dict:
    return {
        "p": cfg.theta.p,
        "looks": cfg.theta.looks,
        "sample_sizes": list(cfg.sample_sizes),
        "replications": cfg.replications,
        "methods": list(cfg.methods),
        "beta": cfg.beta,
        "looks_mode": "estimated" if cfg.looks is None else f"known({cfg.looks:g})",
        "variance": cfg.variance,
        "seed": cfg.seed,
    }


@dataclass(frozen=True)
class ReportRow:
    method: str
    n: int
    level_or_k: float
    rate: float
    mean_stat: float
    ci_lo: float
    ci_hi: float


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow(
                    [
                        r.method,
                        r.n,
                        f"{r.level_or_k:.10g}",
                        f"{r.rate:.10g}",
                        f"{r.mean_stat:.10g}",
                        f"{r.ci_lo:.10g}",
                        f"{r.ci_hi:.10g}",
                    ]
                )

    def cell(self, method: str, n: int, level_or_k: float) -> ReportRow:
        for r in self.rows:
            if r.method == method and r.n == n and math.isclose(r.level_or_k, level_or_k):
                return r
        raise KeyError((method, n, level_or_k))

    def rate(self, method: str, n: int, level_or_k: float) -> float:
        return self.cell(method, n, level_or_k).rate

    def mean_statistic(self, method: str, n: int) -> float:
        for r in self.rows:
            if r.method == method and r.n == n:
                return r.mean_stat
        raise KeyError((method, n))


def _replication_statistics(methods, looks, beta, variance, x, y) -> dict:
    out = {}
    for m in methods:
        res = hypotests.two_sample_test(x, y, m, looks=looks, beta=beta, variance=variance)
        out[m] = res.p_value, res.statistic
    return out


def _map_replications(fn, count: int, threads: int):
    """Apply ``fn`` over replication indices, deterministically ordered."""
    if threads == 1 or count < 2:
        return [fn(j) for j in range(count)]
    workers = threads if threads > 0 else None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _aggregate(methods, replications, n, per_level_keys, results) -> list[ReportRow]:
    rows = []
    for m in methods:
        mean_stat = float(np.mean([r[m][1] for r in results]))
        for key in per_level_keys:
            rejects = sum(1 for r in results if r[m][0] <= key)
            lo, hi = wilson_interval(rejects, replications)
            rows.append(ReportRow(m, n, key, rejects / replications, mean_stat, lo, hi))
    return rows


def run_size_experiment(cfg: SizeExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Empirical test size: rejection rate over null-hypothesis replications."""
    report = ExperimentReport(meta={"experiment": "size", **cfg.describe()})
    for n_idx, n in enumerate(cfg.sample_sizes):

        def one(j: int, _n=n, _i=n_idx):
            x = model.sample(cfg.theta, _n, derive_seed(cfg.seed, _i, j, 0))
            y = model.sample(cfg.theta, _n, derive_seed(cfg.seed, _i, j, 1))
            return _replication_statistics(cfg.methods, cfg.looks, cfg.beta, cfg.variance, x, y)

        results = _map_replications(one, cfg.replications, threads)
        report.rows.extend(_aggregate(cfg.methods, cfg.replications, n, cfg.levels, results))
    return report


def run_power_experiment(cfg: PowerExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Empirical power: rejection rate when the second law is scaled by 1 + k.

    Contrast levels share per-replication randomness (common random numbers),
    so the k = 0 column coincides exactly with a size experiment under the
    same seed.
    """
    report = ExperimentReport(meta={"experiment": "power", **cfg.describe()})
    for k in cfg.contrast_factors:
        shifted = cfg.theta.scaled(1.0 + k) if k != 0.0 else cfg.theta
        for n_idx, n in enumerate(cfg.sample_sizes):

            def one(j: int, _n=n, _i=n_idx, _shifted=shifted):
                x = model.sample(cfg.theta, _n, derive_seed(cfg.seed, _i, j, 0))
                y = model.sample(_shifted, _n, derive_seed(cfg.seed, _i, j, 1))
                return _replication_statistics(
                    cfg.methods, cfg.looks, cfg.beta, cfg.variance, x, y
                )

            results = _map_replications(one, cfg.replications, threads)
            for m in cfg.methods:
                mean_stat = float(np.mean([r[m][1] for r in results]))
                rejects = sum(1 for r in results if r[m][0] <= cfg.level)
                lo, hi = wilson_interval(rejects, cfg.replications)
                report.rows.append(
                    ReportRow(m, n, k, rejects / cfg.replications, mean_stat, lo, hi)
                )
    return report


def run_same_target_experiment(
    regions,
    sample_sizes,
    levels,
    replications: int,
    seed: int,
    methods=hypotests.METHODS,
    beta: float = 0.1,
    looks: float | None = None,
    variance: str = "auto",
    pairing: str = "within",
    threads: int = 1,
) -> ExperimentReport:
    """Resampling experiment on observed regions of a single scene.

    Each replication draws two disjoint subsets of size N without replacement
    (a seeded shuffle partitioned into halves) and tests them against each
    other.  ``pairing="within"`` takes both subsets from one region, which is
    the null-calibration design; ``pairing="across"`` pairs consecutive
    regions and estimates discrimination instead.
    """
    regions = [model.as_sample(r) for r in regions]
    if not regions:
        raise DomainError("at least one region is required")
    if pairing not in ("within", "across"):
        raise DomainError(f"unknown pairing {pairing!r}")
    sample_sizes = tuple(int(n) for n in sample_sizes)
    levels = tuple(float(a) for a in levels)
    methods = tuple(methods)

    report = ExperimentReport(
        meta={
            "experiment": "same-target",
            "regions": len(regions),
            "pairing": pairing,
            "replications": replications,
            "methods": list(methods),
            "beta": beta,
            "looks_mode": "estimated" if looks is None else f"known({looks:g})",
            "variance": variance,
            "seed": seed,
        }
    )
    for n_idx, n in enumerate(sample_sizes):
        need = 2 * n if pairing == "within" else n
        for r_idx, region in enumerate(regions):
            if len(region) < need:
                raise RegionTooSmall(
                    f"region {r_idx} has {len(region)} pixels; {need} required"
                )

        def one(j: int, _n=n, _i=n_idx):
            rng = np.random.Generator(np.random.Philox(derive_seed(seed, _i, j)))
            if pairing == "within":
                region = regions[j % len(regions)]
                perm = rng.permutation(len(region))
                u = region[perm[:_n]]
                v = region[perm[_n : 2 * _n]]
            else:
                ra = regions[j % len(regions)]
                rb = regions[(j + 1) % len(regions)]
                u = ra[rng.choice(len(ra), size=_n, replace=False)]
                v = rb[rng.choice(len(rb), size=_n, replace=False)]
            return _replication_statistics(methods, looks, beta, variance, u, v)

        results = _map_replications(one, replications, threads)
        report.rows.extend(_aggregate(methods, replications, n, levels, results))
    return report

"""Sliding-window change detection between two co-registered covariance rasters.

For every pixel whose w x w neighborhood fits inside the grid, the window
pixels of each date form a sample and a two-sample test yields the per-pixel
p-value.  Low p-values evidence change.  The border frame keeps the output
geometry equal to the input by carrying p-value 1 ("no evidence").
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hypotests
from .errors import (
    DomainError,
    GeometryMismatch,
    NoConvergence,
    NotPositiveDefinite,
)

__all__ = [
    "CovRaster",
    "PValueMap",
    "ChangeMask",
    "DetectionMetrics",
    "detect",
    "threshold",
    "score",
    "DEFAULT_CUT",
]

DEFAULT_CUT = 1e-4


@dataclass
class CovRaster:
    """Grid of per-pixel covariance matrices with a nominal number of looks."""

    pixels: np.ndarray  # (rows, cols, p, p) complex128
    nominal_looks: float

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.complex128)
        if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
            raise GeometryMismatch(f"expected (rows, cols, p, p) pixels, got {arr.shape}")
        if self.nominal_looks <= arr.shape[2] - 1:
            raise DomainError(
                f"nominal looks {self.nominal_looks} must exceed p - 1 = {arr.shape[2] - 1}"
            )
        self.pixels = arr

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]

    @property
    def p(self) -> int:
        return self.pixels.shape[2]

    def flatten(self) -> np.ndarray:
        """All pixels as one (rows * cols, p, p) sample."""
        return self.pixels.reshape(-1, self.p, self.p)


@dataclass
class PValueMap:
    values: np.ndarray  # (rows, cols) float64 in [0, 1]
    window: int
    method: str
    border_value: float = 1.0
    failures: int = 0

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass
class ChangeMask:
    values: np.ndarray  # (rows, cols) bool, True = change

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DetectionMetrics:
    """Confusion counts and the derived rates.

    FP/FN follow the conventional reading (FP: detector flags change where
    the reference shows none).  FA and DR use detector-referenced
    denominators: FA divides by the pixels the detector left unchanged, DR by
    the pixels the detector flagged.  Degenerate denominators yield NaN and
    are listed in ``degenerate``.
    """

    tp: int
    tn: int
    fp: int
    fn: int
    fa: float
    dr: float
    kappa: float
    paper_literal: bool = False
    degenerate: tuple[str, ...] = field(default=())

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "tn": self.tn,
            "fp": self.fp,
            "fn": self.fn,
            "fa": self.fa,
            "dr": self.dr,
            "kappa": self.kappa,
            "convention": "paper-literal" if self.paper_literal else "conventional",
            "degenerate": list(self.degenerate),
        }


def _resolve_looks(before: CovRaster, after: CovRaster, looks) -> float | None:
    if looks is None:
        return None
    if looks == "nominal":
        if not math.isclose(before.nominal_looks, after.nominal_looks):
            raise DomainError(
                "the rasters carry different nominal looks "
                f"({before.nominal_looks:g} vs {after.nominal_looks:g}); "
                "pass an explicit value"
            )
        return float(before.nominal_looks)
    return float(looks)


def detect(
    before: CovRaster,
    after: CovRaster,
    method: str = "shannon",
    window: int = 3,
    looks="nominal",
    beta: float = 0.1,
    variance: str = "auto",
    threads: int = 1,
) -> PValueMap:
    """Per-pixel p-value map of the two-sample test over sliding windows.

    Parameters
    ----------
    before, after :
        Co-registered rasters with identical geometry and channel count.
    method :
        One of ``lr``, ``kl``, ``shannon``, ``renyi``.
    window :
        Odd window width w with w^2 >= 2; all w^2 window pixels of a date
        form that date's sample, stride 1.
    looks :
        ``"nominal"`` (default) takes the shared raster header value as the
        known number of looks; a float fixes it explicitly; ``None``
        estimates it per window.
    threads :
        Worker threads over row blocks; 1 is serial, 0 picks a default.
        Output is identical for any thread count.

    Per-window estimation failures leave p-value 1 and are tallied in
    ``failures``.
    """
    if (before.rows, before.cols, before.p) != (after.rows, after.cols, after.p):
        raise GeometryMismatch(
            f"raster geometry mismatch: {(before.rows, before.cols, before.p)} "
            f"vs {(after.rows, after.cols, after.p)}"
        )
    if method not in hypotests.METHODS:
        raise DomainError(f"unknown method {method!r}")
    if window % 2 == 0 or window < 1 or window * window < 2:
        raise DomainError(f"window must be odd with at least 2 pixels, got {window}")
    fixed_looks = _resolve_looks(before, after, looks)

    rows, cols, p = before.rows, before.cols, before.p
    half = window // 2
    out = np.ones((rows, cols), dtype=np.float64)
    if rows < window or cols < window:
        return PValueMap(out, window, method)

    failures = [0]

    def run_rows(row_range):
        fails = 0
        for r in row_range:
            for c in range(half, cols - half):
                win_a = before.pixels[r - half : r + half + 1, c - half : c + half + 1]
                win_b = after.pixels[r - half : r + half + 1, c - half : c + half + 1]
                xa = win_a.reshape(-1, p, p)
                xb = win_b.reshape(-1, p, p)
                try:
                    res = hypotests.two_sample_test(
                        xa, xb, method, looks=fixed_looks, beta=beta, variance=variance
                    )
                    out[r, c] = res.p_value
                except (NoConvergence, NotPositiveDefinite, DomainError):
                    fails += 1
        return fails

    interior = range(half, rows - half)
    if threads == 1:
        failures[0] = run_rows(interior)
    else:
        workers = threads if threads > 0 else None
        chunks = np.array_split(np.asarray(interior), max(1, (threads or 4)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures[0] = sum(pool.map(run_rows, [c for c in chunks if c.size]))

    return PValueMap(out, window, method, failures=failures[0])


def threshold(pmap: PValueMap, cut: float = DEFAULT_CUT) -> ChangeMask:
    """Binary change mask: change iff p-value <= cut."""
    if not 0.0 < cut < 1.0:
        raise DomainError(f"cut must lie in (0, 1), got {cut}")
    return ChangeMask(pmap.values <= cut)


def score(mask: ChangeMask, reference: ChangeMask, paper_literal: bool = False) -> DetectionMetrics:
    """Detection-quality metrics of a change mask against a reference mask.

    ``paper_literal`` swaps the FP and FN labels, matching a legend that
    inverts the usual convention; all derived rates follow the swap.
    """
    det = np.asarray(mask.values, dtype=bool)
    ref = np.asarray(reference.values, dtype=bool)
    if det.shape != ref.shape:
        raise GeometryMismatch(f"mask geometry {det.shape} != reference {ref.shape}")

    tp = int(np.sum(det & ref))
    tn = int(np.sum(~det & ~ref))
    fp = int(np.sum(det & ~ref))
    fn = int(np.sum(~det & ref))
    if paper_literal:
        fp, fn = fn, fp

    total = det.size
    degenerate = []

    # FA and DR divide by detector-referenced counts by definition.
    unchanged_by_detector = int(np.sum(~det))
    changed_by_detector = int(np.sum(det))
    if unchanged_by_detector == 0:
        fa = float("nan")
        degenerate.append("fa")
    else:
        fa = (fp + fn) / unchanged_by_detector
    if changed_by_detector == 0:
        dr = float("nan")
        degenerate.append("dr")
    else:
        dr = tp / changed_by_detector

    p_tp, p_tn, p_fp, p_fn = (x / total for x in (tp, tn, fp, fn))
    agreement = 1.0 - p_fp - p_fn
    chance = (p_tp + p_fp) * (p_tp + p_fn) + (p_tn + p_fp) * (p_tn + p_fn)
    if math.isclose(chance, 1.0):
        kappa = float("nan")
        degenerate.append("kappa")
    else:
        kappa = (agreement - chance) / (1.0 - chance)

    return DetectionMetrics(
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        fa=fa,
        dr=dr,
        kappa=kappa,
        paper_literal=paper_literal,
        degenerate=tuple(degenerate),
    )

"""Hypothesis-test result record and the decision rule."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-sided test: statistic, reference df, and its p-value.

    ``looks`` is the fixed number of looks used by the test, or ``None`` when
    the number of looks was estimated from each sample.  ``df`` is ``None``
    for tests without a chi-square reference (the Kolmogorov-Smirnov check).
    """

    statistic: float
    df: float | None
    p_value: float
    method: str
    looks: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")

    @property
    def looks_mode(self) -> str:
        return "estimated" if self.looks is None else f"known({self.looks:g})"

    def reject(self, alpha: float) -> bool:
        return decide(self, alpha)


def decide(result: TestResult, alpha: float) -> bool:
    """Reject the null hypothesis iff the p-value is at most ``alpha``.

    The boundary case p == alpha rejects.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {alpha}")
    return result.p_value <= alpha

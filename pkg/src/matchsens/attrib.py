"""One-sided sensitivity intervals for the number of attributable effects.

For a hypothesised count ``a`` the ``a`` attributed pairs are removed from the
``T`` treated-positive discordant pairs and the remaining ``S - a`` pairs are
compared with a normal reference.  Plausibility of ``a`` attributable effects
implies plausibility of ``a + 1``, so scanning ``a = 0, 1, ...`` until the
deviate falls below ``Phi^-1(1 - alpha)`` yields the interval ``A >= a_bar``.

Three references are supported:

* no bias: every pair has probability 1/2;
* worst case: every remaining pair has probability ``Gamma / (1 + Gamma)``;
* average case: the mean probability over *all* pairs is at most
  ``Gamma' / (1 + Gamma')``.  The attributed pairs contribute at least
  ``p_min`` each, which fixes the mean over the remaining pairs, and the
  equal-probability variance bounds the true variance from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    Calibration,
    DegenerateReference,
    DegenerateTrimmedMean,
    DiscordantSummary,
    check_probability,
)
from .dist import normal_quantile


@dataclass(frozen=True)
class AttributableConfig:
    alpha: float = 0.05
    gamma: float = 1.0
    calibration: Calibration = Calibration.WORST_CASE
    p_min: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < float(self.alpha) < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not math.isfinite(self.gamma) or self.gamma < 1.0:
            raise ValueError(f"gamma must be a finite value >= 1, got {self.gamma}")
        object.__setattr__(self, "calibration", Calibration(self.calibration))
        p_min = check_probability("p_min", self.p_min)
        if p_min >= self.p_gamma:
            raise ValueError(
                f"p_min={p_min} must be below gamma/(1+gamma)={self.p_gamma:.6g}"
            )

    @property
    def p_gamma(self) -> float:
        return self.gamma / (1.0 + self.gamma)

    @property
    def critical_value(self) -> float:
        return normal_quantile(1.0 - self.alpha)


@dataclass(frozen=True)
class TraceEntry:
    a: int
    p_a: float
    deviate: float


@dataclass(frozen=True)
class AttributableResult:
    """Lower end of the one-sided interval for attributable effects.

    ``a_lower_inclusive`` is the first ``a`` found plausible, so the interval
    is ``A >= a_lower_inclusive``; ``a_star_exclusive`` states the same
    interval as ``A > a_star_exclusive``.
    """

    a_lower_inclusive: int
    config: AttributableConfig
    summary: DiscordantSummary
    implied_worst_case_gamma: Optional[float] = None
    deviate_trace: tuple[TraceEntry, ...] = field(default=(), repr=False)
    stop_reason: str = "below_critical"

    @property
    def a_star_exclusive(self) -> int:
        return self.a_lower_inclusive - 1

    def statement(self) -> str:
        level = round(100 * (1 - self.config.alpha), 6)
        level_txt = f"{level:g}%"
        if self.a_lower_inclusive == 0:
            core = "it is plausible that none of the events are attributable to the exposure"
        else:
            core = (
                f"it is plausible that {self.a_lower_inclusive} or more events "
                "are attributable to the exposure"
            )
        if self.config.calibration is Calibration.AVERAGE_CASE:
            bias = f"an average bias of at most Gamma'={self.config.gamma:g}"
        else:
            bias = f"a worst-case bias of at most Gamma={self.config.gamma:g}"
        return f"At the {level_txt} level, under {bias}, {core}."


def _check_a(summary: DiscordantSummary, a: int) -> None:
    if a < 0:
        raise ValueError(f"a must be non-negative, got {a}")
    if a >= summary.S:
        raise DegenerateReference(
            f"a={a} leaves no discordant pairs in the reference (S={summary.S})"
        )


def _deviate(summary: DiscordantSummary, a: int, p: float) -> float:
    remaining = summary.S - a
    return (summary.T - a - remaining * p) / math.sqrt(remaining * p * (1.0 - p))


def deviate_no_bias(summary: DiscordantSummary, a: int) -> float:
    _check_a(summary, a)
    remaining = summary.S - a
    return (summary.T - a - remaining / 2) / (math.sqrt(remaining) / 2)


def deviate_worst_case(summary: DiscordantSummary, a: int, gamma: float) -> float:
    _check_a(summary, a)
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    return _deviate(summary, a, gamma / (1.0 + gamma))


def trimmed_mean_probability(
    summary: DiscordantSummary, a: int, gamma_prime: float, p_min: float = 0.0
) -> float:
    """Mean probability over the ``S - a`` unattributed pairs.

    Solves ``((S - a) * p_a + a * p_min) / S = Gamma' / (1 + Gamma')``.
    """
    _check_a(summary, a)
    p_bar = gamma_prime / (1.0 + gamma_prime)
    return (summary.S * p_bar - a * p_min) / (summary.S - a)


def deviate_average_case(
    summary: DiscordantSummary, a: int, gamma_prime: float, p_min: float = 0.0
) -> tuple[float, float]:
    """Return ``(p_a, deviate)`` for the average-case reference at ``a``."""
    if gamma_prime < 1.0:
        raise ValueError(f"gamma_prime must be >= 1, got {gamma_prime}")
    p_a = trimmed_mean_probability(summary, a, gamma_prime, p_min)
    if p_a >= 1.0:
        raise DegenerateTrimmedMean(
            f"trimmed mean probability {p_a:.6g} >= 1 at a={a}; reference is degenerate"
        )
    if p_a <= 0.0:
        raise ValueError(f"trimmed mean probability {p_a:.6g} <= 0 at a={a}")
    return p_a, _deviate(summary, a, p_a)


def attributable_interval(
    summary: DiscordantSummary, config: AttributableConfig
) -> AttributableResult:
    """Scan ``a = 0, 1, ...`` and stop at the first plausible count."""
    if summary.S == 0:
        raise DegenerateReference("no discordant pairs")
    z_crit = config.critical_value
    average = config.calibration is Calibration.AVERAGE_CASE
    trace: list[TraceEntry] = []
    stop_reason = "below_critical"
    p_stop: Optional[float] = None

    a = 0
    while True:
        if a >= summary.S:
            # Every discordant pair attributed (only reachable when T == S).
            stop_reason = "exhausted"
            p_stop = None
            break
        if average:
            try:
                p_a, dev = deviate_average_case(summary, a, config.gamma, config.p_min)
            except DegenerateTrimmedMean:
                p_a = trimmed_mean_probability(summary, a, config.gamma, config.p_min)
                trace.append(TraceEntry(a, p_a, math.nan))
                stop_reason = "degenerate_trimmed_mean"
                p_stop = p_a
                break
        else:
            p_a = config.p_gamma
            dev = _deviate(summary, a, p_a)
        trace.append(TraceEntry(a, p_a, dev))
        if dev < z_crit:
            p_stop = p_a
            break
        if a >= summary.T:
            stop_reason = "cap_at_T"
            p_stop = p_a
            break
        a += 1

    implied = None
    if average:
        if p_stop is None or p_stop >= 1.0:
            implied = math.inf
        else:
            implied = p_stop / (1.0 - p_stop)
    return AttributableResult(
        a_lower_inclusive=a,
        config=config,
        summary=summary,
        implied_worst_case_gamma=implied,
        deviate_trace=tuple(trace),
        stop_reason=stop_reason,
    )

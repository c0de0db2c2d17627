"""Sensitivity analysis for McNemar's test of no treatment effect.

Under a bias of at most Gamma the null distribution of ``T`` is sandwiched
between Binomial(S, 1/(1+Gamma)) and Binomial(S, Gamma/(1+Gamma)).  The same
upper reference stays valid when Gamma bounds only the *average* assignment
odds ``p_bar/(1-p_bar)``, so every search result here carries both readings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .core import (
    CannotTrimMoreThanT,
    DegenerateVariance,
    DiscordantSummary,
    GammaLike,
    NoDiscordantPairs,
    PValueBounds,
    as_gamma_spec,
)
from .dist import binom_upper_tail, normal_sf

GAMMA_CAP = 1e6
DEFAULT_TOL = 1e-4


class Method(str, Enum):
    EXACT = "exact"
    NORMAL = "normal"


class SensStatus(str, Enum):
    SENSITIVE_AT = "sensitive_at"
    NOT_SIGNIFICANT_AT_GAMMA_ONE = "not_significant_at_gamma_one"
    INSENSITIVE_UP_TO_CAP = "insensitive_up_to_cap"


VALID_FOR_WORST_AND_AVERAGE = "valid_for_worst_and_average"


@dataclass(frozen=True)
class SensResult:
    """Outcome of a Gamma_sens search.

    ``gamma_sens`` is ``None`` when the test is not significant even without
    bias, and equals the cap when the upper p-value never crosses ``alpha``.
    """

    status: SensStatus
    gamma_sens: Optional[float]
    method: Method
    alpha: float
    summary: DiscordantSummary
    calibration_note: str = VALID_FOR_WORST_AND_AVERAGE
    continuity: bool = False
    trimmed: int = 0

    @property
    def is_finite(self) -> bool:
        return self.status is SensStatus.SENSITIVE_AT


def _tail(S: int, T: int, p: float, method: Method, continuity: bool) -> float:
    if method is Method.EXACT:
        return binom_upper_tail(S, p, T)
    var = S * p * (1.0 - p)
    if var <= 0.0:
        raise DegenerateVariance(f"reference variance S*p*(1-p) is zero at p={p}")
    shift = 0.5 if continuity else 0.0
    return normal_sf((T - shift - S * p) / math.sqrt(var))


def pvalue_bounds(
    summary: DiscordantSummary,
    gamma: GammaLike,
    method: Method | str = Method.EXACT,
    continuity: bool = False,
) -> PValueBounds:
    """Bounds on the one-sided p-value ``P(T >= observed)`` under bias ``gamma``.

    ``continuity`` only affects the normal method.
    """
    spec = as_gamma_spec(gamma)
    method = Method(method)
    if summary.S == 0:
        raise NoDiscordantPairs("no discordant pairs: the McNemar test is undefined")
    p_hi = spec.p_gamma
    p_lo = 1.0 - p_hi
    upper = _tail(summary.S, summary.T, p_hi, method, continuity)
    lower = _tail(summary.S, summary.T, p_lo, method, continuity)
    # The two tails agree at Gamma=1 up to rounding.
    return PValueBounds(lower=min(lower, upper), upper=upper)


def upper_pvalue(
    summary: DiscordantSummary,
    gamma: float,
    method: Method | str = Method.EXACT,
    continuity: bool = False,
) -> float:
    if summary.S == 0:
        raise NoDiscordantPairs("no discordant pairs: the McNemar test is undefined")
    p = as_gamma_spec(gamma).p_gamma
    return _tail(summary.S, summary.T, p, Method(method), continuity)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def gamma_sens_search(
    summary: DiscordantSummary,
    alpha: float = 0.05,
    method: Method | str = Method.EXACT,
    tol: float = DEFAULT_TOL,
    continuity: bool = False,
) -> SensResult:
    """Largest Gamma whose upper p-value bound is still at most ``alpha``.

    Bisection on the monotone upper bound; the returned value ``g`` satisfies
    ``p(g) <= alpha < p(g + tol)``.
    """
    alpha = _check_alpha(alpha)
    method = Method(method)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def pval(g: float) -> float:
        return upper_pvalue(summary, g, method, continuity)

    def result(status: SensStatus, g: Optional[float]) -> SensResult:
        return SensResult(
            status=status,
            gamma_sens=g,
            method=method,
            alpha=alpha,
            summary=summary,
            continuity=continuity,
        )

    if pval(1.0) > alpha:
        return result(SensStatus.NOT_SIGNIFICANT_AT_GAMMA_ONE, None)

    lo, hi = 1.0, 2.0
    while pval(hi) <= alpha:
        if hi >= GAMMA_CAP:
            return result(SensStatus.INSENSITIVE_UP_TO_CAP, GAMMA_CAP)
        lo, hi = hi, min(2.0 * hi, GAMMA_CAP)

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pval(mid) <= alpha:
            lo = mid
        else:
            hi = mid
    return result(SensStatus.SENSITIVE_AT, lo)


def trim_count(S: int, beta: float) -> int:
    """Number of pairs dropped for trimming fraction ``beta``: ceil(beta * S)."""
    # Rounding guards against 0.1 * 190 == 19.000000000000004.
    return math.ceil(round(beta * S, 9))


def trimmed_summary(summary: DiscordantSummary, beta: float) -> DiscordantSummary:
    beta = float(beta)
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    d = trim_count(summary.S, beta)
    if d > summary.T:
        raise CannotTrimMoreThanT(
            f"trimming {d} pairs exceeds the {summary.T} treated-positive pairs"
        )
    return replace(summary, S=summary.S - d, T=summary.T - d)


def trimmed_gamma_search(
    summary: DiscordantSummary,
    beta: float,
    alpha: float = 0.05,
    method: Method | str = Method.EXACT,
    tol: float = DEFAULT_TOL,
    continuity: bool = False,
) -> SensResult:
    """Worst-case search after discarding ``ceil(beta*S)`` treated-positive pairs.

    Those pairs are presumed to carry unbounded bias; the remaining pairs are
    analysed with the ordinary worst-case bound.
    """
    trimmed = trimmed_summary(summary, beta)
    res = gamma_sens_search(trimmed, alpha, method, tol, continuity)
    return replace(res, trimmed=summary.S - trimmed.S)

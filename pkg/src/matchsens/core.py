"""Domain types shared by every analysis module.

A matched-pair (or case-crossover) study with binary exposure and outcome is
summarized by three integers: the number of discordant pairs ``S``, McNemar's
statistic ``T`` (discordant pairs whose exposed window is the one with the
event), and ``c_plus`` (concordant pairs exposed in both windows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

MAX_COUNT = 2**31 - 1


class SensitivityError(ValueError):
    """Base class for analysis-level failures (as opposed to bad arguments)."""

    code = "sensitivity_error"


class NoDiscordantPairs(SensitivityError):
    code = "no_discordant_pairs"


class DegenerateVariance(SensitivityError):
    code = "degenerate_variance"


class CannotTrimMoreThanT(SensitivityError):
    code = "cannot_trim_more_than_T"


class UnboundedAverageBias(SensitivityError):
    code = "unbounded_average_bias"


class DegenerateReference(SensitivityError):
    code = "degenerate_reference"


class DegenerateTrimmedMean(SensitivityError):
    code = "degenerate_trimmed_mean"


class OddsOutsideGamma(SensitivityError):
    code = "odds_outside_gamma"


class Calibration(str, Enum):
    WORST_CASE = "worst_case"
    AVERAGE_CASE = "average_case"


def _check_count(name: str, value: object) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    if value > MAX_COUNT:
        raise ValueError(f"{name}={value} exceeds the supported maximum {MAX_COUNT}")
    return value


def check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Paired 2x2 counts; rows are the hazard window, columns the control window.

    ``n_hazard_only`` is the D(+,-) cell (exposed in the hazard window only) and
    ``n_control_only`` the D(-,+) cell.
    """

    n_both: int
    n_hazard_only: int
    n_control_only: int
    n_neither: int

    def __post_init__(self) -> None:
        for name in ("n_both", "n_hazard_only", "n_control_only", "n_neither"):
            _check_count(name, getattr(self, name))
        if self.total > MAX_COUNT:
            raise ValueError(f"table total {self.total} exceeds {MAX_COUNT}")

    @property
    def total(self) -> int:
        return self.n_both + self.n_hazard_only + self.n_control_only + self.n_neither


@dataclass(frozen=True)
class DiscordantSummary:
    S: int
    T: int
    c_plus: int = 0

    def __post_init__(self) -> None:
        _check_count("S", self.S)
        _check_count("T", self.T)
        _check_count("c_plus", self.c_plus)
        if self.T > self.S:
            raise ValueError(f"T={self.T} cannot exceed S={self.S}")


def summarize(table: ContingencyTable2x2) -> DiscordantSummary:
    return DiscordantSummary(
        S=table.n_hazard_only + table.n_control_only,
        T=table.n_hazard_only,
        c_plus=table.n_both,
    )


@dataclass(frozen=True)
class GammaSpec:
    """A bias magnitude together with how it is to be read.

    Under ``worst_case`` the value bounds the assignment odds in every pair;
    under ``average_case`` it bounds ``p_bar / (1 - p_bar)`` where ``p_bar`` is
    the mean of the per-pair probabilities.  The binomial reference
    distribution is the same in both cases.
    """

    gamma: float
    calibration: Calibration = Calibration.WORST_CASE

    def __post_init__(self) -> None:
        g = float(self.gamma)
        if math.isnan(g) or g < 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "calibration", Calibration(self.calibration))

    @property
    def p_gamma(self) -> float:
        if math.isinf(self.gamma):
            return 1.0
        return self.gamma / (1.0 + self.gamma)


GammaLike = Union[GammaSpec, float, int]


def as_gamma_spec(gamma: GammaLike) -> GammaSpec:
    return gamma if isinstance(gamma, GammaSpec) else GammaSpec(gamma)


@dataclass(frozen=True)
class PValueBounds:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid p-value bounds [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class ProbabilityVector:
    """Per-pair success probabilities for exact Poisson-Binomial work."""

    p: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(x) for x in self.p)
        for i, x in enumerate(values):
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"p[{i}]={x} is not a probability")
        object.__setattr__(self, "p", values)

    def __len__(self) -> int:
        return len(self.p)

    def __iter__(self):
        return iter(self.p)

    @property
    def S(self) -> int:
        return len(self.p)

    @property
    def total(self) -> float:
        return math.fsum(self.p)

    @property
    def p_bar(self) -> float:
        if not self.p:
            raise ValueError("p_bar is undefined for an empty vector")
        return min(1.0, self.total / len(self.p))


ProbabilityLike = Union[ProbabilityVector, Sequence[float], Iterable[float]]


def as_probability_vector(p: ProbabilityLike) -> ProbabilityVector:
    if isinstance(p, ProbabilityVector):
        return p
    return ProbabilityVector(tuple(p))

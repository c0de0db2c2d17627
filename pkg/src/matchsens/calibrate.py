"""Empirical calibration of the average-case bias from driving intermittency.

If a fraction ``rho`` of subjects were driving in the control window, the
assignment probability is ``p_driving`` for them and ``p_not_driving`` for the
rest, giving ``p_bar = (1 - rho) * p_not_driving + rho * p_driving`` and the
average-case bias ``p_bar / (1 - p_bar)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import UnboundedAverageBias, check_probability


@dataclass(frozen=True)
class IntermittencyCalibration:
    rho: float
    p_driving: float = 0.5
    p_not_driving: float = 1.0

    def __post_init__(self) -> None:
        for name in ("rho", "p_driving", "p_not_driving"):
            object.__setattr__(self, name, check_probability(name, getattr(self, name)))

    @property
    def p_bar(self) -> float:
        return (1.0 - self.rho) * self.p_not_driving + self.rho * self.p_driving


def gamma_prime_from_intermittency(cal: IntermittencyCalibration) -> float:
    p_bar = cal.p_bar
    if p_bar >= 1.0:
        raise UnboundedAverageBias(
            "p_bar = 1: every pair is certain to be exposed in the hazard window, "
            "so even the average-case bias is infinite"
        )
    return p_bar / (1.0 - p_bar)

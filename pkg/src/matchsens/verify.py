"""Exact and Monte Carlo checks of the tail orderings behind the analysis.

* ``theorem1_check``: a Poisson-Binomial upper tail against the binomial tail
  with the same mean probability.  The ordering is guaranteed for integer
  thresholds ``a >= ceil(S * p_bar) + 1``; at ``ceil(S * p_bar)`` itself it can
  fail (``p = [0.9, 0.6, 0.3]``, ``a = 2``), so both domains are reported.
* ``sandwich_check``: the worst-case bounds for vectors whose odds lie in
  ``[1/Gamma, Gamma]``.
* ``variance_jensen_check``: concavity of ``p(1 - p)``.
* ``simulate_tails``: seeded simulation under the logistic confounder model.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import OddsOutsideGamma, ProbabilityLike, as_probability_vector
from .dist import binom_upper_tail, poisson_binomial_upper_tails

SLACK = 1e-12
SHARD_SIZE = 10_000


def majorizes(x: Sequence[float], y: Sequence[float], tol: float = 1e-9) -> bool:
    """True iff ``x`` majorizes ``y`` (sorted-descending prefix sums dominate)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if abs(math.fsum(x) - math.fsum(y)) > tol:
        raise ValueError(f"sums differ: {math.fsum(x)} vs {math.fsum(y)}")
    px = np.cumsum(np.sort(x)[::-1])
    py = np.cumsum(np.sort(y)[::-1])
    return bool(np.all(px >= py - tol))


@dataclass(frozen=True)
class TailComparison:
    a: int
    lhs_tail: float
    rhs_tail: float
    holds: bool
    lower_tail: Optional[float] = None
    in_literal_domain: bool = True
    in_corrected_domain: bool = True


@dataclass(frozen=True)
class OrderingReport:
    records: tuple[TailComparison, ...]
    domain_note: str = ""
    literal_start: Optional[float] = None
    corrected_start: Optional[int] = None

    @property
    def holds_on_corrected_domain(self) -> bool:
        return all(r.holds for r in self.records if r.in_corrected_domain)

    @property
    def holds_on_literal_domain(self) -> bool:
        return all(r.holds for r in self.records if r.in_literal_domain)

    @property
    def holds_everywhere(self) -> bool:
        return all(r.holds for r in self.records)


def theorem1_check(p: ProbabilityLike) -> OrderingReport:
    """Compare P(T >= a) for Poisson-Binomial ``p`` with Binomial(S, p_bar)."""
    pv = as_probability_vector(p)
    S = pv.S
    if S == 0:
        raise ValueError("need at least one probability")
    p_bar = pv.p_bar
    mean = pv.total
    corrected = math.ceil(mean) + 1
    pb = poisson_binomial_upper_tails(pv)
    records = []
    for a in range(S + 1):
        rhs = binom_upper_tail(S, p_bar, a)
        records.append(
            TailComparison(
                a=a,
                lhs_tail=float(pb[a]),
                rhs_tail=rhs,
                holds=bool(pb[a] <= rhs + SLACK),
                in_literal_domain=a >= mean,
                in_corrected_domain=a >= corrected,
            )
        )
    note = (
        f"ordering guaranteed for integer a >= ceil(S*p_bar)+1 = {corrected}; "
        f"the literal domain a >= S*p_bar = {mean:.6g} is also reported"
    )
    return OrderingReport(tuple(records), note, literal_start=mean, corrected_start=corrected)


def _check_odds(pv, gamma: float) -> None:
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    lo = 1.0 / (1.0 + gamma)
    hi = gamma / (1.0 + gamma)
    for i, ps in enumerate(pv):
        # p in [1/(1+G), G/(1+G)] is the same condition as odds in [1/G, G].
        if not lo - SLACK <= ps <= hi + SLACK:
            raise OddsOutsideGamma(
                f"p[{i}]={ps} has odds outside [1/{gamma:g}, {gamma:g}]"
            )


def sandwich_check(p: ProbabilityLike, gamma: float) -> OrderingReport:
    """Check Binomial(S, 1/(1+G)) <= Poisson-Binomial(p) <= Binomial(S, G/(1+G)) in tails."""
    pv = as_probability_vector(p)
    _check_odds(pv, gamma)
    S = pv.S
    p_hi = gamma / (1.0 + gamma)
    p_lo = 1.0 - p_hi
    pb = poisson_binomial_upper_tails(pv)
    records = []
    for k in range(S + 1):
        upper = binom_upper_tail(S, p_hi, k)
        lower = binom_upper_tail(S, p_lo, k)
        ok = lower <= pb[k] + SLACK and pb[k] <= upper + SLACK
        records.append(TailComparison(k, float(pb[k]), upper, bool(ok), lower_tail=lower))
    return OrderingReport(tuple(records), f"all k in 0..{S}")


def variance_jensen_check(p: ProbabilityLike) -> tuple[float, float, bool]:
    pv = as_probability_vector(p)
    if pv.S == 0:
        raise ValueError("need at least one probability")
    lhs = math.fsum(ps * (1.0 - ps) for ps in pv)
    p_bar = pv.p_bar
    rhs = pv.S * p_bar * (1.0 - p_bar)
    return lhs, rhs, lhs <= rhs + SLACK


@dataclass(frozen=True)
class SimulationConfig:
    u_pairs: tuple[tuple[float, float], ...]
    gamma_log: float
    reps: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        pairs = tuple((float(u1), float(u2)) for u1, u2 in self.u_pairs)
        for i, (u1, u2) in enumerate(pairs):
            if not (0.0 <= u1 <= 1.0 and 0.0 <= u2 <= 1.0):
                raise ValueError(f"u pair {i} = ({u1}, {u2}) is outside [0, 1]")
        object.__setattr__(self, "u_pairs", pairs)
        if not self.gamma_log >= 0.0 or math.isinf(self.gamma_log):
            raise ValueError(f"gamma_log must be finite and >= 0, got {self.gamma_log}")
        if isinstance(self.reps, bool) or int(self.reps) != self.reps or self.reps < 1:
            raise ValueError(f"reps must be a positive integer, got {self.reps}")
        object.__setattr__(self, "reps", int(self.reps))

    def probabilities(self) -> np.ndarray:
        diff = np.array([u1 - u2 for u1, u2 in self.u_pairs])
        return 1.0 / (1.0 + np.exp(-self.gamma_log * diff))


@dataclass(frozen=True)
class SimulationResult:
    p: tuple[float, ...]
    reps: int
    seed: int
    thresholds: tuple[int, ...]
    empirical: tuple[float, ...]
    std_errors: tuple[float, ...]
    exact: tuple[float, ...]
    z_scores: tuple[float, ...]

    def agrees(self, n_se: float = 3.5) -> bool:
        return all(abs(z) <= n_se for z in self.z_scores)


def _shard_counts(p: np.ndarray, reps: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    draws = rng.random((reps, p.size)) < p
    return np.bincount(draws.sum(axis=1), minlength=p.size + 1)


def simulate_tails(
    config: SimulationConfig, thresholds: Sequence[int], workers: int = 1
) -> SimulationResult:
    """Monte Carlo estimates of P(T >= a) under the logistic confounder model.

    Replications are split into fixed-size shards, each driven by its own
    Philox stream spawned from ``config.seed``; shard counts are merged in
    shard order, so the output does not depend on ``workers``.
    """
    p = config.probabilities()
    S = p.size
    for a in thresholds:
        if not 0 <= a <= S:
            raise ValueError(f"threshold {a} outside [0, {S}]")
    n_shards = -(-config.reps // SHARD_SIZE)
    sizes = [SHARD_SIZE] * (n_shards - 1) + [config.reps - SHARD_SIZE * (n_shards - 1)]
    children = np.random.SeedSequence(config.seed).spawn(n_shards)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda args: _shard_counts(p, *args), zip(sizes, children)))
    else:
        parts = [_shard_counts(p, n, c) for n, c in zip(sizes, children)]
    counts = np.sum(parts, axis=0)
    upper_counts = np.cumsum(counts[::-1])[::-1]

    exact_all = poisson_binomial_upper_tails(p)
    reps = config.reps
    emp, se, exact, z = [], [], [], []
    for a in thresholds:
        phat = upper_counts[a] / reps
        q = float(exact_all[a])
        emp.append(float(phat))
        se.append(math.sqrt(phat * (1.0 - phat) / reps))
        exact.append(q)
        # Agreement is judged with the standard error under the exact tail,
        # which stays positive when the empirical tail is 0 or 1.
        se_null = math.sqrt(q * (1.0 - q) / reps)
        diff = phat - q
        if se_null > 0:
            z.append(diff / se_null)
        else:
            z.append(0.0 if abs(diff) <= SLACK else math.inf)
    return SimulationResult(
        p=tuple(float(x) for x in p),
        reps=reps,
        seed=config.seed,
        thresholds=tuple(int(a) for a in thresholds),
        empirical=tuple(emp),
        std_errors=tuple(se),
        exact=tuple(exact),
        z_scores=tuple(z),
    )

"""Distribution kernels: binomial tails, exact Poisson-Binomial, standard normal.

Binomial point masses use Loader's saddle-point expansion, which keeps full
double precision without factorials or ``lgamma`` of large arguments.  Tails
are accumulated from that anchor by the ratio recurrence and summed with
``math.fsum``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ProbabilityLike, as_probability_vector

_LN_2PI = math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)

# Series coefficients of the Stirling remainder: 1/12, 1/360, 1/1260, 1/1680, 1/1188.
_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0


def _stirlerr(n: int) -> float:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n)."""
    if n <= 15:
        if n == 0:
            return 0.0
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - 0.5 * _LN_2PI
    nn = float(n) * n
    if n > 500:
        return (_S0 - _S1 / nn) / n
    if n > 80:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, np_: float) -> float:
    """Deviance term x*log(x/np) + np - x, stable when x is close to np."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
        return s
    return x * math.log(x / np_) + np_ - x


def _binom_pmf(x: int, n: int, p: float, q: float) -> float:
    if p == 0.0:
        return 1.0 if x == 0 else 0.0
    if q == 0.0:
        return 1.0 if x == n else 0.0
    if x == 0:
        if n == 0:
            return 1.0
        lc = -_bd0(n, n * q) - n * p if p < 0.1 else n * math.log(q)
        return math.exp(lc)
    if x == n:
        lc = -_bd0(n, n * p) - n * q if q < 0.1 else n * math.log(p)
        return math.exp(lc)
    lc = (
        _stirlerr(n)
        - _stirlerr(x)
        - _stirlerr(n - x)
        - _bd0(x, n * p)
        - _bd0(n - x, n * q)
    )
    lf = _LN_2PI + math.log(x) + math.log1p(-x / n)
    return math.exp(lc - 0.5 * lf)


def binom_pmf(n: int, p: float, k: int) -> float:
    """P(X = k) for X ~ Binomial(n, p)."""
    _check_binom_args(n, p, k)
    return _binom_pmf(k, n, p, 1.0 - p)


def _check_binom_args(n: int, p: float, k: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 0 <= k <= n:
        raise ValueError(f"k must be an integer in [0, {n}], got {k!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


# Stop accumulating once terms fall this far below the running total.
_NEGLIGIBLE = 1e-18


def binom_upper_tail(n: int, p: float, k: int) -> float:
    """P(X >= k) for X ~ Binomial(n, p).

    Sums directly when ``k`` lies above the mean; otherwise sums the lower tail
    ``P(X <= k - 1)`` and takes the complement, so the summed side is always
    the one whose terms decay away from the anchor.
    """
    _check_binom_args(n, p, k)
    n, k = int(n), int(k)
    if k == 0:
        return 1.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    q = 1.0 - p
    odds = p / q
    if k > n * p:
        term = _binom_pmf(k, n, p, q)
        terms = [term]
        for j in range(k, n):
            term *= (n - j) / (j + 1) * odds
            terms.append(term)
            if term < _NEGLIGIBLE * terms[0]:
                break
        return min(1.0, math.fsum(terms))
    j = k - 1
    term = _binom_pmf(j, n, p, q)
    terms = [term]
    for i in range(j, 0, -1):
        term *= i / ((n - i + 1) * odds)
        terms.append(term)
        if term < _NEGLIGIBLE * terms[0]:
            break
    return max(0.0, 1.0 - math.fsum(terms))


def binom_pmf_vector(n: int, p: float) -> np.ndarray:
    return np.array([_binom_pmf(k, n, p, 1.0 - p) for k in range(n + 1)])


def poisson_binomial_pmf(p: ProbabilityLike) -> np.ndarray:
    """Exact pmf of a sum of independent Bernoulli(p_s) trials.

    Trials are folded in one at a time; after ``s`` trials the mass vector has
    length ``s + 1``.  An empty vector gives the point mass at zero.
    """
    probs = as_probability_vector(p).p
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for s, ps in enumerate(probs, start=1):
        # Update in place from the top so pmf[:s] still holds the previous step.
        pmf[1 : s + 1] = pmf[1 : s + 1] * (1.0 - ps) + pmf[0:s] * ps
        pmf[0] *= 1.0 - ps
    return pmf


def poisson_binomial_upper_tail(p: ProbabilityLike, k: int) -> float:
    pmf = poisson_binomial_pmf(p)
    S = len(pmf) - 1
    if isinstance(k, bool) or not 0 <= k <= S:
        raise ValueError(f"k must be an integer in [0, {S}], got {k!r}")
    return min(1.0, math.fsum(pmf[k:]))


def poisson_binomial_upper_tails(p: ProbabilityLike) -> np.ndarray:
    """All upper tails P(T >= k) for k = 0..S in one pass."""
    pmf = poisson_binomial_pmf(p)
    return np.array([min(1.0, math.fsum(pmf[k:])) for k in range(len(pmf))])


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def normal_sf(z: float) -> float:
    """Upper tail 1 - Phi(z), accurate far into the right tail."""
    return 0.5 * math.erfc(z / _SQRT2)


def normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z - 0.5 * _LN_2PI)


# Acklam's rational approximation, used as the starting point for refinement.
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549671010322563e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def _acklam(q: float) -> float:
    if q < _P_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
        return num / den
    r = q - 0.5
    t = r * r
    num = (((((_A[0] * t + _A[1]) * t + _A[2]) * t + _A[3]) * t + _A[4]) * t + _A[5]) * r
    den = ((((_B[0] * t + _B[1]) * t + _B[2]) * t + _B[3]) * t + _B[4]) * t + 1.0
    return num / den


def normal_quantile(q: float) -> float:
    """Inverse of :func:`normal_cdf` on the open interval (0, 1)."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {q}")
    if q > 0.5:
        # 1 - q is exact here, and the lower-tail branch is the accurate one.
        return -normal_quantile(1.0 - q)
    x = _acklam(q)
    # One Halley step against the erfc-based cdf; cubic convergence absorbs the
    # approximation error in the tails.
    u = (normal_cdf(x) - q) / normal_pdf(x)
    return x - u / (1.0 + 0.5 * x * u)

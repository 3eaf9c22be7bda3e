"""Binomial tails, Gaussian tail approximations, and derived bands.

Conventions: S(n) is Binomial(n, 1/2); the signed sum is 2*S(n) - n.
Tail probabilities P(S >= x) for non-integer x mean P(S >= ceil(x)).
Logarithms in threshold formulas are natural; base 2 appears only in
cardinality exponents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

_RATIONAL_LIMIT = 256
_FLOAT_N_LIMIT = 10**6
_LOG2 = math.log(2.0)


def _log_comb(n, k):
    """ln C(n, k), vectorized."""
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def binom_tail_exact(n: int, t: int, mode: str = "float"):
    """P(Binomial(n, 1/2) >= t).

    float mode: log-space terms summed with compensated (exact) summation;
    relative error within 1e-9 for n <= 10^6.  rational mode: exact Fraction,
    available for n <= 256.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if mode not in ("float", "rational"):
        raise ValueError("mode must be 'float' or 'rational'")
    if mode == "rational":
        if n > _RATIONAL_LIMIT:
            raise ValueError(f"rational mode supports n <= {_RATIONAL_LIMIT}")
        if t < 0:
            return Fraction(1)
        if t > n:
            return Fraction(0)
        return Fraction(sum(math.comb(n, j) for j in range(t, n + 1)), 2**n)
    if n > _FLOAT_N_LIMIT:
        raise ValueError(f"float mode supports n <= {_FLOAT_N_LIMIT}")
    if t < 0:
        return 1.0
    if t > n:
        return 0.0
    js = np.arange(t, n + 1, dtype=np.float64)
    logs = _log_comb(float(n), js) - n * _LOG2
    peak = float(logs.max())
    terms = np.exp(logs - peak)
    total = math.fsum(np.sort(terms))
    return min(1.0, math.exp(peak) * total)


def signed_sum_tail_exact(n: int, a: float, mode: str = "float"):
    """P(2*S(n) - n > a), strict."""
    x = (n + a) / 2.0
    t = math.floor(x) + 1 if float(x).is_integer() else math.ceil(x)
    return binom_tail_exact(n, int(t), mode=mode)


def ml_tail(c: float, n: int, form: str = "closed") -> float:
    """Gaussian approximations to P(S(n) >= floor(n/2) + c*sqrt(n)).

    closed: exp(-2 c^2) / (2 c sqrt(2 pi)); integral: sqrt(2/pi) times the
    upper Gaussian integral from c, i.e. erfc(sqrt(2) c) / 2.  Both are
    asymptotic in n; n is validated but does not enter the value.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if form == "closed":
        if c <= 0:
            raise ValueError("closed form needs c > 0")
        return math.exp(-2.0 * c * c) / (2.0 * c * math.sqrt(2.0 * math.pi))
    if form == "integral":
        if c < 0:
            raise ValueError("integral form needs c >= 0")
        return math.erfc(math.sqrt(2.0) * c) / 2.0
    raise ValueError("form must be 'closed' or 'integral'")


@dataclass(frozen=True)
class PointMassBound:
    bound: float
    exact: float


def binom_point_lower_bound(n: int, c: int) -> PointMassBound:
    """Lower-bound model and exact value of P(S(n) = floor(n/2) + c)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    j = n // 2 + c
    if j < 0 or j > n:
        raise ValueError("c out of range for the point mass")
    frac = 0.5 if n % 2 else 0.0
    bound = 2.0 ** (-4.0 * (c + frac) ** 2 / n) * math.sqrt(2.0 / (math.pi * n))
    if n <= 4096:
        exact = float(Fraction(math.comb(n, j), 2**n))
    else:
        exact = math.exp(float(_log_comb(float(n), float(j))) - n * _LOG2)
    return PointMassBound(bound=bound, exact=exact)


def hoeffding_bound(n: int, a: float) -> float:
    """exp(-a^2 / (2 n)), an upper bound for P(2*S(n) - n > a)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if a <= 0:
        raise ValueError("a must be positive")
    return math.exp(-a * a / (2.0 * n))


def collision_free_probability(length: int, seed_count: int) -> float:
    """Probability that seed_count iid uniform length-bit sequences are
    pairwise distinct: product over i < seed_count of (1 - i / 2^length)."""
    if length < 1:
        raise ValueError("length must be at least 1")
    if seed_count < 1:
        raise ValueError("seed_count must be at least 1")
    if seed_count == 1:
        return 1.0
    if length < 63 and seed_count > (1 << length):
        return 0.0
    if seed_count <= (1 << 22):
        scale = math.ldexp(1.0, -length) if length <= 1074 else 0.0
        i = np.arange(1, seed_count, dtype=np.float64)
        return math.exp(math.fsum(np.log1p(-i * scale)))
    # Wider samples: in any regime where the product does not underflow to
    # zero, every factor is within 2^-18 of 1, so three log-series terms
    # with exact integer power sums carry full double accuracy.
    s = seed_count - 1
    s1 = s * (s + 1) // 2
    s2 = s * (s + 1) * (2 * s + 1) // 6
    u = Fraction(1, 1 << length)
    log_p = -float(u * s1 + u * u * Fraction(s2, 2) + u**3 * Fraction(s1 * s1, 3))
    return math.exp(log_p)


@dataclass(frozen=True)
class RkResult:
    r: int
    achievable: bool
    regime: int
    threshold: float
    m: int


def rk_threshold(length: int, k: int, seed_count: int) -> RkResult:
    """Largest r such that P(S(m) >= (m + r)/2) clears the counting
    threshold, with m = floor(length/3).

    Small-cardinality regime (log2(seed_count) <= m^(1/4)):
        k^2 ln(length) / (C(m+1, k-1) * seed_count^k);
    otherwise:
        k^2 ln(length) / ((m+1)^(k-1) * C(seed_count, k)).
    r = 0 failing the threshold is reported, not raised.
    """
    if length < 6:
        raise ValueError("length must be at least 6")
    if k < 2:
        raise ValueError("order k must be at least 2")
    if seed_count < 2:
        raise ValueError("seed_count must be at least 2")
    m = length // 3
    if math.log2(seed_count) <= m ** 0.25:
        regime = 1
        denom = math.comb(m + 1, k - 1) * seed_count**k
    else:
        regime = 2
        denom = (m + 1) ** (k - 1) * math.comb(seed_count, k)
    threshold = (k * k * math.log(length) / denom) if denom else math.inf

    best = -1
    for r in range(0, m + 1):
        t = math.ceil((m + r) / 2)
        if binom_tail_exact(m, t) >= threshold:
            best = r
        else:
            break  # the tail is non-increasing in r
    if best < 0:
        return RkResult(r=0, achievable=False, regime=regime,
                        threshold=threshold, m=m)
    return RkResult(r=best, achievable=True, regime=regime,
                    threshold=threshold, m=m)


@dataclass(frozen=True)
class TheoremBand:
    lower: float
    upper: float
    base: float
    which: str
    warnings: tuple[str, ...]


_BAND_COEFF = {"family": (0.4, 2.5), "generator": (0.4, 2.5),
               "single": (0.4, 1.75)}


def theorem_band(length: int, k: int, cardinality: int,
                 which: str = "family") -> TheoremBand:
    """Typical-value band for a measure of order k.

    family/generator: base B = sqrt(N (ln C(N,k) + k ln cardinality)), band
    (0.4 B, 2.5 B).  single: base sqrt(N ln C(N,k)), band (0.4 B, 1.75 B).
    Out-of-range regime hypotheses are reported as warnings, not errors.
    """
    if which not in _BAND_COEFF:
        raise ValueError("which must be 'family', 'generator' or 'single'")
    if length < 2:
        raise ValueError("length must be at least 2")
    if k < 2 or k > length:
        raise ValueError("order k must satisfy 2 <= k <= length")
    if cardinality < 1:
        raise ValueError("cardinality must be at least 1")
    log_c = float(_log_comb(float(length), float(k)))
    warnings: list[str] = []
    if which == "single":
        base = math.sqrt(length * log_c)
        if k > length / 4:
            warnings.append("k above length/4: single-sequence band "
                            "hypotheses do not cover this order")
    else:
        base = math.sqrt(length * (log_c + k * math.log(cardinality)))
        lg = math.log2(cardinality) if cardinality > 1 else 0.0
        if cardinality < 2:
            warnings.append("cardinality below 2: band hypotheses need at "
                            "least two members")
        if lg >= length / 12:
            warnings.append("log2(cardinality) at or above length/12: "
                            "outside the band hypotheses")
        if lg > 0 and k > length / (6.0 * lg):
            warnings.append("k above length/(6 log2(cardinality)): outside "
                            "the band hypotheses")
    lo_c, hi_c = _BAND_COEFF[which]
    return TheoremBand(lower=lo_c * base, upper=hi_c * base, base=base,
                       which=which, warnings=tuple(warnings))


def logbinom_ratio(length: int, k: int) -> float:
    """ln C(floor(length/3), k) / ln C(length, k); below 1, rising with
    length at fixed k."""
    m = length // 3
    if k < 2 or k > m:
        raise ValueError("order k must satisfy 2 <= k <= floor(length/3)")
    return float(_log_comb(float(m), float(k)) /
                 _log_comb(float(length), float(k)))

"""Statistical kernel: tie-aware ranking, exact binomial sign test,
Shapiro-Wilk normality (Royston's AS R94 approximation), Z-normalization,
subsampling, and Q-Q point generation.

Everything here is a pure function; scipy is deliberately not used so that
the test suite can hold these implementations against scipy as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, NumericError


# ---------------------------------------------------------------------------
# ranking


def rank_average(x: np.ndarray) -> np.ndarray:
    """Average (fractional) ranks of ``x``, 1-based, ties sharing their mean rank.

    Ranks are multiples of 0.5, so all downstream rank sums stay exactly
    representable in float64 for any realistic vector length.
    """
    a = np.asarray(x, dtype=np.float64).ravel()
    n = a.size
    if n == 0:
        return np.zeros(0)
    order = np.argsort(a, kind="stable")
    sorted_a = a[order]
    group_start = np.r_[True, sorted_a[1:] != sorted_a[:-1]]
    starts = np.flatnonzero(group_start)
    ends = np.r_[starts[1:], n]
    # group spanning sorted positions [s, e) gets rank (s+1 + e) / 2
    group_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(n)
    ranks[order] = group_rank[np.cumsum(group_start) - 1]
    return ranks


# ---------------------------------------------------------------------------
# exact binomial sign test


def sign_test_pvalue(positives: int, negatives: int) -> float:
    """Two-sided exact binomial p-value for a fair-coin sign test.

    Zero differences are the caller's responsibility to exclude. Computed
    with exact integer arithmetic, then correctly rounded to float.
    """
    if positives < 0 or negatives < 0:
        raise ConfigurationError("sign test counts must be non-negative")
    n = positives + negatives
    if n == 0:
        return 1.0
    k = min(positives, negatives)
    tail = sum(math.comb(n, i) for i in range(k + 1))
    p = Fraction(2 * tail, 2**n)
    return min(1.0, float(p))


# ---------------------------------------------------------------------------
# normal distribution helpers

_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
             6.680131188771972e+01, -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
             3.754408661907416e+00)

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


def inverse_normal_cdf(p: float) -> float:
    """Standard-normal quantile: Acklam's rational approximation plus one
    Newton correction, accurate to well under 1e-8 over [1e-10, 1 - 1e-10].
    """
    if not 0.0 < p < 1.0:
        raise NumericError(f"inverse normal CDF undefined for p={p}")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    # one Newton step against the exact CDF; |x| <= ~6.5 here so exp is safe
    err = normal_cdf(x) - p
    x -= err * _SQRT_2PI * math.exp(0.5 * x * x)
    return x


# ---------------------------------------------------------------------------
# Z-normalization


def z_normalize(v: np.ndarray) -> np.ndarray:
    """Shift/scale ``v`` to mean 0 and sample standard deviation 1 (n-1 denominator)."""
    a = np.asarray(v, dtype=np.float64).ravel()
    if a.size < 2:
        raise ConfigurationError("z_normalize requires at least 2 values")
    if not np.all(np.isfinite(a)):
        raise ConfigurationError("z_normalize requires finite values")
    sd = float(a.std(ddof=1))
    if sd == 0.0:
        raise NumericError("z_normalize undefined for a constant vector")
    return (a - a.mean()) / sd


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1995, AS R94), complete samples only

_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)

SHAPIRO_WILK_MAX_N = 5000


def _poly(coeffs: Sequence[float], x: float) -> float:
    # ascending-order coefficients
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _sw_coefficients(n: int) -> np.ndarray:
    """Weights for the lower half of the order statistics (returned positive)."""
    n2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    m = np.array([inverse_normal_cdf((i - 0.375) / (n + 0.25)) for i in range(1, n2 + 1)])
    summ2 = 2.0 * float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_SW_C1, rsn) - m[0] / ssumm2
    a = np.empty(n2)
    a[0] = a1
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_SW_C2, rsn)
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
                        / (1.0 - 2.0 * a1**2 - 2.0 * a2**2))
        a[1] = a2
        a[2:] = -m[2:] / fac
    else:
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1**2))
        a[1:] = -m[1:] / fac
    return a


def shapiro_wilk(v: np.ndarray) -> tuple[float, float]:
    """Shapiro-Wilk test of normality; returns (W, p).

    Valid for 3 <= n <= 5000 (the range of Royston's approximation).
    """
    x = np.sort(np.asarray(v, dtype=np.float64).ravel())
    n = x.size
    if n < 3 or n > SHAPIRO_WILK_MAX_N:
        raise ConfigurationError(
            f"Shapiro-Wilk supports 3 <= n <= {SHAPIRO_WILK_MAX_N}, got n={n}")
    if not np.all(np.isfinite(x)):
        raise ConfigurationError("Shapiro-Wilk requires finite values")
    if x[-1] - x[0] < 1e-19:
        raise NumericError("Shapiro-Wilk undefined for (near-)constant data")

    a = _sw_coefficients(n)
    n2 = n // 2
    # antisymmetric weights: sum of a over the full vector is 0; ssa = 2*sum(a^2)
    gaps = x[n - 1 - np.arange(n2)] - x[: n2]
    sax = float(np.sum(a * gaps))
    ssa = 2.0 * float(np.sum(a * a))
    xc = x - x.mean()
    ssx = float(np.sum(xc * xc))
    # 1 - W computed as a product to keep precision when W is near 1
    ssassx = math.sqrt(ssa * ssx)
    w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx)
    w = 1.0 - w1
    w = min(max(w, 0.0), 1.0)

    if n == 3:
        # exact small-sample distribution: 6/pi * (asin(sqrt(W)) - pi/3)
        pw = 1.90985931710274 * (math.asin(math.sqrt(w)) - 1.04719755119660)
        return w, min(max(pw, 0.0), 1.0)

    if n <= 11:
        gamma = -2.273 + 0.459 * n
        y = math.log(max(w1, 1e-300))
        if y >= gamma:
            return w, 1e-19
        y = -math.log(gamma - y)
        mu = _poly(_SW_C3, float(n))
        sigma = math.exp(_poly(_SW_C4, float(n)))
    else:
        y = math.log(max(w1, 1e-300))
        xln = math.log(n)
        mu = _poly(_SW_C5, xln)
        sigma = math.exp(_poly(_SW_C6, xln))

    pw = normal_sf((y - mu) / sigma)
    return w, min(max(pw, 0.0), 1.0)


# ---------------------------------------------------------------------------
# subsampling and Q-Q data


def subsample(v: np.ndarray, k: int, seed) -> np.ndarray:
    """Uniform draw of ``k`` distinct positions of ``v``, deterministic per seed."""
    a = np.asarray(v).ravel()
    if k < 0 or k > a.size:
        raise ConfigurationError(f"cannot subsample {k} of {a.size} values")
    rng = np.random.default_rng(seed)
    idx = rng.choice(a.size, size=k, replace=False)
    return a[idx]


def qq_points(v: np.ndarray) -> list[tuple[float, float]]:
    """(theoretical, sample) quantile pairs against the standard normal.

    Sample values sorted ascending, matched to normal quantiles at
    probabilities (i - 0.5)/n.
    """
    a = np.sort(np.asarray(v, dtype=np.float64).ravel())
    n = a.size
    if n < 2:
        raise ConfigurationError("qq_points requires at least 2 values")
    theo = [inverse_normal_cdf((i - 0.5) / n) for i in range(1, n + 1)]
    return list(zip(theo, a.tolist()))


# ---------------------------------------------------------------------------
# Appendix-style normality report over a set of embeddings


@dataclass(frozen=True)
class EmbeddingNormality:
    sentence_id: int
    role: str
    w_full: float
    p_full: float
    w_sub: float | None
    p_sub: float | None


@dataclass(frozen=True)
class NormalityReport:
    entries: tuple[EmbeddingNormality, ...]
    alpha: float
    subsample_k: int | None
    count: int
    nonnormal_full: int
    nonnormal_sub: int | None

    @property
    def frac_nonnormal_full(self) -> float:
        return self.nonnormal_full / self.count if self.count else 0.0

    @property
    def frac_nonnormal_sub(self) -> float | None:
        if self.nonnormal_sub is None:
            return None
        return self.nonnormal_sub / self.count if self.count else 0.0


def normality_report(
    records: Iterable[tuple[tuple[int, str], np.ndarray]],
    subsample_k: int | None,
    seed,
    alpha: float = 0.05,
) -> NormalityReport:
    """Z-normalize every embedding, Shapiro-Wilk it, and (optionally) repeat on a
    seeded without-replacement subsample of ``subsample_k`` components.

    One child seed per embedding is spawned from the master seed, in sorted
    (sentence id, role) order, so reports are reproducible.
    """
    items = sorted(records, key=lambda kv: kv[0])
    seeds = np.random.SeedSequence(seed).spawn(len(items)) if items else []
    entries = []
    nonnormal_full = 0
    nonnormal_sub = 0 if subsample_k is not None else None
    for ((sid, role), vec), child in zip(items, seeds):
        z = z_normalize(vec)
        w_full, p_full = shapiro_wilk(z)
        if p_full < alpha:
            nonnormal_full += 1
        w_sub = p_sub = None
        if subsample_k is not None:
            if subsample_k > z.size:
                raise ConfigurationError(
                    f"subsample size {subsample_k} exceeds embedding dimension {z.size}")
            w_sub, p_sub = shapiro_wilk(subsample(z, subsample_k, child))
            if p_sub < alpha:
                nonnormal_sub += 1
        entries.append(EmbeddingNormality(sid, role, w_full, p_full, w_sub, p_sub))
    return NormalityReport(
        entries=tuple(entries),
        alpha=alpha,
        subsample_k=subsample_k,
        count=len(entries),
        nonnormal_full=nonnormal_full,
        nonnormal_sub=nonnormal_sub,
    )

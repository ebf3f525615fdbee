"""Poisson tails, the k-core threshold c_k and core-size predictions.

The core threshold is ``c_k = min_{lam > 0} lam / pi_k(lam)`` where
``pi_k(lam) = P[Poisson(lam) >= k - 1]``.  Above it, the k-core of
G(n, c/n) has about ``n * P[Poisson(mu) >= k]`` vertices, ``mu`` being the
larger root of ``mu = c * pi_k(mu)``, and about ``n * P[Poisson(mu) = j]``
of them have core degree ``j >= k``.

Note: the large-deviation lemma these degree counts come from is stated for
``j >= k + 2``; the counts themselves hold for every ``j >= k`` and that is
what :func:`mu_kc` reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Stirling series coefficients for the remainder of log(n!)
_S0, _S1, _S2, _S3, _S4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188


def _stirlerr(n: int) -> float:
    """log(n!) - [(n + 1/2) log n - n + log sqrt(2 pi)]."""
    if n <= 15:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _LOG_SQRT_2PI
    nn = float(n) * n
    if n > 500:
        return (_S0 - _S1 / nn) / n
    if n > 80:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, mu: float) -> float:
    """x log(x/mu) + mu - x without cancellation when x is near mu."""
    if abs(x - mu) < 0.1 * (x + mu):
        v = (x - mu) / (x + mu)
        s = (x - mu) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / mu) + mu - x


def poisson_pmf(j: int, lam: float) -> float:
    """P[Poisson(lam) = j], accurate to a few ulps for large j and lam."""
    if j < 0:
        return 0.0
    if lam == 0.0:
        return 1.0 if j == 0 else 0.0
    if j == 0:
        return math.exp(-lam)
    return math.exp(-_stirlerr(j) - _bd0(float(j), lam)) / math.sqrt(2.0 * math.pi * j)


def _upper_tail(m: int, lam: float) -> float:
    """P[Poisson(lam) >= m] summed upward from j = m (use when m > lam)."""
    term = poisson_pmf(m, lam)
    if term == 0.0:
        return 0.0
    terms = [term]
    j = m
    while True:
        j += 1
        term *= lam / j
        terms.append(term)
        if term <= 1e-18 * terms[0]:  # <= so an underflowed bound still stops
            break
    return math.fsum(terms)


def _lower_tail(m: int, lam: float) -> float:
    """P[Poisson(lam) <= m] summed downward from j = m (use when m < lam)."""
    if m < 0:
        return 0.0
    term = poisson_pmf(m, lam)
    if term == 0.0:
        return 0.0
    terms = [term]
    for j in range(m, 0, -1):
        term *= j / lam
        terms.append(term)
        if term <= 1e-18 * terms[0]:
            break
    return math.fsum(terms)


def poisson_sf(m: int, lam: float) -> float:
    """P[Poisson(lam) >= m]."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if m <= 0:
        return 1.0
    if lam == 0.0:
        return 0.0
    if m > lam:
        return _upper_tail(m, lam)
    return 1.0 - _lower_tail(m - 1, lam)


def pi_k(k: int, lam: float) -> float:
    """P[Poisson(lam) >= k - 1]."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return poisson_sf(k - 1, lam)


# ---------------------------------------------------------------------------
# c_k
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    k: int
    lambda_k: float
    c_k: float
    tolerance: float
    iterations: int


def _ratio(k: int, lam: float) -> float:
    p = pi_k(k, lam)
    return lam / p if p > 0.0 else math.inf


def _stationarity(k: int, lam: float) -> float:
    # Sign of d/dlam [lam / pi_k(lam)]; the derivative of pi_k is pmf(k-2).
    return pi_k(k, lam) - lam * poisson_pmf(k - 2, lam)


def compute_ck(k: int, tol: float = 1e-10) -> ThresholdResult:
    """Minimise ``lam / pi_k(lam)`` over ``lam > 0``.

    A geometric scan from ``lam = k`` finds a bracket, golden-section search
    narrows it until function values stop being informative, and bisection
    on the sign of the derivative finishes the job down to ``tol``.
    """
    if k < 3:
        raise ValueError("c_k is defined here for k >= 3")
    if tol <= 0:
        raise ValueError("tol must be positive")

    iterations = 0
    a, b, c = k / 2.0, float(k), 2.0 * k
    fa, fb, fc = _ratio(k, a), _ratio(k, b), _ratio(k, c)
    while not (fb < fa and fb < fc):
        iterations += 1
        if iterations > 200:
            raise RuntimeError(f"could not bracket the minimiser for k={k}")
        if fa <= fb:
            c, fc = b, fb
            b, fb = a, fa
            a = a / 2.0
            fa = _ratio(k, a)
        else:
            a, fa = b, fb
            b, fb = c, fc
            c = 2.0 * c
            fc = _ratio(k, c)

    # golden section down to a width where f still resolves the minimum
    coarse = max(tol, 1e-4 * b)
    x1 = c - _INVPHI * (c - a)
    x2 = a + _INVPHI * (c - a)
    f1, f2 = _ratio(k, x1), _ratio(k, x2)
    while c - a > coarse:
        iterations += 1
        if f1 < f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - _INVPHI * (c - a)
            f1 = _ratio(k, x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (c - a)
            f2 = _ratio(k, x2)

    lo, hi = a, c
    while _stationarity(k, lo) >= 0.0:
        lo = max(lo - (hi - lo), lo / 2.0)
        iterations += 1
    while _stationarity(k, hi) <= 0.0:
        hi = hi + (hi - lo)
        iterations += 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        iterations += 1
        if _stationarity(k, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return ThresholdResult(k=k, lambda_k=lam, c_k=_ratio(k, lam),
                           tolerance=hi - lo, iterations=iterations)


def ck_asymptotic(k: int) -> float:
    """Four-term large-k expansion of c_k, with q = log k - log(2 pi)."""
    q = math.log(k) - math.log(2.0 * math.pi)
    if q <= 0:
        raise ValueError(f"expansion needs log k > log 2pi (k >= 7), got k={k}")
    return k + math.sqrt(k * q) + math.sqrt(k / q) + (q - 1.0) / 3.0


# ---------------------------------------------------------------------------
# Core size and degree distribution above the threshold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorePrediction:
    k: int
    c: float
    mu: float
    core_fraction: float
    degree_pmf: dict[int, float] = field(repr=False)
    j_max: int = 0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "c": self.c,
            "mu": self.mu,
            "core_fraction": self.core_fraction,
            "degree_pmf": {str(j): p for j, p in self.degree_pmf.items()},
        }


def mu_kc(k: int, c: float, threshold: ThresholdResult | None = None) -> CorePrediction:
    """Larger root of ``mu / c = pi_k(mu)`` and the implied core statistics."""
    th = threshold if threshold is not None else compute_ck(k)
    if c <= th.c_k:
        raise ValueError(f"c={c} is not above the {k}-core threshold {th.c_k:.6f}")

    def g(mu: float) -> float:
        return mu / c - pi_k(k, mu)

    lo, hi = max(c - 2.0, 1e-300), c
    if g(lo) >= 0.0:
        # c - 2 lies below the smaller root; the larger root is past lambda_k
        lo = th.lambda_k
    if not (g(lo) < 0.0 < g(hi)):
        raise RuntimeError(f"no sign change for the core equation on ({lo}, {hi})")
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)

    pmf: dict[int, float] = {}
    j = k
    while True:
        pmf[j] = poisson_pmf(j, mu)
        if j > mu and poisson_sf(j + 1, mu) < 1e-12:
            break
        j += 1
    return CorePrediction(k=k, c=c, mu=mu, core_fraction=poisson_sf(k, mu),
                          degree_pmf=pmf, j_max=j)


def degree_pmf_distance(pred: CorePrediction, hist: dict[int, int], n: int) -> float:
    """Total variation between predicted and observed per-n degree fractions.

    ``hist`` maps core degree to vertex count and ``n`` is the order of the
    whole graph, so both sides are fractions of all n vertices.  Degrees
    below ``k`` are ignored.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    keys = set(pred.degree_pmf) | {j for j in hist if j >= pred.k}
    return 0.5 * math.fsum(abs(pred.degree_pmf.get(j, 0.0) - hist.get(j, 0) / n)
                           for j in keys)

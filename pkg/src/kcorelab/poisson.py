"""Numerically stable Poisson probabilities, tails, and thinning curves.

The Poisson law is the degree limit of the sparse random-graph models in
this package, so everything downstream (thresholds, covariance kernels,
experiment targets) leans on these primitives.  Conventions:

    pmf(j, mu)  = P(Po(mu) = j)   = mu^j e^(-mu) / j!
    tail(j, mu) = P(Po(mu) >= j)  = sum_{i>=j} pmf(i, mu)

with the mu = 0 edge handled by continuity (0^0 = 1): pmf(0, 0) = 1 and
pmf(j, 0) = 0 for j >= 1.  Both functions are exact-formula for small
arguments and switch to log-gamma evaluation when overflow threatens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Below this, mu^j and j! are safely representable and the direct formula
# is both exact-ish and cheapest.
_DIRECT_LIMIT = 30

# Tail summation stops once a term falls below this fraction of the
# running sum; the terms are positive and eventually geometric.
_TAIL_STOP = 1e-17


class DomainError(ValueError):
    """Raised when an argument leaves the mathematical domain."""


def _check_count(j: int, name: str = "j") -> int:
    if j != int(j) or j < 0:
        raise DomainError(f"{name} must be a nonnegative integer, got {j!r}")
    return int(j)


def _check_nonneg(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {x!r}")
    return x


@dataclass(frozen=True)
class PoissonModel:
    """A Poisson mean, validated once; convenience handle for the curves."""

    lam: float

    def __post_init__(self) -> None:
        _check_nonneg(self.lam, "lam")

    def pmf(self, j: int) -> float:
        return pois_pmf(j, self.lam)

    def tail(self, j: int) -> float:
        return pois_tail(j, self.lam)


def pois_pmf(j: int, mu: float) -> float:
    """P(Po(mu) = j), in [0, 1], safe for large j and mu."""
    j = _check_count(j)
    mu = _check_nonneg(mu, "mu")
    if mu == 0.0:
        return 1.0 if j == 0 else 0.0
    if j <= _DIRECT_LIMIT and mu <= _DIRECT_LIMIT:
        return mu**j * math.exp(-mu) / math.factorial(j)
    return math.exp(j * math.log(mu) - mu - math.lgamma(j + 1.0))


def _head_sum(j: int, mu: float) -> float:
    """Compensated sum of pmf(i, mu) for i in [0, j), recurred from the mode."""
    anchor = min(int(mu), j - 1)
    t0 = pois_pmf(anchor, mu)
    terms = [t0]
    t = t0
    for i in range(anchor + 1, j):
        t = t * mu / i
        terms.append(t)
    t = t0
    for i in range(anchor, 0, -1):
        t = t * i / mu
        terms.append(t)
    return math.fsum(terms)


def pois_tail(j: int, mu: float) -> float:
    """P(Po(mu) >= j).

    Uses whichever of the direct tail sum or the complement of the head
    sum needs fewer terms; sums are anchored at the mode so no individual
    term under- or overflows.
    """
    j = _check_count(j)
    mu = _check_nonneg(mu, "mu")
    if j == 0:
        return 1.0
    if mu == 0.0:
        return 0.0
    if j <= mu:
        return max(0.0, 1.0 - _head_sum(j, mu))
    # j > mu: terms decay geometrically from the first, so sum the tail
    term = pois_pmf(j, mu)
    total = term
    i = j
    while term > _TAIL_STOP * total:
        i += 1
        term *= mu / i
        total += term
    return min(1.0, total)


def pois_bhl(k: int, lam: float, p: float) -> tuple[float, float, float]:
    """Poisson closed forms of the thinned-degree curves at retention p.

    Returns (b, h, l) with b = tail(k, lam*p), h = lam*p*tail(k-1, lam*p)
    and l = lam*p*(p - tail(k-1, lam*p)); l == lam*p^2 - h exactly as
    computed.
    """
    k = _check_count(k, "k")
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    lam = _check_nonneg(lam, "lam")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    mu = lam * p
    b = pois_tail(k, mu)
    psi = pois_tail(k - 1, mu)
    h = mu * psi
    l = mu * (p - psi)
    return b, h, l


def pois_q_deriv(j: int, lam: float, p: float) -> float:
    """d/dp P(thinned Po(lam) >= j) = lam * pmf(j-1, lam*p)."""
    j = _check_count(j)
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    lam = _check_nonneg(lam, "lam")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    return lam * pois_pmf(j - 1, lam * p)

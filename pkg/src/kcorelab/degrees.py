"""Degree laws and their thinned-degree curves.

A :class:`DegreeDistribution` is a finite probability vector over vertex
degrees (infinite-support laws are truncated at negligible tail mass and
renormalized).  A :class:`DegreeSequence` is the per-n empirical object:
counts u_r of vertices with each degree.

The central quantities are the curves of the thinned degree X_p (keep
each of X points independently with probability p):

    q_j(p) = P(X_p >= j)
    b(p)   = q_k(p)                       fraction of heavy vertices
    h(p)   = E(X_p; X_p >= k)             mass of heavy half-edges
    l(p)   = E(X) * p^2 - h(p)            the drift whose largest zero
                                          locates the k-core

plus exact derivatives of each, used by the threshold and covariance
machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .poisson import DomainError, pois_pmf, pois_tail

_PROB_TOL = 1e-12


def binom_pmf(l: int, r: int, p: float) -> float:
    """P(Bi(l, p) = r); log-space for large l."""
    if l < 0 or r < 0 or r > l:
        raise DomainError(f"need 0 <= r <= l, got l={l}, r={r}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    if p == 0.0:
        return 1.0 if r == 0 else 0.0
    if p == 1.0:
        return 1.0 if r == l else 0.0
    if l <= 60:
        return math.comb(l, r) * p**r * (1.0 - p) ** (l - r)
    logc = math.lgamma(l + 1) - math.lgamma(r + 1) - math.lgamma(l - r + 1)
    return math.exp(logc + r * math.log(p) + (l - r) * math.log1p(-p))


def _binom_matrix(R: int, p: float) -> np.ndarray:
    """beta[l, r] = P(Bi(l, p) = r) for 0 <= r <= l <= R (0 above diagonal)."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    beta = np.zeros((R + 1, R + 1))
    if p == 0.0:
        beta[:, 0] = 1.0
        return beta
    if p == 1.0:
        np.fill_diagonal(beta, 1.0)
        return beta
    ls = np.arange(R + 1, dtype=float)
    lg = np.array([math.lgamma(x + 1) for x in ls])
    logp, logq = math.log(p), math.log1p(-p)
    for l in range(R + 1):
        r = np.arange(l + 1)
        beta[l, : l + 1] = np.exp(
            lg[l] - lg[: l + 1] - lg[l::-1] + r * logp + (l - r) * logq
        )
    return beta


@dataclass
class DegreeDistribution:
    """A probability law (p_r) on degrees 0..max_degree."""

    probs: np.ndarray
    poisson_lam: float | None = field(default=None)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("probs must be a nonempty 1-d array")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise DomainError("probs must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise DomainError(f"probs must sum to 1, got {probs.sum()!r}")
        if probs[0] >= 1.0 - _PROB_TOL:
            raise DomainError("p_0 must be < 1 (all mass on isolated vertices)")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def max_degree(self) -> int:
        return self.probs.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def is_poisson(self) -> bool:
        return self.poisson_lam is not None

    @classmethod
    def from_probs(cls, probs) -> "DegreeDistribution":
        return cls(np.asarray(probs, dtype=float))

    @classmethod
    def point_mass(cls, r: int) -> "DegreeDistribution":
        if r < 1:
            raise DomainError("point mass must sit on degree >= 1")
        probs = np.zeros(r + 1)
        probs[r] = 1.0
        return cls(probs)

    @classmethod
    def poisson(cls, lam: float, tail_tol: float = 1e-14) -> "DegreeDistribution":
        """Poisson(lam) truncated at tail mass < tail_tol, renormalized.

        The instance remembers lam, so consumers with Poisson closed
        forms can use them instead of the generic series.
        """
        if lam <= 0:
            raise DomainError(f"lam must be > 0, got {lam!r}")
        R = max(2, int(lam))
        while pois_tail(R + 1, lam) >= tail_tol:
            R += 1
        probs = np.array([pois_pmf(j, lam) for j in range(R + 1)])
        probs /= probs.sum()
        return cls(probs, poisson_lam=float(lam))


@dataclass
class DegreeSequence:
    """Vertex-degree counts u_r for a graph on n vertices (sum of degrees even)."""

    counts: np.ndarray
    n: int
    two_m: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise DomainError("counts must be a 1-d nonnegative array")
        if counts.sum() != self.n:
            raise DomainError(f"counts sum to {counts.sum()}, expected n={self.n}")
        two_m = int(np.arange(counts.size) @ counts)
        if two_m != self.two_m:
            raise DomainError(f"degree total {two_m} != declared {self.two_m}")
        if two_m % 2 != 0:
            raise DomainError("sum of degrees must be even")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def m(self) -> int:
        return self.two_m // 2

    def degrees(self) -> np.ndarray:
        """Expand counts to a length-n degree array (ascending by degree)."""
        return np.repeat(np.arange(self.counts.size), self.counts)

    @classmethod
    def from_degrees(cls, degrees) -> "DegreeSequence":
        d = np.asarray(degrees, dtype=np.int64)
        if d.ndim != 1 or (d.size and d.min() < 0):
            raise DomainError("degrees must be a 1-d nonnegative array")
        counts = np.bincount(d) if d.size else np.zeros(1, np.int64)
        return cls(counts, int(d.size), int(d.sum()))

    @classmethod
    def sampled(cls, dist: DegreeDistribution, n: int, rng: np.random.Generator) -> "DegreeSequence":
        """n i.i.d. draws from dist; one vertex redrawn until the sum is even."""
        if n < 1:
            raise DomainError("n must be >= 1")
        d = rng.choice(dist.probs.size, size=n, p=dist.probs)
        while d.sum() % 2 == 1:
            i = int(rng.integers(n))
            d[i] = int(rng.choice(dist.probs.size, p=dist.probs))
        return cls.from_degrees(d)

    @classmethod
    def rounded(cls, dist: DegreeDistribution, n: int) -> "DegreeSequence":
        """Deterministic sequence with u_r = round(n p_r), patched to total n
        and even degree sum by moving single correction vertices."""
        if n < 1:
            raise DomainError("n must be >= 1")
        u = np.rint(n * dist.probs).astype(np.int64)
        mode = int(np.argmax(dist.probs))
        u[mode] += n - u.sum()
        if u[mode] < 0:
            raise DomainError("rounding produced a negative count")
        if (np.arange(u.size) @ u) % 2 == 1:
            r = int(np.flatnonzero(u).min())
            u = np.append(u, 0)
            u[r] -= 1
            u[r + 1] += 1
        return cls(u, n, int(np.arange(u.size) @ u))


def empirical_dist(seq: DegreeSequence) -> DegreeDistribution:
    """The law of a uniformly random vertex degree: p_r = u_r / n."""
    if seq.n == 0:
        raise DomainError("empty degree sequence")
    return DegreeDistribution(seq.counts / seq.n)


def q_j(dist: DegreeDistribution, j: int, p: float) -> float:
    """P(X_p >= j) where X ~ dist and X_p its p-thinning."""
    if j < 0:
        raise DomainError(f"j must be >= 0, got {j}")
    if j == 0:
        return 1.0
    R = dist.max_degree
    if j > R:
        return 0.0
    beta = _binom_matrix(R, p)
    # sum_l p_l * P(Bi(l, p) >= j)
    tail = beta[:, j:].sum(axis=1)
    return float(dist.probs @ tail)


def bhl(dist: DegreeDistribution, k: int, p: float) -> tuple[float, float, float]:
    """The curves (b, h, l) at retention p for threshold parameter k."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    lam = dist.mean
    R = dist.max_degree
    if k > R:
        return 0.0, 0.0, lam * p * p
    beta = _binom_matrix(R, p)
    rs = np.arange(R + 1, dtype=float)
    b = float(dist.probs @ beta[:, k:].sum(axis=1))
    h = float(dist.probs @ (beta[:, k:] @ rs[k:]))
    return b, h, lam * p * p - h


def q_j_deriv(dist: DegreeDistribution, j: int, p: float) -> float:
    """d/dp q_j(p) = sum_l p_l * l * P(Bi(l-1, p) = j-1)."""
    if j < 1:
        raise DomainError(f"j must be >= 1, got {j}")
    R = dist.max_degree
    if j > R:
        return 0.0
    beta = _binom_matrix(R - 1, p) if R >= 1 else np.zeros((1, 1))
    total = 0.0
    for l in range(j, R + 1):
        if dist.probs[l] > 0:
            total += dist.probs[l] * l * beta[l - 1, j - 1]
    return total


def h_deriv(dist: DegreeDistribution, k: int, p: float) -> float:
    """d/dp h(p), by telescoping the binomial derivative identity:

    h'(p) = sum_l p_l * l * (k * beta_{l-1,k-1}(p) + P(Bi(l-1, p) >= k)).
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    R = dist.max_degree
    if k > R:
        return 0.0
    beta = _binom_matrix(R - 1, p)
    total = 0.0
    for l in range(k, R + 1):
        if dist.probs[l] > 0:
            inner = k * beta[l - 1, k - 1] + beta[l - 1, k:].sum()
            total += dist.probs[l] * l * inner
    return float(total)


def b_deriv(dist: DegreeDistribution, k: int, p: float) -> float:
    return q_j_deriv(dist, k, p)


def l_deriv(dist: DegreeDistribution, k: int, p: float) -> float:
    return 2.0 * dist.mean * p - h_deriv(dist, k, p)


def log_time_curves(dist: DegreeDistribution, k: int, t: float) -> tuple[float, float, float]:
    """(b, h, l) in the death-process time variable: evaluated at p = e^-t."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    return bhl(dist, k, math.exp(-t))


def condition_report(seq: DegreeSequence, A: float) -> float:
    """Exponential-moment diagnostic n^-1 sum_r u_r A^r; bounded in n under
    the regularity condition this package assumes of degree sequences."""
    if A <= 1.0:
        raise DomainError(f"A must be > 1, got {A!r}")
    r = np.arange(seq.counts.size, dtype=float)
    return float((seq.counts * A**r).sum() / seq.n)


def parse_degree_file(text: str) -> DegreeSequence:
    """Parse a degree-sequence file.

    Two accepted layouts: one degree value per line, or a first line
    "counts" followed by lines "r u_r".  Blank lines and '#' comments are
    ignored.  Rejects odd degree totals.
    """
    lines = [(i + 1, s.strip()) for i, s in enumerate(text.splitlines())]
    lines = [(no, s) for no, s in lines if s and not s.startswith("#")]
    if not lines:
        raise DomainError("empty degree file")
    if lines[0][1].lower() == "counts":
        counts: dict[int, int] = {}
        for no, s in lines[1:]:
            parts = s.split()
            if len(parts) != 2:
                raise DomainError(f"line {no}: expected 'r u_r', got {s!r}")
            try:
                r, u = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise DomainError(f"line {no}: {exc}") from None
            if r < 0 or u < 0:
                raise DomainError(f"line {no}: negative value")
            counts[r] = counts.get(r, 0) + u
        R = max(counts) if counts else 0
        arr = np.zeros(R + 1, np.int64)
        for r, u in counts.items():
            arr[r] = u
        return DegreeSequence(arr, int(arr.sum()), int(np.arange(R + 1) @ arr))
    degrees = []
    for no, s in lines:
        try:
            d = int(s)
        except ValueError:
            raise DomainError(f"line {no}: expected an integer degree, got {s!r}") from None
        if d < 0:
            raise DomainError(f"line {no}: negative degree")
        degrees.append(d)
    return DegreeSequence.from_degrees(degrees)

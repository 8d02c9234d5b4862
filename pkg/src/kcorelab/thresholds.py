"""Threshold constants and root-finding for the core-emergence problem.

For the Poisson family the appearance of a giant k-core is governed by

    c_k = inf_{mu>0} mu / tail(k-1, mu)

and, for edge density lambda >= c_k, by the largest root mu_k(lambda) of
mu / tail(k-1, mu) = lambda.  For a general degree law the same role is
played by the largest zero p-hat of the drift l(p), located here by a
downward scan plus bisection.  Local slope/curvature constants at p-hat
feed the fluctuation covariances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .degrees import DegreeDistribution, bhl, l_deriv
from .poisson import DomainError, pois_pmf, pois_tail

_SCAN_STEP = 1e-3
_TANGENT_L_TOL = 1e-10
_TANGENT_DL_TOL = 1e-6


class NoRootError(DomainError):
    """The defining equation has no root in the admissible range."""


class CriticalityError(DomainError):
    """A quantity that only exists strictly above threshold was requested."""


class DegeneracyError(DomainError):
    """A minimizer (or root) is not unique to within tolerance."""


@dataclass(frozen=True)
class ThresholdProfile:
    """Threshold constants at a given (k, lambda): see module docstring."""

    k: int
    lam: float
    c_k: float
    mu_hat: float
    p_hat: float
    alpha: float      # l'(p_hat)
    beta: float       # l''(p_hat)
    beta_hat: float   # (mu_hat - k + 2) * pmf(k-2, mu_hat)
    t_hat: float      # -ln(p_hat)


@dataclass(frozen=True)
class DriftRoot:
    """Largest zero of the drift l, with the regime it signals.

    regime is one of 'supercritical' (interior crossing, l'(p_hat) > 0),
    'critical' (tangential zero), 'subcritical' (no zero; p_hat = 0) or
    'boundary' (zero exactly at p = 1).
    """

    p_hat: float
    regime: str


def _stationarity(mu: float, k: int) -> float:
    # d/dmu (mu / tail) has the sign of tail(k-1, mu) - mu * pmf(k-2, mu)
    return pois_tail(k - 1, mu) - mu * pois_pmf(k - 2, mu)


@lru_cache(maxsize=None)
def compute_ck(k: int) -> tuple[float, float]:
    """(c_k, argmin mu) of mu / tail(k-1, mu) over mu > 0.

    For k = 2 the infimum is the mu -> 0 limit, so (1.0, 0.0) is returned
    analytically.
    """
    if k < 2 or k != int(k):
        raise DomainError(f"k must be an integer >= 2, got {k!r}")
    k = int(k)
    if k == 2:
        return 1.0, 0.0
    # stationarity goes negative -> positive exactly once; bracket by scan
    lo = None
    mu = 0.05
    while mu <= 4.0 * k:
        if _stationarity(mu, k) > 0:
            lo = mu - 0.05
            break
        mu += 0.05
    if lo is None:
        raise NoRootError(f"no stationary point located for k={k}")
    mu_star = optimize.brentq(_stationarity, max(lo, 1e-9), lo + 0.1,
                              args=(k,), xtol=1e-13, rtol=8.9e-16)
    return mu_star / pois_tail(k - 1, mu_star), mu_star


@lru_cache(maxsize=512)
def mu_k(k: int, lam: float) -> float:
    """Largest root of mu / tail(k-1, mu) = lam.

    Requires lam > c_k, or lam = c_k with k >= 3 (the double root).
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    lam = float(lam)
    c_k, mu_star = compute_ck(k)
    if lam < c_k - 1e-12:
        raise NoRootError(f"lambda={lam} is below the threshold c_{k}={c_k:.6f}")
    f = lambda mu: mu / pois_tail(k - 1, mu) - lam
    if k == 2:
        if lam <= 1.0 + 1e-12:
            raise DomainError("k=2 at lambda <= 1 has no positive root (mu -> 0 limit)")
        eps = 1e-10
        return optimize.brentq(f, eps, lam, xtol=1e-14, rtol=8.9e-16)
    if lam <= c_k + 1e-12:
        return mu_star
    # largest root lies in (argmin, lam]: f(argmin) < 0 and f(lam) > 0
    return optimize.brentq(f, mu_star, lam, xtol=1e-14, rtol=8.9e-16)


def _drift(dist: DegreeDistribution, k: int, p: float) -> float:
    return bhl(dist, k, p)[2]


def p_bar_of(dist: DegreeDistribution, k: int, delta0: float = 1e-3) -> tuple[float, float]:
    """Unique minimizer of l on [delta0, 1] and the minimum value.

    Raises DegeneracyError if the minimum is attained on a flat region
    wider than the scan step tolerance.
    """
    if k < 3:
        raise DomainError(f"k must be >= 3 for the minimizer search, got {k}")
    if not 0.0 < delta0 < 1.0:
        raise DomainError(f"delta0 must be in (0, 1), got {delta0!r}")
    res = optimize.minimize_scalar(
        lambda p: _drift(dist, k, p), bounds=(delta0, 1.0), method="bounded",
        options={"xatol": 1e-12},
    )
    p_bar, l_min = float(res.x), float(res.fun)
    grid = np.linspace(delta0, 1.0, int(round((1.0 - delta0) / _SCAN_STEP)) + 1)
    near = [p for p in grid if _drift(dist, k, p) <= l_min + 1e-12]
    if near and (max(near) - min(near)) > 0.05:
        raise DegeneracyError("minimum of l is attained on a wide flat region")
    return p_bar, l_min


def p_hat_of(dist: DegreeDistribution, k: int) -> DriftRoot:
    """Largest p <= 1 with l(p) = 0, scanning down from 1.

    Subcritical laws (l > 0 on (0, 1]) yield DriftRoot(0.0, 'subcritical');
    a tangential zero is reported as 'critical'.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    l1 = _drift(dist, k, 1.0)
    if abs(l1) <= _TANGENT_L_TOL:
        return DriftRoot(1.0, "boundary")
    # downward scan for a sign change of l
    p_hi, l_hi = 1.0, l1
    p = 1.0 - _SCAN_STEP
    while p > 0:
        lp = _drift(dist, k, p)
        if lp <= 0.0 < l_hi:
            root = optimize.brentq(lambda q: _drift(dist, k, q), p, p_hi,
                                   xtol=1e-14, rtol=8.9e-16)
            return DriftRoot(float(root), "supercritical")
        p_hi, l_hi = p, lp
        p -= _SCAN_STEP
    if k >= 3:
        # no grid sign change: resolve via the minimizer (tangency or a
        # dip narrower than the scan step)
        p_bar, l_min = p_bar_of(dist, k)
        if l_min < -_TANGENT_L_TOL:
            root = optimize.brentq(lambda q: _drift(dist, k, q), p_bar, 1.0,
                                   xtol=1e-14, rtol=8.9e-16)
            return DriftRoot(float(root), "supercritical")
        if abs(l_min) <= _TANGENT_L_TOL and abs(l_deriv(dist, k, p_bar)) <= _TANGENT_DL_TOL:
            return DriftRoot(float(p_bar), "critical")
    return DriftRoot(0.0, "subcritical")


def local_constants(k: int, lam: float) -> tuple[float, float, float, float, float]:
    """(alpha, beta, beta_hat, a_v, a_e) at mu_hat = mu_k(lam).

    alpha = l'(p_hat) and beta = l''(p_hat) in closed Poisson form;
    beta_hat is the curvature factor that satisfies beta = lam^2 *
    beta_hat at the threshold.  a_v and a_e are the fluctuation weights;
    they are NaN at the threshold itself, where their shared denominator
    vanishes.
    """
    mu = mu_k(k, lam)
    psi = pois_tail(k - 1, mu)
    pi_km2 = pois_pmf(k - 2, mu)
    pi_km3 = pois_pmf(k - 3, mu) if k >= 3 else 0.0
    alpha = lam * (psi - mu * pi_km2)
    beta = 2.0 * lam - 2.0 * lam**2 * pi_km2 - lam**2 * mu * (pi_km3 - pi_km2)
    beta_hat = (mu - k + 2.0) * pi_km2
    den = psi - mu * pi_km2
    scale = psi + mu * pi_km2
    if den < -1e-9 * max(scale, 1.0):
        raise CriticalityError(f"negative slope denominator at k={k}, lambda={lam}")
    if den <= 1e-9 * max(scale, 1.0):
        a_v = a_e = math.nan
    else:
        a_v = pois_pmf(k - 1, mu) / den
        a_e = (psi + mu * pi_km2) / den
    return alpha, beta, beta_hat, a_v, a_e


def threshold_profile(k: int, lam: float | None = None) -> ThresholdProfile:
    """Threshold summary at lam (defaults to the critical point c_k)."""
    c_k, mu_star = compute_ck(k)
    if lam is None:
        if k == 2:
            raise DomainError("k=2 has no critical profile (threshold root degenerates)")
        lam = c_k
    mu = mu_k(k, lam)
    p_hat = mu / lam
    alpha, beta, beta_hat, _, _ = local_constants(k, lam)
    return ThresholdProfile(k=int(k), lam=float(lam), c_k=c_k, mu_hat=mu,
                            p_hat=p_hat, alpha=alpha, beta=beta,
                            beta_hat=beta_hat, t_hat=-math.log(p_hat))

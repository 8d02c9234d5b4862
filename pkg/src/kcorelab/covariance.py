"""Gaussian fluctuation covariances for the peeling process and the core.

Three layers:

1. The *process kernel* sigma_{nu,kappa}(x), nu, kappa in {B, H, L}: the
   single-time covariances of the limiting Gaussian fluctuations of
   (heavy bins, heavy balls, light white balls) around their determinstic
   curves, evaluated at x = e^(-t).  Entries are built from one explicit
   variance (WW), one closed-form family (rW) and one family of
   quadratures (rs).

2. The *degree-fluctuation kernel* sigma*_{nu,kappa}(p): the extra
   covariance contributed by the random degree sequence of a binomial or
   fixed-edge-count random graph.  Pure sums against a bilinear form
   phi_{rs} whose sign structure differs between the two models.

3. Assembly: above threshold the two kernels add at p-hat and produce
   Var/Cov of the vertex- and edge-count fluctuations of the core; at the
   threshold only the LL entry survives into the scalar variances that
   drive emergence statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .degrees import DegreeDistribution, _binom_matrix
from .poisson import DomainError, pois_pmf, pois_tail
from .thresholds import compute_ck, local_constants, mu_k

KEYS = ("BB", "BH", "HH", "BL", "HL", "LL")
_IDX = {"B": 0, "H": 1, "L": 2}

GNP = "gnp"
GNM = "gnm"


def _check_model(model: str) -> str:
    m = str(model).lower()
    if m not in (GNP, GNM):
        raise DomainError(f"model must be 'gnp' or 'gnm', got {model!r}")
    return m


def _matrix(entries: dict[str, float]) -> np.ndarray:
    m = np.zeros((3, 3))
    for key, val in entries.items():
        i, j = _IDX[key[0]], _IDX[key[1]]
        m[i, j] = m[j, i] = val
    return m


@dataclass(frozen=True)
class ProcessCovariances:
    """sigma_{nu,kappa}(x) as a symmetric 3x3 array over (B, H, L)."""

    x: float
    entries: np.ndarray

    def __getitem__(self, key: str) -> float:
        return float(self.entries[_IDX[key[0]], _IDX[key[1]]])


@dataclass(frozen=True)
class StarCovariances:
    """sigma*_{nu,kappa}(p) for one of the two edge models."""

    p: float
    model: str
    entries: np.ndarray

    def __getitem__(self, key: str) -> float:
        return float(self.entries[_IDX[key[0]], _IDX[key[1]]])


@dataclass(frozen=True)
class VarianceReport:
    """Assembled limit quantities for the core-size fluctuations."""

    k: int
    lam: float
    model: str
    mu_hat: float
    p_hat: float
    a_v: float | None
    a_e: float | None
    sigma_hat: np.ndarray
    var_zv: float | None
    var_ze: float | None
    cov_zvze: float | None
    sigma_sq: float | None
    sigma_k_sq: float | None

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "lambda": self.lam,
            "model": self.model,
            "mu_hat": self.mu_hat,
            "p_hat": self.p_hat,
            "a_v": self.a_v,
            "a_e": self.a_e,
            "sigma_hat": [[float(v) for v in row] for row in self.sigma_hat],
            "var_zv": self.var_zv,
            "var_ze": self.var_ze,
            "cov_zvze": self.cov_zvze,
            "sigma_sq": self.sigma_sq,
            "sigma_k_sq": self.sigma_k_sq,
        }


def sigma_WW(x: float, lam: float) -> float:
    """Variance of the white-ball count fluctuation: 2 lam (x^2 - x^4)."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must be in [0, 1], got {x!r}")
    return 2.0 * lam * (x * x - x**4)


def sigma_rW(r: int, x: float, dist: DegreeDistribution) -> float:
    """Covariance of the r-bin fluctuation with the white-ball count.

    General series r x^r (1-x^2) sum_l p_l C(l, r) (1-x)^(l-r); collapses
    to (lam x)^r e^(-lam x) (1-x^2) / (r-1)! for a Poisson-tagged law.
    """
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must be in (0, 1], got {x!r}")
    if dist.is_poisson():
        lam = dist.poisson_lam
        return (lam * x) ** r * math.exp(-lam * x) / math.factorial(r - 1) * (1.0 - x * x)
    total = 0.0
    for l in range(r, dist.max_degree + 1):
        if dist.probs[l] > 0:
            total += dist.probs[l] * math.comb(l, r) * (1.0 - x) ** (l - r)
    return r * x**r * (1.0 - x * x) * total


class _ProcessKernel:
    """Shared state for evaluating sigma_rs at one (dist, x).

    Quadratures depend on (j, r+s) only, so they are memoized under that
    key; the memo is written once per key and only read afterwards.
    """

    def __init__(self, dist: DegreeDistribution, x: float,
                 quad_tol: float = 1e-12, series_tol: float = 1e-14):
        if not 0.0 < x <= 1.0:
            raise DomainError(f"x must be in (0, 1], got {x!r}")
        self.dist = dist
        self.x = float(x)
        self.quad_tol = quad_tol
        self.series_tol = series_tol
        self._integrals: dict[tuple[int, int], float] = {}
        self._poly: dict[int, np.ndarray] = {}

    def _q_deriv_factory(self, j: int):
        if self.dist.is_poisson():
            lam = self.dist.poisson_lam
            lg = math.lgamma(j)
            def qd(p: float) -> float:
                return math.exp(math.log(lam) * j + math.log(p) * (j - 1) - lam * p - lg)
            return qd
        coeffs = self._poly.get(j)
        if coeffs is None:
            R = self.dist.max_degree
            coeffs = np.array([
                self.dist.probs[l] * l * math.comb(l - 1, j - 1)
                for l in range(j, R + 1)
            ])
            self._poly[j] = coeffs
        def qd(p: float) -> float:
            q = 1.0 - p
            acc = 0.0
            for a in coeffs[::-1]:
                acc = acc * q + a
            return p ** (j - 1) * acc
        return qd

    def q_deriv_is_zero(self, j: int) -> bool:
        return (not self.dist.is_poisson()) and j > self.dist.max_degree

    def integral(self, j: int, c: int) -> float:
        """int_x^1 (p-x)^(2j-c) p^(-2j) q'_j(p) dp, memoized on (j, c)."""
        key = (j, c)
        val = self._integrals.get(key)
        if val is None:
            if self.q_deriv_is_zero(j) or self.x >= 1.0:
                val = 0.0
            else:
                x = self.x
                nu = 2 * j - c
                qd = self._q_deriv_factory(j)
                f = lambda p: (p - x) ** nu * p ** (-2 * j) * qd(p)
                val, _ = integrate.quad(f, x, 1.0, epsabs=0.0,
                                        epsrel=self.quad_tol, limit=200)
            self._integrals[key] = val
        return val

    def sigma_rs(self, r: int, s: int) -> float:
        """x^(r+s) sum_{j>=s} C(j-1,r-1) C(j-1,s-1) * integral(j, r+s)."""
        if not 1 <= r <= s:
            raise DomainError(f"need 1 <= r <= s, got r={r}, s={s}")
        if self.x >= 1.0:
            return 0.0
        if self.q_deriv_is_zero(s):
            return 0.0
        c = r + s
        total = 0.0
        quiet = 0
        j = s
        while True:
            term = math.comb(j - 1, r - 1) * math.comb(j - 1, s - 1) * self.integral(j, c)
            total += term
            if abs(term) <= self.series_tol * max(abs(total), 1e-300):
                quiet += 1
                if quiet >= 3:
                    break
            else:
                quiet = 0
            j += 1
            if self.q_deriv_is_zero(j):
                break
        return self.x**c * total


def sigma_rs(r: int, s: int, x: float, dist: DegreeDistribution,
             quad_tol: float = 1e-12, series_tol: float = 1e-14) -> float:
    """Covariance of the r-bin and s-bin fluctuations at x (r <= s)."""
    if x <= 0.0:
        raise DomainError("x must be positive (integrand is singular at 0)")
    return _ProcessKernel(dist, x, quad_tol, series_tol).sigma_rs(r, s)


def process_sigma(k: int, x: float, dist: DegreeDistribution,
                  quad_tol: float = 1e-12, series_tol: float = 1e-14,
                  row_tol: float = 1e-13) -> ProcessCovariances:
    """All six process-kernel entries at x, assembled from the families.

    Sums over bin sizes r, s > k are swept triangularly with symmetric
    doubling and truncated once a whole row falls below row_tol of the
    running total (finite-support laws truncate exactly).
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must be in (0, 1], got {x!r}")
    lam = dist.poisson_lam if dist.is_poisson() else dist.mean
    if x == 1.0:
        return ProcessCovariances(x=1.0, entries=np.zeros((3, 3)))
    kern = _ProcessKernel(dist, x, quad_tol, series_tol)

    s_kk = kern.sigma_rs(k, k)
    # row sums sigma_{k,r} and the symmetric block sigma_{r,s}, r,s > k
    sum_kr = 0.0
    sum_rs = 0.0
    sum_rW = 0.0
    hard_cap = k + 200 if dist.is_poisson() else dist.max_degree
    r = k + 1
    while r <= hard_cap:
        if kern.q_deriv_is_zero(r):
            break
        row_kr = kern.sigma_rs(k, r)
        row_rs = kern.sigma_rs(r, r)
        scale = max(abs(s_kk) + abs(sum_kr) + abs(sum_rs) + abs(row_rs), 1e-300)
        quiet = 0
        for s in range(r + 1, hard_cap + 1):
            if kern.q_deriv_is_zero(s):
                break
            v = kern.sigma_rs(r, s)
            row_rs += 2.0 * v
            if abs(v) < 0.25 * row_tol * scale:
                quiet += 1
                if quiet >= 2:
                    break
            else:
                quiet = 0
        row_W = sigma_rW(r, x, dist)
        sum_kr += row_kr
        sum_rs += row_rs
        sum_rW += row_W
        scale = max(abs(s_kk) + abs(sum_kr) + abs(sum_rs), 1e-300)
        if abs(row_kr) + abs(row_rs) + abs(row_W) < row_tol * scale:
            break
        r += 1

    s_kW = sigma_rW(k, x, dist)
    s_WW = sigma_WW(x, lam)
    entries = {
        "BB": s_kk,
        "BH": k * s_kk + sum_kr,
        "HH": k * k * s_kk + 2.0 * k * sum_kr + sum_rs,
    }
    entries["BL"] = s_kW - entries["BH"]
    entries["HL"] = k * s_kW + sum_rW - entries["HH"]
    entries["LL"] = s_WW - 2.0 * k * s_kW - 2.0 * sum_rW + entries["HH"]
    return ProcessCovariances(x=x, entries=_matrix(entries))


def phi_rs(r: int, s: int, lam: float, model: str) -> float:
    """Limit covariance of the degree-count fluctuations (u_r, u_s).

    The cross term enters with opposite signs for the binomial and the
    fixed-edge-count models.
    """
    model = _check_model(model)
    if lam <= 0:
        raise DomainError(f"lam must be > 0, got {lam!r}")
    sign = 1.0 if model == GNP else -1.0
    pr, ps = pois_pmf(r, lam), pois_pmf(s, lam)
    val = pr * ps * (sign * (r - lam) * (s - lam) / lam - 1.0)
    if r == s:
        val += pr
    return val


def _phi_matrix(lam: float, model: str, lmax: int) -> np.ndarray:
    idx = np.arange(lmax + 1, dtype=float)
    pi = np.array([pois_pmf(i, lam) for i in range(lmax + 1)])
    sign = 1.0 if model == GNP else -1.0
    phi = np.outer(pi, pi) * (sign * np.outer(idx - lam, idx - lam) / lam - 1.0)
    phi[np.diag_indices_from(phi)] += pi
    return phi


def star_sigma(k: int, p: float, lam: float, model: str,
               tail_tol: float = 1e-12) -> StarCovariances:
    """Degree-fluctuation kernel sigma*_{nu,kappa}(p) for the given model.

    For the fixed-edge-count model the white-ball fluctuation vanishes
    identically, which forces sigma*_LL = sigma*_HH and
    sigma*_HL = -sigma*_HH exactly.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    model = _check_model(model)
    lmax = max(k + 2, int(lam))
    while pois_tail(lmax + 1, lam) >= tail_tol * 1e-3:
        lmax += 1
    lmax += 10
    phi = _phi_matrix(lam, model, lmax)
    beta = _binom_matrix(lmax, p)
    psi = beta.T @ phi @ beta          # psi[i, j] over thinned degrees
    if model == GNM:
        psi_w = np.zeros(lmax + 1)
        s_ww = 0.0
    else:
        idx = np.arange(lmax + 1, dtype=float)
        psi_w = p * p * (beta.T @ (phi @ idx))
        s_ww = 2.0 * p**4 * lam
    weights = np.arange(k, lmax + 1, dtype=float)
    block = psi[k:, k:]
    sum_psi_w = float(psi_w[k:].sum())
    sum_ipsi_w = float(weights @ psi_w[k:])
    entries = {
        "BB": float(block.sum()),
        "BH": float(weights @ block.sum(axis=1)),
        "HH": float(weights @ block @ weights),
    }
    entries["BL"] = sum_psi_w - entries["BH"]
    entries["HL"] = sum_ipsi_w - entries["HH"]
    entries["LL"] = s_ww - 2.0 * sum_ipsi_w + entries["HH"]
    return StarCovariances(p=p, model=model, entries=_matrix(entries))


def assemble_supercritical(k: int, lam: float, model: str,
                           quad_tol: float = 1e-12) -> VarianceReport:
    """Limit variances of the centered core size above threshold."""
    model = _check_model(model)
    c_k, _ = compute_ck(k)
    if lam <= c_k:
        raise DomainError(f"lambda={lam} is not above the threshold c_{k}={c_k:.6f}")
    mu = mu_k(k, lam)
    p_hat = mu / lam
    _, _, _, a_v, a_e = local_constants(k, lam)
    proc = process_sigma(k, p_hat, DegreeDistribution.poisson(lam), quad_tol=quad_tol)
    star = star_sigma(k, p_hat, lam, model)
    sigma_hat = proc.entries + star.entries
    sh = {key: float(sigma_hat[_IDX[key[0]], _IDX[key[1]]]) for key in KEYS}
    var_zv = sh["BB"] - 2.0 * a_v * sh["BL"] + a_v**2 * sh["LL"]
    var_ze = 0.25 * (sh["HH"] - 2.0 * a_e * sh["HL"] + a_e**2 * sh["LL"])
    cov = 0.5 * (sh["BH"] - a_e * sh["BL"] - a_v * sh["HL"] + a_v * a_e * sh["LL"])
    return VarianceReport(k=int(k), lam=float(lam), model=model, mu_hat=mu,
                          p_hat=p_hat, a_v=a_v, a_e=a_e, sigma_hat=sigma_hat,
                          var_zv=var_zv, var_ze=var_ze, cov_zvze=cov,
                          sigma_sq=None, sigma_k_sq=None)


def assemble_critical(k: int, model: str, quad_tol: float = 1e-12) -> VarianceReport:
    """Scalar limit variances at the threshold lambda = c_k (k >= 3)."""
    model = _check_model(model)
    if k < 3:
        raise DomainError(f"critical assembly requires k >= 3, got {k}")
    c_k, mu = compute_ck(k)
    p_hat = mu / c_k
    proc = process_sigma(k, p_hat, DegreeDistribution.poisson(c_k), quad_tol=quad_tol)
    star = star_sigma(k, p_hat, c_k, model)
    sigma_hat = proc.entries + star.entries
    sigma_sq = proc["LL"] + star["LL"]
    sigma_k_sq = sigma_sq / (4.0 * p_hat**4)
    return VarianceReport(k=int(k), lam=c_k, model=model, mu_hat=mu,
                          p_hat=p_hat, a_v=None, a_e=None, sigma_hat=sigma_hat,
                          var_zv=None, var_ze=None, cov_zvze=None,
                          sigma_sq=sigma_sq, sigma_k_sq=sigma_k_sq)

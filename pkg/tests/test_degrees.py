"""Degree laws, the binomial kernel, thinning curves and their derivatives."""

import math

import numpy as np
import pytest

from kcorelab.degrees import (DegreeDistribution, DegreeSequence, b_deriv, bhl,
                              binom_pmf, condition_report, empirical_dist,
                              h_deriv, l_deriv, log_time_curves,
                              parse_degree_file, q_j, q_j_deriv)
from kcorelab.poisson import DomainError, pois_bhl, pois_q_deriv

from _oracles import fd_derivative


@pytest.fixture(scope="module")
def po4():
    return DegreeDistribution.poisson(4.0)


class TestBinomPmf:
    def test_keep_everything(self):
        assert binom_pmf(7, 7, 1.0) == 1.0

    def test_exact_rational(self):
        assert binom_pmf(5, 2, 0.5) == pytest.approx(10 / 32, rel=1e-15)

    def test_empty(self):
        assert binom_pmf(0, 0, 0.37) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            binom_pmf(3, 4, 0.5)

    def test_large_l_log_space(self):
        val = binom_pmf(500, 250, 0.5)
        assert 0.0 < val < 1.0
        assert val == pytest.approx(math.exp(
            math.lgamma(501) - 2 * math.lgamma(251) + 500 * math.log(0.5)), rel=1e-10)

    def test_derivative_recurrence(self):
        # d/dp beta_{lr} = l (beta_{l-1,r-1} - beta_{l-1,r})
        for l, r, p in ((6, 3, 0.4), (9, 1, 0.75), (5, 5, 0.3)):
            fd = fd_derivative(lambda q: binom_pmf(l, r, q), p)
            upper = binom_pmf(l - 1, r - 1, p) if r >= 1 else 0.0
            lower = binom_pmf(l - 1, r, p) if r <= l - 1 else 0.0
            assert fd == pytest.approx(l * (upper - lower), abs=1e-6)


class TestDistributions:
    def test_rejects_bad_mass(self):
        with pytest.raises(DomainError):
            DegreeDistribution(np.array([0.5, 0.4]))

    def test_rejects_all_isolated(self):
        with pytest.raises(DomainError):
            DegreeDistribution(np.array([1.0]))

    def test_poisson_truncation_mass_and_mean(self, po4):
        assert po4.probs.sum() == pytest.approx(1.0, abs=1e-14)
        assert po4.mean == pytest.approx(4.0, abs=1e-10)
        assert po4.is_poisson()

    def test_point_mass(self):
        d = DegreeDistribution.point_mass(3)
        assert d.mean == 3.0
        assert q_j(d, 3, 0.6) == pytest.approx(0.6**3, rel=1e-14)


class TestCurves:
    def test_qj_trivial_edges(self, po4):
        assert q_j(po4, 4, 0.0) == 0.0
        tail = po4.probs[2:].sum()
        assert q_j(po4, 2, 1.0) == pytest.approx(tail, rel=1e-13)
        assert q_j(po4, 0, 0.33) == 1.0

    def test_bhl_empty_and_identity(self, po4):
        assert bhl(po4, 3, 0.0) == (0.0, 0.0, 0.0)
        b1, h1, l1 = bhl(po4, 3, 1.0)
        r = np.arange(po4.probs.size)
        assert b1 == pytest.approx(po4.probs[3:].sum(), rel=1e-13)
        assert h1 == pytest.approx((r[3:] * po4.probs[3:]).sum(), rel=1e-13)
        assert l1 == pytest.approx(po4.mean - h1, abs=1e-12)

    @pytest.mark.parametrize("k", [2, 3, 4])
    @pytest.mark.parametrize("lam", [1.0, 2.0, 4.0, 8.0])
    def test_poisson_reduction(self, k, lam):
        # thinning a Poisson law is again Poisson: generic sums must agree
        # with the closed forms
        dist = DegreeDistribution.poisson(lam)
        for p in np.arange(0.1, 0.95, 0.1):
            got = bhl(dist, k, p)
            want = pois_bhl(k, lam, p)
            for g, w in zip(got, want):
                assert g == pytest.approx(w, abs=1e-10)

    def test_q_deriv_poisson_reduction(self, po4):
        assert q_j_deriv(po4, 3, 0.5) == pytest.approx(pois_q_deriv(3, 4.0, 0.5), abs=1e-8)

    def test_q_deriv_point_mass_degree_one(self):
        d = DegreeDistribution(np.array([0.0, 1.0]))
        for p in (0.2, 0.9):
            assert q_j_deriv(d, 1, p) == pytest.approx(1.0, rel=1e-14)

    def test_q_deriv_zero_at_origin(self, po4):
        for j in (2, 4):
            assert q_j_deriv(po4, j, 0.0) == 0.0

    def test_derivatives_match_finite_differences(self, po4):
        for p in np.arange(0.1, 0.95, 0.1):
            for j in (1, 2, 3, 5):
                fd = fd_derivative(lambda q: q_j(po4, j, q), p)
                assert fd == pytest.approx(q_j_deriv(po4, j, p), abs=1e-6)
            fd_b = fd_derivative(lambda q: bhl(po4, 3, q)[0], p)
            assert fd_b == pytest.approx(b_deriv(po4, 3, p), abs=1e-6)
            fd_h = fd_derivative(lambda q: bhl(po4, 3, q)[1], p)
            assert fd_h == pytest.approx(h_deriv(po4, 3, p), abs=1e-6)
            fd_l = fd_derivative(lambda q: bhl(po4, 3, q)[2], p)
            assert fd_l == pytest.approx(l_deriv(po4, 3, p), abs=1e-6)

    def test_b_monotone_and_bounded(self, po4):
        grid = np.linspace(0.0, 1.0, 51)
        vals = [bhl(po4, 3, p) for p in grid]
        bs = [v[0] for v in vals]
        assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(bs, bs[1:]))
        for p, (b, h, _) in zip(grid, vals):
            assert 0.0 <= b <= 1.0
            assert -1e-12 <= h <= po4.mean * p + 1e-12

    def test_log_time_composition(self, po4):
        assert log_time_curves(po4, 3, 0.0) == pytest.approx(bhl(po4, 3, 1.0), abs=1e-14)
        assert log_time_curves(po4, 3, math.log(2)) == pytest.approx(
            bhl(po4, 3, 0.5), abs=1e-14)
        b, h, l = log_time_curves(po4, 3, 40.0)
        assert abs(b) < 1e-12 and abs(h) < 1e-10 and abs(l) < 1e-10


class TestSequences:
    def test_counts_bookkeeping(self):
        seq = DegreeSequence.from_degrees([3, 4, 4, 3])
        assert seq.n == 4 and seq.two_m == 14
        assert seq.m == 7
        np.testing.assert_array_equal(seq.degrees(), [3, 3, 4, 4])

    def test_rejects_odd_total(self):
        with pytest.raises(DomainError):
            DegreeSequence(np.array([0, 1]), 1, 1)

    def test_empirical_dist_all_degree_two(self):
        seq = DegreeSequence(np.array([0, 0, 10]), 10, 20)
        d = empirical_dist(seq)
        assert d.probs[2] == 1.0

    def test_rejects_odd_half_half(self):
        with pytest.raises(DomainError):
            # 3*5 + 4*5 = 35 is odd: rejected
            DegreeSequence(np.array([0, 0, 0, 5, 5]), 10, 35)

    def test_empirical_half_half_even(self):
        seq = DegreeSequence(np.array([0, 0, 0, 4, 4]), 8, 28)
        d = empirical_dist(seq)
        assert d.probs[3] == pytest.approx(0.5)
        assert d.probs[4] == pytest.approx(0.5)
        assert d.mean == pytest.approx(3.5)

    def test_sampled_parity_and_law(self):
        rng = np.random.default_rng(42)
        dist = DegreeDistribution.poisson(4.0)
        seq = DegreeSequence.sampled(dist, 10_001, rng)
        assert seq.two_m % 2 == 0
        assert seq.n == 10_001

    def test_rounded_deterministic(self):
        dist = DegreeDistribution.poisson(4.0)
        a = DegreeSequence.rounded(dist, 5000)
        b = DegreeSequence.rounded(dist, 5000)
        np.testing.assert_array_equal(a.counts, b.counts)
        assert a.two_m % 2 == 0 and a.n == 5000

    @pytest.mark.slow
    def test_empirical_curves_converge(self):
        # sup_p |l_n(p) - l(p)| shrinks as the sample grows
        dist = DegreeDistribution.poisson(4.0)
        rng = np.random.default_rng(7)
        grid = np.linspace(0.01, 1.0, 40)
        sups = []
        for n in (1000, 10_000, 100_000):
            seq = DegreeSequence.sampled(dist, n, rng)
            emp = empirical_dist(seq)
            sup = max(abs(bhl(emp, 3, p)[2] - bhl(dist, 3, p)[2]) for p in grid)
            sups.append(sup)
        assert sups[2] < sups[0]
        assert sups[2] < 0.05

    def test_sampled_curve_close_to_limit(self):
        dist = DegreeDistribution.poisson(4.0)
        rng = np.random.default_rng(3)
        seq = DegreeSequence.sampled(dist, 10_000, rng)
        emp = empirical_dist(seq)
        sup = max(abs(bhl(emp, 3, p)[2] - pois_bhl(3, 4.0, p)[2])
                  for p in np.linspace(0.0, 1.0, 30))
        assert sup < 0.05


class TestConditionReport:
    def test_trivial_values(self):
        all_zero = DegreeSequence(np.array([7]), 7, 0)
        assert condition_report(all_zero, 2.0) == pytest.approx(1.0)
        all_two = DegreeSequence(np.array([0, 0, 6]), 6, 12)
        assert condition_report(all_two, 2.0) == pytest.approx(4.0)

    def test_rejects_nonexpanding_base(self):
        seq = DegreeSequence(np.array([0, 0, 2]), 2, 4)
        with pytest.raises(DomainError):
            condition_report(seq, 1.0)

    def test_poisson_sample_matches_mgf(self):
        # E 2^D = e^{lam (2-1)} = e^4 for the Poisson(4) law
        rng = np.random.default_rng(11)
        dist = DegreeDistribution.poisson(4.0)
        seq = DegreeSequence.sampled(dist, 10_000, rng)
        assert condition_report(seq, 2.0) == pytest.approx(math.exp(4.0), rel=0.2)


class TestDegreeFile:
    def test_plain_layout(self):
        seq = parse_degree_file("3\n1\n2\n2\n")
        assert seq.n == 4 and seq.two_m == 8

    def test_counts_layout(self):
        seq = parse_degree_file("counts\n2 5\n4 5\n")
        assert seq.n == 10 and seq.two_m == 30

    def test_rejects_odd_total(self):
        with pytest.raises(DomainError):
            parse_degree_file("3\n")

    def test_error_carries_line_number(self):
        with pytest.raises(DomainError, match="line 2"):
            parse_degree_file("1\nxyz\n")

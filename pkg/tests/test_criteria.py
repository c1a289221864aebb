"""Tests for the criterion checkers."""

import json
import math

import numpy as np
import pytest

from shiftlab.covering import GradedParams, build_graded_covering
from shiftlab.criteria import (
    CaracParams,
    UnifParams,
    check_basic_criterion,
    check_carac_conditions,
    check_corollary_hypotheses,
    check_unif_hypotheses,
)
from shiftlab.seqspace import ProductKind, basis
from shiftlab.weights import LipschitzProfile, WeightFamily

AFF0 = WeightFamily.affine(0.0)
PP = WeightFamily.pure_power()
GEO = WeightFamily.geometric()


def single_cell_cov():
    p = GradedParams(alpha=0.3, beta=0.7, D=1.0, tau=1.0, eta=0.5, N=10, d=2)
    K = ((1.0, 1.05), (1.0, 1.05))
    return build_graded_covering(K, p), K


def graded_instance():
    p = GradedParams(alpha=0.3, beta=0.7, D=0.3, tau=0.055, eta=2.0, N=150, d=2)
    K = ((1.0, 1.02), (1.0, 1.02))
    return build_graded_covering(K, p), K


class TestBasicCriterion:
    def test_single_cell_anchor_identity_d1(self):
        p = GradedParams(alpha=0.3, beta=0.7, D=1.0, tau=1.0, eta=0.5, N=10, d=1)
        K = ((1.0, 1.05),)
        cov = build_graded_covering(K, p)
        assert cov.q == 1
        rep = check_basic_criterion((AFF0,), cov, (basis(0),), 1, 1,
                                    eps=0.5, samples_per_axis=1)
        assert rep.conditions["IV"].achieved <= 1e-12
        assert rep.conditions["III"].evaluations == 0

    def test_single_cell_anchor_identity(self):
        cov, K = single_cell_cov()
        rep = check_basic_criterion((AFF0, AFF0), cov, (basis(0), basis(0)),
                                    1, 1, eps=0.5, samples_per_axis=1)
        assert rep.conditions["IV"].achieved <= 1e-12
        assert rep.conditions["III"].evaluations == 0
        assert "vacuous" in rep.conditions["III"].note

    def test_eps_zero_fails_with_positive_value(self):
        cov, K = single_cell_cov()
        rep = check_basic_criterion((AFF0, AFF0), cov, (basis(0), basis(0)),
                                    1, 1, eps=0.0, samples_per_axis=1)
        assert not rep.overall
        assert rep.conditions["II.a"].achieved > 0.0

    def test_graded_two_dim_instance_passes(self):
        cov, K = graded_instance()
        rep = check_basic_criterion((AFF0, AFF0), cov, (basis(0), basis(0)),
                                    1, 2, eps=0.1, samples_per_axis=3, region=K)
        assert rep.overall, {k: (c.passed, c.achieved) for k, c in rep.conditions.items()}
        assert rep.conditions["III"].evaluations > 0

    def test_coordinatewise_only(self):
        cov, K = single_cell_cov()
        with pytest.raises(ValueError, match="coordinatewise"):
            check_basic_criterion((AFF0, AFF0), cov, (basis(0), basis(0)), 1, 1, 0.5,
                                  product_kind=ProductKind.CONVOLUTION)

    def test_negative_target_rejected(self):
        cov, K = single_cell_cov()
        with pytest.raises(ValueError, match="negative"):
            check_basic_criterion((AFF0, AFF0), cov, (-1.0 * basis(0), basis(0)), 1, 1, 0.5)

    def test_region_cover_reported(self):
        cov, K = single_cell_cov()
        rep = check_basic_criterion((AFF0, AFF0), cov, (basis(0), basis(0)),
                                    1, 1, eps=0.5, samples_per_axis=1,
                                    region=((0.0, 2.0), (0.0, 2.0)))
        assert not rep.conditions["I"].passed

    def test_monotone_in_eps(self):
        cov, K = graded_instance()
        args = ((AFF0, AFF0), cov, (basis(0), basis(0)), 1, 2)
        loose = check_basic_criterion(*args, eps=10.0, samples_per_axis=2)
        tight = check_basic_criterion(*args, eps=1e-6, samples_per_axis=2)
        for name in ("II.a", "II.b", "III", "IV"):
            if tight.conditions[name].passed:
                assert loose.conditions[name].passed


def unif_exp_alpha_params(**over):
    base = dict(m_prime=2, alpha=0.4, C1=2.0, C2=0.4, beta=0.9, M0=50.0, N0=50,
                F=LipschitzProfile("power", 2.0, 0.4), n_max=500, k_max=2000,
                I0_lo=1.0, I0_hi=2.0, I0_points=9, d=2)
    base.update(over)
    return UnifParams(**base)


class TestUnifHypotheses:
    def test_exp_alpha_passes(self):
        rep = check_unif_hypotheses(WeightFamily.exp_alpha(0.4), unif_exp_alpha_params())
        assert rep.overall, {k: c.passed for k, c in rep.conditions.items()}

    def test_pure_power_log_profile_passes(self):
        p = UnifParams(m_prime=2, alpha=0.2, C1=2.0, C2=0.3, beta=0.45, M0=1.0, N0=150,
                       F=LipschitzProfile("log", 1.05), n_max=400, k_max=2000,
                       I0_lo=1.0, I0_hi=2.0, I0_points=9, d=2,
                       divergence_threshold=1000.0)
        rep = check_unif_hypotheses(PP, p)
        assert rep.overall

    def test_tiny_m0_fails_with_witness(self):
        rep = check_unif_hypotheses(WeightFamily.exp_alpha(0.4),
                                    unif_exp_alpha_params(M0=1e-30))
        cond = rep.conditions["iii.growth"]
        assert not cond.passed
        assert set(cond.witness) == {"n", "k", "a"}

    def test_divergence_probe_labelled(self):
        rep = check_unif_hypotheses(WeightFamily.exp_alpha(0.4), unif_exp_alpha_params())
        assert "probe" in rep.conditions["ii"].note

    def test_monotone_in_m0(self):
        fam = WeightFamily.exp_alpha(0.4)
        tight = check_unif_hypotheses(fam, unif_exp_alpha_params(M0=1e-6))
        loose = check_unif_hypotheses(fam, unif_exp_alpha_params(M0=1e6))
        for name in ("iii.growth", "iii.root"):
            if tight.conditions[name].passed:
                assert loose.conditions[name].passed

    def test_profile_cap_invariant(self):
        with pytest.raises(ValueError, match="C1"):
            unif_exp_alpha_params(F=LipschitzProfile("power", 5.0, 0.4))

    def test_beta_invariant(self):
        with pytest.raises(ValueError, match="beta"):
            unif_exp_alpha_params(beta=0.5)

    def test_margin_table_per_nk(self):
        rep = check_unif_hypotheses(
            WeightFamily.exp_alpha(0.4),
            unif_exp_alpha_params(n_max=60, k_max=60, N0=50, I0_points=3),
            collect_table=True)
        table = rep.meta["table"]
        assert len(table) == 11 * 11  # one row per (n, k) pair
        assert {"n", "k", "log_margin_growth", "log_margin_root"} == set(table[0])
        # table margins are worst-case over the grid: all below zero iff pass
        assert max(r["log_margin_growth"] for r in table) == pytest.approx(
            rep.conditions["iii.growth"].achieved)


class TestCorollaryHypotheses:
    GRID_12 = np.linspace(1.0, 2.0, 9).tolist()
    GRID_23 = np.linspace(2.0, 3.0, 9).tolist()

    def test_affine_half_variant1_passes(self):
        rep = check_corollary_hypotheses(
            WeightFamily.affine(0.5), self.GRID_12, 1,
            {"D1": 2.1, "D2": 0.5, "D3": 1.0, "alpha": 0.5}, N=25, n_max=2000)
        assert rep.overall

    def test_pure_power_variant2_passes(self):
        rep = check_corollary_hypotheses(
            PP, self.GRID_12, 2, {"D1": 1.000001, "D2": 1.0, "gamma": 1.0},
            N=2, n_max=5000)
        assert rep.overall

    def test_affine0_variant2_passes(self):
        rep = check_corollary_hypotheses(
            AFF0, self.GRID_12, 2, {"D1": 1.0, "D2": 1.0, "gamma": 1.0},
            N=5, n_max=10_000)
        assert rep.overall

    def test_geometric_fails_lipschitz_bullet(self):
        rep = check_corollary_hypotheses(
            GEO, self.GRID_23, 2, {"D1": 1.0, "D2": 1.0, "gamma": 1.0},
            N=5, n_max=10_000)
        assert not rep.conditions["lipschitz"].passed
        # linear-scale ratio versus a log bound: enormous violation
        assert rep.conditions["lipschitz"].achieved > 100 * rep.conditions["lipschitz"].bound

    def test_variant1_needs_alpha(self):
        with pytest.raises(ValueError, match="alpha"):
            check_corollary_hypotheses(PP, self.GRID_12, 1,
                                       {"D1": 1.0, "D2": 1.0, "D3": 1.0}, 5, 100)

    def test_unknown_variant(self):
        with pytest.raises(ValueError, match="variant"):
            check_corollary_hypotheses(PP, self.GRID_12, 3,
                                       {"D1": 1.0, "D2": 1.0}, 5, 100)


class TestCaracConditions:
    def exp_alpha_setup(self, m=3, q=20, eps=1.0):
        fam = WeightFamily.exp_alpha(0.5)
        sched = [(100 * k, (1.5,)) for k in range(1, q + 1)]
        p = CaracParams(m=m, tau=1.0, N=50, eps=eps, K=((1.5, 1.5),),
                        F=LipschitzProfile("power", 1.0, 0.5), c=0.5, C=2.0)
        return fam, sched, p

    def test_ii_matches_direct_sum(self):
        fam, sched, p = self.exp_alpha_setup()
        rep = check_carac_conditions((fam,), sched, p)
        direct = math.fsum(math.exp(-1.5 * (100 * k) ** 0.5 / 3) for k in range(1, 21))
        assert rep.conditions["ii"].achieved == pytest.approx(direct, rel=1e-12)

    def test_singleton_box_covered_for_any_tau(self):
        fam, sched, p = self.exp_alpha_setup(q=1)
        for tau in (1e-6, 1.0, 1e6):
            p2 = CaracParams(m=p.m, tau=tau, N=p.N, eps=p.eps, K=p.K, F=p.F,
                             c=p.c, C=p.C)
            rep = check_carac_conditions((fam,), sched[:1], p2)
            assert rep.conditions["i"].passed

    def test_huge_eps_passes_tails(self):
        fam, sched, p = self.exp_alpha_setup(eps=1e6)
        rep = check_carac_conditions((fam,), sched, p)
        assert rep.conditions["ii"].passed and rep.conditions["iii"].passed

    def test_spacing_violation_reported_as_zero(self):
        fam = WeightFamily.exp_alpha(0.5)
        sched = [(10, (1.5,)), (15, (1.5,))]
        p = CaracParams(m=2, tau=1.0, N=50, eps=1.0, K=((1.5, 1.5),),
                        F=LipschitzProfile("power", 1.0, 0.5), c=0.5, C=2.0)
        rep = check_carac_conditions((fam,), sched, p)
        assert not rep.conditions["0"].passed
        assert rep.conditions["0"].achieved == 5.0

    def test_two_dim_pure_power(self):
        fams = (PP, PP)
        sched = [(200 * k, (1.2 + 0.01 * k, 1.3 - 0.01 * k)) for k in range(1, 11)]
        p = CaracParams(m=2, tau=2.0, N=100, eps=1.0, K=((1.21, 1.22), (1.21, 1.22)),
                        F=LipschitzProfile("log", 1.0), c=0.5, C=1.5)
        rep = check_carac_conditions(fams, sched, p)
        assert rep.conditions["ii"].passed
        assert rep.conditions["iii"].evaluations == 10 * 2 * (p.N + 1)

    def test_ii_pure_power_matches_rational_oracle(self):
        # lambda = 2, m = 2: the coefficients are exactly 1/n_k, so the sum
        # has an exact rational value via Fraction
        from fractions import Fraction

        ns = [137, 300, 451, 964, 2111, 5000, 9999]
        sched = [(n, (2.0,)) for n in ns]
        p = CaracParams(m=2, tau=1.0, N=100, eps=1.0, K=((2.0, 2.0),),
                        F=LipschitzProfile("log", 1.0), c=0.5, C=2.0)
        rep = check_carac_conditions((PP,), sched, p)
        oracle = float(sum(Fraction(1, n) for n in ns))
        assert rep.conditions["ii"].achieved == pytest.approx(oracle, rel=1e-12)

    def test_monotone_in_eps(self):
        fam, sched, _ = self.exp_alpha_setup()
        for eps1, eps2 in ((1e-9, 1e-3), (1e-3, 1e3)):
            p1 = CaracParams(m=3, tau=1.0, N=50, eps=eps1, K=((1.5, 1.5),),
                             F=LipschitzProfile("power", 1.0, 0.5), c=0.5, C=2.0)
            p2 = CaracParams(m=3, tau=1.0, N=50, eps=eps2, K=((1.5, 1.5),),
                             F=LipschitzProfile("power", 1.0, 0.5), c=0.5, C=2.0)
            r1 = check_carac_conditions((fam,), sched, p1)
            r2 = check_carac_conditions((fam,), sched, p2)
            for name in ("ii", "iii"):
                if r1.conditions[name].passed:
                    assert r2.conditions[name].passed


class TestReportDeterminism:
    def test_bitwise_identical_json(self):
        cov, K = graded_instance()
        args = ((AFF0, AFF0), cov, (basis(0), basis(0)), 1, 2)
        a = check_basic_criterion(*args, eps=0.1, samples_per_axis=2, region=K)
        b = check_basic_criterion(*args, eps=0.1, samples_per_axis=2, region=K)
        ja = json.dumps(a.to_json_dict(), sort_keys=True)
        jb = json.dumps(b.to_json_dict(), sort_keys=True)
        assert ja == jb

    def test_rows_export(self):
        rep = check_corollary_hypotheses(
            PP, np.linspace(1, 2, 5).tolist(), 2,
            {"D1": 1.01, "D2": 1.0, "gamma": 1.0}, N=2, n_max=100)
        rows = rep.rows()
        assert [r["condition"] for r in rows] == ["lipschitz", "growth"]
        assert all({"pass", "achieved", "bound", "margin"} <= set(r) for r in rows)

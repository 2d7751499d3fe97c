import numpy as np
import pytest

import geim
from geim import analysis
from geim.analysis import (
    RankDeficientError,
    gram_schmidt_matrix,
    kolmogorov_widths,
    lebesgue_empirical,
    lebesgue_hilbert,
    lebesgue_upper_bound,
    project,
    projection_product_inequality,
    worst_projection_errors,
)
from geim.core import HILBERT, SUP, DiscreteFunction, FunctionSet, Grid, UnsupportedModeError


def unit_grid(n):
    return Grid(np.arange(float(n)), np.ones(n))


def df(grid, *vals):
    return DiscreteFunction(grid, np.array(vals, dtype=float))


class TestProject:
    @pytest.mark.parametrize("mode", [HILBERT, SUP])
    def test_member_of_span_has_zero_distance(self, mode):
        g = unit_grid(4)
        basis = [df(g, 1, 0, 2, 0), df(g, 0, 1, 1, 0)]
        f = df(g, 2, 3, 7, 0)  # 2*b0 + 3*b1
        _, dist = project(f, basis, mode)
        assert dist <= 1e-10

    def test_hand_orthogonal_distance(self):
        g = unit_grid(3)
        _, dist = project(df(g, 0, 0, 0.5), [df(g, 1, 0, 0)], HILBERT)
        assert dist == pytest.approx(0.5, abs=1e-12)

    def test_sup_symmetric_two_point_case(self):
        # minimize max(|1 - c|, |-1 - c|): best c = 0, distance 1
        g = unit_grid(2)
        best, dist = project(df(g, 1, -1), [df(g, 1, 1)], SUP)
        assert dist == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(best.values, 0.0, atol=1e-9)

    def test_rank_deficient_basis_rejected(self):
        g = unit_grid(3)
        with pytest.raises(RankDeficientError):
            project(df(g, 1, 2, 3), [df(g, 1, 0, 0), df(g, 2, 0, 0)], HILBERT)


class TestTau:
    def test_hand_example_tau1(self, hand_example):
        _, F, _, result = hand_example
        tau = worst_projection_errors(F, result)
        assert tau[0] == pytest.approx(0.8, abs=1e-14)  # worst of {0.8, 0.5}
        assert tau[-1] <= 1e-10  # full capture at the snapshot rank

    def test_nonincreasing_and_dominates_width(self, hilbert_runs):
        for run in hilbert_runs:
            rep = run.report
            assert np.all(np.diff(rep.tau) <= 1e-12), run.name
            assert np.all(rep.d <= rep.tau * (1 + 1e-9) + 1e-12), run.name
            assert rep.tau.max() <= 1.0 + 1e-12


class TestWidths:
    def test_orthonormal_snapshots(self):
        g = unit_grid(4)
        F = FunctionSet(tuple(df(g, *row) for row in np.eye(4)[:3]))
        d = kolmogorov_widths(F, 3)
        assert d[0] == pytest.approx(1.0)
        # equal norms: projecting onto any leading SVD directions leaves a
        # unit residual for the remaining members
        np.testing.assert_allclose(d[1:3], 1.0, atol=1e-12)
        assert d[3] <= 1e-10

    def test_rank_r_set_hits_zero(self):
        g = unit_grid(5)
        rng = np.random.default_rng(0)
        base = rng.normal(size=(2, 5))
        coeffs = rng.normal(size=(6, 2))
        F = FunctionSet(tuple(DiscreteFunction(g, c @ base) for c in coeffs))
        d = kolmogorov_widths(F, 4)
        assert d[2] <= 1e-10

    def test_sup_mode_unsupported(self, gauss_hilbert):
        with pytest.raises(UnsupportedModeError):
            kolmogorov_widths(gauss_hilbert.F, 3, mode=SUP)

    def test_brute_force_oracle_on_hand_example(self, hand_example):
        # the SVD-space value upper-bounds the true best single direction;
        # on this asymmetric set the two differ by about 0.012
        _, F, _, _ = hand_example
        d1 = kolmogorov_widths(F, 1)[1]
        S = F.values_matrix()
        best = np.inf
        th = np.linspace(0, np.pi, 721)
        ph = np.linspace(0, np.pi, 361)
        T, P = np.meshgrid(th, ph, indexing="ij")
        dirs = np.stack(
            [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1
        ).reshape(-1, 3)
        proj = dirs @ S.T
        resid = np.sqrt(np.maximum((S * S).sum(axis=1)[None, :] - proj**2, 0))
        best = resid.max(axis=1).min()
        assert best <= d1 + 1e-12
        assert d1 - best == pytest.approx(0.0118, abs=2e-3)


class TestLebesgue:
    def test_matched_pairs_give_one(self):
        g = unit_grid(3)
        F = FunctionSet((df(g, 1, 0, 0), df(g, 0, 1, 0)))
        sigmas = geim.dirac_dictionary(g, HILBERT)
        res = geim.run_geim(F, sigmas, geim.GreedyConfig(n_max=2))
        lam, beta = lebesgue_hilbert(res, 2)
        assert beta == pytest.approx(1.0, abs=1e-12)
        assert lam == pytest.approx(1.0, abs=1e-12)

    def test_hand_example_beta2(self, hand_example):
        _, _, _, result = hand_example
        lam, beta = lebesgue_hilbert(result, 2)
        assert beta == pytest.approx(1.0, abs=1e-12)

    def test_invariant_under_basis_rotation(self, gauss_hilbert):
        from dataclasses import replace

        result = gauss_hilbert.result
        n = 6
        rng = np.random.default_rng(2)
        Qmat, _ = np.linalg.qr(rng.normal(size=(n, n)))
        rotated_vals = result.basis_matrix()[:, :n] @ Qmat
        rotated = replace(
            result,
            basis_q=tuple(
                DiscreteFunction(result.grid, rotated_vals[:, j]) for j in range(n)
            ),
            selected_sigma=result.selected_sigma[:n],
            selected_phi=result.selected_phi[:n],
        )
        lam1, beta1 = lebesgue_hilbert(result, n)
        lam2, beta2 = lebesgue_hilbert(rotated, n)
        assert beta2 == pytest.approx(beta1, abs=1e-10)
        assert lam2 == pytest.approx(lam1, abs=1e-10)

    def test_empirical_below_exact_below_upper(self, hilbert_runs):
        for run in hilbert_runs:
            result, report = run.result, run.report
            for n in (2, result.n // 2, result.n):
                emp = lebesgue_empirical(result, run.F, n)
                exact = report.lam[n - 1]
                upper = report.lebesgue_upper[n - 1]
                assert emp <= exact + 1e-9, run.name
                assert exact <= upper * (1 + 1e-9), run.name

    def test_probes_inside_span_give_ratio_one(self, gauss_hilbert):
        result = gauss_hilbert.result
        n = 5
        rng = np.random.default_rng(8)
        probes = FunctionSet(tuple(
            DiscreteFunction(
                result.grid, result.basis_matrix()[:, :n] @ rng.normal(size=n)
            )
            for _ in range(4)
        ))
        assert lebesgue_empirical(result, probes, n) == pytest.approx(1.0, abs=1e-9)

    def test_sup_empirical_below_growth_bound(self, gauss_sup):
        result = gauss_sup.result
        for n in (3, 10, result.n):
            emp = lebesgue_empirical(result, gauss_sup.F, n, SUP)
            assert emp <= lebesgue_upper_bound(result, n, SUP) * (1 + 1e-9)


class TestGramSchmidtMatrix:
    def test_orthogonal_selection_gives_diagonal(self):
        g = unit_grid(3)
        F = FunctionSet((df(g, 2, 0, 0), df(g, 0, 1.5, 0), df(g, 0, 0, 1)))
        sigmas = geim.dirac_dictionary(g, HILBERT)
        res = geim.run_geim(F, sigmas, geim.GreedyConfig(n_max=3, mode=HILBERT))
        rep = analysis.build_report(F, res)
        mats = gram_schmidt_matrix(res, rep.tau, rep.gamma)
        off = mats.a - np.diag(np.diag(mats.a))
        np.testing.assert_allclose(off, 0.0, atol=1e-14)

    def test_hand_example_diagonal_equals_tau(self, hand_example):
        _, F, _, result = hand_example
        rep = analysis.build_report(F, result)
        mats = gram_schmidt_matrix(result, rep.tau, rep.gamma)
        assert abs(mats.a[1, 1]) == pytest.approx(0.8, abs=1e-14)  # equality case

    def test_inequalities_hold_on_runs(self, hilbert_runs):
        for run in hilbert_runs:
            rep = run.report
            mats = gram_schmidt_matrix(run.result, rep.tau, rep.gamma)
            assert mats.diagonal_ok, run.name
            assert mats.tails_ok, run.name

    def test_block_extraction(self, gauss_hilbert):
        rep = gauss_hilbert.report
        mats = gram_schmidt_matrix(gauss_hilbert.result, rep.tau, rep.gamma)
        G = mats.block(2, 5)
        assert G.shape == (5, 5)
        np.testing.assert_allclose(np.triu(G, 1), 0.0, atol=1e-12)


class TestProjectionProductInequality:
    def test_identity_equality_case(self):
        K, m = 5, 2
        W = np.eye(K)[:, :m]
        ok, log_lhs, log_rhs, margin = projection_product_inequality(np.eye(K), W, m)
        assert ok
        assert log_lhs == pytest.approx(0.0, abs=1e-12)
        assert log_rhs == pytest.approx(0.0, abs=1e-12)

    def test_zero_diagonal_trivially_passes(self):
        G = np.tril(np.ones((3, 3)))
        G[1, 1] = 0.0
        ok, log_lhs, _, _ = projection_product_inequality(G, np.eye(3)[:, :1], 1)
        assert ok
        assert log_lhs == -np.inf

    def test_thousand_random_instances(self):
        rng = np.random.default_rng(20240915)
        for _ in range(1000):
            K = int(rng.integers(2, 13))
            m = int(rng.integers(1, K))
            G = np.tril(rng.normal(size=(K, K)))
            W = rng.normal(size=(K, m))
            ok, log_lhs, log_rhs, _ = projection_product_inequality(G, W, m)
            assert ok

    def test_real_run_block_with_svd_subspace(self, gauss_hilbert):
        rep = gauss_hilbert.report
        mats = gram_schmidt_matrix(gauss_hilbert.result, rep.tau, rep.gamma)
        G = mats.block(1, 6)
        rng = np.random.default_rng(1)
        ok, *_ = projection_product_inequality(G, rng.normal(size=(6, 3)), 3)
        assert ok


def test_report_gamma_in_unit_interval(hilbert_runs):
    for run in hilbert_runs:
        g = run.report.gamma
        assert np.all((g > 0) & (g <= 1)), run.name


def test_report_lambda_equals_inverse_beta(gauss_hilbert):
    rep = gauss_hilbert.report
    np.testing.assert_allclose(rep.lam * rep.beta_infsup, 1.0, atol=1e-12)

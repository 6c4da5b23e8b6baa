"""Acceptance suite: one test per release criterion.

Each test prints a PASS line with its runtime; tolerances and budgets are
pinned here and should not be loosened. Run with `pytest -s` to see the
per-criterion report.
"""

import hashlib
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chi2, kstest

from genokit import assoc, empkin, mcimpute, pedkin, simulate, snpcore, vcmodel
from genokit.cli import dispatch
from genokit.mcimpute import ObservationMask, WindowPlan
from genokit.pedkin import KinshipMatrix, PedMember, Pedigree
from genokit.sparsegwas import IhtConfig, cross_validate_k, iht_fit
from genokit.vcmodel import VcModel, lrt, mm_fit, score_test, spectral_fit


def report(number, name, t0, budget):
    elapsed = time.perf_counter() - t0
    print(f"[ACCEPTANCE] criterion {number} ({name}): PASS ({elapsed:.1f} s / budget {budget:.0f} s)")
    assert elapsed < budget, f"criterion {number} exceeded its {budget} s budget ({elapsed:.1f} s)"


class TestCriterion1FormatFidelity:
    BUDGET = 10.0

    def test_roundtrips_and_crafted_bytes(self, tmp_path):
        t0 = time.perf_counter()
        rng = np.random.default_rng(20_250_101)
        prefix = tmp_path / "rt"
        for rep in range(1000):
            n = int(rng.integers(1, 65))
            m = int(rng.integers(1, 257))
            d = rng.integers(0, 3, size=(n, m))
            d[rng.random((n, m)) < 0.1] = -1
            mat = snpcore.PackedGenotypeMatrix.from_dosages(d)
            snpcore.write_plink(mat, prefix)
            back = snpcore.read_plink(prefix)
            assert np.array_equal(back.data, mat.data), f"rep {rep}: payload differs"
            assert back == mat

        # crafted byte fixtures against the 2-bit code table
        crafted = {
            0b11011000: [2, 1, -1, 0],
            0b00000000: [2, 2, 2, 2],
            0b01010101: [-1, -1, -1, -1],
            0b10101010: [1, 1, 1, 1],
            0b11111111: [0, 0, 0, 0],
            0b00011011: [0, 1, -1, 2],
        }
        for byte, expected in crafted.items():
            mat = snpcore.PackedGenotypeMatrix(
                4, 1, np.array([[byte]], dtype=np.uint8),
                snpcore.default_snp_meta(1), snpcore.default_subject_meta(4),
            )
            assert mat.dosage_column(0, dtype=np.int8).tolist() == expected, bin(byte)
        report(1, "format fidelity", t0, self.BUDGET)


class TestCriterion2PackedKernels:
    BUDGET = 30.0

    def test_gemv_and_kinship_match_dense_oracles(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(2)
        modes = ["raw", "centered", "standardized"]
        for rep in range(50):
            n = int(rng.integers(20, 61))
            m = int(rng.integers(50, 201))
            freqs = rng.uniform(0.05, 0.95, size=m)
            d = simulate.hwe_genotypes(n, freqs, rng, missing_rate=0.05)
            mat = simulate.packed_from_dosages(d)
            p_hat = snpcore.allele_frequencies(mat)
            dense = {mode: _dense_oracle(d, mode, p_hat) for mode in modes}

            mode = modes[rep % 3]
            v = rng.standard_normal(m)
            got = snpcore.packed_gemv(mat, v, mode=mode)
            want = dense[mode] @ v
            assert _rel_err(got, want) <= 1e-10
            u = rng.standard_normal(n)
            got_t = snpcore.packed_gemv(mat, u, mode=mode, transpose=True)
            assert _rel_err(got_t, dense[mode].T @ u) <= 1e-10

            keep = (p_hat > 0) & (p_hat < 1)
            z = dense["centered"][:, keep]
            pk = p_hat[keep]
            grm_oracle = np.zeros((n, n))
            rob_num = np.zeros((n, n))
            for i in range(n):
                for j in range(i, n):
                    terms = z[i] * z[j]
                    grm_oracle[i, j] = grm_oracle[j, i] = np.sum(terms / (4 * pk * (1 - pk)))
                    rob_num[i, j] = rob_num[j, i] = np.sum(terms)
            grm_oracle /= keep.sum()
            rob_oracle = rob_num / np.sum(4 * pk * (1 - pk))
            assert _rel_err(empkin.grm(mat).values, grm_oracle) <= 1e-10
            assert _rel_err(empkin.robust_grm(mat).values, rob_oracle) <= 1e-10
        report(2, "packed kernel equivalence", t0, self.BUDGET)


def _rel_err(got, want):
    scale = np.linalg.norm(np.asarray(want).ravel()) or 1.0
    return np.linalg.norm((np.asarray(got) - np.asarray(want)).ravel()) / scale


def _dense_oracle(d, mode, freq):
    d = np.where(d == -1, np.nan, d.astype(float))
    out = np.empty_like(d)
    for j in range(d.shape[1]):
        p = freq[j]
        col = d[:, j].copy()
        col[np.isnan(col)] = 2 * p if np.isfinite(p) else 0.0
        if mode == "raw":
            out[:, j] = col
        elif mode == "centered":
            out[:, j] = col - (2 * p if np.isfinite(p) else 0.0)
        else:
            var = 2 * p * (1 - p)
            out[:, j] = (col - 2 * p) / np.sqrt(var) if var > 0 else 0.0
    return out


FIXTURE_PEDIGREES = {
    "nuclear": (
        [PedMember("f"), PedMember("m"),
         PedMember("c1", "f", "m"), PedMember("c2", "f", "m")],
        {("f", "m"): Fraction(0), ("f", "c1"): Fraction(1, 4),
         ("c1", "c2"): Fraction(1, 4), ("c1", "c1"): Fraction(1, 2),
         ("f", "f"): Fraction(1, 2)},
    ),
    "three-generation": (
        [PedMember("gf"), PedMember("gm"), PedMember("p", "gf", "gm"),
         PedMember("q"), PedMember("c", "p", "q")],
        {("gf", "p"): Fraction(1, 4), ("gf", "c"): Fraction(1, 8),
         ("gm", "c"): Fraction(1, 8), ("p", "c"): Fraction(1, 4),
         ("q", "c"): Fraction(1, 4), ("gf", "q"): Fraction(0),
         ("c", "c"): Fraction(1, 2)},
    ),
    "full-sib-mating": (
        [PedMember("a"), PedMember("b"), PedMember("s1", "a", "b"),
         PedMember("s2", "a", "b"), PedMember("k", "s1", "s2")],
        {("s1", "s2"): Fraction(1, 4), ("k", "k"): Fraction(5, 8),
         ("s1", "k"): Fraction(3, 8), ("a", "k"): Fraction(1, 4)},
    ),
    "half-sibs": (
        [PedMember("f"), PedMember("m1"), PedMember("m2"),
         PedMember("h1", "f", "m1"), PedMember("h2", "f", "m2")],
        {("h1", "h2"): Fraction(1, 8), ("f", "h1"): Fraction(1, 4),
         ("m1", "h2"): Fraction(0), ("h1", "h1"): Fraction(1, 2)},
    ),
    "first-cousins": (
        [PedMember("g1"), PedMember("g2"), PedMember("s1", "g1", "g2"),
         PedMember("s2", "g1", "g2"), PedMember("p1"), PedMember("p2"),
         PedMember("c1", "s1", "p1"), PedMember("c2", "s2", "p2")],
        {("c1", "c2"): Fraction(1, 16), ("s1", "c2"): Fraction(1, 8),
         ("g1", "c1"): Fraction(1, 8), ("c1", "c1"): Fraction(1, 2),
         ("p1", "c2"): Fraction(0)},
    ),
}


class TestCriterion3KinshipConcordance:
    BUDGET = 60.0

    def test_recurrence_exact_and_gene_drop_close(self):
        t0 = time.perf_counter()
        for name, (members, expected) in FIXTURE_PEDIGREES.items():
            ped = Pedigree(members)
            kin = pedkin.theoretical_kinship(ped)
            for (a, b), frac in expected.items():
                got = kin.values[ped.index[a], ped.index[b]]
                assert got == float(frac), f"{name}: phi({a},{b}) = {got} != {frac}"
            drop = pedkin.gene_drop(ped, 100_000, seed=hash(name) % 2**32)
            gap = np.max(np.abs(drop.kinship.values - kin.values))
            assert gap < 0.01, f"{name}: gene-drop gap {gap:.4f}"
        report(3, "kinship concordance", t0, self.BUDGET)


class TestCriterion4VarianceApprox:
    BUDGET = 120.0

    def test_gaussian_monte_carlo_within_15_percent(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(4)
        n, K, reps = 10, 2000, 500
        phi_vals = 0.5 * np.eye(n)
        phi_vals[0, 1] = phi_vals[1, 0] = 0.25   # one related pair
        phi = KinshipMatrix(phi_vals, "theoretical", tuple(f"s{i}" for i in range(n)))
        L = np.linalg.cholesky(phi_vals)
        total = 0.0
        for _ in range(reps):
            w = L @ rng.standard_normal((n, K))
            s = (w @ w.T) / K
            total += float(np.sum((s - phi_vals) ** 2))
        empirical = total / reps
        formula = empkin.grm_variance_approx(phi, np.eye(K), K)
        gap = abs(empirical - formula) / formula
        assert gap < 0.15, f"empirical {empirical:.5g} vs formula {formula:.5g} ({gap:.1%})"
        report(4, "variance approximation", t0, self.BUDGET)


class TestCriterion5Imputation:
    BUDGET = 180.0

    def rank3_panel(self, rng, n=200, m=300, missing=0.05):
        groups = rng.integers(0, 3, size=n)
        v = rng.integers(0, 3, size=(3, m)).astype(float)
        truth = (np.eye(3)[groups] @ v).astype(int)
        x = truth.astype(float)
        holes = rng.random(x.shape) < missing
        x[holes] = np.nan
        return truth, x, holes

    def test_monotone_recovery_and_rank_selection(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(5)

        # monotone loss on both solvers
        for rep in range(5):
            x = rng.standard_normal((30, 24))
            x[rng.random(x.shape) < 0.2] = np.nan
            omega = ObservationMask.from_observed(x)
            _, tr_svd = mcimpute.svd_impute(x, omega, r=3)
            init = mcimpute.randomized_svd(np.where(omega.mask, x, 0.0), 3, seed=rep)
            _, tr_als = mcimpute.als_complete(x, omega, 3, init)
            for tr in (tr_svd, tr_als):
                assert all(b <= a + 1e-7 * (abs(a) + 1) for a, b in zip(tr, tr[1:]))

        # rank-1 masked recovery to 1e-6
        u = rng.standard_normal((25, 1))
        v = rng.standard_normal((1, 30))
        truth1 = u @ v
        x1 = np.where(rng.random(truth1.shape) < 0.1, np.nan, truth1)
        f, _ = mcimpute.svd_impute(x1, ObservationMask.from_observed(x1), 1,
                                   tol=1e-12, max_iter=500)
        assert np.max(np.abs(f.product() - truth1)) < 1e-6

        # 200 x 300 rank-3 panel: hard-call accuracy and dosage error
        truth, x, holes = self.rank3_panel(np.random.default_rng(55))
        mat = simulate.packed_from_dosages(np.where(np.isnan(x), -1, x).astype(int))
        res = mcimpute.impute_pipeline(
            mat, plan=WindowPlan(width=60, rank_grid=(1, 2, 3, 5), seed=0)
        )
        mse = float(np.mean((res.dosages[holes] - truth[holes]) ** 2))
        hard = res.hard_calls.dosage_block(0, mat.n_snps, dtype=np.int8)
        acc = float(np.mean(hard[holes] == truth[holes]))
        assert mse < 0.05, f"masked dosage MSE {mse:.4f}"
        assert acc > 0.95, f"hard-call accuracy {acc:.3f}"

        # select_rank recovers the planted rank in >= 80% of 20 replicates
        hits = 0
        for rep in range(20):
            rng_rep = np.random.default_rng(500 + rep)
            _, xw, _ = self.rank3_panel(rng_rep, n=90, m=90, missing=0.05)
            omega = ObservationMask.from_observed(xw)
            r, _ = mcimpute.select_rank(xw, omega, [1, 2, 3, 5], seed=rep)
            hits += r == 3
        assert hits >= 16, f"rank recovered in {hits}/20 replicates"
        report(5, "imputation", t0, self.BUDGET)


class TestCriterion6Iht:
    BUDGET = 300.0

    def test_exactness_descent_recovery_cv(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(6)

        # orthonormal design, one exact step
        q, _ = np.linalg.qr(rng.standard_normal((60, 12)))
        y = rng.standard_normal(60)
        fit = iht_fit(q, y, IhtConfig(k=12, standardize=False, add_intercept=False))
        assert np.allclose(fit.beta, q.T @ y, atol=1e-12)
        ls_loss = 0.5 * float(np.sum((y - q @ (q.T @ y)) ** 2))
        assert fit.loss_trace[1] == pytest.approx(ls_loss, rel=1e-12)

        # planted-support recovery: n=500, p=2000, k=10, 50 replicates
        hits = 0
        for rep in range(50):
            rng_rep = np.random.default_rng(6000 + rep)
            X = rng_rep.standard_normal((500, 2000))
            support = rng_rep.choice(2000, size=10, replace=False)
            beta = np.zeros(2000)
            beta[support] = rng_rep.choice([-0.5, 0.5], size=10)
            y = X @ beta + rng_rep.standard_normal(500)
            fit = iht_fit(X, y, IhtConfig(k=10, standardize=False, add_intercept=False))
            assert all(
                b <= a + 1e-12 * (abs(a) + 1)
                for a, b in zip(fit.loss_trace, fit.loss_trace[1:])
            )
            hits += set(fit.support) == set(support)
        assert hits >= 45, f"support recovered in {hits}/50 replicates"

        # cross-validation picks the planted k in the majority of 20 replicates
        wins = 0
        for rep in range(20):
            rng_rep = np.random.default_rng(7000 + rep)
            X = rng_rep.standard_normal((300, 600))
            support = rng_rep.choice(600, size=10, replace=False)
            beta = np.zeros(600)
            beta[support] = rng_rep.choice([-1.0, 1.0], size=10)
            y = X @ beta + 0.8 * rng_rep.standard_normal(300)
            cfg = IhtConfig(k=10, standardize=False, add_intercept=False)
            k, _ = cross_validate_k(X, y, [5, 10, 15, 20], folds=5, seed=rep, cfg=cfg)
            wins += k == 10
        assert wins > 10, f"cross-validation chose k=10 in {wins}/20 replicates"
        report(6, "iterative hard thresholding", t0, self.BUDGET)


class TestCriterion7VarianceComponents:
    BUDGET = 600.0

    def test_vc_fitting_stack(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(7)

        # mm_fit == OLS closed forms (V = I) to 1e-10
        n, p = 120, 3
        X = np.hstack([np.ones((n, 1)), rng.standard_normal((n, p - 1))])
        y = X @ rng.standard_normal(p) + 0.7 * rng.standard_normal(n)
        est = mm_fit(VcModel(y, X, [np.eye(n)]), tol=0.0, max_iter=500)
        beta_ols = np.linalg.lstsq(X, y, rcond=None)[0]
        s2_ml = float(np.sum((y - X @ beta_ols) ** 2) / n)
        assert np.max(np.abs(est.beta - beta_ols)) < 1e-10
        assert abs(est.sigma2[0] - s2_ml) < 1e-10

        # spectral == dense to 1e-6, monotone traces
        for n_sub in (50, 200):
            phi = 0.5 * np.eye(n_sub)
            for b in range(0, n_sub - 1, 2):
                phi[b, b + 1] = phi[b + 1, b] = 0.25
            Xs = np.hstack([np.ones((n_sub, 1)), rng.standard_normal((n_sub, 1))])
            L = np.linalg.cholesky(2 * phi + 1e-10 * np.eye(n_sub))
            ys = Xs @ [1.0, -0.5] + L @ rng.standard_normal(n_sub) + 0.6 * rng.standard_normal(n_sub)
            dense = mm_fit(VcModel(ys, Xs, [phi, np.eye(n_sub)]), tol=1e-10, max_iter=4000)
            spec = spectral_fit(ys, Xs, phi, tol=1e-10, max_iter=4000)
            assert np.max(np.abs(spec.beta - dense.beta)) < 1e-6
            assert np.max(np.abs(spec.sigma2 - dense.sigma2)) < 1e-6
            assert abs(spec.loglik - dense.loglik) < 1e-6
            for tr in (dense.loglik_trace, spec.loglik_trace):
                assert all(b2 >= a2 - 1e-9 * (abs(a2) + 1) for a2, b2 in zip(tr, tr[1:]))

        # analytic gradient vs central finite differences, relative 1e-5
        model = VcModel(
            y, X, [_random_psd(rng, n, 10), np.eye(n)], labels=("g", "e")
        )
        sigma2 = np.array([0.9, 1.1])
        beta = rng.standard_normal(p)
        grad = vcmodel.loglik_gradient_sigma2(model, beta, sigma2)
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1e-5
            fd = (
                vcmodel.loglik(model, beta, sigma2 + e)
                - vcmodel.loglik(model, beta, sigma2 - e)
            ) / 2e-5
            assert abs(fd - grad[j]) <= 1e-5 * max(1.0, abs(grad[j]))

        # spectral per-iteration >= 10x faster than dense at n = 2000
        n_big = 2000
        phi_big = 0.5 * np.eye(n_big)
        for b in range(0, n_big - 1, 2):
            phi_big[b, b + 1] = phi_big[b + 1, b] = 0.25
        Xb = np.ones((n_big, 1))
        Lb = np.linalg.cholesky(2 * phi_big + 1e-8 * np.eye(n_big))
        yb = (Lb @ rng.standard_normal(n_big)) + rng.standard_normal(n_big)
        t_dense0 = time.perf_counter()
        mm_fit(VcModel(yb, Xb, [phi_big, np.eye(n_big)]), tol=-1.0, max_iter=3)
        dense_per_iter = (time.perf_counter() - t_dense0) / 3
        spec_cache = vcmodel.TwoComponentSpectral.build(yb, Xb, phi_big)  # excluded from timing
        t_spec0 = time.perf_counter()
        _spectral_iterations_only(spec_cache, yb, n_iter=50)
        spec_per_iter = (time.perf_counter() - t_spec0) / 50
        ratio = dense_per_iter / spec_per_iter
        assert ratio >= 10, f"spectral only {ratio:.1f}x faster per iteration"

        # null calibration: score and LRT p-values uniform over 500 replicates
        n_cal = 150
        Xc = np.ones((n_cal, 1))
        score_ps, lrt_ps = [], []
        rng_cal = np.random.default_rng(777)
        for _ in range(500):
            yc = rng_cal.standard_normal(n_cal)
            g = rng_cal.standard_normal(n_cal)
            model0 = VcModel(yc, Xc, [np.eye(n_cal)])
            null = mm_fit(model0, tol=0.0, max_iter=300)
            score_ps.append(score_test(null, model0, g).p_value)
            alt = mm_fit(
                VcModel(yc, np.hstack([Xc, g[:, None]]), [np.eye(n_cal)]),
                tol=0.0, max_iter=300,
            )
            lrt_ps.append(lrt(null, alt).p_value)
        assert kstest(score_ps, "uniform").pvalue > 0.01
        assert kstest(lrt_ps, "uniform").pvalue > 0.01
        report(7, "variance components", t0, self.BUDGET)


def _random_psd(rng, n, rank):
    u = rng.standard_normal((n, rank))
    return u @ u.T / rank


def _spectral_iterations_only(spec, y, n_iter):
    """Raw per-iteration cost of the rotated two-component sweep."""
    d = spec.D
    yr, Xr = spec.y_rot, spec.X_rot
    sigma2 = np.array([np.var(y) / 2, np.var(y) / 2])
    for _ in range(n_iter):
        w = sigma2[0] * d + sigma2[1]
        Xw = Xr / w[:, None]
        beta = np.linalg.solve(Xr.T @ Xw, Xw.T @ yr)
        r = yr - Xr @ beta
        r2w2 = (r / w) ** 2
        sigma2[0] *= np.sqrt(np.sum(d * r2w2) / np.sum(d / w))
        sigma2[1] *= np.sqrt(np.sum(r2w2) / np.sum(1.0 / w))
    return sigma2


class TestCriterion8PenalizedSelection:
    BUDGET = 300.0

    def test_lambda_zero_identity_and_lasso_path(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(8)

        # lam = 0 equals mm_fit exactly
        n = 100
        comps = [_random_psd(rng, n, 6) for _ in range(3)] + [np.eye(n)]
        X = np.ones((n, 1))
        L = np.linalg.cholesky(comps[1] + 1e-10 * np.eye(n))
        y = 1.5 * (L @ rng.standard_normal(n)) + rng.standard_normal(n)
        model = VcModel(y, X, comps, labels=("a", "b", "c", "noise"))
        for penalty in ("ridge", "lasso", "scad", "mcp"):
            pen = vcmodel.penalized_fit(model, penalty, lam=0.0, max_iter=400)
            plain = mm_fit(model, max_iter=400)
            assert np.array_equal(pen.sigma2, plain.sigma2)
            assert pen.loglik == plain.loglik

        # lasso path selects the 2 planted of 5 candidates in >= 80% of 20 reps
        hits = 0
        lam_grid = (0.5, 2.0, 8.0, 32.0, 128.0)
        for rep in range(20):
            rng_rep = np.random.default_rng(8000 + rep)
            comps = [_random_psd(rng_rep, 150, 6) for _ in range(5)] + [np.eye(150)]
            labels = [f"set{j}" for j in range(5)] + ["noise"]
            true_idx = tuple(sorted(rng_rep.choice(5, size=2, replace=False)))
            y = np.zeros(150)
            for j in true_idx:
                Lj = np.linalg.cholesky(comps[j] + 1e-10 * np.eye(150))
                y += np.sqrt(3.0) * (Lj @ rng_rep.standard_normal(150))
            y += rng_rep.standard_normal(150)
            model = VcModel(y, np.ones((150, 1)), comps, labels=labels)
            want = {labels[j] for j in true_idx}
            for lam in lam_grid:
                est = vcmodel.penalized_fit(model, "lasso", lam=lam, max_iter=400)
                kept = {
                    labels[j] for j in range(5) if np.sqrt(est.sigma2[j]) >= 1e-8
                }
                if kept == want:
                    hits += 1
                    break
        assert hits >= 16, f"planted pair selected in {hits}/20 replicates"
        report(8, "penalized selection", t0, self.BUDGET)


class TestCriterion9GwasScan:
    BUDGET = 300.0

    def test_oracle_planting_and_inflation(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(9)

        # iid score test equals the classical regression score test to 1e-8
        n, m = 100, 60
        freqs = simulate.random_frequencies(m, rng, 0.15, 0.85)
        d = simulate.hwe_genotypes(n, freqs, rng, missing_rate=0.02)
        mat = simulate.packed_from_dosages(d)
        covar = rng.standard_normal(n)
        y = rng.standard_normal(n)
        res = assoc.gwas_scan(mat, y, covariates=covar)
        X = np.hstack([np.ones((n, 1)), covar[:, None]])
        dense = snpcore.decompress(mat, mode="standardized")
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        r = y - X @ beta
        s2 = float(r @ r / n)
        M = np.eye(n) - X @ np.linalg.solve(X.T @ X, X.T)
        by_id = {row.snp_id: row for row in res.rows}
        for j, meta in enumerate(mat.snp_meta):
            row = by_id[meta.snp_id]
            if row.skipped:
                continue
            g = dense[:, j]
            t_oracle = float((g @ r) ** 2 / (s2 * (g @ M @ g)))
            assert abs(row.score_stat - t_oracle) <= 1e-8 * max(1.0, t_oracle)

        # planted 5-SE SNP ranks first and survives LRT refinement
        n2, m2 = 400, 800
        freqs2 = simulate.random_frequencies(m2, rng, 0.2, 0.8)
        d2 = simulate.hwe_genotypes(n2, freqs2, rng)
        mat2 = simulate.packed_from_dosages(d2)
        dense2 = snpcore.decompress(mat2, mode="standardized")
        target = 321
        y2 = dense2[:, target] * (5.0 / np.sqrt(n2)) + rng.standard_normal(n2)
        scan = assoc.gwas_scan(mat2, y2, refine_threshold=5e-5)
        best = min(scan.tested_rows(), key=lambda row: row.score_p)
        assert best.snp_id == mat2.snp_meta[target].snp_id
        assert best.refined and best.lrt_p < 5e-4

        # structured population: one PC moves lambda_GC toward 1
        mat3, labels = simulate.two_population_matrix(150, 1000, np.random.default_rng(99))
        y3 = labels * 1.0 + np.random.default_rng(100).standard_normal(300)
        plain = assoc.gwas_scan(mat3, y3)
        pcs = assoc.add_pc_covariates(mat3, None, 1, seed=1)
        adjusted = assoc.gwas_scan(mat3, y3, covariates=pcs)
        assert abs(adjusted.lambda_gc - 1.0) < abs(plain.lambda_gc - 1.0)
        report(9, "gwas scan", t0, self.BUDGET)


class TestCriterion10CliReproducibility:
    BUDGET = 300.0

    def run_pipeline(self, prefix, outdir, threads):
        outdir.mkdir()
        common = ["--quiet", "--seed", "11", "--threads", str(threads)]
        steps = [
            ["summarize", "--bed", str(prefix), "--out", str(outdir / "s1"), *common],
            ["filter", "--bed", str(prefix), "--min-snp-success", "0.9",
             "--min-subject-success", "0.5", "--min-maf", "0.02",
             "--out", str(outdir / "s2"), *common],
            ["kinship", "--bed", str(outdir / "s2"), "--estimator", "grm",
             "--out", str(outdir / "s3"), *common],
            ["vcfit", "--pheno", str(prefix) + ".pheno.tsv",
             "--kinship", str(outdir / "s3.kinship.tsv"),
             "--out", str(outdir / "s4"), *common],
            ["gwas", "--bed", str(outdir / "s2"), "--pheno", str(prefix) + ".pheno.tsv",
             "--kinship", str(outdir / "s3.kinship.tsv"), "--refine", "1e-3",
             "--out", str(outdir / "s5"), *common],
        ]
        for argv in steps:
            assert dispatch(argv) == 0, argv
        return {
            f.name: hashlib.sha256(f.read_bytes()).hexdigest()
            for f in sorted(outdir.iterdir())
            if f.is_file()
        }

    def test_pipeline_byte_identical(self, tmp_path):
        t0 = time.perf_counter()
        assert dispatch(
            ["simulate", "--kind", "unrelated", "--subjects", "60", "--snps", "120",
             "--missing-rate", "0.02", "--h2", "0.4", "--seed", "3",
             "--out", str(tmp_path / "fix"), "--quiet"]
        ) == 0
        first = self.run_pipeline(tmp_path / "fix", tmp_path / "run1", threads=1)
        second = self.run_pipeline(tmp_path / "fix", tmp_path / "run2", threads=1)
        threaded = self.run_pipeline(tmp_path / "fix", tmp_path / "run4", threads=4)
        assert first == second, "same-seed rerun differed"
        assert first == threaded, "thread count changed outputs"
        report(10, "cli reproducibility", t0, self.BUDGET)

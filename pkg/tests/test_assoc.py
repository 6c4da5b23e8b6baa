import numpy as np
import pytest
from scipy.stats import chi2, kstest

from genokit import assoc, simulate
from genokit.errors import ArgumentError, JoinError
from genokit.pedkin import KinshipMatrix
from genokit.snpcore import decompress


def null_fixture(rng, n=150, m=400):
    freqs = simulate.random_frequencies(m, rng, 0.1, 0.9)
    d = simulate.hwe_genotypes(n, freqs, rng, missing_rate=0.01)
    mat = simulate.packed_from_dosages(d)
    y = rng.standard_normal(n)
    return mat, y


class TestGwasScan:
    def test_null_pvalues_uniform(self):
        rng = np.random.default_rng(0)
        mat, y = null_fixture(rng, n=200, m=1500)
        res = assoc.gwas_scan(mat, y, refine_threshold=0.0)
        pvals = [r.score_p for r in res.tested_rows()]
        assert kstest(pvals, "uniform").pvalue > 0.01
        assert not any(r.refined for r in res.rows)

    def test_iid_matches_classical_oracle(self):
        rng = np.random.default_rng(1)
        mat, y = null_fixture(rng, n=80, m=50)
        covar = rng.standard_normal(80)
        res = assoc.gwas_scan(mat, y, covariates=covar)
        X = np.hstack([np.ones((80, 1)), covar[:, None]])
        dense = decompress(mat, mode="standardized")
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        r = y - X @ beta
        s2 = r @ r / 80
        M = np.eye(80) - X @ np.linalg.solve(X.T @ X, X.T)
        by_id = {row.snp_id: row for row in res.rows}
        for j, meta in enumerate(mat.snp_meta):
            row = by_id[meta.snp_id]
            if row.skipped:
                continue
            g = dense[:, j]
            t_oracle = (g @ r) ** 2 / (s2 * (g @ M @ g))
            assert row.score_stat == pytest.approx(t_oracle, abs=1e-8)

    def test_planted_snp_ranks_first_and_refines(self):
        rng = np.random.default_rng(2)
        n, m = 300, 500
        freqs = simulate.random_frequencies(m, rng, 0.2, 0.8)
        d = simulate.hwe_genotypes(n, freqs, rng)
        mat = simulate.packed_from_dosages(d)
        dense = decompress(mat, mode="standardized")
        # effect sized to ~5 standard errors of a marginal test
        beta = 5.0 / np.sqrt(n)
        y = dense[:, 123] * beta + rng.standard_normal(n)
        res = assoc.gwas_scan(mat, y, refine_threshold=5e-5)
        best = min(res.tested_rows(), key=lambda r: r.score_p)
        assert best.snp_id == mat.snp_meta[123].snp_id
        assert best.refined
        assert best.lrt_p < 5e-4
        assert np.isfinite(best.effect)

    def test_monomorphic_flagged_not_dropped(self):
        rng = np.random.default_rng(3)
        d = simulate.hwe_genotypes(40, np.full(5, 0.5), rng)
        d[:, 2] = 2  # monomorphic column
        mat = simulate.packed_from_dosages(d)
        res = assoc.gwas_scan(mat, rng.standard_normal(40))
        assert len(res.rows) == 5
        flagged = [r for r in res.rows if r.skipped]
        assert len(flagged) == 1
        assert flagged[0].skip_reason == "monomorphic"

    def test_join_error_lists_ids(self):
        rng = np.random.default_rng(4)
        mat, y = null_fixture(rng, n=10, m=5)
        ids = [s.iid for s in mat.subject_meta]
        ids[3] = "stranger"
        with pytest.raises(JoinError, match="ind4"):
            assoc.gwas_scan(mat, y, subject_ids=ids)

    def test_join_reorders(self):
        rng = np.random.default_rng(5)
        mat, y = null_fixture(rng, n=30, m=20)
        ids = [s.iid for s in mat.subject_meta]
        perm = rng.permutation(30)
        res_direct = assoc.gwas_scan(mat, y)
        res_shuffled = assoc.gwas_scan(mat, y[perm], subject_ids=[ids[i] for i in perm])
        for a, b in zip(res_direct.rows, res_shuffled.rows):
            if a.skipped:
                assert b.skipped
                continue
            assert b.score_stat == pytest.approx(a.score_stat, rel=1e-12)

    def test_mixed_null_uses_kinship(self):
        rng = np.random.default_rng(6)
        n = 120
        phi = 0.5 * np.eye(n)
        for base in range(0, n - 1, 2):
            phi[base, base + 1] = phi[base + 1, base] = 0.25
        freqs = simulate.random_frequencies(300, rng, 0.2, 0.8)
        d = simulate.hwe_genotypes(n, freqs, rng)
        mat = simulate.packed_from_dosages(d)
        L = np.linalg.cholesky(2 * phi + 1e-10 * np.eye(n))
        y = L @ rng.standard_normal(n) + 0.5 * rng.standard_normal(n)
        kin = KinshipMatrix(phi, "theoretical", tuple(mat.subject_ids))
        res = assoc.gwas_scan(mat, y, null_kind="mixed", kinship=kin)
        assert res.null_kind == "mixed"
        pvals = [r.score_p for r in res.tested_rows()]
        assert kstest(pvals, "uniform").pvalue > 0.01

    def test_results_independent_of_threads(self):
        rng = np.random.default_rng(7)
        mat, y = null_fixture(rng, n=50, m=600)
        r1 = assoc.gwas_scan(mat, y, threads=1)
        r4 = assoc.gwas_scan(mat, y, threads=4)
        for a, b in zip(r1.rows, r4.rows):
            assert a == b

    def test_rows_ordered_by_position(self):
        rng = np.random.default_rng(8)
        d = simulate.hwe_genotypes(30, np.full(6, 0.4), rng)
        meta = simulate.packed_from_dosages(d).snp_meta
        # shuffle positions and chromosomes
        from genokit.snpcore import SnpInfo

        shuffled = [
            SnpInfo("s1", "2", 500, "A", "B"),
            SnpInfo("s2", "1", 900, "A", "B"),
            SnpInfo("s3", "1", 100, "A", "B"),
            SnpInfo("s4", "X", 50, "A", "B"),
            SnpInfo("s5", "2", 100, "A", "B"),
            SnpInfo("s6", "1", 400, "A", "B"),
        ]
        from genokit.snpcore import PackedGenotypeMatrix

        mat = PackedGenotypeMatrix.from_dosages(d, shuffled)
        res = assoc.gwas_scan(mat, rng.standard_normal(30))
        keys = [(assoc._chrom_key(r.chrom), r.pos) for r in res.rows]
        assert keys == sorted(keys)


class TestAddPcCovariates:
    def test_zero_pcs_unchanged(self):
        rng = np.random.default_rng(9)
        mat, _ = null_fixture(rng, n=40, m=60)
        C = np.hstack([np.ones((40, 1)), rng.standard_normal((40, 1))])
        out = assoc.add_pc_covariates(mat, C, 0)
        assert np.array_equal(out, C)

    def test_appends_requested_pcs(self):
        rng = np.random.default_rng(10)
        mat, _ = null_fixture(rng, n=40, m=60)
        out = assoc.add_pc_covariates(mat, None, 3, seed=1)
        assert out.shape == (40, 4)  # intercept + 3 PCs
        assert np.linalg.matrix_rank(out) == 4

    def test_duplicate_pc_dropped(self):
        rng = np.random.default_rng(11)
        mat, _ = null_fixture(rng, n=40, m=60)
        from genokit.snpcore import principal_components

        scores, _ = principal_components(mat, 1, seed=0)
        C = np.hstack([np.ones((40, 1)), scores])
        out = assoc.add_pc_covariates(mat, C, 1, seed=0)
        assert out.shape[1] == 2  # duplicate PC1 not added twice

    def test_structure_inflation_corrected(self):
        rng = np.random.default_rng(12)
        mat, labels = simulate.two_population_matrix(100, 800, rng)
        y = labels * 1.0 + rng.standard_normal(200)
        plain = assoc.gwas_scan(mat, y)
        pcs = assoc.add_pc_covariates(mat, None, 1, seed=2)
        adjusted = assoc.gwas_scan(mat, y, covariates=pcs)
        assert plain.lambda_gc > 1.2
        assert abs(adjusted.lambda_gc - 1.0) < abs(plain.lambda_gc - 1.0)


class TestManhattanTable:
    def test_table_contents(self, tmp_path):
        rng = np.random.default_rng(13)
        mat, y = null_fixture(rng, n=60, m=25)
        res = assoc.gwas_scan(mat, y)
        out = tmp_path / "man.tsv"
        assoc.manhattan_table(res, out)
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "chromosome\tposition\tsnp_id\tneg_log10_p"
        assert len(lines) - 1 == res.n_tested

    def test_neg_log10_values(self):
        assert assoc.neg_log10(1.0) == 0.0
        assert assoc.neg_log10(1e-8) == pytest.approx(8.0)
        assert assoc.neg_log10(0.0) == 350.0

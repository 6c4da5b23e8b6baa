"""genokit command line: reproducible batch workflows over PLINK triples.

Every subcommand is a pure function of (inputs, flags, seed): rerunning
with the same inputs and seed reproduces output files byte for byte, and
--threads never changes results (work is partitioned in fixed chunks).
Reports are TSV; report paths also render a PNG figure next to the
delimited output unless --no-plot is given. Errors exit 1 with a one-line
machine-parsable category; usage problems exit 2.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from . import __version__, assoc, empkin, mcimpute, pedkin, simulate, snpcore, tables, vcmodel
from .errors import ArgumentError, GenokitError
from .pedkin import KinshipMatrix, Pedigree
from .sparsegwas import IhtConfig, cross_validate_k, iht_fit

logger = logging.getLogger("genokit")


def main(argv=None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    _setup_logging(args)
    phases = _PhaseClock()
    _echo_config(args)
    try:
        rc = args.func(args, phases)
    except GenokitError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1
    phases.report()
    return rc or 0


class _PhaseClock:
    def __init__(self):
        self.entries = []

    def __call__(self, name):
        return _Phase(self, name)

    def report(self):
        for name, seconds in self.entries:
            logger.info("phase %-18s %8.3f s", name, seconds)


class _Phase:
    def __init__(self, clock, name):
        self.clock = clock
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.clock.entries.append((self.name, time.perf_counter() - self.t0))
        return False


def _setup_logging(args):
    handlers = []
    if not args.quiet:
        handlers.append(logging.StreamHandler(sys.stderr))
    if args.log:
        handlers.append(logging.FileHandler(args.log, mode="w"))
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        handlers=handlers or [logging.NullHandler()],
        force=True,
    )


def _echo_config(args):
    logger.info("genokit %s (numpy %s)", __version__, np.__version__)
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    logger.info("config: %s", cfg)


def _add_common(p):
    p.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    p.add_argument("--seed", type=int, default=0, help="random seed for all stochastic steps")
    p.add_argument("--log", help="write a run log to this file")
    p.add_argument("--quiet", action="store_true", help="suppress console logging")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument(
        "--plot", action=argparse.BooleanOptionalAction, default=True,
        help="render PNG figures next to the TSV reports",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="genokit",
        description="compressed-genotype statistical genetics toolkit",
    )
    parser.add_argument("--version", action="version", version=f"genokit {__version__}")
    sub = parser.add_subparsers(
        dest="command", required=True,
        metavar="{summarize,filter,pca,kinship,compare-kinship,impute,iht,vcfit,gwas}",
    )

    p = sub.add_parser("summarize", help="per-SNP and per-subject summary statistics")
    p.add_argument("--bed", required=True, help="PLINK prefix (or .bed path)")
    _add_common(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("filter", help="filter SNPs/subjects by success rate and MAF")
    p.add_argument("--bed", required=True)
    p.add_argument("--min-snp-success", type=float, default=0.98)
    p.add_argument("--min-subject-success", type=float, default=0.98)
    p.add_argument("--min-maf", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("pca", help="principal components of the standardized genotypes")
    p.add_argument("--bed", required=True)
    p.add_argument("--components", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("kinship", help="theoretical or empirical kinship estimation")
    p.add_argument("--bed", help="PLINK prefix (genotypes and/or pedigree .fam)")
    p.add_argument("--ped", help="standalone pedigree file (.fam layout)")
    p.add_argument(
        "--estimator", default="grm",
        choices=["theoretical", "grm", "robust", "mom", "gene-drop"],
    )
    p.add_argument("--replicates", type=int, default=100_000, help="gene-drop replicates")
    p.add_argument("--freq", help="optional TSV of external allele frequencies (snp_id, freq)")
    _add_common(p)
    p.set_defaults(func=cmd_kinship)

    p = sub.add_parser("compare-kinship", help="Fisher-transform outlier ranking")
    p.add_argument("--theoretical", required=True, help="kinship TSV (pedigree-based)")
    p.add_argument("--empirical", required=True, help="kinship TSV (SNP-based)")
    p.add_argument("--snps", type=int, required=True, help="number of SNPs behind the estimate")
    _add_common(p)
    p.set_defaults(func=cmd_compare_kinship)

    p = sub.add_parser("impute", help="windowed matrix-completion imputation")
    p.add_argument("--bed", required=True, help="study panel PLINK prefix")
    p.add_argument("--ref", help="optional reference panel PLINK prefix")
    p.add_argument("--width", type=int, default=300, help="window width in SNPs")
    p.add_argument("--step", type=int, help="window step (default width/3)")
    p.add_argument("--ranks", default="1,2,3,5,8,13", help="comma-separated rank grid")
    p.add_argument("--mask-fraction", type=float, default=0.1)
    _add_common(p)
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("iht", help="sparse GWAS by iterative hard thresholding")
    p.add_argument("--bed", required=True)
    p.add_argument("--pheno", required=True, help="phenotype TSV with an iid column")
    p.add_argument("--covar", help="covariate TSV with an iid column")
    p.add_argument("--trait", help="trait column name (default: first non-id column)")
    p.add_argument("--k", type=int, help="sparsity level (skip cross-validation)")
    p.add_argument("--k-grid", default="5,10,15,20,25,30,35,40,45,50")
    p.add_argument("--folds", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_iht)

    p = sub.add_parser("vcfit", help="variance component model fitting")
    p.add_argument("--pheno", required=True)
    p.add_argument("--covar")
    p.add_argument("--trait")
    p.add_argument(
        "--kinship", action="append", required=True,
        help="kinship TSV; repeat for multiple components (identity noise is implicit)",
    )
    p.add_argument(
        "--kinship-scale", default="grm", choices=["grm", "phi"],
        help="'phi' doubles pedigree kinship so sigma_g^2 is the additive variance",
    )
    p.add_argument("--penalty", choices=["ridge", "lasso", "scad", "mcp"])
    p.add_argument("--lam", type=float, default=0.0, help="penalty weight")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_vcfit)

    p = sub.add_parser("gwas", help="SNP-by-SNP association scan")
    p.add_argument("--bed", required=True)
    p.add_argument("--pheno", required=True)
    p.add_argument("--covar")
    p.add_argument("--trait")
    p.add_argument("--pcs", type=int, default=0, help="principal components as covariates")
    p.add_argument("--kinship", help="kinship TSV; switches to the two-component null")
    p.add_argument("--refine", type=float, default=5e-5, help="LRT refinement threshold")
    _add_common(p)
    p.set_defaults(func=cmd_gwas)

    p = sub.add_parser("simulate")  # fixture generator for the test suite; undocumented
    p.add_argument("--kind", default="unrelated",
                   choices=["unrelated", "pedigree", "structured", "planted"])
    p.add_argument("--subjects", type=int, default=200)
    p.add_argument("--snps", type=int, default=500)
    p.add_argument("--missing-rate", type=float, default=0.01)
    p.add_argument("--maf-low", type=float, default=0.05)
    p.add_argument("--maf-high", type=float, default=0.95)
    p.add_argument("--h2", type=float, default=0.0, help="polygenic heritability of the trait")
    p.add_argument("--planted", type=int, default=0, help="number of planted SNP effects")
    p.add_argument("--effect-size", type=float, default=0.5)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)
    return parser


# ---------------------------------------------------------------------------
# subcommand bodies


def cmd_summarize(args, phase):
    with phase("read"):
        mat = snpcore.read_plink(args.bed)
    with phase("summarize"):
        summ, subj_miss = snpcore.summarize(mat)
    with phase("write"):
        tables.write_tsv(
            f"{args.out}.snp_summary.tsv",
            ["snp_id", "chrom", "pos", "n0", "n1", "n2", "n_missing",
             "freq_allele1", "missing_rate", "maf"],
            (
                [m.snp_id, m.chrom, m.pos, summ.n0[j], summ.n1[j], summ.n2[j],
                 summ.n_missing[j], summ.freq_allele1[j], summ.missing_rate[j], summ.maf[j]]
                for j, m in enumerate(mat.snp_meta)
            ),
        )
        tables.write_tsv(
            f"{args.out}.subject_missing.tsv",
            ["iid", "missing_rate"],
            ([s.iid, subj_miss[i]] for i, s in enumerate(mat.subject_meta)),
        )
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.summary_plot(summ, subj_miss, f"{args.out}.summary.png")
    logger.info("summarized %d subjects x %d SNPs", mat.n_subjects, mat.n_snps)
    return 0


def cmd_filter(args, phase):
    with phase("read"):
        mat = snpcore.read_plink(args.bed)
    with phase("filter"):
        snps, subjects, filtered = snpcore.filter_matrix(
            mat, args.min_snp_success, args.min_subject_success, args.min_maf
        )
    with phase("write"):
        snpcore.write_plink(filtered, args.out)
        tables.write_tsv(
            f"{args.out}.kept_snps.tsv", ["index", "snp_id"],
            ([int(j), mat.snp_meta[j].snp_id] for j in snps),
        )
        tables.write_tsv(
            f"{args.out}.kept_subjects.tsv", ["index", "iid"],
            ([int(i), mat.subject_meta[i].iid] for i in subjects),
        )
    logger.info(
        "kept %d/%d SNPs, %d/%d subjects", len(snps), mat.n_snps, len(subjects), mat.n_subjects
    )
    return 0


def cmd_pca(args, phase):
    with phase("read"):
        mat = snpcore.read_plink(args.bed)
    with phase("pca"):
        scores, eigenvalues = snpcore.principal_components(
            mat, args.components, seed=args.seed
        )
    with phase("write"):
        tables.write_tsv(
            f"{args.out}.pca_scores.tsv",
            ["iid"] + [f"pc{j + 1}" for j in range(scores.shape[1])],
            ([s.iid, *scores[i]] for i, s in enumerate(mat.subject_meta)),
        )
        tables.write_tsv(
            f"{args.out}.pca_eigenvalues.tsv", ["component", "eigenvalue"],
            ([j + 1, eigenvalues[j]] for j in range(len(eigenvalues))),
        )
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.pca_plot(scores, eigenvalues, f"{args.out}.pca.png")
    return 0


def _external_freq(path, mat):
    ids, names, vals = tables.read_phenotype(path, id_column="snp_id")
    table = dict(zip(ids, vals[:, 0]))
    try:
        return np.array([table[m.snp_id] for m in mat.snp_meta])
    except KeyError as exc:
        raise ArgumentError(f"frequency file is missing SNP {exc}")


def cmd_kinship(args, phase):
    if args.estimator in ("theoretical", "gene-drop"):
        src = args.ped or (args.bed + ".fam" if args.bed else None)
        if src is None:
            raise ArgumentError("theoretical/gene-drop kinship needs --ped or --bed")
        with phase("pedigree"):
            ped = Pedigree.from_fam(src)
        if args.estimator == "theoretical":
            with phase("kinship"):
                kin = pedkin.theoretical_kinship(ped)
        else:
            with phase("gene-drop"):
                result = pedkin.gene_drop(
                    ped, args.replicates, seed=args.seed,
                    check_against=pedkin.theoretical_kinship(ped),
                    threads=args.threads,
                )
            kin = result.kinship
            tables.write_tsv(
                f"{args.out}.identity_coefficients.tsv",
                ["id1", "id2"] + [f"delta{k}" for k in range(1, 10)] + ["kinship"],
                ([c.id1, c.id2, *c.delta, c.kinship] for c in result.coefficients),
            )
            if result.flagged_pairs:
                logger.warning(
                    "%d pair(s) outside the Monte Carlo tolerance: %s",
                    len(result.flagged_pairs), result.flagged_pairs[:5],
                )
    else:
        if not args.bed:
            raise ArgumentError(f"estimator {args.estimator!r} needs --bed genotypes")
        with phase("read"):
            mat = snpcore.read_plink(args.bed)
        freq = _external_freq(args.freq, mat) if args.freq else None
        with phase("kinship"):
            fn = {"grm": empkin.grm, "robust": empkin.robust_grm, "mom": empkin.mom_kinship}
            kin = fn[args.estimator](mat, freq=freq)
    with phase("write"):
        tables.write_kinship(f"{args.out}.kinship.tsv", kin)
    logger.info("wrote %s kinship for %d subjects", kin.estimator, kin.n)
    return 0


def cmd_compare_kinship(args, phase):
    with phase("read"):
        theo = tables.read_kinship(args.theoretical)
        emp = tables.read_kinship(args.empirical)
    with phase("compare"):
        disc = empkin.compare_kinship(theo, emp, args.snps)
    with phase("write"):
        tables.write_tsv(
            f"{args.out}.kinship_compare.tsv",
            ["id1", "id2", "theoretical", "empirical", "z"],
            ([d.id1, d.id2, d.theoretical, d.empirical, d.z] for d in disc),
        )
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.kinship_compare_plot(disc, f"{args.out}.kinship_compare.png")
    return 0


def cmd_impute(args, phase):
    with phase("read"):
        study = snpcore.read_plink(args.bed)
        reference = snpcore.read_plink(args.ref) if args.ref else None
    plan = mcimpute.WindowPlan(
        width=args.width,
        step=args.step,
        rank_grid=tuple(int(r) for r in args.ranks.split(",")),
        mask_fraction=args.mask_fraction,
        seed=args.seed,
    )
    with phase("impute"):
        result = mcimpute.impute_pipeline(study, reference, plan, threads=args.threads)
    with phase("write"):
        snpcore.write_plink(result.hard_calls, args.out)
        tables.write_tsv(
            f"{args.out}.imputed_dosages.tsv",
            ["iid"] + study.snp_ids,
            (
                [study.subject_meta[i].iid, *result.dosages[i]]
                for i in range(study.n_subjects)
            ),
        )
        tables.write_tsv(
            f"{args.out}.impute_windows.tsv",
            ["window", "snp_start", "snp_stop", "commit_start", "commit_stop",
             "n_observed", "rank", "iterations", "holdout_error", "skipped", "reason"],
            (
                [r.index, r.snp_start, r.snp_stop, r.commit_start, r.commit_stop,
                 r.n_observed, "" if r.rank is None else r.rank, r.iterations,
                 r.holdout_error, int(r.skipped), r.reason]
                for r in result.reports
            ),
        )
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.impute_report_plot(result.reports, f"{args.out}.impute_windows.png")
    n_imputed = int(np.sum(study.dosage_block(0, study.n_snps, dtype=np.int8) == -1))
    logger.info("imputed %d missing genotypes over %d windows", n_imputed, len(result.reports))
    return 0


def _load_pheno_covar(args, mat):
    ids, names, vals = tables.read_phenotype(args.pheno)
    trait = args.trait or names[0]
    if trait not in names:
        raise ArgumentError(f"trait {trait!r} not among phenotype columns {names}")
    y = vals[:, names.index(trait)]
    covar = None
    if args.covar:
        cids, _, cvals = tables.read_phenotype(args.covar)
        if cids != ids:
            lookup = {s: i for i, s in enumerate(cids)}
            missing = [s for s in ids if s not in lookup]
            if missing:
                from .errors import JoinError

                raise JoinError(f"covariate file is missing subjects: {missing[:10]}")
            cvals = cvals[[lookup[s] for s in ids]]
        covar = cvals
    if mat is not None:
        y, covar = assoc.align_phenotype(mat, ids, y, covar)
    return y, covar, trait


def cmd_iht(args, phase):
    with phase("read"):
        mat = snpcore.read_plink(args.bed)
        y, covar, trait = _load_pheno_covar(args, mat)
    cv_table = None
    if args.k is None:
        grid = [int(k) for k in args.k_grid.split(",")]
        with phase("cross-validate"):
            k, cv_table = cross_validate_k(
                mat, y, grid, folds=args.folds, seed=args.seed, covariates=covar
            )
        logger.info("cross-validated sparsity level k=%d", k)
    else:
        k = args.k
    with phase("fit"):
        fit = iht_fit(mat, y, IhtConfig(k=k, seed=args.seed), covariates=covar)
    with phase("write"):
        tables.write_tsv(
            f"{args.out}.iht_support.tsv",
            ["snp_id", "beta", "chrom", "pos"],
            (
                [mat.snp_meta[j].snp_id, fit.beta[j], mat.snp_meta[j].chrom, mat.snp_meta[j].pos]
                for j in fit.support
            ),
        )
        with open(f"{args.out}.iht_loss_trace.csv", "w") as fh:
            fh.write("iteration,loss\n")
            for i, v in enumerate(fit.loss_trace):
                fh.write(f"{i},{v!r}\n")
        if cv_table is not None:
            tables.write_tsv(
                f"{args.out}.iht_cv.tsv", ["k", "mean_validation_mse"],
                ([kk, cv_table[kk]] for kk in sorted(cv_table)),
            )
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.loss_trace_plot(fit.loss_trace, f"{args.out}.iht.png", ylabel="0.5 ||y - Xb||^2")
    logger.info(
        "IHT: k=%d, %d iterations, %d nonzero, trait %s", k, fit.iterations, len(fit.support), trait
    )
    return 0


def cmd_vcfit(args, phase):
    with phase("read"):
        kinships = [tables.read_kinship(p) for p in args.kinship]
        ids, names, vals = tables.read_phenotype(args.pheno)
        trait = args.trait or names[0]
        if trait not in names:
            raise ArgumentError(f"trait {trait!r} not among phenotype columns {names}")
        y = vals[:, names.index(trait)]
        covar = None
        if args.covar:
            cids, _, cvals = tables.read_phenotype(args.covar)
            if cids != ids:
                from .errors import JoinError

                raise JoinError("covariate subject ids do not match phenotype ids")
            covar = cvals
    for kin in kinships:
        if list(kin.subject_ids) != ids:
            from .errors import JoinError

            unmatched = sorted(set(kin.subject_ids) ^ set(ids))
            raise JoinError(f"kinship/phenotype id mismatch: {unmatched[:10]}")
    n = len(ids)
    X = assoc.ensure_intercept(covar, n)
    scale = 2.0 if args.kinship_scale == "phi" else 1.0
    with phase("fit"):
        if len(kinships) == 1 and not args.penalty:
            est = vcmodel.spectral_fit(
                y, X, scale * kinships[0].values, tol=args.tol, max_iter=args.max_iter
            )
            labels = ["genetic", "environment"]
        else:
            comps = [scale * k.values for k in kinships] + [np.eye(n)]
            labels = [f"k{i + 1}:{k.estimator}" for i, k in enumerate(kinships)] + ["noise"]
            model = vcmodel.VcModel(y, X, comps, labels=labels)
            if args.penalty:
                est = vcmodel.penalized_fit(
                    model, args.penalty, args.lam, tol=args.tol, max_iter=args.max_iter
                )
            else:
                est = vcmodel.mm_fit(model, tol=args.tol, max_iter=args.max_iter)
    with phase("write"):
        with open(f"{args.out}.vcfit.txt", "w") as fh:
            fh.write(f"trait: {trait}\n")
            fh.write(f"n_subjects: {n}\n")
            fh.write(f"loglik: {float(est.loglik)!r}\n")
            fh.write(f"iterations: {est.n_iter}\n")
            fh.write(f"converged: {est.converged}\n")
            if len(est.sigma2) == 2:
                h2 = vcmodel.heritability(est)
                fh.write(f"heritability: {float(h2)!r}\n")
            fh.write("component\tsigma2\n")
            for lab, s2 in zip(est.labels, est.sigma2):
                fh.write(f"{lab}\t{float(s2)!r}\n")
            if est.excluded:
                fh.write(f"excluded: {','.join(est.excluded)}\n")
            fh.write("fixed_effect\tbeta\n")
            for j, b in enumerate(np.atleast_1d(est.beta)):
                fh.write(f"x{j}\t{float(b)!r}\n")
        tables.write_tsv(
            f"{args.out}.vcfit_trace.tsv", ["iteration", "loglik"],
            ([i + 1, v] for i, v in enumerate(est.loglik_trace)),
        )
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.loglik_trace_plot(est.loglik_trace, f"{args.out}.vcfit.png")
    logger.info("vcfit: loglik %.6f after %d iterations", est.loglik, est.n_iter)
    return 0


def cmd_gwas(args, phase):
    with phase("read"):
        mat = snpcore.read_plink(args.bed)
        y, covar, trait = _load_pheno_covar(args, mat)
        kinship = tables.read_kinship(args.kinship) if args.kinship else None
    if kinship is not None and list(kinship.subject_ids) != mat.subject_ids:
        from .errors import JoinError

        raise JoinError("kinship subject ids do not match the PLINK .fam order")
    with phase("pcs"):
        covar_full = assoc.add_pc_covariates(mat, covar, args.pcs, seed=args.seed)
    with phase("scan"):
        res = assoc.gwas_scan(
            mat, y, covariates=covar_full,
            null_kind="mixed" if kinship is not None else "iid",
            kinship=kinship, refine_threshold=args.refine, threads=args.threads,
        )
    with phase("write"):
        tables.write_tsv(
            f"{args.out}.gwas.tsv",
            ["snp_id", "chrom", "pos", "freq_allele1", "score_stat", "score_p",
             "lrt_p", "effect", "skipped", "skip_reason"],
            (
                [r.snp_id, r.chrom, r.pos, r.freq, r.score_stat, r.score_p,
                 r.lrt_p, r.effect, int(r.skipped), r.skip_reason]
                for r in res.rows
            ),
        )
        assoc.manhattan_table(res, f"{args.out}.manhattan.tsv")
    if args.plot:
        from . import plots

        with phase("plot"):
            plots.manhattan_plot(res, f"{args.out}.manhattan.png", suggestive=args.refine)
    logger.info(
        "scan: %d tested, %d skipped, lambda_GC %.4f (%s null, trait %s)",
        res.n_tested, res.n_skipped, res.lambda_gc, res.null_kind, trait,
    )
    return 0


def cmd_simulate(args, phase):
    rng = np.random.default_rng(args.seed)
    with phase("simulate"):
        if args.kind == "pedigree":
            members = []
            n_fams = max(1, args.subjects // 4)
            for f in range(n_fams):
                base = f * 4
                members += [
                    pedkin.PedMember(f"ind{base + 1}"),
                    pedkin.PedMember(f"ind{base + 2}"),
                    pedkin.PedMember(f"ind{base + 3}", f"ind{base + 1}", f"ind{base + 2}"),
                    pedkin.PedMember(f"ind{base + 4}", f"ind{base + 1}", f"ind{base + 2}"),
                ]
            ped = Pedigree(members)
            freqs = simulate.random_frequencies(args.snps, rng, args.maf_low, args.maf_high)
            mat = simulate.packed_from_pedigree(ped, freqs, rng, args.missing_rate)
        elif args.kind == "structured":
            mat, _ = simulate.two_population_matrix(
                args.subjects // 2, args.snps, rng, missing_rate=args.missing_rate
            )
        else:
            freqs = simulate.random_frequencies(args.snps, rng, args.maf_low, args.maf_high)
            d = simulate.hwe_genotypes(args.subjects, freqs, rng, args.missing_rate)
            mat = simulate.packed_from_dosages(d)

        n = mat.n_subjects
        y = rng.standard_normal(n)
        truth_rows = []
        if args.kind == "planted" or args.planted > 0:
            from .snpcore import decompress

            dense = decompress(mat, mode="standardized")
            picks = rng.choice(mat.n_snps, size=args.planted, replace=False)
            effects = rng.choice([-1.0, 1.0], size=args.planted) * args.effect_size
            y = dense[:, picks] @ effects + rng.standard_normal(n)
            truth_rows = [
                [mat.snp_meta[j].snp_id, e] for j, e in zip(picks, effects)
            ]
        elif args.h2 > 0:
            kin = empkin.grm(mat)
            L = np.linalg.cholesky(kin.values + 1e-8 * np.eye(n))
            g = L @ rng.standard_normal(n)
            g *= np.sqrt(args.h2 / max(np.var(g), 1e-12))
            y = g + np.sqrt(1 - args.h2) * rng.standard_normal(n)
    with phase("write"):
        snpcore.write_plink(mat, args.out)
        tables.write_tsv(
            f"{args.out}.pheno.tsv", ["iid", "y"],
            ([s.iid, y[i]] for i, s in enumerate(mat.subject_meta)),
        )
        if truth_rows:
            tables.write_tsv(f"{args.out}.truth.tsv", ["snp_id", "effect"], truth_rows)
    logger.info("simulated %s fixture: %d x %d", args.kind, mat.n_subjects, mat.n_snps)
    return 0


if __name__ == "__main__":
    main()

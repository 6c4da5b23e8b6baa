"""Minimal fixture simulator backing the test suite and the hidden CLI command.

Generates genotypes at specified allele frequencies (Hardy-Weinberg
unrelateds, or gene-dropped through a pedigree), and traits from variance
component models or planted sparse SNP effects.
"""

from __future__ import annotations

import numpy as np

from .pedkin import Pedigree
from .snpcore import PackedGenotypeMatrix, SnpInfo, SubjectInfo


def random_frequencies(m, rng, low=0.05, high=0.95):
    return rng.uniform(low, high, size=m)


def hwe_genotypes(n, freqs, rng, missing_rate=0.0):
    """Unrelated subjects: dosage_k ~ Binomial(2, p_k); -1 marks missing."""
    freqs = np.asarray(freqs)
    d = rng.binomial(2, freqs[None, :], size=(n, len(freqs))).astype(np.int64)
    if missing_rate > 0:
        d[rng.random(d.shape) < missing_rate] = -1
    return d


def pedigree_genotypes(ped: Pedigree, freqs, rng, missing_rate=0.0):
    """Gene-drop genotypes: founder alleles Bernoulli(p_k), children inherit.

    Unlinked SNPs (each site drops independently). Dosage counts allele 1.
    """
    freqs = np.asarray(freqs)
    n, m = len(ped), len(freqs)
    alleles = np.empty((n, m, 2), dtype=np.int8)
    for j in ped.topo_order:
        f, mo = ped.father_idx[j], ped.mother_idx[j]
        if f < 0:
            alleles[j] = rng.random((m, 2)) < freqs[:, None]
        else:
            pick_f = rng.integers(0, 2, size=m)
            pick_m = rng.integers(0, 2, size=m)
            alleles[j, :, 0] = alleles[f, np.arange(m), pick_f]
            alleles[j, :, 1] = alleles[mo, np.arange(m), pick_m]
    d = alleles.sum(axis=2).astype(np.int64)
    if missing_rate > 0:
        d[rng.random(d.shape) < missing_rate] = -1
    return d


def packed_from_dosages(dosages, chrom="1", fam_records=None):
    """Wrap a dosage array with synthetic metadata."""
    n, m = dosages.shape
    snp_meta = [SnpInfo(f"snp{j + 1}", chrom, (j + 1) * 1000, "A", "B") for j in range(m)]
    if fam_records is None:
        fam_records = [SubjectInfo("fam", f"ind{i + 1}") for i in range(n)]
    return PackedGenotypeMatrix.from_dosages(dosages, snp_meta, fam_records)


def packed_from_pedigree(ped: Pedigree, freqs, rng, missing_rate=0.0, chrom="1"):
    d = pedigree_genotypes(ped, freqs, rng, missing_rate)
    fam = [
        SubjectInfo("fam", mem.individual, mem.father or "0", mem.mother or "0")
        for mem in ped.members
    ]
    return packed_from_dosages(d, chrom=chrom, fam_records=fam)


def vc_trait(X, beta, components, sigma2, rng):
    """y = X beta + sum_j N(0, sigma2_j V_j), components given as matrices."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    y = X @ np.asarray(beta, dtype=float)
    for s2, V in zip(sigma2, components):
        if s2 == 0:
            continue
        V = np.asarray(V, dtype=float)
        w, U = np.linalg.eigh(0.5 * (V + V.T))
        w = np.clip(w, 0.0, None)
        y = y + U @ (np.sqrt(s2 * w) * rng.standard_normal(n))
    return y


def planted_sparse_trait(Z, support, effects, noise_sd, rng):
    """y = Z[:, support] @ effects + noise, for IHT/GWAS fixtures."""
    y = Z[:, support] @ np.asarray(effects, dtype=float)
    return y + noise_sd * rng.standard_normal(Z.shape[0])


def two_population_matrix(n_per_pop, m, rng, fst_shift=0.18, missing_rate=0.0):
    """Two subpopulations with shifted allele frequencies (structure fixture)."""
    base = rng.uniform(0.2, 0.8, size=m)
    shift = rng.uniform(-fst_shift, fst_shift, size=m)
    p1 = np.clip(base + shift, 0.02, 0.98)
    p2 = np.clip(base - shift, 0.02, 0.98)
    d = np.vstack(
        [
            hwe_genotypes(n_per_pop, p1, rng, missing_rate),
            hwe_genotypes(n_per_pop, p2, rng, missing_rate),
        ]
    )
    labels = np.repeat([0, 1], n_per_pop)
    return packed_from_dosages(d), labels

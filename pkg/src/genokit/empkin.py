"""Empirical kinship from SNP data and comparison against pedigree kinship.

Three estimators over K polymorphic SNPs with allele-1 frequencies p_k
(missing genotypes mean-imputed, so they contribute nothing to centered
terms):

    grm         s_ij   = (1/K) sum_k (x_ik - 2p_k)(x_jk - 2p_k) / (4 p_k q_k)
    robust_grm  phi_ij = sum_k (x_ik - 2p_k)(x_jk - 2p_k) / sum_k 4 p_k q_k
    mom_kinship phi_ij = (m_ij - c) / (1 - c)
                m_ij   = (1/K) sum_k (x_ik x_jk + (2-x_ik)(2-x_jk)) / 4
                c      = (1/K) sum_k (p_k^2 + q_k^2)

With the 4pq denominators all three are unbiased for the kinship matrix
itself (diagonal (1+f)/2) when the supplied frequencies are the truth.
All three accumulate over fixed-size packed SNP blocks; the full dense
genotype matrix is never materialized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DataError
from .pedkin import KinshipMatrix
from .snpcore import _blocks, _column_transform, allele_frequencies

logger = logging.getLogger(__name__)


def _polymorphic(matrix, freq):
    if freq is None:
        freq = allele_frequencies(matrix)
    freq = np.asarray(freq, dtype=np.float64)
    if freq.shape != (matrix.n_snps,):
        raise ArgumentError(f"frequency vector has shape {freq.shape}, want ({matrix.n_snps},)")
    keep = np.isfinite(freq) & (freq > 0.0) & (freq < 1.0)
    if not keep.any():
        raise DataError("no polymorphic SNPs available for kinship estimation")
    return freq, keep


def _centered_blocks(matrix, freq, keep):
    """Yield mean-imputed centered blocks restricted to kept SNPs (n x b)."""
    fill, shift, _, _ = _column_transform(freq, "centered")
    for lo, hi in _blocks(matrix.n_snps):
        sel = keep[lo:hi]
        if not sel.any():
            continue
        block = matrix.dosage_block(lo, hi)
        miss = np.isnan(block)
        if miss.any():
            block = np.where(miss, fill[lo:hi], block)
        yield (block - shift[lo:hi])[:, sel], freq[lo:hi][sel]


def grm(matrix, freq=None) -> KinshipMatrix:
    """Standard genetic relationship matrix (per-SNP 4pq weights)."""
    freq, keep = _polymorphic(matrix, freq)
    n = matrix.n_subjects
    acc = np.zeros((n, n))
    for centered, p in _centered_blocks(matrix, freq, keep):
        w = centered / np.sqrt(4.0 * p * (1.0 - p))
        acc += w @ w.T
    acc /= keep.sum()
    return KinshipMatrix(_symmetrize(acc), "grm", tuple(matrix.subject_ids))


def robust_grm(matrix, freq=None) -> KinshipMatrix:
    """Pooled-denominator GRM; less variance at low minor allele frequency."""
    freq, keep = _polymorphic(matrix, freq)
    n = matrix.n_subjects
    acc = np.zeros((n, n))
    denom = 0.0
    for centered, p in _centered_blocks(matrix, freq, keep):
        acc += centered @ centered.T
        denom += float(np.sum(4.0 * p * (1.0 - p)))
    acc /= denom
    return KinshipMatrix(_symmetrize(acc), "robust", tuple(matrix.subject_ids))


def mom_kinship(matrix, freq=None) -> KinshipMatrix:
    """Method-of-moments estimator matched on IBS-style sharing."""
    freq, keep = _polymorphic(matrix, freq)
    n = matrix.n_subjects
    K = int(keep.sum())
    cross = np.zeros((n, n))
    row_sum = np.zeros(n)
    fill, _, _, _ = _column_transform(freq, "raw")
    for lo, hi in _blocks(matrix.n_snps):
        sel = keep[lo:hi]
        if not sel.any():
            continue
        block = matrix.dosage_block(lo, hi)
        miss = np.isnan(block)
        if miss.any():
            block = np.where(miss, fill[lo:hi], block)
        block = block[:, sel]
        cross += block @ block.T
        row_sum += block.sum(axis=1)
    # (x x' + (2-x)(2-x'))/4 summed over SNPs == (cross - rowsum_i - rowsum_j + 2K)/2
    m = (cross - row_sum[:, None] - row_sum[None, :] + 2.0 * K) / (2.0 * K)
    p = freq[keep]
    c = float(np.mean(p**2 + (1.0 - p) ** 2))
    est = (m - c) / (1.0 - c)
    return KinshipMatrix(_symmetrize(est), "mom", tuple(matrix.subject_ids))


def _symmetrize(a):
    return 0.5 * (a + a.T)


def ld_matrix(matrix, freq=None) -> np.ndarray:
    """Correlation matrix of the polymorphic SNP dosage columns (mean-imputed)."""
    freq, keep = _polymorphic(matrix, freq)
    cols = []
    for centered, _ in _centered_blocks(matrix, freq, keep):
        cols.append(centered)
    centered = np.hstack(cols)
    sd = np.sqrt((centered**2).mean(axis=0))
    sd[sd == 0] = 1.0
    z = centered / sd
    return (z.T @ z) / matrix.n_subjects


def grm_variance_approx(phi: KinshipMatrix, ld: np.ndarray, n_snps: int) -> float:
    """Approximate E ||S - E S||_F^2 for the GRM built from K SNPs.

    Equals (1/K^2) ||R||_F^2 (||Phi||_F^2 + tr(Phi)^2) with R the SNP
    correlation (LD) matrix. Exact when the standardized dosages are
    jointly Gaussian with separable subject/SNP covariance.
    """
    ld = np.asarray(ld, dtype=np.float64)
    if ld.ndim != 2 or ld.shape[0] != ld.shape[1]:
        raise ArgumentError(f"LD matrix must be square, got {ld.shape}")
    if ld.shape[0] != n_snps:
        raise ArgumentError(f"LD matrix is {ld.shape[0]}x{ld.shape[0]} but K={n_snps}")
    if n_snps <= 0:
        raise ArgumentError("n_snps must be positive")
    v = phi.values
    return float(
        np.sum(ld**2) * (np.sum(v**2) + np.trace(v) ** 2) / float(n_snps) ** 2
    )


@dataclass(frozen=True)
class KinshipDiscrepancy:
    """One pair's Fisher-transformed gap between empirical and pedigree kinship."""

    id1: str
    id2: str
    theoretical: float
    empirical: float
    z: float

    @property
    def is_infinite(self):
        return not np.isfinite(self.z)


def compare_kinship(theoretical: KinshipMatrix, empirical: KinshipMatrix, n_snps: int):
    """Rank pairs by |z| where z is the Fisher-transform discrepancy.

    Both matrices are first normalized to correlation form
    c_ij = m_ij / sqrt(m_ii m_jj) so the estimators' scale conventions
    cancel; then z = sqrt(K-3) (atanh(c_emp) - atanh(c_theo)). Pairs with
    |c| >= 1 get infinite z and sort first; pairs with a zero diagonal are
    excluded with a warning. Returned list is sorted by |z| descending.
    """
    if theoretical.n != empirical.n:
        raise ArgumentError(
            f"matrices are {theoretical.n}x{theoretical.n} and {empirical.n}x{empirical.n}"
        )
    if n_snps <= 3:
        raise ArgumentError(f"need more than 3 SNPs for the Fisher variance, got {n_snps}")
    n = theoretical.n
    dt = np.diag(theoretical.values)
    de = np.diag(empirical.values)
    scale = np.sqrt(n_snps - 3.0)
    out = []
    skipped = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dt[i] <= 0 or dt[j] <= 0 or de[i] <= 0 or de[j] <= 0:
                skipped += 1
                continue
            ct = theoretical.values[i, j] / np.sqrt(dt[i] * dt[j])
            ce = empirical.values[i, j] / np.sqrt(de[i] * de[j])
            if abs(ct) >= 1.0 or abs(ce) >= 1.0:
                z = np.inf if ce >= ct else -np.inf
            else:
                z = scale * (np.arctanh(ce) - np.arctanh(ct))
            out.append(
                KinshipDiscrepancy(
                    theoretical.subject_ids[i],
                    theoretical.subject_ids[j],
                    float(theoretical.values[i, j]),
                    float(empirical.values[i, j]),
                    float(z),
                )
            )
    if skipped:
        logger.warning("%d pair(s) skipped: zero diagonal kinship", skipped)
    out.sort(key=lambda d: (-np.inf if np.isnan(d.z) else -abs(d.z), d.id1, d.id2))
    return out

"""Compressed biallelic genotype matrices.

Genotypes are stored SNP-major at 2 bits each, four per byte, with each
SNP's column padded to a whole byte. The 2-bit codes follow the PLINK
binary convention, read low bits first within each byte:

    0b00  homozygous allele-1   dosage 2
    0b01  missing
    0b10  heterozygous          dosage 1
    0b11  homozygous allele-2   dosage 0

Dosage counts copies of allele 1, the first allele listed in the SNP
metadata. PLINK-compatible tools differ on which allele they count, so
this convention is normative for the whole package.

Numeric kernels (``packed_gemv``, GRM accumulation in :mod:`genokit.empkin`,
``principal_components``) never materialize the full dense matrix; they
decode fixed-size blocks of SNP columns through byte lookup tables.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    ConsistencyError,
    DataError,
    FormatError,
    ParseError,
)

logger = logging.getLogger(__name__)

BED_MAGIC = bytes([0x6C, 0x1B, 0x01])
MISSING = -1  # dosage sentinel in integer decode

# code -> dosage (MISSING for the 0b01 code)
_CODE_DOSAGE = np.array([2, MISSING, 1, 0], dtype=np.int8)
# dosage 0,1,2 -> code
_DOSAGE_CODE = np.array([3, 2, 0], dtype=np.uint8)
_MISSING_CODE = 1

# byte -> 4 dosages, float64, NaN for missing; built once at import
_BYTE_FLOAT = np.empty((256, 4), dtype=np.float64)
_BYTE_INT = np.empty((256, 4), dtype=np.int8)
for _b in range(256):
    for _s in range(4):
        _code = (_b >> (2 * _s)) & 0b11
        _BYTE_INT[_b, _s] = _CODE_DOSAGE[_code]
        _BYTE_FLOAT[_b, _s] = np.nan if _code == _MISSING_CODE else float(_CODE_DOSAGE[_code])

_GEMV_BLOCK = 512  # SNP columns decoded at a time; fixed so results never depend on threads


@dataclass(frozen=True)
class SnpInfo:
    """One .bim record. ``cm`` is carried only for faithful file round-trips."""

    snp_id: str
    chrom: str
    pos: int
    allele1: str
    allele2: str
    cm: float = 0.0


@dataclass(frozen=True)
class SubjectInfo:
    """One .fam record; father/mother ids feed :mod:`genokit.pedkin`."""

    fid: str
    iid: str
    father: str = "0"
    mother: str = "0"
    sex: int = 0
    phenotype: str = "-9"


class PackedGenotypeMatrix:
    """n_subjects x n_snps biallelic genotypes, 2 bits per entry, SNP-major.

    ``data`` has shape (n_snps, ceil(n_subjects/4)) uint8. Pad bits in the
    last byte of every column are forced to 0b00, so equal matrices are
    bitwise-equal buffers. Instances are immutable after construction and
    safe for concurrent reads.
    """

    def __init__(self, n_subjects, n_snps, data, snp_meta, subject_meta):
        data = np.asarray(data, dtype=np.uint8)
        col_bytes = (n_subjects + 3) // 4
        if data.shape != (n_snps, col_bytes):
            raise ConsistencyError(
                f"packed buffer shape {data.shape} != expected ({n_snps}, {col_bytes})"
            )
        if len(snp_meta) != n_snps:
            raise ConsistencyError(f"{len(snp_meta)} SNP records for {n_snps} SNPs")
        if len(subject_meta) != n_subjects:
            raise ConsistencyError(
                f"{len(subject_meta)} subject records for {n_subjects} subjects"
            )
        data = _zero_pad_bits(data.copy(), n_subjects)
        data.flags.writeable = False
        self.n_subjects = int(n_subjects)
        self.n_snps = int(n_snps)
        self.data = data
        self.snp_meta = tuple(snp_meta)
        self.subject_meta = tuple(subject_meta)

    @property
    def shape(self):
        return (self.n_subjects, self.n_snps)

    @property
    def subject_ids(self):
        return [s.iid for s in self.subject_meta]

    @property
    def snp_ids(self):
        return [s.snp_id for s in self.snp_meta]

    def __eq__(self, other):
        if not isinstance(other, PackedGenotypeMatrix):
            return NotImplemented
        return (
            self.n_subjects == other.n_subjects
            and self.n_snps == other.n_snps
            and np.array_equal(self.data, other.data)
            and self.snp_meta == other.snp_meta
            and self.subject_meta == other.subject_meta
        )

    @classmethod
    def from_dosages(cls, dosages, snp_meta=None, subject_meta=None):
        """Pack an (n_subjects, n_snps) integer dosage array; -1 marks missing.

        Metadata defaults to synthetic ids when not supplied.
        """
        dosages = np.asarray(dosages)
        if dosages.ndim != 2:
            raise ArgumentError("dosage array must be 2-D (subjects x SNPs)")
        if np.issubdtype(dosages.dtype, np.floating) and np.isnan(dosages).any():
            dosages = np.where(np.isnan(dosages), MISSING, dosages)
        dosages = dosages.astype(np.int64)
        valid = (dosages == MISSING) | ((dosages >= 0) & (dosages <= 2))
        if not valid.all():
            raise DataError("dosages must be in {0,1,2} or -1/NaN for missing")
        n, m = dosages.shape
        if snp_meta is None:
            snp_meta = default_snp_meta(m)
        if subject_meta is None:
            subject_meta = default_subject_meta(n)
        data = _pack_columns(dosages)
        return cls(n, m, data, snp_meta, subject_meta)

    def dosage_block(self, start, stop, dtype=np.float64):
        """Decode SNP columns [start, stop) to (n_subjects, stop-start).

        float dtypes mark missing as NaN; integer dtypes use -1.
        """
        raw = self.data[start:stop]
        table = _BYTE_FLOAT if np.issubdtype(np.dtype(dtype), np.floating) else _BYTE_INT
        block = table[raw].reshape(raw.shape[0], -1)[:, : self.n_subjects]
        return block.T.astype(dtype, copy=False)

    def dosage_column(self, j, dtype=np.float64):
        """Decode a single SNP column."""
        return self.dosage_block(j, j + 1, dtype=dtype)[:, 0]


def default_snp_meta(m, chrom="1", spacing=1000):
    return [SnpInfo(f"snp{j + 1}", chrom, (j + 1) * spacing, "A", "B") for j in range(m)]


def default_subject_meta(n):
    return [SubjectInfo("fam", f"ind{i + 1}") for i in range(n)]


def _pack_columns(dosages):
    """(n, m) int dosages -> (m, ceil(n/4)) packed bytes, pad bits 0b00."""
    n, m = dosages.shape
    codes = np.where(
        dosages == MISSING, _MISSING_CODE, _DOSAGE_CODE[np.clip(dosages, 0, 2)]
    ).astype(np.uint8)
    col_bytes = (n + 3) // 4
    padded = np.zeros((m, 4 * col_bytes), dtype=np.uint8)
    padded[:, :n] = codes.T
    quads = padded.reshape(m, col_bytes, 4)
    return (
        quads[:, :, 0]
        | (quads[:, :, 1] << 2)
        | (quads[:, :, 2] << 4)
        | (quads[:, :, 3] << 6)
    ).astype(np.uint8)


def _zero_pad_bits(data, n_subjects):
    """Force pad bits in the last byte of each column to 0b00."""
    rem = n_subjects % 4
    if rem and data.shape[1]:
        keep_mask = np.uint8((1 << (2 * rem)) - 1)
        data[:, -1] &= keep_mask
    return data


# ---------------------------------------------------------------------------
# PLINK triple I/O


def read_plink(bed_path, bim_path=None, fam_path=None) -> PackedGenotypeMatrix:
    """Read a PLINK .bed/.bim/.fam triple without decoding any genotype.

    ``bed_path`` may be the bare prefix, in which case the companion paths
    are derived. Pad bits found in the file are ignored (zeroed in memory).
    """
    bed_path = str(bed_path)
    if bim_path is None or fam_path is None:
        prefix = bed_path[:-4] if bed_path.endswith(".bed") else bed_path
        bed_path = prefix + ".bed"
        bim_path = bim_path or prefix + ".bim"
        fam_path = fam_path or prefix + ".fam"

    subject_meta = _read_fam(fam_path)
    snp_meta = _read_bim(bim_path)
    n, m = len(subject_meta), len(snp_meta)

    with open(bed_path, "rb") as fh:
        header = fh.read(3)
        payload = fh.read()
    if header != BED_MAGIC:
        raise FormatError(
            f"{bed_path}: bad magic/mode bytes {header.hex()} (want {BED_MAGIC.hex()}, SNP-major)"
        )
    col_bytes = (n + 3) // 4
    if len(payload) != m * col_bytes:
        raise ConsistencyError(
            f"{bed_path}: payload is {len(payload)} bytes but .bim/.fam imply "
            f"{m} SNPs x {col_bytes} bytes = {m * col_bytes}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(m, col_bytes)
    return PackedGenotypeMatrix(n, m, data, snp_meta, subject_meta)


def write_plink(matrix: PackedGenotypeMatrix, out_prefix) -> None:
    """Write the .bed/.bim/.fam triple; inverse of :func:`read_plink`."""
    prefix = str(out_prefix)
    with open(prefix + ".bed", "wb") as fh:
        fh.write(BED_MAGIC)
        fh.write(matrix.data.tobytes())
    with open(prefix + ".bim", "w") as fh:
        for s in matrix.snp_meta:
            cm = repr(s.cm) if s.cm else "0"
            fh.write(f"{s.chrom}\t{s.snp_id}\t{cm}\t{s.pos}\t{s.allele1}\t{s.allele2}\n")
    with open(prefix + ".fam", "w") as fh:
        for s in matrix.subject_meta:
            fh.write(f"{s.fid}\t{s.iid}\t{s.father}\t{s.mother}\t{s.sex}\t{s.phenotype}\n")


def _read_fam(path):
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 6:
                raise ParseError(
                    f"expected 6 whitespace-delimited columns, got {len(fields)}",
                    path=path,
                    line=lineno,
                )
            fid, iid, father, mother, sex, pheno = fields
            try:
                sex_code = int(sex)
            except ValueError:
                raise ParseError(f"sex code {sex!r} is not an integer", path=path, line=lineno)
            records.append(SubjectInfo(fid, iid, father, mother, sex_code, pheno))
    return records


def _read_bim(path):
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 6:
                raise ParseError(
                    f"expected 6 whitespace-delimited columns, got {len(fields)}",
                    path=path,
                    line=lineno,
                )
            chrom, snp_id, cm, pos, a1, a2 = fields
            try:
                cm_val = float(cm)
                pos_val = int(pos)
            except ValueError:
                raise ParseError(
                    f"bad position fields cm={cm!r} bp={pos!r}", path=path, line=lineno
                )
            records.append(SnpInfo(snp_id, chrom, pos_val, a1, a2, cm_val))
    return records


# ---------------------------------------------------------------------------
# Summaries


@dataclass(frozen=True)
class SnpSummaries:
    """Column-oriented per-SNP summaries.

    ``freq_allele1`` is NaN (and ``defined`` False) for all-missing SNPs.
    """

    n0: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    n_missing: np.ndarray
    freq_allele1: np.ndarray
    missing_rate: np.ndarray
    maf: np.ndarray
    defined: np.ndarray

    def __len__(self):
        return len(self.n0)


def summarize(matrix: PackedGenotypeMatrix):
    """Per-SNP genotype counts/frequencies plus per-subject missing rates."""
    m, n = matrix.n_snps, matrix.n_subjects
    counts = np.zeros((m, 3), dtype=np.int64)
    snp_missing = np.zeros(m, dtype=np.int64)
    subj_missing = np.zeros(n, dtype=np.int64)
    for lo, hi in _blocks(m):
        block = matrix.dosage_block(lo, hi, dtype=np.int8)  # (n, b)
        miss = block == MISSING
        snp_missing[lo:hi] = miss.sum(axis=0)
        subj_missing += miss.sum(axis=1)
        for d in range(3):
            counts[lo:hi, d] = (block == d).sum(axis=0)

    n0, n1, n2 = counts[:, 0], counts[:, 1], counts[:, 2]
    typed = n0 + n1 + n2
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = (n1 + 2 * n2) / (2.0 * typed)
    defined = typed > 0
    freq = np.where(defined, freq, np.nan)
    maf = np.where(defined, np.minimum(freq, 1.0 - freq), np.nan)
    missing_rate = snp_missing / float(n) if n else np.zeros(m)
    summaries = SnpSummaries(n0, n1, n2, snp_missing, freq, missing_rate, maf, defined)
    subject_missing_rate = subj_missing / float(m) if m else np.zeros(n)
    return summaries, subject_missing_rate


def _blocks(m, size=_GEMV_BLOCK):
    return [(lo, min(lo + size, m)) for lo in range(0, m, size)]


# ---------------------------------------------------------------------------
# Filtering


def filter_matrix(matrix, min_snp_success=0.0, min_subject_success=0.0, min_maf=0.0):
    """Drop SNPs/subjects below success-rate and MAF thresholds.

    Subject and SNP passes alternate, with rates recomputed each pass,
    until a fixed point: re-filtering the result changes nothing. Returns
    (kept SNP indices, kept subject indices, filtered matrix), indices
    into the original matrix.
    """
    for name, value in (
        ("min_snp_success", min_snp_success),
        ("min_subject_success", min_subject_success),
        ("min_maf", min_maf),
    ):
        if not 0.0 <= value <= 1.0:
            raise ArgumentError(f"{name}={value} outside [0, 1]")

    dosages = matrix.dosage_block(0, matrix.n_snps, dtype=np.int8)
    snp_keep = np.ones(matrix.n_snps, dtype=bool)
    subj_keep = np.ones(matrix.n_subjects, dtype=bool)

    while True:
        sub = dosages[np.ix_(subj_keep, snp_keep)]
        n_kept_subj = sub.shape[0]
        miss = sub == MISSING
        if n_kept_subj:
            snp_success = 1.0 - miss.sum(axis=0) / n_kept_subj
        else:
            snp_success = np.ones(sub.shape[1])
        typed = (~miss).sum(axis=0)
        alt = np.where(miss, 0, sub).sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            freq = alt / (2.0 * typed)
        maf = np.minimum(freq, 1.0 - freq)
        maf_ok = (maf >= min_maf) | (np.isnan(maf) & (min_maf == 0.0))
        snp_pass = (snp_success >= min_snp_success) & maf_ok

        new_snp_keep = snp_keep.copy()
        new_snp_keep[np.flatnonzero(snp_keep)[~snp_pass]] = False

        sub = dosages[np.ix_(subj_keep, new_snp_keep)]
        if sub.shape[1]:
            subj_success = 1.0 - (sub == MISSING).sum(axis=1) / sub.shape[1]
        else:
            subj_success = np.ones(sub.shape[0])  # vacuous when no SNPs remain
        subj_pass = subj_success >= min_subject_success
        new_subj_keep = subj_keep.copy()
        new_subj_keep[np.flatnonzero(subj_keep)[~subj_pass]] = False

        if np.array_equal(new_snp_keep, snp_keep) and np.array_equal(new_subj_keep, subj_keep):
            break
        snp_keep, subj_keep = new_snp_keep, new_subj_keep

    snp_idx = np.flatnonzero(snp_keep)
    subj_idx = np.flatnonzero(subj_keep)
    return snp_idx, subj_idx, subset(matrix, subj_idx, snp_idx)


def subset(matrix, subjects=None, snps=None):
    """Re-pack a subject/SNP subset (fresh pad bits)."""
    subjects = np.arange(matrix.n_subjects) if subjects is None else np.asarray(subjects)
    snps = np.arange(matrix.n_snps) if snps is None else np.asarray(snps)
    dosages = matrix.dosage_block(0, matrix.n_snps, dtype=np.int8)
    sub = dosages[np.ix_(subjects, snps)]
    snp_meta = [matrix.snp_meta[j] for j in snps]
    subject_meta = [matrix.subject_meta[i] for i in subjects]
    return PackedGenotypeMatrix.from_dosages(sub, snp_meta, subject_meta)


# ---------------------------------------------------------------------------
# Dense decode and packed kernels

_MODES = ("raw", "centered", "standardized")


def allele_frequencies(matrix):
    """Per-SNP allele-1 frequency (NaN where all genotypes are missing)."""
    return summarize(matrix)[0].freq_allele1


def _column_transform(freq, mode):
    """Per-SNP (fill, shift, scale): transformed x = (impute(x, fill) - shift) * scale.

    ``fill`` is the mean-impute value 2p in every mode (0 when p is
    undefined). Monomorphic or undefined columns in standardized mode get
    scale 0 (zero-filled downstream) and are reported back as flagged.
    """
    m = freq.shape[0]
    fill = np.where(np.isnan(freq), 0.0, 2.0 * freq)
    shift = np.zeros(m)
    scale = np.ones(m)
    flagged = np.zeros(m, dtype=bool)
    if mode == "raw":
        return fill, shift, scale, flagged
    shift = fill.copy()
    if mode == "centered":
        flagged = np.isnan(freq)
        return fill, shift, scale, flagged
    if mode == "standardized":
        var = 2.0 * freq * (1.0 - freq)
        bad = ~(var > 0)  # catches p in {0, 1} and NaN
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(bad, 0.0, 1.0 / np.sqrt(var))
        shift = np.where(bad, 0.0, shift)
        return fill, shift, scale, bad
    raise ArgumentError(f"unknown mode {mode!r}; expected one of {_MODES}")


def decompress(matrix, mode="raw", missing_policy="mean-impute", freq=None):
    """Dense (subjects x SNPs) float matrix under the chosen numeric model.

    centered: x - 2p. standardized: (x - 2p)/sqrt(2p(1-p)); monomorphic
    columns are zero-filled and flagged via a warning. mean-impute fills
    missing genotypes with 2p before any centering, so an imputed entry
    contributes 0 to centered/standardized columns.
    """
    mode = "raw" if mode == "raw-dosage" else mode
    if missing_policy not in ("mean-impute", "fail"):
        raise ArgumentError(f"unknown missing_policy {missing_policy!r}")
    if freq is None:
        freq = allele_frequencies(matrix)
    fill, shift, scale, flagged = _column_transform(freq, mode)
    if flagged.any() and mode != "raw":
        names = [matrix.snp_meta[j].snp_id for j in np.flatnonzero(flagged)[:5]]
        logger.warning(
            "%d SNP column(s) zero-filled under mode=%s (monomorphic or all-missing): %s%s",
            int(flagged.sum()), mode, ", ".join(names), "..." if flagged.sum() > 5 else "",
        )

    out = np.empty((matrix.n_subjects, matrix.n_snps))
    for lo, hi in _blocks(matrix.n_snps):
        block = matrix.dosage_block(lo, hi)  # NaN where missing
        miss = np.isnan(block)
        if miss.any():
            if missing_policy == "fail":
                j = lo + int(np.flatnonzero(miss.any(axis=0))[0])
                raise DataError(
                    f"missing genotype at SNP {matrix.snp_meta[j].snp_id} with missing_policy='fail'"
                )
            block = np.where(miss, fill[lo:hi], block)
        out[:, lo:hi] = (block - shift[lo:hi]) * scale[lo:hi]
    return out


def packed_gemv(matrix, v, mode="raw", missing_policy="mean-impute", transpose=False, freq=None):
    """Product of the implicit dense matrix (or its transpose) with ``v``.

    Equivalent to ``decompress(matrix, mode, missing_policy) @ v`` but only
    ever decodes fixed-size blocks of SNP columns. Accumulation order is
    fixed, so results are bit-reproducible regardless of threading.
    """
    mode = "raw" if mode == "raw-dosage" else mode
    v = np.asarray(v, dtype=np.float64)
    n, m = matrix.n_subjects, matrix.n_snps
    expected = n if transpose else m
    if v.shape != (expected,):
        raise ArgumentError(f"vector has shape {v.shape}, expected ({expected},)")
    if missing_policy not in ("mean-impute", "fail"):
        raise ArgumentError(f"unknown missing_policy {missing_policy!r}")
    if freq is None:
        freq = allele_frequencies(matrix)
    fill, shift, scale, _ = _column_transform(freq, mode)

    out = np.zeros(m if transpose else n)
    for lo, hi in _blocks(m):
        block = matrix.dosage_block(lo, hi)
        miss = np.isnan(block)
        if miss.any():
            if missing_policy == "fail":
                j = lo + int(np.flatnonzero(miss.any(axis=0))[0])
                raise DataError(
                    f"missing genotype at SNP {matrix.snp_meta[j].snp_id} with missing_policy='fail'"
                )
            block = np.where(miss, fill[lo:hi], block)
        block = (block - shift[lo:hi]) * scale[lo:hi]
        if transpose:
            out[lo:hi] = block.T @ v
        else:
            out += block @ v[lo:hi]
    return out


def packed_matmat(matrix, V, mode="standardized", transpose=False, freq=None):
    """Blocked multi-column counterpart of :func:`packed_gemv`.

    Computes ``A @ V`` (or ``A.T @ V``) for the implicit dense matrix A,
    decoding SNP columns block by block.
    """
    V = np.asarray(V, dtype=np.float64)
    n, m = matrix.n_subjects, matrix.n_snps
    if freq is None:
        freq = allele_frequencies(matrix)
    fill, shift, scale, _ = _column_transform(freq, mode)
    if transpose:
        out = np.empty((m, V.shape[1]))
    else:
        out = np.zeros((n, V.shape[1]))
    for lo, hi in _blocks(m):
        block = matrix.dosage_block(lo, hi)
        miss = np.isnan(block)
        if miss.any():
            block = np.where(miss, fill[lo:hi], block)
        block = (block - shift[lo:hi]) * scale[lo:hi]
        if transpose:
            out[lo:hi] = block.T @ V
        else:
            out += block @ V[lo:hi]
    return out


# ---------------------------------------------------------------------------
# Principal components


def principal_components(matrix, n_components, tol=1e-8, max_iter=1000, seed=0, oversample=8):
    """Top principal components of the standardized genotype matrix.

    Block subspace iteration over the implicit standardized matrix A
    (mean-imputed): eigenpairs of A Aᵀ are refined until the component
    eigenvalues change by less than ``tol`` relative. Scores are the
    subject projections U·σ; eigenvalues are the squared singular values,
    returned non-increasing. Column signs are fixed (largest-magnitude
    score positive) so results are deterministic.
    """
    n, m = matrix.n_subjects, matrix.n_snps
    k = int(n_components)
    if k < 0 or k > min(n, m):
        raise ArgumentError(f"n_components={k} outside [0, min(n, m)={min(n, m)}]")
    if k == 0:
        return np.empty((n, 0)), np.empty(0)

    freq = allele_frequencies(matrix)
    width = min(k + oversample, min(n, m))
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, width)))
    prev = np.full(k, np.inf)
    polish = 3  # extra sweeps after eigenvalue convergence; vector accuracy lags eigenvalues
    for _ in range(max_iter):
        B = packed_matmat(matrix, Q, mode="standardized", transpose=True, freq=freq)
        Y = packed_matmat(matrix, B, mode="standardized", transpose=False, freq=freq)
        Q, _ = np.linalg.qr(Y)
        # Rayleigh-Ritz on the current subspace
        B = packed_matmat(matrix, Q, mode="standardized", transpose=True, freq=freq)
        H = B.T @ B
        evals, evecs = np.linalg.eigh(H)
        order = np.argsort(evals)[::-1]
        evals, evecs = evals[order], evecs[:, order]
        Q = Q @ evecs
        top = evals[:k]
        denom = np.where(top > 0, top, 1.0)
        if np.all(np.abs(top - prev) <= tol * denom):
            if polish == 0:
                break
            polish -= 1
        prev = top

    eigenvalues = np.clip(evals[:k], 0.0, None)
    scores = Q[:, :k] * np.sqrt(eigenvalues)
    # deterministic sign: largest-|entry| coordinate made positive
    for j in range(k):
        col = scores[:, j]
        if col.any():
            idx = int(np.argmax(np.abs(col)))
            if col[idx] < 0:
                scores[:, j] = -col
    return scores, eigenvalues

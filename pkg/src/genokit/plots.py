"""Matplotlib figures rendered next to the delimited report files.

Every report-emitting CLI path writes a PNG alongside its TSV unless
--no-plot is given. Figures are rendered with the Agg backend and saved
without volatile metadata, so output bytes depend only on the data.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .assoc import ScanResult, _chrom_key, neg_log10

_DPI = 150


def _save(fig, path):
    path = str(path)
    kwargs = {"dpi": _DPI, "bbox_inches": "tight"}
    if path.endswith(".png"):
        kwargs["metadata"] = {"Software": None}  # drop the version stamp
    fig.savefig(path, **kwargs)
    plt.close(fig)


def manhattan_plot(result: ScanResult, path, suggestive=5e-5):
    rows = result.tested_rows()
    chroms = sorted({r.chrom for r in rows}, key=_chrom_key)
    fig, ax = plt.subplots(figsize=(9, 3.2))
    offset = 0
    ticks, tick_labels = [], []
    for ci, chrom in enumerate(chroms):
        sub = [r for r in rows if r.chrom == chrom]
        pos = np.array([r.pos for r in sub], dtype=float)
        vals = np.array([neg_log10(r.score_p) for r in sub])
        span = pos.max() - pos.min() + 1 if len(pos) else 1
        x = offset + (pos - pos.min())
        ax.scatter(x, vals, s=6, color="C0" if ci % 2 == 0 else "C1", rasterized=True)
        ticks.append(offset + span / 2)
        tick_labels.append(str(chrom))
        offset += span * 1.05
    if suggestive and suggestive > 0:
        ax.axhline(-np.log10(suggestive), color="grey", lw=0.8, ls="--")
    ax.set_xticks(ticks)
    ax.set_xticklabels(tick_labels)
    ax.set_xlabel("chromosome")
    ax.set_ylabel(r"$-\log_{10} p$")
    ax.set_title(f"association scan ({result.null_kind} null, $\\lambda_{{GC}}$={result.lambda_gc:.3f})")
    _save(fig, path)


def pca_plot(scores, eigenvalues, path):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    if scores.shape[1] >= 2:
        axes[0].scatter(scores[:, 0], scores[:, 1], s=10)
        axes[0].set_xlabel("PC1")
        axes[0].set_ylabel("PC2")
    elif scores.shape[1] == 1:
        axes[0].scatter(np.arange(scores.shape[0]), scores[:, 0], s=10)
        axes[0].set_xlabel("subject")
        axes[0].set_ylabel("PC1")
    axes[0].set_title("component scores")
    axes[1].plot(np.arange(1, len(eigenvalues) + 1), eigenvalues, marker="o")
    axes[1].set_xlabel("component")
    axes[1].set_ylabel("eigenvalue")
    axes[1].set_title("scree")
    _save(fig, path)


def kinship_compare_plot(discrepancies, path):
    finite = [d for d in discrepancies if not d.is_infinite]
    fig, ax = plt.subplots(figsize=(4.5, 4.2))
    theo = [d.theoretical for d in finite]
    emp = [d.empirical for d in finite]
    z = [abs(d.z) for d in finite]
    sc = ax.scatter(theo, emp, c=z, cmap="viridis", s=14)
    fig.colorbar(sc, ax=ax, label="|z|")
    lims = ax.get_xlim()
    ax.plot(lims, lims, color="grey", lw=0.8, ls="--")
    ax.set_xlabel("theoretical kinship")
    ax.set_ylabel("empirical kinship")
    ax.set_title("kinship discrepancies")
    _save(fig, path)


def loglik_trace_plot(traces, path, labels=None):
    """One or several fitting traces on a shared axis."""
    if isinstance(traces[0], (int, float, np.floating)):
        traces = [traces]
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    for i, t in enumerate(traces):
        lab = labels[i] if labels else f"fit {i + 1}"
        ax.plot(np.arange(1, len(t) + 1), t, marker=".", label=lab)
    ax.set_xlabel("iteration")
    ax.set_ylabel("log-likelihood")
    if labels or len(traces) > 1:
        ax.legend(fontsize=8)
    ax.set_title("fitting trace")
    _save(fig, path)


def loss_trace_plot(trace, path, ylabel="loss"):
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    ax.semilogy(np.arange(len(trace)), np.maximum(trace, 1e-300), marker=".")
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.set_title("descent trace")
    _save(fig, path)


def impute_report_plot(reports, path):
    done = [r for r in reports if not r.skipped]
    fig, axes = plt.subplots(2, 1, figsize=(7, 4.6), sharex=True)
    centers = [0.5 * (r.snp_start + r.snp_stop) for r in done]
    axes[0].step(centers, [r.rank for r in done], where="mid")
    axes[0].set_ylabel("chosen rank")
    axes[1].semilogy(centers, [max(r.holdout_error, 1e-300) for r in done], marker=".")
    axes[1].set_ylabel("hold-out SSE")
    axes[1].set_xlabel("SNP position (window center)")
    axes[0].set_title("imputation windows")
    _save(fig, path)


def summary_plot(summaries, subject_missing, path):
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    maf = summaries.maf[summaries.defined]
    axes[0].hist(maf, bins=30)
    axes[0].set_xlabel("minor allele frequency")
    axes[0].set_title("MAF")
    axes[1].hist(summaries.missing_rate, bins=30)
    axes[1].set_xlabel("per-SNP missing rate")
    axes[1].set_title("SNP missingness")
    axes[2].hist(subject_missing, bins=30)
    axes[2].set_xlabel("per-subject missing rate")
    axes[2].set_title("subject missingness")
    _save(fig, path)

"""Genotype imputation by windowed low-rank matrix completion.

The loss is the squared deviation over observed entries only; both
solvers drive it monotonically downhill:

  * ``svd_impute``: fill missing entries with the current low-rank guess,
    truncated SVD of the filled matrix, repeat (an MM iteration).
  * ``als_complete``: same fill step, then the two alternating
    least-squares factor updates against the filled matrix.

The pipeline slides a window along the SNP axis, picks the rank per
window on a hold-out set masked in the outer two thirds, completes, and
commits only the middle third (edge windows also commit their otherwise
uncovered outer thirds), so committed regions tile the SNP axis exactly
once. Windows are stacked as (reference subjects above study subjects) x
window SNPs; rows index subjects throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError, WindowError
from .snpcore import PackedGenotypeMatrix

_LOSS_SLACK = 1e-9  # relative slack for the in-loop monotonicity assertion


class ObservationMask:
    """Set of observed (row, col) pairs with O(1) membership, stored dense."""

    def __init__(self, mask):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2:
            raise ArgumentError("observation mask must be 2-D")
        self.mask = mask

    @classmethod
    def from_pairs(cls, shape, pairs):
        mask = np.zeros(shape, dtype=bool)
        for i, j in pairs:
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise ArgumentError(f"index ({i}, {j}) outside {shape}")
            mask[i, j] = True
        return cls(mask)

    @classmethod
    def from_observed(cls, x):
        """Observed = finite entries of x."""
        return cls(np.isfinite(np.asarray(x, dtype=float)))

    @property
    def shape(self):
        return self.mask.shape

    @property
    def n_observed(self):
        return int(self.mask.sum())

    def __contains__(self, pair):
        return bool(self.mask[pair])


@dataclass
class CompletionFactors:
    """Rank-r factorization; the completion is the product U @ V."""

    U: np.ndarray  # (rows, r)
    V: np.ndarray  # (r, cols)

    def __post_init__(self):
        if self.U.ndim != 2 or self.V.ndim != 2 or self.U.shape[1] != self.V.shape[0]:
            raise ArgumentError(
                f"factor shapes {self.U.shape} x {self.V.shape} do not chain"
            )
        if self.rank < 1:
            raise ArgumentError("completion rank must be >= 1")

    @property
    def rank(self):
        return self.U.shape[1]

    def product(self):
        return self.U @ self.V


def completion_loss(x, omega: ObservationMask, y) -> float:
    """Sum of squared deviations between x and y over observed entries only."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != omega.shape or y.shape != x.shape:
        raise ArgumentError("x, y, and mask shapes differ")
    m = omega.mask
    if not m.any():
        return 0.0
    diff = x[m] - y[m]
    return float(diff @ diff)


def _initial_fill(x, mask):
    """Observed entries kept; missing filled with per-column observed means."""
    z = np.array(x, dtype=float)
    col_counts = mask.sum(axis=0)
    with np.errstate(invalid="ignore"):
        col_means = np.where(mask, z, 0.0).sum(axis=0) / np.maximum(col_counts, 1)
    overall = z[mask].mean() if mask.any() else 0.0
    col_means = np.where(col_counts > 0, col_means, overall)
    miss = ~mask
    z[miss] = np.broadcast_to(col_means, z.shape)[miss]
    return z


def _check_monotone(trace, label):
    if len(trace) >= 2:
        prev, cur = trace[-2], trace[-1]
        if cur > prev + _LOSS_SLACK * (abs(prev) + 1.0):
            raise NumericError(f"{label}: loss increased from {prev} to {cur}")


def svd_impute(x, omega, r, tol=1e-5, max_iter=100):
    """Rank-r completion by repeated fill + truncated SVD.

    Returns (factors, loss_trace); the trace is non-increasing (checked
    in-loop). A fully observed matrix converges in one step to the best
    rank-r approximation.
    """
    x = np.asarray(x, dtype=float)
    if omega.shape != x.shape:
        raise ArgumentError("mask shape does not match x")
    if not 1 <= r <= min(x.shape):
        raise ArgumentError(f"rank {r} outside [1, {min(x.shape)}]")
    if omega.n_observed == 0:
        raise ArgumentError("cannot complete a window with no observed entries")
    mask = omega.mask
    z = _initial_fill(x, mask)
    factors = None
    trace = []
    for _ in range(max_iter):
        u, s, vt = np.linalg.svd(z, full_matrices=False)
        factors = CompletionFactors(u[:, :r] * s[:r], vt[:r])
        y = factors.product()
        trace.append(completion_loss(x, omega, y))
        _check_monotone(trace, "svd_impute")
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if abs(prev - cur) <= tol * (abs(prev) + 1e-12):
                break
        z = np.where(mask, x, y)
    return factors, trace


def als_complete(x, omega, r, init: CompletionFactors, tol=1e-5, max_iter=100, ridge=1e-8):
    """Alternating least squares against the refilled matrix.

    Each sweep refills missing entries with the current product, then
    solves the two normal-equation updates (V given U, then U given V).
    A small ridge guards rank-deficient factors; persistent non-finite
    results raise NumericError.
    """
    x = np.asarray(x, dtype=float)
    if omega.shape != x.shape:
        raise ArgumentError("mask shape does not match x")
    if init.rank != r:
        raise ArgumentError(f"init has rank {init.rank}, expected {r}")
    if not 1 <= r <= min(x.shape):
        raise ArgumentError(f"rank {r} outside [1, {min(x.shape)}]")
    mask = omega.mask
    u, v = init.U.copy(), init.V.copy()
    eye = np.eye(r)
    trace = [completion_loss(x, omega, u @ v)]
    for _ in range(max_iter):
        z = np.where(mask, x, u @ v)
        try:
            v = np.linalg.solve(u.T @ u + ridge * eye, u.T @ z)
            u = np.linalg.solve(v @ v.T + ridge * eye, v @ z.T).T
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"als_complete: normal equations singular: {exc}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise NumericError("als_complete: non-finite factors")
        trace.append(completion_loss(x, omega, u @ v))
        # the ridge shifts each sweep's minimizer by at most ridge*(|U|^2+|V|^2)
        allowance = ridge * (float(np.sum(u * u)) + float(np.sum(v * v)))
        if trace[-1] > trace[-2] + allowance + _LOSS_SLACK * (abs(trace[-2]) + 1.0):
            raise NumericError(
                f"als_complete: loss increased from {trace[-2]} to {trace[-1]}"
            )
        prev, cur = trace[-2], trace[-1]
        if abs(prev - cur) <= tol * (abs(prev) + 1e-12):
            break
    return CompletionFactors(u, v), trace


def randomized_svd(a, r, oversample=10, seed=0, n_power=1):
    """Rank-r factor pair from a randomized range finder with one power pass."""
    a = np.asarray(a, dtype=float)
    if r < 1:
        raise ArgumentError("rank must be >= 1")
    width = min(r + oversample, min(a.shape))
    if width < r:
        raise ArgumentError(f"rank {r} exceeds min dimension {min(a.shape)}")
    rng = np.random.default_rng(seed)
    y = a @ rng.standard_normal((a.shape[1], width))
    q, _ = np.linalg.qr(y)
    for _ in range(n_power):
        q, _ = np.linalg.qr(a @ (a.T @ q))
    b = q.T @ a
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q @ ub[:, :r]
    return CompletionFactors(u * s[:r], vt[:r])


def _outer_third_columns(width):
    third = width // 3
    if third < 1:
        raise WindowError(f"window of {width} SNPs cannot be split into thirds")
    left = np.arange(third)
    right = np.arange(width - third, width)
    return np.concatenate([left, right])


def select_rank(x, omega, rank_grid, mask_fraction=0.1, seed=0, tol=1e-5, max_iter=100):
    """Pick the completion rank by hold-out error in the outer two thirds.

    A ``mask_fraction`` of the observed entries in the outer thirds is
    hidden; every candidate rank is fitted on the reduced mask and scored
    on the hidden entries. Ties go to the smaller rank. Returns
    (rank, {rank: holdout_sse}).
    """
    x = np.asarray(x, dtype=float)
    grid = sorted(set(int(r) for r in rank_grid))
    if not grid:
        raise ArgumentError("rank grid is empty")
    grid = [r for r in grid if 1 <= r <= min(x.shape)]
    if not grid:
        raise ArgumentError("no rank in the grid fits the window dimensions")
    outer = _outer_third_columns(x.shape[1])

    holdout_rows, holdout_cols = np.nonzero(omega.mask[:, outer])
    holdout_cols = outer[holdout_cols]
    n_holdout = int(round(mask_fraction * len(holdout_rows)))
    if len(grid) == 1 or n_holdout == 0:
        return grid[0], {grid[0]: 0.0}
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(holdout_rows), size=n_holdout, replace=False)
    hr, hc = holdout_rows[pick], holdout_cols[pick]

    train_mask = omega.mask.copy()
    train_mask[hr, hc] = False
    train = ObservationMask(train_mask)
    truth = x[hr, hc]

    errors = {}
    best_rank, best_err = None, np.inf
    for r in grid:
        init = randomized_svd(_initial_fill(x, train_mask), r, seed=seed)
        factors, _ = als_complete(x, train, r, init, tol=tol, max_iter=max_iter)
        pred = factors.product()[hr, hc]
        err = float(np.sum((pred - truth) ** 2))
        errors[r] = err
        if err < best_err:  # strict: ties keep the smaller rank
            best_rank, best_err = r, err
    return best_rank, errors


@dataclass(frozen=True)
class WindowPlan:
    """Sliding-window settings; ``step`` defaults to width/3."""

    width: int = 300
    step: int | None = None
    rank_grid: tuple = (1, 2, 3, 5, 8, 13)
    mask_fraction: float = 0.1
    seed: int = 0
    tol: float = 1e-5
    max_iter: int = 100
    reference_rows: tuple | None = None  # subset of reference subjects to stack

    def resolved_step(self):
        step = self.width // 3 if self.step is None else self.step
        if step < 1 or 2 * step > self.width:
            # commit regions [t+s, t+2s) must stay inside their window
            raise ArgumentError(f"step {step} outside [1, width/2={self.width // 2}]")
        if not self.rank_grid:
            raise ArgumentError("rank grid is empty")
        return step


@dataclass(frozen=True)
class WindowReport:
    index: int
    snp_start: int
    snp_stop: int
    commit_start: int
    commit_stop: int
    n_observed: int
    rank: int | None
    iterations: int
    holdout_error: float
    skipped: bool = False
    reason: str = ""


@dataclass
class ImputeResult:
    dosages: np.ndarray  # (n_study, n_snps) completed, observed entries untouched
    hard_calls: PackedGenotypeMatrix
    reports: list


def _window_layout(n_snps, width, step):
    """(start, stop, commit_start, commit_stop) tiles covering the SNP axis once."""
    if n_snps <= width:
        return [(0, n_snps, 0, n_snps)]
    windows = []
    t = 0
    while True:
        if t + width >= n_snps:
            start = t
            commit = (t + step, n_snps) if windows else (0, n_snps)
            windows.append((start, n_snps, commit[0], commit[1]))
            break
        commit_lo = 0 if not windows else t + step
        windows.append((t, t + width, commit_lo, t + 2 * step))
        t += step
    return windows


def impute_pipeline(study: PackedGenotypeMatrix, reference=None, plan=None,
                    threads=1) -> ImputeResult:
    """Window, rank-select, complete, and commit middle-third study entries.

    Observed study genotypes are never modified; committed continuous
    dosages are clamped to [0, 2]; hard calls round to the nearest of
    {0, 1, 2} with halves rounding up. Windows with no observed entries
    are skipped and reported. Windows are independent after planning and
    may run on ``threads`` workers; committed column ranges never overlap,
    and per-window seeds are fixed, so results do not depend on ``threads``.
    """
    plan = plan or WindowPlan()
    step = plan.resolved_step()
    n_study, m = study.n_subjects, study.n_snps
    if reference is not None and reference.n_snps != m:
        raise ArgumentError(
            f"reference has {reference.n_snps} SNPs, study has {m}; "
            "panels must share the SNP coordinate system"
        )

    study_dense = study.dosage_block(0, m)  # NaN where missing
    if reference is not None:
        ref_dense = reference.dosage_block(0, reference.n_snps)
        if plan.reference_rows is not None:
            ref_dense = ref_dense[list(plan.reference_rows)]
        stacked = np.vstack([ref_dense, study_dense])
        study_offset = ref_dense.shape[0]
    else:
        stacked = study_dense
        study_offset = 0

    out = study_dense.copy()
    windows = _window_layout(m, plan.width, step)
    if min(w[1] - w[0] for w in windows) < 3:
        bad = next(w for w in windows if w[1] - w[0] < 3)
        raise WindowError(
            f"window {bad[0]}:{bad[1]} has fewer than 3 SNPs; widen the window plan"
        )
    seeds = np.random.SeedSequence(plan.seed).spawn(len(windows))

    def solve_window(task):
        idx, (lo, hi, clo, chi) = task
        xw = stacked[:, lo:hi]
        omega = ObservationMask.from_observed(xw)
        if omega.n_observed == 0:
            report = WindowReport(
                idx, lo, hi, clo, chi, 0, None, 0, np.nan, True, "no observed entries"
            )
            return report, None, None
        wseed = seeds[idx].generate_state(1)[0]
        rank, errors = select_rank(
            xw, omega, plan.rank_grid, plan.mask_fraction, seed=wseed,
            tol=plan.tol, max_iter=plan.max_iter,
        )
        init = randomized_svd(_initial_fill(xw, omega.mask), rank, seed=wseed)
        factors, trace = als_complete(
            xw, omega, rank, init, tol=plan.tol, max_iter=plan.max_iter
        )
        completed = factors.product()[study_offset:]
        window_obs = omega.mask[study_offset:]
        cols = slice(clo - lo, chi - lo)
        commit = ~window_obs[:, cols]
        values = np.clip(completed[:, cols][commit], 0.0, 2.0)
        report = WindowReport(
            idx, lo, hi, clo, chi, omega.n_observed, rank,
            len(trace) - 1, errors.get(rank, np.nan),
        )
        return report, commit, values

    from .util import parallel_map

    solved = parallel_map(solve_window, list(enumerate(windows)), threads)
    reports = []
    for report, commit, values in solved:
        reports.append(report)
        if commit is not None:
            target = out[:, report.commit_start : report.commit_stop]
            target[commit] = values

    hard = np.where(np.isnan(out), -1, np.floor(out + 0.5)).astype(np.int64)
    hard = np.where(hard >= 0, np.clip(hard, 0, 2), -1)
    hard_matrix = PackedGenotypeMatrix.from_dosages(
        hard, study.snp_meta, study.subject_meta
    )
    return ImputeResult(out, hard_matrix, reports)

"""Sparsity-constrained multiple regression by iterative hard thresholding.

Minimizes f(beta) = 1/2 ||y - X beta||^2 subject to ||beta||_0 <= k via
projected gradient steps

    beta <- P_k(beta - s * grad),   s = ||g||^2 / ||X g||^2

where P_k keeps the k largest entries by magnitude (or by w_i |beta_i|
when predictor weights are given) untouched and zeroes the rest. By
default the step-length gradient g is restricted to the union of the
current support and the k largest gradient entries (the normalized-IHT
refinement; the unrestricted ray is available via ``restricted_step=False``).
If the projected step raises the loss, the step is halved until descent,
so the accepted-iterate loss trace is non-increasing.

Genotype designs may be packed matrices; they are consumed column-block
by column-block through the packed kernels, standardized with mean
imputation. Intercept and non-genetic covariates stay unpenalized and
outside the projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DataError
from .snpcore import PackedGenotypeMatrix, allele_frequencies, packed_gemv

_MAX_HALVINGS = 50


@dataclass(frozen=True)
class IhtConfig:
    """Knobs for one IHT fit; ``weights`` rank predictors as w_i |beta_i|."""

    k: int
    max_iter: int = 200
    tol: float = 1e-6
    weights: np.ndarray | None = None
    folds: int = 5
    seed: int = 0
    standardize: bool = True
    restricted_step: bool = True
    add_intercept: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ArgumentError(f"sparsity level k must be >= 1, got {self.k}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w <= 0):
                raise ArgumentError("predictor weights must be strictly positive")
            object.__setattr__(self, "weights", w)


@dataclass
class SparseFit:
    beta: np.ndarray            # genotype-predictor coefficients, zero off support
    support: np.ndarray         # sorted indices of the nonzeros
    k: int
    loss_trace: list
    iterations: int
    covar_beta: np.ndarray      # unpenalized covariate coefficients (may be empty)
    converged: bool

    @property
    def loss(self):
        return self.loss_trace[-1]


def project_sparse(beta, k, weights=None):
    """Keep the k largest entries (by |beta| or w|beta|), zero the rest.

    Kept entries are untouched. Ties break toward the lower index.
    """
    beta = np.asarray(beta, dtype=float)
    if k < 0:
        raise ArgumentError(f"k must be >= 0, got {k}")
    if k >= beta.size:
        return beta.copy()
    score = np.abs(beta) if weights is None else np.asarray(weights) * np.abs(beta)
    # lexsort: primary key -score, secondary key index (both ascending)
    order = np.lexsort((np.arange(beta.size), -score))
    out = np.zeros_like(beta)
    keep = order[:k]
    out[keep] = beta[keep]
    return out


class _Design:
    """Uniform matvec interface over dense arrays and packed genotype matrices."""

    def __init__(self, X, standardize):
        if isinstance(X, PackedGenotypeMatrix):
            self.packed = X
            self.freq = allele_frequencies(X)
            self.mode = "standardized" if standardize else "raw"
            self.n, self.p = X.n_subjects, X.n_snps
        else:
            X = np.asarray(X, dtype=float)
            if not np.all(np.isfinite(X)):
                raise DataError("design matrix contains non-finite values")
            if standardize:
                mu = X.mean(axis=0)
                sd = X.std(axis=0)
                sd[sd == 0] = 1.0
                X = (X - mu) / sd
            self.packed = None
            self.dense = X
            self.n, self.p = X.shape

    def matvec(self, beta):
        if self.packed is None:
            return self.dense @ beta
        return packed_gemv(self.packed, beta, mode=self.mode, freq=self.freq)

    def rmatvec(self, r):
        if self.packed is None:
            return self.dense.T @ r
        return packed_gemv(self.packed, r, mode=self.mode, transpose=True, freq=self.freq)

    def materialize(self):
        if self.packed is None:
            return self.dense
        from .snpcore import decompress

        return decompress(self.packed, mode=self.mode, freq=self.freq)


def iht_fit(X, y, cfg: IhtConfig, covariates=None) -> SparseFit:
    """Run IHT on a dense or packed design.

    ``covariates`` (plus an intercept when ``cfg.add_intercept``) are
    unpenalized and excluded from the projection and the sparsity count.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DataError("response contains non-finite values")
    design = _Design(X, cfg.standardize)
    if y.shape != (design.n,):
        raise ArgumentError(f"response has shape {y.shape}, expected ({design.n},)")
    if cfg.weights is not None and cfg.weights.shape != (design.p,):
        raise ArgumentError("weights length does not match predictor count")

    C = _covariate_block(covariates, design.n, cfg.add_intercept)
    n_cov = C.shape[1]

    beta = np.zeros(design.p)
    theta = np.zeros(n_cov)
    fitted = np.zeros(design.n)
    resid = y - fitted
    loss = 0.5 * float(resid @ resid)
    trace = [loss]

    grad_b = -design.rmatvec(resid)
    grad_t = -(C.T @ resid) if n_cov else np.zeros(0)
    if not np.any(grad_b) and not np.any(grad_t):
        return SparseFit(beta, np.array([], dtype=int), cfg.k, trace, 0, theta, True)

    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        # step length from the relevant gradient coordinates
        if cfg.restricted_step:
            active = np.flatnonzero(beta)
            top = project_sparse(grad_b, cfg.k, cfg.weights)
            restrict = np.union1d(active, np.flatnonzero(top))
            g = np.zeros_like(grad_b)
            g[restrict] = grad_b[restrict]
        else:
            g = grad_b
        denom_vec = design.matvec(g) + (C @ grad_t if n_cov else 0.0)
        g_norm2 = float(g @ g) + float(grad_t @ grad_t)
        xg_norm2 = float(denom_vec @ denom_vec)
        if g_norm2 == 0.0 or xg_norm2 == 0.0:
            converged = True
            iterations -= 1
            break
        s = g_norm2 / xg_norm2

        accepted = False
        for _ in range(_MAX_HALVINGS + 1):
            cand_beta = project_sparse(beta - s * grad_b, cfg.k, cfg.weights)
            cand_theta = theta - s * grad_t if n_cov else theta
            cand_fitted = design.matvec(cand_beta) + (C @ cand_theta if n_cov else 0.0)
            cand_resid = y - cand_fitted
            cand_loss = 0.5 * float(cand_resid @ cand_resid)
            if cand_loss <= loss:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            converged = True  # no descent direction at floating-point resolution
            iterations -= 1
            break

        delta = np.max(np.abs(cand_beta - beta)) if beta.size else 0.0
        beta, theta, resid = cand_beta, cand_theta, cand_resid
        prev_loss, loss = loss, cand_loss
        trace.append(loss)
        grad_b = -design.rmatvec(resid)
        grad_t = -(C.T @ resid) if n_cov else grad_t
        if abs(prev_loss - loss) <= cfg.tol * (abs(prev_loss) + 1e-12) or delta < cfg.tol:
            converged = True
            break

    support = np.flatnonzero(beta)
    return SparseFit(beta, support, cfg.k, trace, iterations, theta, converged)


def _covariate_block(covariates, n, add_intercept):
    cols = []
    if add_intercept:
        cols.append(np.ones((n, 1)))
    if covariates is not None:
        C = np.atleast_2d(np.asarray(covariates, dtype=float))
        if C.shape[0] != n:
            C = C.T
        if C.shape[0] != n:
            raise ArgumentError("covariate rows do not match the response length")
        if not np.all(np.isfinite(C)):
            raise DataError("covariates contain non-finite values")
        cols.append(C)
    if not cols:
        return np.zeros((n, 0))
    return np.hstack(cols)


def cross_validate_k(X, y, k_grid, folds=5, seed=0, cfg: IhtConfig | None = None,
                     covariates=None):
    """Choose the sparsity level by k-fold validation MSE.

    Rows are shuffled once with the given seed and split into ``folds``
    contiguous blocks. Ties break toward the smaller k. Returns
    (chosen k, {k: mean validation MSE}).
    """
    y = np.asarray(y, dtype=float)
    k_grid = sorted(set(int(k) for k in k_grid))
    if not k_grid:
        raise ArgumentError("k grid is empty")
    if folds < 2:
        raise ArgumentError(f"need at least 2 folds, got {folds}")
    n = y.shape[0]
    if n < folds:
        raise ArgumentError(f"{folds} folds cannot partition {n} rows")
    if len(k_grid) == 1:
        return k_grid[0], {k_grid[0]: np.nan}

    base = cfg or IhtConfig(k=k_grid[0])
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    fold_idx = np.array_split(perm, folds)

    dense = _Design(X, base.standardize).materialize()
    C = _covariate_block(covariates, n, base.add_intercept)
    full = np.hstack([C, dense]) if C.shape[1] else dense

    mse = {k: 0.0 for k in k_grid}
    for val in fold_idx:
        train = np.setdiff1d(perm, val)
        for k in k_grid:
            cfg_k = IhtConfig(
                k=k, max_iter=base.max_iter, tol=base.tol, weights=base.weights,
                folds=base.folds, seed=base.seed, standardize=False,
                restricted_step=base.restricted_step, add_intercept=False,
            )
            fit = iht_fit(
                dense[train], y[train], cfg_k,
                covariates=C[train] if C.shape[1] else None,
            )
            pred = full[val] @ np.concatenate([fit.covar_beta, fit.beta])
            mse[k] += float(np.mean((y[val] - pred) ** 2))
    mse = {k: v / folds for k, v in mse.items()}
    best = k_grid[0]
    for k in k_grid[1:]:
        if mse[k] < mse[best]:
            best = k
    return best, mse

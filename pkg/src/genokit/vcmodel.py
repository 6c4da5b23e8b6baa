"""Variance component models fitted by an MM algorithm.

The model is y ~ N(X beta, W) with W = sum_j sigma2_j V_j over known PSD
matrices. Each iteration alternates the exact generalized-least-squares
update of beta with the multiplicative variance update

    sigma2_j <- sigma2_j * sqrt( r' W^-1 V_j W^-1 r / tr(W^-1 V_j) )

which majorizes the likelihood, so the log-likelihood trace never
decreases. Updates are multiplicative from positive starts, keeping every
sigma2_j >= 0 by construction; a component whose trace term vanishes is
frozen at zero.

For the two-component polygenic model W = sigma_g^2 Phi + sigma_e^2 I the
spectral path eigendecomposes Phi once and runs the identical iteration in
rotated coordinates where W is diagonal, so each sweep costs O(n p^2)
instead of O(n^3). A bivariate trait version runs the matrix form of the
same updates on Kronecker-structured covariance Sg (x) Phi + Se (x) I.

Penalized selection minimizes -loglik + sum_j P_lambda(sigma_j) (penalty
on the standard-deviation scale) with ridge/lasso/SCAD/MCP penalties; the
surrogate separates per component, and each one-dimensional surrogate is
minimized exactly (closed form where available, otherwise bisection on
the stationarity condition with a surrogate-decrease safeguard). The
identity noise component is never penalized.

Fitting is ML throughout; REML is out of scope.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import brentq
from scipy.stats import chi2

from .errors import ArgumentError, DataError, ModelError, NumericError
from .pedkin import KinshipMatrix

logger = logging.getLogger(__name__)

_LL_SLACK = 1e-9  # relative slack when asserting monotone likelihood


class VcModel:
    """Response, fixed-effect design, and covariance basis matrices.

    Components may be given as square (n, n) covariance matrices or
    non-square (n, r) factors U with V = U U'. PSD is checked by an
    attempted (jittered) Cholesky factorization.
    """

    def __init__(self, y, X, components, labels=None):
        y = np.asarray(y, dtype=float)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = y.shape[0]
        if X.shape[0] != n:
            X = X.T
        if X.shape[0] != n:
            raise ModelError(f"design rows {X.shape} do not match response length {n}")
        if not components:
            raise ModelError("at least one variance component is required")
        mats = []
        for idx, comp in enumerate(components):
            V = np.asarray(comp, dtype=float)
            if V.ndim != 2 or V.shape[0] != n:
                raise ModelError(f"component {idx} has shape {V.shape}, expected ({n}, ...)")
            if V.shape[1] != n:
                V = V @ V.T  # low-rank factor form
            if not np.allclose(V, V.T, atol=1e-8 * max(1.0, np.abs(V).max())):
                raise ModelError(f"component {idx} is not symmetric")
            V = 0.5 * (V + V.T)
            _assert_psd(V, idx)
            mats.append(V)
        self.y = y
        self.X = X
        self.components = mats
        self.labels = tuple(labels) if labels else tuple(f"vc{j + 1}" for j in range(len(mats)))
        if len(self.labels) != len(mats):
            raise ModelError("label count does not match component count")

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def n_components(self):
        return len(self.components)

    def covariance(self, sigma2):
        W = np.zeros((self.n, self.n))
        for s2, V in zip(sigma2, self.components):
            if s2:
                W += s2 * V
        return W


def _assert_psd(V, idx):
    jitter = 1e-10 * max(np.mean(np.diag(V)), 1.0)
    try:
        np.linalg.cholesky(V + jitter * np.eye(V.shape[0]))
    except np.linalg.LinAlgError:
        wmin = float(np.linalg.eigvalsh(V).min())
        if wmin < -1e-8 * max(1.0, np.abs(V).max()):
            raise ModelError(f"component {idx} is not PSD (min eigenvalue {wmin:.3e})")


def _chol(W):
    """Cholesky with one jitter retry, then NumericError."""
    try:
        return cho_factor(W, lower=True)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * max(float(np.mean(np.diag(W))), 1.0)
        try:
            return cho_factor(W + jitter * np.eye(W.shape[0]), lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"covariance factorization failed: {exc}")


@dataclass
class VcEstimate:
    """MM fit result; ``sigma2`` is ordered like the model's components."""

    beta: np.ndarray
    sigma2: np.ndarray
    loglik: float
    loglik_trace: list
    labels: tuple
    n_iter: int
    converged: bool
    excluded: tuple = ()
    spectral: "TwoComponentSpectral | None" = None

    def fitted_covariance(self, model: VcModel):
        return model.covariance(self.sigma2)


def loglik(model: VcModel, beta, sigma2) -> float:
    """Exact multivariate normal log-density at (beta, sigma2)."""
    W = model.covariance(sigma2)
    cho = _chol(W)
    r = model.y - model.X @ np.asarray(beta, dtype=float)
    return _loglik_from_chol(cho, r)


def _loglik_from_chol(cho, r):
    n = r.shape[0]
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    quad = float(r @ cho_solve(cho, r))
    return -0.5 * (n * np.log(2.0 * np.pi) + logdet + quad)


def loglik_gradient_sigma2(model: VcModel, beta, sigma2):
    """d loglik / d sigma2_j = -1/2 [tr(W^-1 V_j) - r' W^-1 V_j W^-1 r]."""
    W = model.covariance(sigma2)
    cho = _chol(W)
    r = model.y - model.X @ np.asarray(beta, dtype=float)
    Winv_r = cho_solve(cho, r)
    Winv = cho_solve(cho, np.eye(model.n))
    out = np.empty(model.n_components)
    for j, V in enumerate(model.components):
        out[j] = -0.5 * (float(np.sum(Winv * V)) - float(Winv_r @ V @ Winv_r))
    return out


def _default_init(y, k):
    total = float(np.var(np.asarray(y)))
    if total <= 0:
        raise DataError("response has zero variance; nothing to decompose")
    return np.full(k, total / k)



def _stalled(sigma2, prev_sigma2):
    """True when the update moved by at most a few ulps (incl. 2-cycles)."""
    return bool(np.all(np.abs(sigma2 - prev_sigma2) <= 4e-16 * np.abs(prev_sigma2)))

def mm_fit(model: VcModel, init_sigma2=None, tol=1e-8, max_iter=1000) -> VcEstimate:
    """Alternate the GLS beta update with the multiplicative sigma2 update.

    Stops when the relative log-likelihood change drops below ``tol``, or
    when sigma2 reaches an exact floating-point fixed point (the only
    stop when ``tol=0``, which drives the parameters to machine accuracy).
    The trace is checked non-decreasing every iteration.
    """
    if np.linalg.matrix_rank(model.X) < model.X.shape[1]:
        raise ModelError("fixed-effect design is rank deficient")
    sigma2 = (
        _default_init(model.y, model.n_components)
        if init_sigma2 is None
        else np.asarray(init_sigma2, dtype=float).copy()
    )
    if np.any(sigma2 <= 0):
        raise ArgumentError("initial variance components must be strictly positive")

    y, X = model.y, model.X
    frozen = np.zeros(model.n_components, dtype=bool)
    cho = _chol(model.covariance(sigma2))
    trace = []
    beta = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Winv_y = cho_solve(cho, y)
        Winv_X = cho_solve(cho, X)
        beta = np.linalg.solve(X.T @ Winv_X, X.T @ Winv_y)
        r = y - X @ beta
        Winv_r = cho_solve(cho, r)
        Winv = cho_solve(cho, np.eye(model.n))
        prev_sigma2 = sigma2.copy()
        for j, V in enumerate(model.components):
            if frozen[j]:
                continue
            A = float(np.sum(Winv * V))
            if A <= 0:
                sigma2[j] = 0.0
                frozen[j] = True
                continue
            B = float(Winv_r @ V @ Winv_r)
            sigma2[j] = sigma2[j] * np.sqrt(B / A)
            if sigma2[j] == 0.0:
                frozen[j] = True
        cho = _chol(model.covariance(sigma2))
        trace.append(_loglik_from_chol(cho, r))
        stalled = _stalled(sigma2, prev_sigma2)
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if cur < prev - _LL_SLACK * (abs(prev) + 1.0):
                raise NumericError(f"mm_fit: log-likelihood fell from {prev} to {cur}")
            if (tol > 0 and abs(cur - prev) <= tol * (abs(prev) + 1.0)) or stalled:
                converged = True
                break
        elif stalled:
            converged = True
            break
    return VcEstimate(beta, sigma2, trace[-1], trace, model.labels, it, converged)


# ---------------------------------------------------------------------------
# Two-component spectral path


@dataclass
class TwoComponentSpectral:
    """One-time eigendecomposition Phi = O D O' plus rotated data."""

    O: np.ndarray
    D: np.ndarray
    y_rot: np.ndarray
    X_rot: np.ndarray

    @classmethod
    def build(cls, y, X, phi):
        phi = phi.values if isinstance(phi, KinshipMatrix) else np.asarray(phi, dtype=float)
        phi = 0.5 * (phi + phi.T)
        d, O = np.linalg.eigh(phi)
        if d.min() < -1e-8:
            raise DataError(
                f"kinship matrix has negative eigenvalue {d.min():.3e} below -1e-8"
            )
        d = np.clip(d, 0.0, None)
        y = np.asarray(y, dtype=float)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] != y.shape[0]:
            X = X.T
        return cls(O, d, O.T @ y, O.T @ X)


def spectral_fit(y, X, phi, init_sigma2=None, tol=1e-8, max_iter=1000,
                 labels=("genetic", "environment")) -> VcEstimate:
    """Two-component fit (sigma_g^2 Phi + sigma_e^2 I) in rotated coordinates.

    Runs the exact mm_fit iteration with diagonal W, so every sweep after
    the one-time eigendecomposition is O(n p^2). A two-column response
    dispatches to the bivariate Kronecker path.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 2 and y.shape[1] == 2:
        return _spectral_fit_bivariate(y, X, phi, tol=tol, max_iter=max_iter, labels=labels)
    if y.ndim != 1:
        raise ModelError("response must be a vector (or an n x 2 matrix for bivariate)")
    spec = TwoComponentSpectral.build(y, X, phi)
    yr, Xr, d = spec.y_rot, spec.X_rot, spec.D
    n = yr.shape[0]
    if np.linalg.matrix_rank(Xr) < Xr.shape[1]:
        raise ModelError("fixed-effect design is rank deficient")
    sigma2 = (
        _default_init(y, 2) if init_sigma2 is None else np.asarray(init_sigma2, dtype=float).copy()
    )
    if np.any(sigma2 <= 0):
        raise ArgumentError("initial variance components must be strictly positive")

    trace = []
    beta = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = sigma2[0] * d + sigma2[1]
        if np.any(w <= 0):
            raise NumericError("rotated covariance lost positivity")
        Xw = Xr / w[:, None]
        beta = np.linalg.solve(Xr.T @ Xw, Xw.T @ yr)
        r = yr - Xr @ beta
        r2w2 = (r / w) ** 2
        A_g = float(np.sum(d / w))
        B_g = float(np.sum(d * r2w2))
        A_e = float(np.sum(1.0 / w))
        B_e = float(np.sum(r2w2))
        prev_sigma2 = sigma2.copy()
        if A_g > 0:
            sigma2[0] *= np.sqrt(B_g / A_g)
        else:
            sigma2[0] = 0.0
        sigma2[1] *= np.sqrt(B_e / A_e)
        w = sigma2[0] * d + sigma2[1]
        ll = -0.5 * (n * np.log(2 * np.pi) + float(np.sum(np.log(w))) + float(np.sum(r**2 / w)))
        trace.append(ll)
        stalled = _stalled(sigma2, prev_sigma2)
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if cur < prev - _LL_SLACK * (abs(prev) + 1.0):
                raise NumericError(f"spectral_fit: log-likelihood fell from {prev} to {cur}")
            if (tol > 0 and abs(cur - prev) <= tol * (abs(prev) + 1.0)) or stalled:
                converged = True
                break
        elif stalled:
            converged = True
            break
    return VcEstimate(
        beta, sigma2, trace[-1], trace, tuple(labels), it, converged, spectral=spec
    )


def heritability(est: VcEstimate, genetic_index=0, env_index=1) -> float:
    """sigma_g^2 / (sigma_g^2 + sigma_e^2); NaN when both are zero."""
    k = len(est.sigma2)
    if not (0 <= genetic_index < k and 0 <= env_index < k):
        raise ArgumentError(f"component indices outside 0..{k - 1}")
    g, e = est.sigma2[genetic_index], est.sigma2[env_index]
    total = g + e
    if total == 0:
        return float("nan")
    return float(g / total)


# ---------------------------------------------------------------------------
# Bivariate Kronecker path


@dataclass
class BivariateVcEstimate:
    B: np.ndarray          # (p, 2) fixed effects per trait
    sigma_g: np.ndarray    # 2x2 genetic covariance
    sigma_e: np.ndarray    # 2x2 environmental covariance
    loglik: float
    loglik_trace: list
    n_iter: int
    converged: bool


def _sym_sqrt(M, inverse=False):
    w, U = np.linalg.eigh(0.5 * (M + M.T))
    w = np.clip(w, 1e-14, None)
    s = w**-0.5 if inverse else w**0.5
    return (U * s) @ U.T


def _spectral_fit_bivariate(Y, X, phi, tol=1e-8, max_iter=1000,
                            labels=("genetic", "environment")):
    """Matrix MM updates for vec(Y) ~ N((I (x) X) vec(B), Sg (x) Phi + Se (x) I)."""
    spec = TwoComponentSpectral.build(Y, X, phi)
    Yr, Xr, d = spec.y_rot, spec.X_rot, spec.D
    n, p = Xr.shape
    var0 = np.var(Y, axis=0)
    Sg = np.diag(var0 / 2.0)
    Se = np.diag(var0 / 2.0)
    B = np.zeros((p, 2))
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # per-row 2x2 covariance Om_i = d_i Sg + Se and its inverse
        om11 = d * Sg[0, 0] + Se[0, 0]
        om12 = d * Sg[0, 1] + Se[0, 1]
        om22 = d * Sg[1, 1] + Se[1, 1]
        det = om11 * om22 - om12**2
        if np.any(det <= 0):
            raise NumericError("bivariate covariance lost positive definiteness")
        i11, i12, i22 = om22 / det, -om12 / det, om11 / det

        # GLS for vec(B): 2x2 block system of p x p blocks
        A11 = Xr.T @ (i11[:, None] * Xr)
        A12 = Xr.T @ (i12[:, None] * Xr)
        A22 = Xr.T @ (i22[:, None] * Xr)
        big = np.block([[A11, A12], [A12, A22]])
        rhs = np.concatenate(
            [
                Xr.T @ (i11 * Yr[:, 0] + i12 * Yr[:, 1]),
                Xr.T @ (i12 * Yr[:, 0] + i22 * Yr[:, 1]),
            ]
        )
        theta = np.linalg.solve(big, rhs)
        B = theta.reshape(2, p).T
        R = Yr - Xr @ B
        u1 = i11 * R[:, 0] + i12 * R[:, 1]  # rows of Om^-1 r
        u2 = i12 * R[:, 0] + i22 * R[:, 1]

        for which in ("g", "e"):
            wgt = d if which == "g" else np.ones(n)
            A = np.array(
                [
                    [float(np.sum(wgt * i11)), float(np.sum(wgt * i12))],
                    [float(np.sum(wgt * i12)), float(np.sum(wgt * i22))],
                ]
            )
            Bq = np.array(
                [
                    [float(np.sum(wgt * u1 * u1)), float(np.sum(wgt * u1 * u2))],
                    [float(np.sum(wgt * u1 * u2)), float(np.sum(wgt * u2 * u2))],
                ]
            )
            S = Sg if which == "g" else Se
            C = S @ Bq @ S
            A_h = _sym_sqrt(A)
            A_hi = _sym_sqrt(A, inverse=True)
            S_new = A_hi @ _sym_sqrt(A_h @ C @ A_h) @ A_hi
            if which == "g":
                Sg = 0.5 * (S_new + S_new.T)
            else:
                Se = 0.5 * (S_new + S_new.T)

        om11 = d * Sg[0, 0] + Se[0, 0]
        om12 = d * Sg[0, 1] + Se[0, 1]
        om22 = d * Sg[1, 1] + Se[1, 1]
        det = om11 * om22 - om12**2
        i11, i12, i22 = om22 / det, -om12 / det, om11 / det
        quad = float(
            np.sum(R[:, 0] ** 2 * i11 + 2 * R[:, 0] * R[:, 1] * i12 + R[:, 1] ** 2 * i22)
        )
        ll = -0.5 * (2 * n * np.log(2 * np.pi) + float(np.sum(np.log(det))) + quad)
        trace.append(ll)
        if len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if cur < prev - _LL_SLACK * (abs(prev) + 1.0):
                raise NumericError(f"bivariate fit: log-likelihood fell from {prev} to {cur}")
            if abs(cur - prev) <= tol * (abs(prev) + 1.0):
                converged = True
                break
    return BivariateVcEstimate(B, Sg, Se, trace[-1], trace, it, converged)


# ---------------------------------------------------------------------------
# Tests: score and likelihood ratio


@dataclass(frozen=True)
class ScoreTestResult:
    statistic: float
    p_value: float
    degenerate: bool = False


class ScoreTestEngine:
    """Per-SNP score tests against one fitted null model.

    Precomputes everything that does not depend on the candidate vector,
    so each test costs one rotation plus O(n) arithmetic. Works from a
    spectral cache when the null fit has one, otherwise from the dense
    model covariance.
    """

    def __init__(self, null_fit: VcEstimate, model: VcModel | None = None):
        if null_fit.spectral is not None:
            spec = null_fit.spectral
            self._rot = spec.O
            w = null_fit.sigma2[0] * spec.D + null_fit.sigma2[1]
            if np.any(w <= 0):
                raise NumericError("null covariance is singular in rotated coordinates")
            self._winv = 1.0 / w
            X = spec.X_rot
            r = spec.y_rot - X @ null_fit.beta
            self._Winv_X = X * self._winv[:, None]
            self._Winv_r = r * self._winv
            self._xtwx_cho = cho_factor(X.T @ self._Winv_X)
            self._X = X
        else:
            if model is None:
                raise ArgumentError("a dense null fit needs the model for the score test")
            W = model.covariance(null_fit.sigma2)
            cho = _chol(W)
            X = model.X
            r = model.y - X @ null_fit.beta
            self._rot = None
            self._Winv_X = cho_solve(cho, X)
            self._Winv_r = cho_solve(cho, r)
            self._cho = cho
            self._xtwx_cho = cho_factor(X.T @ self._Winv_X)
            self._X = X

    def test(self, g) -> ScoreTestResult:
        g = np.asarray(g, dtype=float)
        if self._rot is not None:
            g = self._rot.T @ g
            Winv_g = g * self._winv
        else:
            Winv_g = cho_solve(self._cho, g)
        U = float(g @ self._Winv_r)
        xg = self._X.T @ Winv_g
        vs = float(g @ Winv_g) - float(xg @ cho_solve(self._xtwx_cho, xg))
        if vs <= 1e-12 * max(1.0, float(g @ Winv_g)):
            return ScoreTestResult(0.0, 1.0, degenerate=True)
        stat = U * U / vs
        return ScoreTestResult(stat, float(chi2.sf(stat, 1)), False)


def score_test(null_fit: VcEstimate, model: VcModel | None, g) -> ScoreTestResult:
    """Score test of one candidate predictor against a fitted null.

    The null variance estimates are held fixed (not re-estimated per
    candidate). ``g`` should be standardized with missing values
    mean-imputed. Degenerate candidates (in the span of X under the
    W^-1 metric) return p = 1 with a flag rather than an error.
    """
    return ScoreTestEngine(null_fit, model).test(g)


@dataclass(frozen=True)
class LrtResult:
    statistic: float
    p_value: float
    kind: str  # "fixed" or "boundary"
    df: int


def lrt(null_fit, alt_fit) -> LrtResult:
    """Likelihood ratio test between nested fits.

    Same component labels: a fixed-effect test on chi^2 with df equal to
    the parameter difference. One extra variance component: the boundary
    case, p = 0.5 P(chi^2_1 > T) (so T = 0 gives p = 0.5). Anything else
    is not nested.
    """
    if not (null_fit.converged and alt_fit.converged):
        raise ArgumentError("both fits must have converged before an LRT")
    stat = max(0.0, 2.0 * (alt_fit.loglik - null_fit.loglik))
    null_labels, alt_labels = set(null_fit.labels), set(alt_fit.labels)
    if null_fit.labels == alt_fit.labels:
        df = len(np.atleast_1d(alt_fit.beta)) - len(np.atleast_1d(null_fit.beta))
        if df < 0:
            raise ArgumentError("alternative has fewer fixed effects than the null")
        p = float(chi2.sf(stat, df)) if df > 0 else 1.0
        return LrtResult(stat, p, "fixed", df)
    if null_labels < alt_labels and len(np.atleast_1d(null_fit.beta)) == len(
        np.atleast_1d(alt_fit.beta)
    ):
        extra = alt_labels - null_labels
        if len(extra) != 1:
            raise ArgumentError(
                f"boundary LRT handles one extra component, got {sorted(extra)}"
            )
        p = 0.5 * float(chi2.sf(stat, 1))
        return LrtResult(stat, p, "boundary", 1)
    raise ArgumentError(
        f"models are not nested: components {sorted(null_labels)} vs {sorted(alt_labels)}"
    )


# ---------------------------------------------------------------------------
# Penalized variance-component selection

_PENALTIES = ("ridge", "lasso", "scad", "mcp")


def _pen_value(kind, t, lam, a):
    if kind == "ridge":
        return lam * t * t
    if kind == "lasso":
        return lam * t
    if kind == "scad":
        if t <= lam:
            return lam * t
        if t <= a * lam:
            return (2 * a * lam * t - t * t - lam * lam) / (2 * (a - 1))
        return lam * lam * (a + 1) / 2
    if kind == "mcp":
        if t <= a * lam:
            return lam * t - t * t / (2 * a)
        return a * lam * lam / 2
    raise ArgumentError(f"unknown penalty {kind!r}; expected one of {_PENALTIES}")


def _pen_deriv(kind, t, lam, a):
    if kind == "ridge":
        return 2 * lam * t
    if kind == "lasso":
        return lam
    if kind == "scad":
        if t <= lam:
            return lam
        if t <= a * lam:
            return (a * lam - t) / (a - 1)
        return 0.0
    if kind == "mcp":
        return max(lam - t / a, 0.0) if t <= a * lam else 0.0
    raise ArgumentError(f"unknown penalty {kind!r}")


def _surrogate_min(A, Bq, t_old, kind, lam, a):
    """Minimize 0.5 A t^2 + 0.5 Bq t_old^4 / t^2 + P(t) over t >= 0."""
    c = Bq * t_old**4
    if lam == 0.0:
        return t_old * (Bq / A) ** 0.25 if A > 0 else t_old
    if c == 0.0:
        return 0.0  # every penalty is nondecreasing, so 0 is optimal
    if kind == "ridge":
        return (c / (A + 2 * lam)) ** 0.25

    def h(t):
        return 0.5 * A * t * t + 0.5 * c / (t * t) + _pen_value(kind, t, lam, a)

    def psi(t):
        return A * t - c / t**3 + _pen_deriv(kind, t, lam, a)

    hi = max(t_old, (c / max(A, 1e-300)) ** 0.25, 1.0)
    for _ in range(200):
        if psi(hi) > 0:
            break
        hi *= 2.0
    else:
        return t_old
    # -c/t^3 always wins for small enough t, but "small enough" shrinks
    # with c, so walk the lower bracket down instead of fixing it
    lo = min(t_old if t_old > 0 else 1.0, hi / 2.0)
    for _ in range(400):
        if psi(lo) < 0:
            break
        lo /= 10.0
        if lo < 1e-200:
            return 0.0  # minimizer indistinguishable from zero
    else:
        return 0.0
    root = brentq(psi, lo, hi, xtol=1e-14, rtol=1e-12)
    # non-convex penalties can have several stationary points
    return root if h(root) <= h(t_old) else t_old


def find_identity_component(model: VcModel):
    """Index of the identity (noise) component, or None."""
    eye = np.eye(model.n)
    for j, V in enumerate(model.components):
        if np.array_equal(V, eye):
            return j
    return None


def penalized_fit(model: VcModel, penalty, lam, penalty_params=None, init_sigma2=None,
                  tol=1e-8, max_iter=1000, unpenalized=None) -> VcEstimate:
    """Variance-component selection by penalized ML.

    The objective -loglik + sum_j P_lambda(sigma_j) (sigma on the sd
    scale) decreases every iteration. ``unpenalized`` names the noise
    component index; by default the identity component is detected.
    Components fitted below sd 1e-8 are reported in ``excluded``.
    At lam = 0 the iteration is exactly mm_fit.
    """
    if penalty not in _PENALTIES:
        raise ArgumentError(f"unknown penalty {penalty!r}; expected one of {_PENALTIES}")
    if lam < 0:
        raise ArgumentError(f"penalty weight must be >= 0, got {lam}")
    params = penalty_params or {}
    a = float(params.get("a", 3.7)) if penalty == "scad" else float(params.get("gamma", 2.0))
    if penalty == "scad" and a <= 2:
        raise ArgumentError("SCAD needs a > 2")
    if penalty == "mcp" and a <= 0:
        raise ArgumentError("MCP needs gamma > 0")
    if unpenalized is None:
        unpenalized = find_identity_component(model)
        if unpenalized is None:
            raise ModelError(
                "no identity noise component found; pass unpenalized=<index>"
            )
    if np.linalg.matrix_rank(model.X) < model.X.shape[1]:
        raise ModelError("fixed-effect design is rank deficient")

    sigma2 = (
        _default_init(model.y, model.n_components)
        if init_sigma2 is None
        else np.asarray(init_sigma2, dtype=float).copy()
    )
    if np.any(sigma2 <= 0):
        raise ArgumentError("initial variance components must be strictly positive")
    y, X = model.y, model.X
    frozen = np.zeros(model.n_components, dtype=bool)

    def objective(cho_, r_):
        pen = sum(
            _pen_value(penalty, np.sqrt(sigma2[j]), lam, a)
            for j in range(model.n_components)
            if j != unpenalized
        )
        return -_loglik_from_chol(cho_, r_) + pen

    cho = _chol(model.covariance(sigma2))
    trace = []
    obj_trace = []
    beta = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Winv_y = cho_solve(cho, y)
        Winv_X = cho_solve(cho, X)
        beta = np.linalg.solve(X.T @ Winv_X, X.T @ Winv_y)
        r = y - X @ beta
        Winv_r = cho_solve(cho, r)
        Winv = cho_solve(cho, np.eye(model.n))
        prev_sigma2 = sigma2.copy()
        for j, V in enumerate(model.components):
            if frozen[j]:
                continue
            A = float(np.sum(Winv * V))
            B = float(Winv_r @ V @ Winv_r)
            if A <= 0:
                sigma2[j] = 0.0
                frozen[j] = True
                continue
            if j == unpenalized or lam == 0.0:
                sigma2[j] = sigma2[j] * np.sqrt(B / A)
            else:
                t_new = _surrogate_min(A, B, np.sqrt(sigma2[j]), penalty, lam, a)
                sigma2[j] = t_new * t_new
            if sigma2[j] == 0.0:
                frozen[j] = True
        cho = _chol(model.covariance(sigma2))
        trace.append(_loglik_from_chol(cho, r))
        obj_trace.append(objective(cho, r))
        stalled = _stalled(sigma2, prev_sigma2)
        if len(obj_trace) >= 2:
            prev, cur = obj_trace[-2], obj_trace[-1]
            if cur > prev + _LL_SLACK * (abs(prev) + 1.0):
                raise NumericError(f"penalized_fit: objective rose from {prev} to {cur}")
            if (tol > 0 and abs(cur - prev) <= tol * (abs(prev) + 1.0)) or stalled:
                converged = True
                break
        elif stalled:
            converged = True
            break
    excluded = tuple(
        model.labels[j]
        for j in range(model.n_components)
        if j != unpenalized and np.sqrt(sigma2[j]) < 1e-8
    )
    return VcEstimate(beta, sigma2, trace[-1], trace, model.labels, it, converged, excluded)

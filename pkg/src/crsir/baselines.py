"""Benchmark forecasters: direct AR(4) and a five-factor diffusion index."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LengthMismatch, RankDeficient, TooShort
from .numerics import correlation, standardize, sym_eigen

N_LAGS = 4
MIN_ROWS = 30


@dataclass(frozen=True)
class LinearForecaster:
    """Intercept-first coefficients plus a note on what the regressors are."""

    coefficients: np.ndarray
    design_spec: str = ""
    rank_deficient: bool = False

    def predict(self, design):
        design = np.atleast_2d(np.asarray(design, dtype=float))
        return self.coefficients[0] + design @ self.coefficients[1:]


def _with_intercept(design, n):
    design = np.asarray(design, dtype=float)
    if design.size == 0:
        return np.ones((n, 1))
    if design.ndim == 1:
        design = design[:, None]
    return np.column_stack([np.ones(n), design])


def ols(design, target, design_spec=""):
    """Least squares with an intercept prepended to ``design``.

    Raises ``RankDeficient`` unless the augmented design has full column
    rank (which needs at least as many rows as coefficients).
    """
    y = np.asarray(target, dtype=float).ravel()
    A = _with_intercept(design, y.shape[0])
    if A.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{A.shape[0]} design rows but {y.shape[0]} targets")
    n, k = A.shape
    if n < k:
        raise RankDeficient(f"{n} rows for {k} coefficients")
    if np.linalg.matrix_rank(A) < k:
        raise RankDeficient("design does not have full column rank")
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    return LinearForecaster(coef, design_spec)


def lag_design(y, h, n_lags=N_LAGS):
    """Direct h-step regression layout for series ``y``.

    Row ``t`` of the design is ``(y_t, y_{t-1}, ..., y_{t-n_lags+1})`` with
    target ``y_{t+h}``, for every ``t`` where both exist. Also returns the
    lag vector at the final observation and the row positions ``t``.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    rows = np.arange(n_lags - 1, n - h)
    design = np.column_stack([y[rows - j] for j in range(n_lags)]) if rows.size else np.empty((0, n_lags))
    target = y[rows + h]
    last = y[n - 1 - np.arange(n_lags)]
    return design, target, last, rows


def _estimable(A, row, tol=1e-8):
    # the forecast is unique iff the evaluation row lies in the row space
    proj = row @ np.linalg.pinv(A) @ A
    return np.linalg.norm(row - proj) <= tol * max(1.0, np.linalg.norm(row))


def fit_direct(design, target, last, design_spec):
    """Least-squares fit with a deterministic fallback.

    A rank-deficient design still gives a unique forecast when the final
    regressor row lies in the row space of the design; the minimum-norm
    solution is used then. Otherwise the target mean is used. Either way the
    returned forecaster is flagged ``rank_deficient``.
    """
    try:
        model = ols(design, target, design_spec)
        return model, float(model.predict(last)[0])
    except RankDeficient:
        pass
    A = _with_intercept(design, target.shape[0])
    row = np.concatenate([[1.0], np.atleast_1d(last)])
    if _estimable(A, row):
        coef = np.linalg.lstsq(A, target, rcond=None)[0]
    else:
        coef = np.zeros(A.shape[1])
        coef[0] = target.mean()
    model = LinearForecaster(coef, design_spec, rank_deficient=True)
    return model, float(row @ coef)


def ar4_fit(y, h, min_rows=MIN_ROWS):
    design, target, last, _ = lag_design(y, h)
    if target.shape[0] < min_rows:
        raise TooShort(f"{target.shape[0]} usable rows, need {min_rows}")
    return fit_direct(design, target, last, f"AR({N_LAGS}) direct, h={h}")


def ar4_forecast(y, h, min_rows=MIN_ROWS):
    """Direct h-step forecast from an intercept and four own lags."""
    return ar4_fit(y, h, min_rows)[1]


def pca_factors(X, r, return_loadings=False):
    """Scores on the leading ``r`` eigenvectors of the correlation matrix.

    ``X`` is assumed standardized. Loadings are signed so that the entry of
    largest magnitude is positive.
    """
    X = np.asarray(X, dtype=float)
    T, N = X.shape
    if not 1 <= r <= min(T, N):
        raise DomainError(f"number of factors must be in [1, {min(T, N)}], got {r}")
    eig = sym_eigen(correlation(X))
    V = eig.eigenvectors[:, :r]
    scores = X @ V
    if return_loadings:
        return scores, V, eig.eigenvalues
    return scores


def dfm5_fit(X, y, h, r=5, min_rows=MIN_ROWS):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{X.shape[0]} predictor rows but {y.shape[0]} responses")
    if X.shape[1] < r:
        raise DomainError(f"need at least {r} predictors, got {X.shape[1]}")
    lags, target, last_lags, rows = lag_design(y, h)
    if target.shape[0] < min_rows:
        raise TooShort(f"{target.shape[0]} usable rows, need {min_rows}")
    Z, _ = standardize(X)
    F = pca_factors(Z, r)
    design = np.column_stack([lags, F[rows]])
    last = np.concatenate([last_lags, F[-1]])
    return fit_direct(design, target, last, f"AR({N_LAGS}) + {r} PCA factors direct, h={h}")


def dfm5_forecast(X, y, h, r=5, min_rows=MIN_ROWS):
    """Direct forecast from own lags plus ``r`` principal-component factors
    taken at the forecast origin."""
    return dfm5_fit(X, y, h, r, min_rows)[1]

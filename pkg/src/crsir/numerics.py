"""Dense linear algebra and small statistical helpers.

All routines take and return plain ``numpy`` arrays; rows are observations
and columns are variables throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import (
    ConstantColumn,
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    NotPositiveDefinite,
    RankZero,
)

RANK_TOL = 1e-8
PD_TOL = 1e-12


@dataclass(frozen=True)
class DataMatrix:
    """T-by-N observations with one name per column."""

    values: np.ndarray
    column_names: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d array, got shape {values.shape}")
        T, N = values.shape
        if T < 2 or N < 1:
            raise DimensionMismatch(f"need T >= 2 and N >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("data matrix contains non-finite entries")
        names = tuple(self.column_names) or tuple(f"x{j}" for j in range(N))
        if len(names) != N:
            raise DimensionMismatch(f"{len(names)} column names for {N} columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)

    @property
    def shape(self):
        return self.values.shape

    def index(self, name):
        try:
            return self.column_names.index(name)
        except ValueError:
            raise DomainError(f"unknown series {name!r}") from None

    def column(self, name):
        return self.values[:, self.index(name)]

    def select(self, names: Sequence[str]) -> "DataMatrix":
        idx = [self.index(n) for n in names]
        return DataMatrix(self.values[:, idx], tuple(names))


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    sd: np.ndarray

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        one_row = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mean.shape[0]} columns, got {X.shape[1]}"
            )
        Z = (X - self.mean) / self.sd
        return Z[0] if one_row else Z


@dataclass(frozen=True)
class EigenResult:
    """Eigenpairs sorted by decreasing eigenvalue; column k of
    ``eigenvectors`` belongs to ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_matrix(X):
    if isinstance(X, DataMatrix):
        return X.values
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def standardize(X):
    """Center each column and scale it to unit sample variance.

    Returns the standardized matrix and the parameters needed to map new
    observations the same way. Raises ``ConstantColumn`` on a column with
    zero spread.
    """
    X = _as_matrix(X)
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    for j, s in enumerate(sd):
        if not s > 0:
            raise ConstantColumn(j)
    params = StandardizationParams(mean=mean, sd=sd)
    return (X - mean) / sd, params


def covariance(X):
    """Unbiased sample covariance (divisor T - 1)."""
    X = _as_matrix(X)
    T = X.shape[0]
    if T < 2:
        raise DimensionMismatch("covariance needs at least two observations")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / (T - 1)
    return (S + S.T) / 2


def correlation(X):
    S = covariance(X)
    sd = np.sqrt(np.diag(S))
    for j, s in enumerate(sd):
        if not s > 0:
            raise ConstantColumn(j)
    R = S / np.outer(sd, sd)
    R = (R + R.T) / 2
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


def regularize_covariance(S, tau):
    """Shrink ``S`` toward a multiple of the identity with the same trace.

    ``(1 - tau) * S + tau * (tr(S) / n) * I``; ``tau = 1`` gives the
    diagonal matrix holding the mean eigenvalue.
    """
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"shrinkage tau must lie in [0, 1], got {tau}")
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    target = np.trace(S) / n
    if tau == 1.0:
        return target * np.eye(n)
    out = (1.0 - tau) * S
    out[np.diag_indices(n)] += tau * target
    return out


def qr_orthonormal_basis(X, tol=RANK_TOL):
    """Orthonormal basis for the column space of ``X``.

    Modified Gram-Schmidt with one reorthogonalization pass. A column whose
    norm after projection falls below ``tol`` times the largest column norm
    is dropped, so the basis can be narrower than ``X``.
    """
    X = _as_matrix(X)
    norms = np.linalg.norm(X, axis=0)
    lead = norms.max() if norms.size else 0.0
    if not lead > 0:
        raise RankZero("all columns are zero")
    cutoff = tol * lead
    basis = []
    for j in range(X.shape[1]):
        v = X[:, j].copy()
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        nv = np.linalg.norm(v)
        if nv < cutoff:
            continue
        basis.append(v / nv)
    if not basis:
        raise RankZero("no column exceeds the rank tolerance")
    return np.column_stack(basis)


def _fix_signs(V):
    # largest-magnitude entry of each eigenvector made positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eigen(S):
    S = np.asarray(S, dtype=float)
    S = (S + S.T) / 2
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(w, kind="stable")[::-1]
    return EigenResult(w[order], _fix_signs(V[:, order]))


def inverse_sqrt(B):
    """Symmetric ``B^{-1/2}``; raises ``NotPositiveDefinite`` when ``B`` is
    numerically singular."""
    eig = sym_eigen(B)
    w, V = eig.eigenvalues, eig.eigenvectors
    if not (w[0] > 0 and w[-1] > PD_TOL * w[0]):
        raise NotPositiveDefinite(
            f"smallest eigenvalue {w[-1]:.3g} vs largest {w[0]:.3g}"
        )
    W = (V / np.sqrt(w)) @ V.T
    return (W + W.T) / 2


def generalized_eigen(A, B):
    """Solve ``A b = nu B b`` for symmetric ``A`` and positive definite ``B``.

    Works in whitened coordinates ``B^{-1/2} A B^{-1/2}`` so the eigenvalues
    are real; returned vectors satisfy ``b' B b = 1``.
    """
    A = np.asarray(A, dtype=float)
    W = inverse_sqrt(B)
    C = W @ A @ W
    inner = sym_eigen(C)
    return EigenResult(inner.eigenvalues, W @ inner.eigenvectors)


def chi_square_sf(x, df):
    """Upper tail P(chi2_df > x) via the regularized incomplete gamma."""
    if df < 1 or int(df) != df:
        raise DomainError(f"degrees of freedom must be a positive integer, got {df}")
    if x < 0:
        raise DomainError(f"chi-square statistic must be >= 0, got {x}")
    return float(special.gammaincc(df / 2.0, x / 2.0))

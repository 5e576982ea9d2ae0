"""Regularized sliced inverse regression, one pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LengthMismatch, TooFewObservations
from .numerics import chi_square_sf, covariance, generalized_eigen, regularize_covariance


@dataclass(frozen=True)
class SliceSpec:
    """Equal-count slicing of a response.

    ``membership[i]`` is the slice of observation ``i``; ``boundaries`` holds
    the largest response value of every slice but the last.
    """

    boundaries: np.ndarray
    membership: np.ndarray
    proportions: np.ndarray

    @property
    def n_slices(self):
        return len(self.proportions)


@dataclass(frozen=True)
class EdrBasis:
    directions: np.ndarray
    eigenvalues: np.ndarray
    k: int
    all_directions: np.ndarray

    def variates(self, X):
        return np.asarray(X, dtype=float) @ self.directions


def default_slices(T):
    return max(2, min(10, T // 4))


def make_slices(y, H):
    """Sort ``y`` (stable, so ties keep index order) and cut into ``H``
    contiguous groups whose sizes differ by at most one.

    A constant response carries no slicing information and yields a single
    slice.
    """
    y = np.asarray(y, dtype=float).ravel()
    T = y.shape[0]
    if H < 1:
        raise DomainError(f"number of slices must be positive, got {H}")
    if T < 2 * H:
        raise TooFewObservations(f"{T} observations cannot fill {H} slices of two")
    membership = np.zeros(T, dtype=int)
    if np.ptp(y) == 0:
        return SliceSpec(np.empty(0), membership, np.ones(1))
    order = np.argsort(y, kind="stable")
    groups = np.array_split(order, H)
    for h, g in enumerate(groups):
        membership[g] = h
    counts = np.array([len(g) for g in groups], dtype=float)
    boundaries = np.array([y[g[-1]] for g in groups[:-1]])
    return SliceSpec(boundaries, membership, counts / T)


def slice_mean_covariance(X, slices):
    """Between-slice covariance ``sum_h p_h m_h m_h'`` of centered ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != slices.membership.shape[0]:
        raise LengthMismatch("slice membership does not match the number of rows")
    H = slices.n_slices
    sums = np.eye(H)[slices.membership].T @ X
    counts = np.bincount(slices.membership, minlength=H)
    means = sums / counts[:, None]
    M = (means * slices.proportions[:, None]).T @ means
    return (M + M.T) / 2


def select_dimension(eigenvalues, T, p, H, alpha=0.05):
    """Number of directions kept by the sequential chi-square test.

    For k = 0, 1, ... the statistic ``T * sum(nu[k:])`` is referred to a
    chi-square with ``(p - k)(H - k - 1)`` degrees of freedom; the first k
    at which it is not significant is returned (but never less than one).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"significance level must lie in (0, 1), got {alpha}")
    nu = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    L = len(nu)
    for k in range(L):
        df = (p - k) * (H - k - 1)
        stat = T * nu[k:].sum()
        if chi_square_sf(stat, df) >= alpha:
            return max(k, 1)
    return max(L, 1)


def sir_fit(X, y, H=None, tau=0.0, alpha=0.05):
    """Estimate effective dimension-reduction directions of ``y`` on ``X``.

    Solves ``Cov(E[x|y]) b = nu * Sigma(tau) b`` where ``Sigma(tau)`` is the
    shrunk sample covariance. All ``min(p, H - 1)`` eigenpairs are kept;
    ``directions`` holds the leading ``k`` picked by ``select_dimension``.
    Each direction is signed so its variate covaries non-negatively with
    ``y``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    T, p = X.shape
    if y.shape[0] != T:
        raise LengthMismatch(f"{T} rows in X but {y.shape[0]} responses")
    if H is None:
        H = default_slices(T)
    slices = make_slices(y, H)
    Xc = X - X.mean(axis=0)
    S = regularize_covariance(covariance(Xc), tau)
    M = slice_mean_covariance(Xc, slices)
    eig = generalized_eigen(M, S)
    L = min(p, H - 1)
    nu = eig.eigenvalues[:L]
    B = eig.eigenvectors[:, :L].copy()
    yc = y - y.mean()
    cov_y = (Xc @ B).T @ yc
    B[:, cov_y < 0] *= -1.0
    k = select_dimension(nu, T, p, H, alpha)
    return EdrBasis(directions=B[:, :k], eigenvalues=nu, k=k, all_directions=B)

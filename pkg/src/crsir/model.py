"""Cluster-based regularized SIR: the full fitting pipeline.

Fitting runs, in order: standardize, cluster the predictors on
``1 - |corr|``, orthogonalize the clusters against each other, run a
regularized SIR inside every cluster, stack the cluster directions into a
block-sparse loading matrix ``Lambda``, run a second regularized SIR on the
pooled variates to get ``Gamma``, and regress ``y`` on the final variates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import ols
from .clustering import (
    ClusterAssignment,
    cluster_variables,
    complete_linkage,
    cut_merges,
    dissimilarity_matrix,
)
from .errors import CrsirError, DimensionMismatch, DomainError, LengthMismatch, RankDeficient, SingularHead
from .numerics import StandardizationParams, correlation, qr_orthonormal_basis, standardize
from .sir import default_slices, sir_fit

FORMAT_NAME = "crsir-model"
FORMAT_VERSION = 1
DEGENERATE_TOL = 1e-8


@dataclass(frozen=True)
class OrthogonalizedBlocks:
    """Clusters after sequential projection, in processing order.

    ``projectors[i]`` is the orthonormal basis of everything processed before
    block ``i`` (``None`` for the first block). ``mixing`` is the N-by-N
    matrix with ``X @ mixing`` equal to the orthogonalized data in the
    original column order, which lets new rows be replayed.
    """

    blocks: list
    indices: list
    projectors: list
    degenerate: list
    mixing: np.ndarray

    def assemble(self, n_rows):
        N = self.mixing.shape[0]
        out = np.zeros((n_rows, N))
        for idx, block in zip(self.indices, self.blocks):
            out[:, idx] = block
        return out


def orthogonalize_blocks(X, assignment):
    X = np.asarray(X, dtype=float)
    T, N = X.shape
    mixing = np.zeros((N, N))
    blocks, indices, projectors, degenerate = [], [], [], []
    Q = np.zeros((T, 0))
    done = []
    for idx in assignment.blocks():
        Xi = X[:, idx]
        if Q.shape[1]:
            # projected twice so rounding does not leak across blocks
            Xs = Xi - Q @ (Q.T @ Xi)
            Xs -= Q @ (Q.T @ Xs)
        else:
            Xs = Xi.copy()
        pre = np.linalg.norm(Xi, axis=0)
        post = np.linalg.norm(Xs, axis=0)
        deg = post < DEGENERATE_TOL * pre
        Xs[:, deg] = 0.0

        keep = idx[~deg]
        mixing[keep, keep] = 1.0
        if done and keep.size:
            prev = np.concatenate(done)
            coef = np.linalg.lstsq(X[:, prev], Xi[:, ~deg] - Xs[:, ~deg], rcond=None)[0]
            mixing[np.ix_(prev, keep)] = -coef

        blocks.append(Xs)
        indices.append(idx)
        projectors.append(Q.copy() if Q.shape[1] else None)
        degenerate.append(deg)
        if keep.size:
            Q = np.hstack([Q, qr_orthonormal_basis(Xs[:, ~deg], tol=1e-12)])
        done.append(idx)
    return OrthogonalizedBlocks(blocks, indices, projectors, degenerate, mixing)


@dataclass(frozen=True)
class CrsirModel:
    standardization: StandardizationParams
    assignment: ClusterAssignment
    orthogonalizer: np.ndarray
    Lambda: np.ndarray
    Gamma: np.ndarray
    intercept: float
    slopes: np.ndarray
    tau: float
    c: int
    H: int
    alpha: float = 0.05
    block_dims: tuple = ()
    eigenvalues: np.ndarray = field(default_factory=lambda: np.empty(0))
    feature_names: tuple = ()

    @property
    def n_features(self):
        return self.Lambda.shape[0]

    @property
    def m(self):
        return self.Lambda.shape[1]

    @property
    def v(self):
        return self.Gamma.shape[1]

    def loadings(self):
        """Composite map from standardized x to the final variates."""
        return self.orthogonalizer @ self.Lambda @ self.Gamma

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        one_row = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} columns, got {X.shape[1]}")
        Z = self.standardization.apply(X)
        F = ((Z @ self.orthogonalizer) @ self.Lambda) @ self.Gamma
        return F[0] if one_row else F

    def predict(self, X):
        F = self.transform(X)
        return self.intercept + F @ self.slopes

    def to_dict(self):
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "standardization": {
                "mean": self.standardization.mean.tolist(),
                "sd": self.standardization.sd.tolist(),
            },
            "assignment": {
                "labels": self.assignment.labels.tolist(),
                "order": list(self.assignment.order),
            },
            "orthogonalizer": self.orthogonalizer.tolist(),
            "Lambda": self.Lambda.tolist(),
            "Gamma": self.Gamma.tolist(),
            "head": {"intercept": self.intercept, "slopes": self.slopes.tolist()},
            "tau": self.tau,
            "c": self.c,
            "H": self.H,
            "alpha": self.alpha,
            "block_dims": list(self.block_dims),
            "eigenvalues": self.eigenvalues.tolist(),
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != FORMAT_NAME:
            raise DomainError(f"not a {FORMAT_NAME} artifact")
        if d.get("version") != FORMAT_VERSION:
            raise DomainError(f"unsupported model version {d.get('version')}")
        N = len(d["standardization"]["mean"])
        Lambda = np.array(d["Lambda"], dtype=float).reshape(N, -1)
        return cls(
            standardization=StandardizationParams(
                np.array(d["standardization"]["mean"], dtype=float),
                np.array(d["standardization"]["sd"], dtype=float),
            ),
            assignment=ClusterAssignment(
                np.array(d["assignment"]["labels"], dtype=int), tuple(d["assignment"]["order"])
            ),
            orthogonalizer=np.array(d["orthogonalizer"], dtype=float).reshape(N, N),
            Lambda=Lambda,
            Gamma=np.array(d["Gamma"], dtype=float).reshape(Lambda.shape[1], -1),
            intercept=float(d["head"]["intercept"]),
            slopes=np.array(d["head"]["slopes"], dtype=float),
            tau=float(d["tau"]),
            c=int(d["c"]),
            H=int(d["H"]),
            alpha=float(d["alpha"]),
            block_dims=tuple(d["block_dims"]),
            eigenvalues=np.array(d["eigenvalues"], dtype=float),
            feature_names=tuple(d.get("feature_names", ())),
        )


def save_model(model, path):
    Path(path).write_text(json.dumps(model.to_dict(), indent=1))


def load_model(path):
    return CrsirModel.from_dict(json.loads(Path(path).read_text()))


def _fit_head(F, y):
    """OLS of y on [1, F], dropping trailing variates until the design has
    full column rank."""
    for v in range(F.shape[1], -1, -1):
        try:
            head = ols(F[:, :v], y)
        except RankDeficient:
            continue
        return head, v
    raise SingularHead("intercept-only head is singular")


def _fit_stages(Z, params, assignment, ob, y, c, tau, H, alpha):
    T, N = Z.shape
    columns, dims = [], []
    for idx, block, deg in zip(ob.indices, ob.blocks, ob.degenerate):
        usable = idx[~deg]
        if usable.size == 0:
            dims.append(0)
            continue
        if idx.size == 1:
            theta = np.ones((1, 1))
        else:
            theta = sir_fit(block[:, ~deg], y, H, tau, alpha).directions
        lam = np.zeros((N, theta.shape[1]))
        lam[usable, :] = theta
        columns.append(lam)
        dims.append(theta.shape[1])
    Lambda = np.hstack(columns)

    W = ob.assemble(T) @ Lambda
    second = sir_fit(W, y, H, tau, alpha)
    Gamma = second.directions
    head, v = _fit_head(W @ Gamma, y)
    Gamma = Gamma[:, :v]
    return CrsirModel(
        standardization=params,
        assignment=assignment,
        orthogonalizer=ob.mixing,
        Lambda=Lambda,
        Gamma=Gamma,
        intercept=float(head.coefficients[0]),
        slopes=head.coefficients[1:].copy(),
        tau=float(tau),
        c=int(c),
        H=int(H),
        alpha=float(alpha),
        block_dims=tuple(dims),
        eigenvalues=second.eigenvalues,
    )


def _check_inputs(X, y, taus):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise LengthMismatch(f"{X.shape[0]} rows in X but {y.shape[0]} responses")
    for tau in taus:
        if not 0.0 <= tau <= 1.0:
            raise DomainError(f"shrinkage tau must lie in [0, 1], got {tau}")
    return X, y


def crsir_fit(X, y, c, tau, H=None, alpha=0.05):
    """Fit the pipeline on ``X`` (T-by-N, raw scale) and response ``y``."""
    X, y = _check_inputs(X, y, [tau])
    if H is None:
        H = default_slices(X.shape[0])
    Z, params = standardize(X)
    assignment = cluster_variables(correlation(Z), c, is_correlation=True)
    ob = orthogonalize_blocks(Z, assignment)
    return _fit_stages(Z, params, assignment, ob, y, c, tau, H, alpha)


def crsir_fit_grid(X, y, cs, taus, H=None, alpha=0.05):
    """Fit every ``(c, tau)`` combination on one dataset.

    Standardization, correlations and the agglomeration history are shared
    across the grid. Returns a dict keyed by ``(c, tau)`` holding either the
    fitted model or the ``CrsirError`` it raised. Each entry equals what
    ``crsir_fit`` returns for that point.
    """
    X, y = _check_inputs(X, y, taus)
    T, N = X.shape
    if H is None:
        H = default_slices(T)
    Z, params = standardize(X)
    _, merges = complete_linkage(dissimilarity_matrix(correlation(Z)), 1)
    out = {}
    for c in cs:
        assignment = cut_merges(merges, N, c)
        ob = orthogonalize_blocks(Z, assignment)
        for tau in taus:
            try:
                out[(c, tau)] = _fit_stages(Z, params, assignment, ob, y, c, tau, H, alpha)
            except CrsirError as exc:
                out[(c, tau)] = exc
    return out


def crsir_transform(model, x_new):
    return model.transform(x_new)


def crsir_predict(model, x_new):
    return model.predict(x_new)

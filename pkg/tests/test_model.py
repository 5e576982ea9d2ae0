from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crsir.clustering import assignment_from_groups
from crsir.errors import DimensionMismatch, DomainError, LengthMismatch
from crsir.model import (
    CrsirModel,
    crsir_fit,
    crsir_fit_grid,
    crsir_predict,
    crsir_transform,
    load_model,
    orthogonalize_blocks,
    save_model,
)
from crsir.numerics import standardize
from crsir.sir import sir_fit


def block_design(rng, T, sizes, within=0.8, cross=0.3, noise=0.5, beta=None):
    """Columns load on one factor per block; factors are mutually correlated."""
    c = len(sizes)
    F = rng.standard_normal((T, c))
    F = F + cross * F.sum(axis=1, keepdims=True)
    cols = []
    for b, size in enumerate(sizes):
        for _ in range(size):
            cols.append(within * F[:, b] + noise * rng.standard_normal(T))
    X = np.column_stack(cols)
    if beta is None:
        beta = np.linspace(1.0, 2.0, X.shape[1])
    y = X @ beta + 0.5 * rng.standard_normal(T)
    return X, y


def test_orthogonalize_keeps_orthogonal_blocks():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.standard_normal((30, 4)))
    a = assignment_from_groups([[0, 1], [2, 3]], 4)
    ob = orthogonalize_blocks(Q, a)
    assert np.abs(ob.assemble(30) - Q).max() <= 1e-10
    assert ob.projectors[0] is None


def test_orthogonalize_flags_copies():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((25, 2))
    X = np.column_stack([A, A, rng.standard_normal(25)])
    a = assignment_from_groups([[0, 1, 4], [2, 3]], 5)
    ob = orthogonalize_blocks(X, a)
    assert ob.degenerate[1].tolist() == [True, True]
    assert np.all(ob.blocks[1] == 0.0)


def test_orthogonalize_random_three_blocks():
    rng = np.random.default_rng(2)
    X, _ = block_design(rng, 60, (3, 2, 2))
    Z, _ = standardize(X)
    a = assignment_from_groups([[0, 1, 2], [3, 4], [5, 6]], 7)
    ob = orthogonalize_blocks(Z, a)
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.abs(ob.blocks[i].T @ ob.blocks[j]).max() <= 1e-10
    assert np.abs(Z @ ob.mixing - ob.assemble(60)).max() <= 1e-10
    # span of all blocks is preserved
    assert np.linalg.matrix_rank(ob.assemble(60)) == 7


def test_c1_tau0_matches_plain_sir():
    rng = np.random.default_rng(3)
    X, y = block_design(rng, 300, (3, 3))
    model = crsir_fit(X, y, c=1, tau=0.0, H=10)
    Z, _ = standardize(X)
    direct = sir_fit(Z, y, H=10)
    first = crsir_transform(model, X)[:, 0]
    plain = Z @ direct.directions[:, 0]
    assert abs(np.corrcoef(first, plain)[0, 1]) == pytest.approx(1.0, abs=1e-10)


def test_singletons_tau0_match_plain_sir_predictions():
    rng = np.random.default_rng(4)
    X, y = block_design(rng, 300, (2, 2, 1))
    N = X.shape[1]
    singletons = crsir_fit(X, y, c=N, tau=0.0, H=10)
    pooled = crsir_fit(X, y, c=1, tau=0.0, H=10)
    Z, _ = standardize(X)
    plain = sir_fit(Z, y, H=10)
    assert singletons.eigenvalues == pytest.approx(plain.eigenvalues, abs=1e-9)
    if singletons.v == pooled.v:
        assert crsir_predict(singletons, X) == pytest.approx(crsir_predict(pooled, X), abs=1e-8)


def test_null_response_oos_rmse_close_to_sd():
    rng = np.random.default_rng(5)
    X, _ = block_design(rng, 2000, (4, 3, 3))
    y = rng.standard_normal(2000)
    model = crsir_fit(X[:1000], y[:1000], c=3, tau=0.3, H=10)
    err = crsir_predict(model, X[1000:]) - y[1000:]
    rmse = np.sqrt(np.mean(err**2))
    assert rmse == pytest.approx(y[1000:].std(), rel=0.1)
    assert np.abs(model.slopes).max() < 0.2


def test_transform_training_consistency_and_linearity():
    rng = np.random.default_rng(6)
    X, y = block_design(rng, 200, (3, 2, 2))
    model = crsir_fit(X, y, c=3, tau=0.4)
    Z, params = standardize(X)
    ob = orthogonalize_blocks(Z, model.assignment)
    train = ob.assemble(200) @ model.Lambda @ model.Gamma
    assert np.abs(crsir_transform(model, X) - train).max() <= 1e-10
    zero = crsir_transform(model, params.mean)
    assert np.abs(zero).max() <= 1e-12
    with pytest.raises(DimensionMismatch):
        crsir_transform(model, X[:, :3])


def test_transform_new_row_hand_composed():
    rng = np.random.default_rng(7)
    X, y = block_design(rng, 120, (2, 2))
    model = crsir_fit(X, y, c=2, tau=0.2, H=6)
    Z, params = standardize(X)
    x_new = rng.standard_normal(4) * 2
    z = (x_new - X.mean(axis=0)) / X.std(axis=0, ddof=1)
    # replay the projection block by block with regression coefficients
    w = np.zeros(4)
    done = []
    for idx in model.assignment.blocks():
        if done:
            prev = np.concatenate(done)
            coef = np.linalg.lstsq(Z[:, prev], Z[:, idx], rcond=None)[0]
            w[idx] = z[idx] - z[prev] @ coef
        else:
            w[idx] = z[idx]
        done.append(idx)
    expected = model.Gamma.T @ (model.Lambda.T @ w)
    assert crsir_transform(model, x_new) == pytest.approx(expected, abs=1e-10)


def test_constant_head_predicts_intercept():
    rng = np.random.default_rng(8)
    X, y = block_design(rng, 100, (2, 2))
    model = crsir_fit(X, y, c=2, tau=0.5)
    flat = replace(model, intercept=3.25, slopes=np.zeros_like(model.slopes))
    assert np.all(crsir_predict(flat, X) == 3.25)


def test_exact_linear_index_fits_in_sample():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((500, 4)) @ np.array(
        [[1, 0.3, 0, 0], [0, 1, 0.2, 0], [0, 0, 1, 0.4], [0, 0, 0, 1.0]]
    )
    y = X @ np.array([1.0, -2.0, 0.5, 1.0])
    model = crsir_fit(X, y, c=1, tau=0.0, H=10)
    resid = crsir_predict(model, X) - y
    assert np.sqrt(np.mean(resid**2)) <= 0.05 * y.std()


def test_lambda_is_block_sparse():
    rng = np.random.default_rng(10)
    X, y = block_design(rng, 250, (3, 3, 2))
    model = crsir_fit(X, y, c=3, tau=0.3)
    Z, _ = standardize(X)
    W = Z @ model.orthogonalizer
    col = 0
    pieces = []
    for idx, k in zip(model.assignment.blocks(), model.block_dims):
        theta = model.Lambda[:, col : col + k]
        outside = np.setdiff1d(np.arange(8), idx)
        assert np.all(theta[outside] == 0.0)
        pieces.append(W[:, idx] @ theta[idx])
        col += k
    assert col == model.m
    # equal up to the summation order inside the matrix product
    assert np.abs(W @ model.Lambda - np.hstack(pieces)).max() <= 1e-12
    assert 1 <= model.v <= model.m


def test_refit_is_bit_identical():
    rng = np.random.default_rng(11)
    X, y = block_design(rng, 200, (3, 2))
    a = crsir_fit(X, y, c=2, tau=0.5)
    b = crsir_fit(X, y, c=2, tau=0.5)
    assert a.to_dict() == b.to_dict()


def test_grid_matches_single_fits():
    rng = np.random.default_rng(12)
    X, y = block_design(rng, 200, (3, 2, 2))
    grid = crsir_fit_grid(X, y, (1, 3, 7), (0.1, 1.0), H=8)
    for (c, tau), model in grid.items():
        single = crsir_fit(X, y, c, tau, H=8)
        assert crsir_predict(model, X) == pytest.approx(crsir_predict(single, X), abs=1e-10)


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(13)
    X, y = block_design(rng, 150, (2, 3))
    model = crsir_fit(X, y, c=2, tau=0.7)
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(crsir_predict(back, X), crsir_predict(model, X))
    assert back.to_dict() == model.to_dict()
    with pytest.raises(DomainError):
        CrsirModel.from_dict({"format": "other"})


def test_input_validation():
    rng = np.random.default_rng(14)
    X, y = block_design(rng, 60, (2, 2))
    with pytest.raises(LengthMismatch):
        crsir_fit(X, y[:-1], 2, 0.5)
    with pytest.raises(DomainError):
        crsir_fit(X, y, 2, 1.5)
    with pytest.raises(DomainError):
        crsir_fit(X, y, 5, 0.5)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_prediction_invariant_to_column_order(seed, tau):
    rng = np.random.default_rng(seed)
    X, y = block_design(rng, 200, (4, 2, 1), within=1.0, cross=0.2, noise=0.3)
    perm = rng.permutation(7)
    a = crsir_fit(X, y, c=3, tau=tau, H=8)
    b = crsir_fit(X[:, perm], y, c=3, tau=tau, H=8)
    x_new = rng.standard_normal((5, 7))
    assert crsir_predict(b, x_new[:, perm]) == pytest.approx(crsir_predict(a, x_new), abs=1e-8)


def _span_residual(T, seed):
    rng = np.random.default_rng(seed)
    beta = np.array([1.0, 0.5, -1.0, 0.0, 0.8, 0.0, -0.5, 1.0])
    X, _ = block_design(rng, T, (3, 3, 2), noise=0.6, beta=beta)
    y = np.tanh(0.3 * X @ beta) + 0.1 * rng.standard_normal(T)
    model = crsir_fit(X, y, c=3, tau=0.0, H=10)
    Z, _ = standardize(X)
    W = Z @ model.orthogonalizer
    W = W - W.mean(axis=0)
    S = W.T @ W / (T - 1)
    B = S @ model.Lambda @ model.Gamma
    Qb, _ = np.linalg.qr(B)
    order = np.argsort(y, kind="stable")
    means = np.array([W[g].mean(axis=0) for g in np.array_split(order, 10)])
    resid = means - means @ Qb @ Qb.T
    return np.sum(resid**2) / np.sum(means**2)


def test_slice_means_lie_near_estimated_span():
    small = np.mean([_span_residual(500, s) for s in range(5)])
    large = np.mean([_span_residual(5000, s) for s in range(5)])
    assert large < 0.15
    assert large < small

"""Synthetic data: the equicorrelated linear design and a planted-factor panel.

Random numbers come from numpy's PCG64 bit generator (``default_rng``);
normals use its ziggurat sampler, so streams are fixed for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..model import crsir_fit
from ..numerics import DataMatrix


def equicorrelated(n=10, rho=0.9):
    return (1.0 - rho) * np.eye(n) + rho * np.ones((n, n))


def simulate_design(T=300, runs=100, seed=0, n=10, rho=0.9, noise_var=0.1):
    """Yield ``runs`` datasets ``(X, y)`` with ``X`` rows i.i.d.
    ``N(0, equicorrelated(n, rho))`` and ``y = sum_j j * x_j + e``,
    ``e ~ N(0, noise_var)``."""
    if T < 50:
        raise DomainError(f"T must be at least 50, got {T}")
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(equicorrelated(n, rho))
    beta = np.arange(1, n + 1, dtype=float)
    for _ in range(runs):
        X = rng.standard_normal((T, n)) @ L.T
        y = X @ beta + rng.normal(0.0, np.sqrt(noise_var), T)
        yield X, y


@dataclass(frozen=True)
class RmseTable:
    crsir_rmse: np.ndarray
    sir_rmse: np.ndarray

    @property
    def wins(self):
        return int(np.sum(self.crsir_rmse < self.sir_rmse))

    def rows(self):
        return [
            ("Mean", self.crsir_rmse.mean(), self.sir_rmse.mean()),
            ("S.D.", self.crsir_rmse.std(ddof=1), self.sir_rmse.std(ddof=1)),
        ]

    def to_markdown(self):
        lines = ["| | CRSIR | SIR |", "|---|---:|---:|"]
        lines += [f"| {name} | {a:.2f} | {b:.2f} |" for name, a, b in self.rows()]
        lines.append(f"\nCRSIR below SIR in {self.wins} of {len(self.crsir_rmse)} runs.")
        return "\n".join(lines)


def in_sample_rmse(model, X, y):
    return float(np.sqrt(np.mean((model.predict(X) - y) ** 2)))


def rmse_table(T=300, runs=100, seed=0, c=10, tau=0.5, H=None, alpha=0.05):
    """In-sample RMSE of CRSIR(c, tau) against plain SIR (c=1, tau=0) over
    repeated draws of the equicorrelated design."""
    crsir, sir = [], []
    for X, y in simulate_design(T, runs, seed):
        crsir.append(in_sample_rmse(crsir_fit(X, y, c, tau, H, alpha), X, y))
        sir.append(in_sample_rmse(crsir_fit(X, y, 1, 0.0, H, alpha), X, y))
    return RmseTable(np.array(crsir), np.array(sir))


def simulate_factor_panel(T=400, seed=0, block_size=6, loading=0.7, noise=0.5):
    """Twenty-series panel with a planted leading factor.

    Three predictor blocks of ``block_size`` series each: block ``A`` tracks
    an i.i.d. factor ``g``, block ``B`` a persistent factor ``q``, block ``C``
    a third factor unrelated to the targets. Two targets, ``s1`` and ``s2``,
    load on ``g`` at lags one to four, so ``g_t`` (seen only through block
    ``A``) moves ``y_{t+h}`` for every ``h <= 4``. Returns the panel and the
    names of the signal-bearing targets.
    """
    rng = np.random.default_rng(seed)
    burn = 50
    n = T + burn
    g = rng.standard_normal(n)
    q = np.zeros(n)
    w = np.zeros(n)
    e_q, e_w = rng.standard_normal(n), rng.standard_normal(n)
    for t in range(1, n):
        q[t] = 0.5 * q[t - 1] + e_q[t]
        w[t] = 0.3 * w[t - 1] + e_w[t]
    g_lags = sum(np.roll(g, l) for l in range(1, 5))
    s1 = loading * g_lags + noise * rng.standard_normal(n)
    s2 = loading * g_lags + 0.4 * np.roll(q, 1) + noise * rng.standard_normal(n)

    cols, names = [], []
    for label, factor in (("a", g), ("b", q), ("c", w)):
        for j in range(block_size):
            cols.append(factor + noise * rng.standard_normal(n))
            names.append(f"{label}{j + 1}")
    cols += [s1, s2]
    names += ["s1", "s2"]
    values = np.column_stack(cols)[burn:]
    return DataMatrix(values, tuple(names)), ("s1", "s2")

"""Rolling pseudo out-of-sample evaluation of CRSIR against AR(4) and DFM-5.

At every forecast origin ``o`` only rows ``<= o`` are touched. The window
holds the ``window`` most recent direct-forecast pairs ``(x_t, y_{t+h})``
with ``t + h <= o`` plus the three extra rows their own-lag regressors need.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..baselines import N_LAGS, ar4_fit, dfm5_fit, lag_design
from ..errors import CrsirError, LengthMismatch, TooShort
from ..model import crsir_fit, crsir_fit_grid

log = logging.getLogger(__name__)

PERCENTILES = (0.05, 0.25, 0.50, 0.75, 0.95)
METHODS = ("AR(4)", "DFM-5", "CRSIR")
MAX_FAIL_SHARE = 0.10


def rmse(pred, obs):
    pred = np.asarray(pred, dtype=float).ravel()
    obs = np.asarray(obs, dtype=float).ravel()
    if pred.shape != obs.shape or pred.size == 0:
        raise LengthMismatch(f"cannot compare {pred.size} predictions with {obs.size} observations")
    return float(np.sqrt(np.mean((pred - obs) ** 2)))


@dataclass(frozen=True)
class Residualized:
    """Own-lag partialled data for one window.

    ``y`` and ``X`` are residuals of ``y_{t+h}`` and ``x_t`` after regression
    on ``(1, y_t, ..., y_{t-3})``; ``x_origin`` is the origin row passed
    through the same ``x`` regression; ``ar_forecast`` is the AR(4) forecast
    from the window.
    """

    X: np.ndarray
    y: np.ndarray
    x_origin: np.ndarray
    ar_forecast: float


def window_rows(origin, window):
    """Slice of rows feeding the window that ends at ``origin``."""
    start = origin - window - (N_LAGS - 1) + 1
    if start < 0:
        raise TooShort(f"origin {origin} leaves no room for a {window}-pair window")
    return slice(start, origin + 1)


def residualize(X, y, h):
    """Partial own lags out of ``y_{t+h}`` and ``x_t`` (rows of ``X``, ``y``
    are the window rows, last row is the origin)."""
    X = np.asarray(X, dtype=float)
    lags, target, last, rows = lag_design(y, h)
    _, ar_forecast = ar4_fit(y, h)
    A = np.column_stack([np.ones(len(rows)), lags])
    a_origin = np.concatenate([[1.0], last])
    coef_y = np.linalg.lstsq(A, target, rcond=None)[0]
    Xp = X[rows]
    coef_x = np.linalg.lstsq(A, Xp, rcond=None)[0]
    return Residualized(
        X=Xp - A @ coef_x,
        y=target - A @ coef_y,
        x_origin=X[-1] - a_origin @ coef_x,
        ar_forecast=ar_forecast,
    )


def cv_train_mask(n, t, h):
    """Training pairs for held-out pair ``t``: every index at distance at
    least ``2h + 3`` from ``t``."""
    idx = np.arange(n)
    return np.abs(idx - t) >= 2 * h + 3


@dataclass(frozen=True)
class CvResult:
    c: int
    tau: float
    losses: dict
    failures: dict


def pick_best(losses):
    """Smallest loss; ties go to smaller ``c`` and then larger ``tau``."""
    if not losses:
        return None
    return min(losses, key=lambda k: (losses[k], k[0], -k[1]))


def cv_search(X, y, h, grid, H=None, alpha=0.05):
    """Gapped leave-one-out search over ``(c, tau)`` on residualized pairs.

    A grid point whose fits fail for more than 10% of held-out pairs is
    disqualified. Returns ``None`` when nothing qualifies.
    """
    n, N = X.shape
    grid = [(c, tau) for c, tau in grid if c <= N]
    if len(grid) == 1:
        c, tau = grid[0]
        return CvResult(c, tau, {}, {})
    cs = sorted({c for c, _ in grid})
    taus = sorted({tau for _, tau in grid})
    sq = {g: [] for g in grid}
    fails = Counter()
    for t in range(n):
        mask = cv_train_mask(n, t, h)
        try:
            fits = crsir_fit_grid(X[mask], y[mask], cs, taus, H, alpha)
        except CrsirError:
            fits = {}
        for g in grid:
            model = fits.get(g)
            if model is None or isinstance(model, Exception):
                fails[g] += 1
                continue
            sq[g].append((y[t] - float(model.predict(X[t]))) ** 2)
    losses = {
        g: float(np.mean(v)) for g, v in sq.items() if v and fails[g] <= MAX_FAIL_SHARE * n
    }
    best = pick_best(losses)
    if best is None:
        return None
    return CvResult(best[0], best[1], losses, dict(fails))


def cross_validate(X, y, h, grid, window=100, H=None, alpha=0.05):
    """Choose ``(c, tau)`` from the most recent ``window`` pairs of ``X``, ``y``
    (rows up to and including the forecast origin)."""
    rows = window_rows(len(y) - 1, window)
    res = residualize(np.asarray(X, dtype=float)[rows], np.asarray(y, dtype=float)[rows], h)
    return cv_search(res.X, res.y, h, grid, H, alpha)


@dataclass(frozen=True)
class OriginForecast:
    ar4: float
    dfm5: float
    crsir: float
    c: int | None
    tau: float | None
    crsir_ok: bool


def forecast_origin(X, y, h, config, params=None):
    """All three forecasts of ``y_{o+h}`` using rows ``0..o`` where ``o`` is
    the last row of ``X`` and ``y``.

    ``params`` fixes ``(c, tau)``; otherwise cross-validation picks them. When
    CRSIR cannot be fitted the AR(4) forecast stands in and ``crsir_ok`` is
    false.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    rows = window_rows(len(y) - 1, config.window_length)
    Xw, yw = X[rows], y[rows]
    res = residualize(Xw, yw, h)
    try:
        dfm = dfm5_fit(Xw, yw, h, config.n_factors)[1]
    except CrsirError:
        dfm = np.nan
    if params is None:
        cv = cv_search(res.X, res.y, h, config.grid(), config.H, config.alpha)
        params = None if cv is None else (cv.c, cv.tau)
    if params is None:
        return OriginForecast(res.ar_forecast, dfm, res.ar_forecast, None, None, False)
    c, tau = params
    try:
        model = crsir_fit(res.X, res.y, c, tau, config.H, config.alpha)
        extra = float(model.predict(res.x_origin))
        ok = True
    except CrsirError as exc:
        log.debug("CRSIR fit failed at origin %d: %s", len(y) - 1, exc)
        extra, ok = 0.0, False
    return OriginForecast(res.ar_forecast, dfm, res.ar_forecast + extra, c, tau, ok)


@dataclass
class SeriesRecord:
    series: str
    h: int
    method: str
    rmse: float
    rmse_relative_to_ar4: float
    chosen_c: int | None = None
    chosen_tau: float | None = None
    n_forecasts: int = 0
    n_fallback: int = 0
    error: str = ""


@dataclass
class EvalReport:
    records: list = field(default_factory=list)
    forecasts: list = field(default_factory=list)
    horizons: tuple = ()
    notes: dict = field(default_factory=dict)

    def relative(self, h, method):
        return np.array(
            [
                r.rmse_relative_to_ar4
                for r in self.records
                if r.h == h and r.method == method and np.isfinite(r.rmse_relative_to_ar4)
            ]
        )

    def percentiles(self, h, method):
        rel = self.relative(h, method)
        if rel.size == 0:
            return np.full(len(PERCENTILES), np.nan)
        return np.quantile(rel, PERCENTILES)

    def beats_ar4(self, h, method):
        return int(np.sum(self.relative(h, method) < 1.0))

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["series", "h", "method", "rmse", "rmse_relative_to_ar4", "chosen_c",
             "chosen_tau", "n_forecasts", "n_fallback", "error"]
        )
        for r in self.records:
            w.writerow(
                [r.series, r.h, r.method, _fmt(r.rmse), _fmt(r.rmse_relative_to_ar4),
                 "" if r.chosen_c is None else r.chosen_c,
                 "" if r.chosen_tau is None else _fmt(r.chosen_tau),
                 r.n_forecasts, r.n_fallback, r.error]
            )
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def forecasts_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "h", "origin", "observed", "ar4", "dfm5", "crsir", "c", "tau"])
        for f in self.forecasts:
            w.writerow([f[0], f[1], f[2]] + [_fmt(v) for v in f[3:7]] +
                       ["" if f[7] is None else f[7], "" if f[8] is None else _fmt(f[8])])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def beats_table(self):
        lines = [
            "Number of series with smaller RMSE than AR(4)",
            "",
            "| h | DFM-5 | CRSIR |",
            "|---|---:|---:|",
        ]
        for h in self.horizons:
            lines.append(f"| {h} | {self.beats_ar4(h, 'DFM-5')} | {self.beats_ar4(h, 'CRSIR')} |")
        return "\n".join(lines)

    def percentile_table(self, h):
        head = " | ".join(f"{p:.3f}" for p in PERCENTILES)
        lines = [
            f"Distribution of relative RMSEs, h={h}",
            "",
            f"| Method | {head} |",
            "|---|" + "---:|" * len(PERCENTILES),
        ]
        for m in METHODS:
            vals = " | ".join(f"{v:.3f}" for v in self.percentiles(h, m))
            lines.append(f"| {m} | {vals} |")
        return "\n".join(lines)

    def to_markdown(self):
        parts = [self.beats_table()] + [self.percentile_table(h) for h in self.horizons]
        failed = [r for r in self.records if r.error]
        if failed:
            parts.append("Failures:\n\n" + "\n".join(f"- {r.series} h={r.h} {r.method}: {r.error}" for r in failed))
        return "\n\n".join(parts) + "\n"


def _fmt(x):
    return "" if x is None or not np.isfinite(x) else repr(float(x))


def _mode(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    counts = Counter(values)
    top = max(counts.values())
    return next(v for v in values if counts[v] == top)


def evaluation_origins(T, h, config):
    first = config.window_length + N_LAGS - 2
    if config.eval_start is not None:
        first = max(first, config.eval_start)
    return list(range(first, T - h, config.eval_step))


def _evaluate_series(X, y, h, config, series, report):
    origins = evaluation_origins(len(y), h, config)
    if not origins:
        raise TooShort("no forecast origins with a full window")
    preds = {m: [] for m in METHODS}
    obs, chosen, fallbacks = [], [], 0
    params = None
    for k, o in enumerate(origins):
        refresh = k % config.cv_refresh == 0
        f = forecast_origin(X[: o + 1], y[: o + 1], h, config, None if refresh else params)
        if refresh:
            params = None if f.c is None else (f.c, f.tau)
        fallbacks += not f.crsir_ok
        chosen.append(params)
        preds["AR(4)"].append(f.ar4)
        preds["DFM-5"].append(f.dfm5)
        preds["CRSIR"].append(f.crsir)
        obs.append(y[o + h])
        report.forecasts.append((series, h, o, y[o + h], f.ar4, f.dfm5, f.crsir, f.c, f.tau))

    base = rmse(preds["AR(4)"], obs)
    best = _mode(chosen)
    for m in METHODS:
        p = np.array(preds[m])
        err = ""
        if np.all(np.isfinite(p)):
            value = rmse(p, obs)
        else:
            value, err = np.nan, "forecast unavailable"
        rel = 1.0 if m == "AR(4)" else value / base
        report.records.append(
            SeriesRecord(
                series, h, m, value, rel,
                chosen_c=best[0] if m == "CRSIR" and best else None,
                chosen_tau=best[1] if m == "CRSIR" and best else None,
                n_forecasts=len(obs),
                n_fallback=fallbacks if m == "CRSIR" else 0,
                error=err,
            )
        )


def rolling_oos(panel, config, progress=None):
    """Run the full rolling study on ``panel`` (a ``DataMatrix``).

    Predictors are ``config.predictors`` (default: every column) minus the
    target itself. A failing series is recorded in the report and the batch
    carries on.
    """
    names = panel.column_names
    targets = config.forecast_targets or names
    report = EvalReport(horizons=tuple(config.horizons))
    report.notes["selection_test"] = (
        f"sequential chi-square, statistic T*sum(trailing eigenvalues), "
        f"df (p-k)(H-k-1), alpha={config.alpha}"
    )
    for series in targets:
        pool = config.predictors or names
        pred_names = [n for n in pool if n != series]
        X = panel.select(pred_names).values
        y = panel.column(series)
        for h in config.horizons:
            if progress:
                progress(series, h)
            try:
                _evaluate_series(X, y, h, config, series, report)
            except (CrsirError, ValueError, np.linalg.LinAlgError) as exc:
                log.warning("series %s h=%d failed: %s", series, h, exc)
                for m in METHODS:
                    report.records.append(
                        SeriesRecord(series, h, m, np.nan, np.nan, error=f"{type(exc).__name__}: {exc}")
                    )
    return report

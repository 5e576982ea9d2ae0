"""Panel ingestion: delimited text in, transformed common sample out."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DomainError, ParseError, UnknownTransformCode
from ..numerics import DataMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Panel:
    """Transformed panel. ``rows`` maps each kept row to its data-row number
    in the source file (1 = first row after the header)."""

    data: DataMatrix
    rows: np.ndarray
    dropped_rows: int


def read_delimited(path, delimiter=","):
    """Header row of names, then one row per period; empty cells are NaN."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path} is empty") from None
        if len(set(header)) != len(header):
            raise ParseError("duplicate column names", row=0)
        values = []
        for r, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=r)
            parsed = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "" or cell.upper() in ("NA", "NAN"):
                    parsed.append(np.nan)
                    continue
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(f"non-numeric value {cell!r}", row=r, column=name) from None
            values.append(parsed)
    if not values:
        raise ParseError(f"{path} has no data rows")
    return header, np.array(values, dtype=float)


def _log(x, name):
    bad = np.flatnonzero(~np.isnan(x) & (x <= 0))
    if bad.size:
        r = int(bad[0]) + 1
        raise ParseError(f"log of non-positive value {x[bad[0]]!r}", row=r, column=name)
    return np.log(x)


def _diff(x, times=1):
    out = x.astype(float)
    for _ in range(times):
        out = np.concatenate([[np.nan], np.diff(out)])
    return out


def apply_transform(x, code, name="series"):
    """Apply one transform code; differencing leaves leading NaNs so the
    output keeps the input's length and row alignment."""
    x = np.asarray(x, dtype=float)
    if code == "none":
        return x.copy()
    if code == "log":
        return _log(x, name)
    if code == "diff":
        return _diff(x)
    if code == "diff2":
        return _diff(x, 2)
    if code == "logdiff":
        return _diff(_log(x, name))
    if code == "logdiff2":
        return _diff(_log(x, name), 2)
    raise UnknownTransformCode(f"unknown transform code {code!r} for {name}")


def winsorize(x, n_iqr):
    """Clip to ``median +/- n_iqr * IQR``. Uses the whole series, so it is
    not a real-time operation."""
    q1, med, q3 = np.nanpercentile(x, [25, 50, 75])
    spread = n_iqr * (q3 - q1)
    return np.clip(x, med - spread, med + spread)


def load_panel(config, path=None):
    path = path or config.data_path
    if path is None:
        raise DomainError("no data path given")
    names, values = read_delimited(path)
    unknown = set(config.transform_codes) - set(names)
    if unknown:
        raise DomainError(f"transform codes given for missing series: {sorted(unknown)}")
    out = np.empty_like(values)
    for j, name in enumerate(names):
        col = apply_transform(values[:, j], config.transform_codes.get(name, "none"), name)
        if config.winsorize_iqr is not None:
            col = winsorize(col, config.winsorize_iqr)
        out[:, j] = col
    keep = np.all(np.isfinite(out), axis=1)
    dropped = int((~keep).sum())
    if dropped:
        log.info("dropped %d rows with missing values after transformation", dropped)
    rows = np.flatnonzero(keep) + 1
    return Panel(DataMatrix(out[keep], tuple(names)), rows, dropped)


def write_panel(path, matrix):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(matrix.column_names)
        for row in matrix.values:
            w.writerow([repr(float(v)) for v in row])

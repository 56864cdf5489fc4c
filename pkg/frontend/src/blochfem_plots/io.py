"""Readers for the solver's documented file formats.

field CSV   x1,x2,re_u,im_u,abs_u
band CSV    side,j1,j2,m,mu,P,vg1,vg2   (band samples and selected sets)
sweep CSV   delta,err_R,err_T
report JSON run metadata: geometry, omega, per-mode coefficients, ...
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

FIELD_COLUMNS = ["x1", "x2", "re_u", "im_u", "abs_u"]
BAND_COLUMNS = ["side", "j1", "j2", "m", "mu", "P", "vg1", "vg2"]
SWEEP_COLUMNS = ["delta", "err_R", "err_T"]


class FormatError(ValueError):
    """Input file does not match the documented header or shape."""


def _read_rows(path, expected_header):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path} is empty") from None
        if header != expected_header:
            raise FormatError(f"{path} header {header} != expected {expected_header}")
        return list(reader)


def read_field(path):
    """Field table as a dict of 1-D arrays keyed by column name."""
    rows = _read_rows(path, FIELD_COLUMNS)
    if not rows:
        raise FormatError(f"{path} has no data rows")
    try:
        data = np.asarray(rows, dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path} has non-numeric entries: {exc}") from exc
    return {name: data[:, i] for i, name in enumerate(FIELD_COLUMNS)}


def read_band(path):
    """Band rows as (side array, float matrix of the remaining columns)."""
    rows = _read_rows(path, BAND_COLUMNS)
    side = np.array([r[0] for r in rows])
    try:
        vals = np.asarray([r[1:] for r in rows], dtype=float) if rows else np.zeros((0, 7))
    except ValueError as exc:
        raise FormatError(f"{path} has non-numeric entries: {exc}") from exc
    return side, vals


def read_sweep(path):
    rows = _read_rows(path, SWEEP_COLUMNS)
    if not rows:
        raise FormatError(f"{path} has no data rows")
    return np.asarray(rows, dtype=float)


def read_report(path):
    with open(path) as fh:
        return json.load(fh)

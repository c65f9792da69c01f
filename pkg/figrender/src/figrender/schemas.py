"""CSV loading with per-figure schema validation.

Each loader checks the header against the producing side's contract before
touching any data, and raises SchemaError naming the offending file and the
expected header, so a render never starts from a half-understood input.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["SchemaError", "load_trajectory", "load_spectrum", "load_distribution",
           "load_couplings", "load_spectrum_series", "load_zero_mode", "load_transfer",
           "load_sweep"]


class SchemaError(ValueError):
    """A CSV input is missing or its header does not match the contract."""


def _read(path, expected_prefix=None, expected_exact=None):
    if not os.path.exists(path):
        raise SchemaError(f"missing CSV '{path}'"
                          + (f" (expected header '{expected_exact or expected_prefix}...')"))
    with open(path) as fh:
        header = fh.readline().strip()
        if expected_exact is not None and header != expected_exact:
            raise SchemaError(f"'{path}' has header '{header}', expected '{expected_exact}'")
        if expected_prefix is not None and not header.startswith(expected_prefix):
            raise SchemaError(f"'{path}' has header '{header}', expected it to start with "
                              f"'{expected_prefix}'")
        cols = header.split(",")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append(line.split(","))
    return cols, rows


def _numeric(path, cols, rows):
    try:
        return np.array([[float(x) for x in r] for r in rows], float)
    except ValueError as exc:
        raise SchemaError(f"'{path}' contains a non-numeric cell: {exc}") from None


def load_trajectory(path):
    """t, re/im alpha pairs, re/im beta pairs, then abs columns; returns
    (t, abs_alpha (n x ncav), abs_beta (n x nres))."""
    cols, rows = _read(path, expected_prefix="t,re_alpha_1,im_alpha_1")
    data = _numeric(path, cols, rows)
    abs_a_cols = [i for i, c in enumerate(cols) if c.startswith("abs_alpha_")]
    abs_b_cols = [i for i, c in enumerate(cols) if c.startswith("abs_beta_")]
    if not abs_a_cols:
        raise SchemaError(f"'{path}' lacks abs_alpha_* columns")
    return data[:, 0], data[:, abs_a_cols], data[:, abs_b_cols]


def load_spectrum(path):
    cols, rows = _read(path, expected_exact="index,eigenvalue")
    data = _numeric(path, cols, rows)
    return data[:, 0].astype(int), data[:, 1]


def load_distribution(path):
    cols, rows = _read(path, expected_exact="site,weight")
    data = _numeric(path, cols, rows)
    return data[:, 0].astype(int), data[:, 1]


def load_couplings(path):
    cols, rows = _read(path, expected_exact="bond,re,im,abs")
    data = _numeric(path, cols, rows)
    return data[:, 0].astype(int), data[:, 3]


def _site_series(path, prefix):
    cols, rows = _read(path, expected_prefix=f"t,{prefix}1")
    want = ["t"] + [f"{prefix}{i}" for i in range(1, len(cols))]
    if cols != want:
        raise SchemaError(f"'{path}' has header '{','.join(cols)}', expected "
                          f"'{','.join(want)}'")
    data = _numeric(path, cols, rows)
    return data[:, 0], data[:, 1:]


def load_spectrum_series(path):
    return _site_series(path, "lambda_")


def load_zero_mode(path):
    return _site_series(path, "w_site_")


def load_transfer(path):
    cols, rows = _read(path, expected_prefix="t,pop_site_1")
    if cols[-1] != "norm":
        raise SchemaError(f"'{path}' must end with a 'norm' column, got '{cols[-1]}'")
    data = _numeric(path, cols, rows)
    return data[:, 0], data[:, 1:-1], data[:, -1]


def load_sweep(path):
    cols, rows = _read(path, expected_prefix="value")
    values = np.array([float(r[0]) for r in rows])
    series = [r[1:] for r in rows]
    return cols, values, series

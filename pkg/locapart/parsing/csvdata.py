"""
Comma-separated numeric tables

Every file has one header row of column names,
then rows of numbers in full double precision.

Exceptions:
    Error

Interface Functions:
    write_table
    read_table
    write_series
"""

import logging

import numpy as np

_log = logging.getLogger(__name__)

FMT = "%.17g"


class Error(Exception):
    """A table is malformed or empty."""


def write_table(path, columns):
    """Write an ordered mapping of column name to values.

    Scalar columns are broadcast; string columns are not supported.
    """
    if not columns:
        raise Error("expected at least one column")
    names = list(columns)
    for name in names:
        if "," in name:
            raise Error(f"column name {name!r} contains a comma")
    arrays = [np.atleast_1d(np.asarray(columns[name], dtype=float)) for name in names]
    nrows = max(len(a) for a in arrays)
    if nrows == 0:
        raise Error("expected at least one row")
    data = np.empty((nrows, len(names)))
    for i, arr in enumerate(arrays):
        if len(arr) not in (1, nrows):
            fstr = "column {!r} has {} rows, expected {}"
            raise Error(fstr.format(names[i], len(arr), nrows))
        data[:, i] = arr
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(names),
               comments="")
    _log.info("wrote %s (%d rows)", path, nrows)


def write_series(path, series):
    """Write the columns of a :class:`~locapart.transfer.dynamics.TimeSeries`."""
    write_table(path, series.columns())


def read_table(path):
    """Return the ordered mapping of column name to values of a table.

    Raises
    ------
    Error
        Missing header, ragged rows, non-numeric cells or no data rows.
    """
    with open(path, encoding="utf-8") as fin:
        header = fin.readline().strip()
        if not header:
            raise Error(f"{path}: missing header row")
        names = header.split(",")
        try:
            data = np.loadtxt(fin, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise Error(f"{path}: {exc}") from exc
    if data.size == 0:
        raise Error(f"{path}: no data rows")
    if data.shape[1] != len(names):
        fstr = "{}: header has {} columns, rows have {}"
        raise Error(fstr.format(path, len(names), data.shape[1]))
    return {name: data[:, i] for i, name in enumerate(names)}

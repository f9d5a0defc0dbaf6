"""
Test numeric CSV tables
"""


import numpy as np
import pytest

from locapart.parsing.csvdata import Error, read_table, write_series, write_table
from locapart.transfer.dynamics import TimeSeries


def test_write_read(tmp_path):
    path = tmp_path / "table.csv"
    t = np.linspace(0.0, 1.0, 7)
    energy = np.exp(-t) / 3.0
    write_table(path, {"t_au": t, "E_A": energy, "seed": 5})
    assert path.read_text().splitlines()[0] == "t_au,E_A,seed"
    cols = read_table(path)
    assert list(cols) == ["t_au", "E_A", "seed"]
    # full double precision
    assert np.array_equal(cols["E_A"], energy)
    assert np.array_equal(cols["seed"], np.full(7, 5.0))

    write_table(path, {"x": 1.5})
    assert np.array_equal(read_table(path)["x"], [1.5])


def test_write_errors(tmp_path):
    path = tmp_path / "bad.csv"
    with pytest.raises(Error):
        write_table(path, {})
    with pytest.raises(Error):
        write_table(path, {"a,b": [1.0]})
    with pytest.raises(Error):
        write_table(path, {"a": []})
    with pytest.raises(Error):
        write_table(path, {"a": [1.0, 2.0, 3.0], "b": [1.0, 2.0]})


def test_read_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("")
    with pytest.raises(Error):
        read_table(path)
    path.write_text("a,b\n")
    with pytest.raises(Error):
        read_table(path)
    path.write_text("a,b\n1.0,x\n")
    with pytest.raises(Error):
        read_table(path)
    path.write_text("a,b\n1.0,2.0,3.0\n")
    with pytest.raises(Error):
        read_table(path)
    path.write_text("a,b\n1.0,2.0\n3.0\n")
    with pytest.raises(Error):
        read_table(path)
    with pytest.raises(OSError):
        read_table(tmp_path / "missing.csv")


def test_write_series(tmp_path):
    times = np.linspace(0.0, 2.0, 5)
    series = TimeSeries(times, {"A": -0.5 * np.ones(5), "B": -0.25 * np.ones(5)},
                        {"A": np.ones(5), "B": np.ones(5)})
    path = tmp_path / "series.csv"
    write_series(path, series)
    cols = read_table(path)
    assert list(cols) == ["t_au", "E_A", "E_B", "N_A", "N_B", "E_total"]
    assert np.allclose(cols["E_total"], -0.75)
    assert np.array_equal(cols["t_au"], times)

"""
Test coherent propagation and site time series
"""


import math

import numpy as np
import pytest
from scipy import linalg

from locapart.chem.subsystem import RealityError, SubsystemOperator
from locapart.transfer.dynamics import (STATIONARY_SPAN, FlavorError,
                                        TimeSeries, correlation,
                                        default_times, propagate, site_series)


def _two_level(omega):
    """Return eigenpairs of diag(0, omega) and the swap operator."""
    eigen = (np.array([0.0, omega]), np.eye(2))
    swap = SubsystemOperator("A", np.array([[0.0, 1.0], [1.0, 0.0]]), "symmetrized")
    return eigen, swap


def test_propagate():
    rng = np.random.default_rng(21)
    raw = rng.normal(size=(5, 5))
    H = raw + raw.T
    eigen = linalg.eigh(H)
    c0 = rng.normal(size=5) + 1j * rng.normal(size=5)
    c0 /= np.linalg.norm(c0)
    times = np.linspace(0.0, 3.0, 7)
    cts = propagate(c0, eigen, times)
    assert cts.shape == (7, 5)
    assert np.allclose(cts[0], c0)
    assert np.allclose(np.linalg.norm(cts, axis=1), 1.0)
    for t, ct in zip(times, cts):
        assert np.allclose(ct, linalg.expm(-1j * H * t) @ c0)
    # an eigenstate only picks up a phase
    still = propagate(eigen[1][:, 2], eigen, times)
    assert np.allclose(np.abs(still @ eigen[1][:, 2]), 1.0)


def test_site_series():
    omega = 0.5
    eigen, swap = _two_level(omega)
    times = np.linspace(0.0, 40.0, 256)
    cts = propagate(np.array([1.0, 1.0]) / math.sqrt(2.0), eigen, times)
    pop = SubsystemOperator("A", np.eye(2), "population")
    series = site_series(cts, times, [swap], [pop])
    assert len(series) == 256
    assert np.allclose(series.energies["A"], np.cos(omega * times))
    assert np.allclose(series.populations["A"], 1.0)
    assert series.metadata["flavors"] == ["symmetrized"]
    assert list(series.columns()) == ["t_au", "E_A", "N_A", "E_total"]
    assert np.allclose(series.total, series.energies["A"])

    stationary = SubsystemOperator("A", np.array([[0.0, 1.0], [0.0, 0.0]]),
                                   "stationary")
    with pytest.raises(FlavorError):
        site_series(cts, times, [stationary])
    # an eigenstate may use the stationary flavor
    still = propagate(np.array([1.0, 0.0]), eigen, times)
    assert np.allclose(site_series(still, times, [stationary]).energies["A"], 0.0)
    with pytest.raises(FlavorError):
        site_series(cts, times, [pop])
    with pytest.raises(FlavorError):
        site_series(cts, times, [swap], [swap])


def test_reality_check():
    eigen, _ = _two_level(1.0)
    times = np.linspace(0.0, 5.0, 16)
    cts = propagate(np.array([1.0, 1.0j]) / math.sqrt(2.0), eigen, times)
    lopsided = SubsystemOperator("A", np.array([[0.0, 1.0], [0.0, 0.0]]),
                                 "symmetrized")
    with pytest.raises(RealityError):
        site_series(cts, times, [lopsided])


def test_default_times():
    evals = np.array([0.0, 0.25, 1.0])
    times = default_times(evals, [1.0, 1.0, 0.0], samples=3000, periods=2)
    assert len(times) == 4096
    assert times[0] == 0.0
    assert math.isclose(times[-1], 2 * 2.0 * math.pi / 0.25)
    # negligible weights do not set the span
    times = default_times(evals, [1.0, 1e-5, 1.0], samples=64, periods=1)
    assert math.isclose(times[-1], 2.0 * math.pi / 1.0)
    times = default_times(evals, [0.0, 1.0, 0.0], samples=16)
    assert math.isclose(times[-1], STATIONARY_SPAN)
    with pytest.raises(ValueError):
        default_times(evals, [1.0, 1.0, 1.0], samples=1)


def test_time_series():
    times = np.linspace(0.0, 20.0 * math.pi, 1024, endpoint=False)
    series = TimeSeries(times,
                        {"A": 1.0 + 0.5 * np.cos(2.0 * times),
                         "B": 1.0 - 0.5 * np.cos(2.0 * times)},
                        {"A": np.full(1024, 1.0), "B": np.full(1024, 1.0)},
                        {"ens_E_A": np.zeros(1024)})
    assert list(series.columns()) == ["t_au", "E_A", "E_B", "N_A", "N_B",
                                      "E_total", "ens_E_A"]
    assert np.allclose(series.total, 2.0)
    averages = series.averages()
    assert "t_au" not in averages
    assert math.isclose(averages["E_A"], 1.0, abs_tol=1e-12)
    assert math.isclose(series.amplitude("E_A"), 0.5, rel_tol=1e-3)
    freqs = series.dominant_frequencies("E_A")
    assert len(freqs) == 1
    assert math.isclose(freqs[0], 2.0, rel_tol=1e-9)
    assert series.dominant_frequencies("N_A") == []
    assert math.isclose(correlation(series.energies["A"], series.energies["B"]), -1.0)

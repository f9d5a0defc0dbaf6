"""
Coherent dynamics of many-body states and site time series

Interface Functions:
    propagate
    site_series
    default_times
    correlation

Interface Classes:
    TimeSeries

Exceptions:
    Error
    FlavorError
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from locapart.chem.subsystem import REALITY_TOL, RealityError
from locapart.util import clog2

_log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 4096
DEFAULT_PERIODS = 6

# Eigenstates with smaller weights do not set the default time span
WEIGHT_THRESHOLD = 1e-6

# Time span (atomic units) when the state has no Bohr frequency
STATIONARY_SPAN = 100.0


class Error(Exception):
    """An error happened while computing a time series."""


class FlavorError(Error):
    """An operator flavor is not valid for the requested evolution."""


def propagate(coefs, eigen, times):
    """Return the state coefficients at every time.

    Parameters
    ----------
    coefs : array_like
        Initial coefficients in the adapted basis.
    eigen : (numpy.ndarray, numpy.ndarray)
        Eigenvalues and orthonormal eigenvectors of the propagating
        Hamiltonian.
    times : array_like
        Times in atomic units.

    Returns
    -------
    numpy.ndarray
        Shape ``(ntimes, dim)``, complex.
    """
    evals, evecs = eigen
    times = np.asarray(times, dtype=float)
    amps = evecs.T @ np.asarray(coefs, dtype=complex)
    phases = np.exp(-1j * np.outer(times, evals))
    return (phases * amps) @ evecs.T


def _series(cts, op):
    vals = np.einsum("ti,ij,tj->t", np.conj(cts), op.matrix, cts)
    if op.is_symmetric:
        worst = np.abs(vals.imag).max()
        if worst > REALITY_TOL:
            fstr = "{} operator of region {!r} has imaginary expectation {:.3e}"
            raise RealityError(fstr.format(op.flavor, op.label, worst))
    return vals.real


def _is_stationary(cts, tol=1e-10):
    overlaps = np.abs(cts @ np.conj(cts[0]))
    return np.all(overlaps >= 1.0 - tol)


@dataclass
class TimeSeries:
    """Per-region energies and populations over a time grid.

    ``energies`` and ``populations`` map a region label to an array.
    ``ensemble`` maps extra column names (``ens_`` prefix) to arrays.
    """
    times: np.ndarray
    energies: dict
    populations: dict
    ensemble: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def total(self):
        """Return the sum of all region energies."""
        return sum(self.energies.values())

    def columns(self):
        """Return the ordered mapping of column name to values."""
        cols = {"t_au": self.times}
        for label, vals in self.energies.items():
            cols[f"E_{label}"] = vals
        for label, vals in self.populations.items():
            cols[f"N_{label}"] = vals
        cols["E_total"] = self.total
        cols.update(self.ensemble)
        return cols

    def averages(self):
        """Return the time average of every channel except time."""
        return {k: float(np.mean(v)) for k, v in self.columns().items()
                if k != "t_au"}

    def amplitude(self, name):
        """Return half the peak-to-peak range of a channel."""
        vals = self.columns()[name]
        return 0.5 * float(vals.max() - vals.min())

    def dominant_frequencies(self, name, rel_threshold=0.05):
        """Return the angular frequencies of the spectral peaks of a channel.

        Peaks are local maxima of the discrete Fourier magnitude that reach
        *rel_threshold* of the largest one, strongest first.
        """
        vals = self.columns()[name]
        vals = vals - vals.mean()
        mag = np.abs(np.fft.rfft(vals))
        dt = self.times[1] - self.times[0]
        freqs = 2.0 * math.pi * np.fft.rfftfreq(len(vals), dt)
        if mag.max() == 0.0:
            return []
        cutoff = rel_threshold * mag.max()
        peaks = []
        for k in range(1, len(mag)):
            left = mag[k - 1]
            right = mag[k + 1] if k + 1 < len(mag) else 0.0
            if mag[k] >= cutoff and mag[k] > left and mag[k] >= right:
                peaks.append((mag[k], freqs[k]))
        return [f for _, f in sorted(peaks, reverse=True)]


def correlation(x, y):
    """Return the Pearson correlation of two equally long series."""
    return float(np.corrcoef(x, y)[0, 1])


def site_series(cts, times, hamiltonians, populations=None):
    """Return the :class:`TimeSeries` of site energies and populations.

    Parameters
    ----------
    cts : numpy.ndarray
        Coefficients over time, from :func:`propagate`.
    times : array_like
    hamiltonians : sequence of SubsystemOperator
        Symmetrized (or, for a stationary state only, stationary) operators.
    populations : sequence of SubsystemOperator, optional

    Raises
    ------
    FlavorError
        A stationary operator was used on an evolving state.
    """
    stationary = None
    energies = {}
    for op in hamiltonians:
        if op.flavor == "stationary":
            if stationary is None:
                stationary = _is_stationary(cts)
            if not stationary:
                fstr = ("stationary operator of region {!r} needs an "
                        "eigenstate; use the symmetrized flavor")
                raise FlavorError(fstr.format(op.label))
        elif op.flavor != "symmetrized":
            fstr = "expected an energy operator, got flavor {!r}"
            raise FlavorError(fstr.format(op.flavor))
        energies[op.label] = _series(cts, op)
    pops = {}
    for op in populations or ():
        if op.flavor != "population":
            fstr = "expected a population operator, got flavor {!r}"
            raise FlavorError(fstr.format(op.flavor))
        pops[op.label] = _series(cts, op)
    flavors = sorted({op.flavor for op in hamiltonians})
    return TimeSeries(np.asarray(times, dtype=float), energies, pops,
                      metadata={"flavors": flavors})


def default_times(evals, weights, samples=DEFAULT_SAMPLES,
                  periods=DEFAULT_PERIODS):
    """Return a uniform time grid for a superposition of eigenstates.

    The grid spans *periods* periods of the smallest Bohr frequency among
    eigenstates of weight above :data:`WEIGHT_THRESHOLD`,
    with *samples* rounded up to a power of two.
    """
    if samples < 2:
        raise ValueError("expected samples >= 2")
    samples = 1 << clog2(samples)
    weights = np.abs(np.asarray(weights)) ** 2
    active = np.asarray(evals)[weights > WEIGHT_THRESHOLD]
    gaps = np.abs(active[:, None] - active[None, :])
    gaps = gaps[gaps > 1e-12]
    if gaps.size == 0:
        span = STATIONARY_SPAN
    else:
        span = periods * 2.0 * math.pi / gaps.min()
        nyquist = math.pi * (samples - 1) / span
        if gaps.max() > nyquist:
            _log.warning("time grid undersamples the largest Bohr frequency "
                         "(%.3g > %.3g)", gaps.max(), nyquist)
    return np.linspace(0.0, span, samples)

"""
Test vibronic site terms and ensemble dephasing
"""


import math

import numpy as np
import pytest

from locapart.transfer.decoherence import (DecoherenceParams, Error,
                                           H2Surfaces, SiteTerms,
                                           VibronicModel, averaged_energy,
                                           condon_delta, decoherence_series,
                                           vibronic_site_terms)


TERMS = SiteTerms("A", E_g=-0.6, E_e=-0.2, delta=0.05, N_g=1.0, N_e=1.0,
                  delta_N=0.02, omega=0.4, fc=0.9)


def test_model_errors():
    with pytest.raises(ValueError):
        VibronicModel(nu_g=0.0)
    with pytest.raises(ValueError):
        VibronicModel(mass=-1.0)
    with pytest.raises(ValueError):
        VibronicModel(nodes=0)
    with pytest.raises(ValueError):
        VibronicModel().chi("x", 1.4)
    with pytest.raises(ValueError):
        DecoherenceParams(sigma=-1.0)
    with pytest.raises(ValueError):
        DecoherenceParams(samples=0)
    # a very soft surface reaches unphysical bond lengths
    with pytest.raises(Error):
        VibronicModel(nu_g=1e-5, nu_e=1e-5).quadrature("g", "g")


def test_franck_condon():
    same = VibronicModel(r_eq_e=1.4, nu_e=0.020)
    assert math.isclose(same.franck_condon(), 1.0, rel_tol=1e-12)
    model = VibronicModel()
    ag = 0.5 * model.mass * model.nu_g
    ae = 0.5 * model.mass * model.nu_e
    ref = (math.sqrt(2.0 * math.sqrt(ag * ae) / (ag + ae))
           * math.exp(-ag * ae / (ag + ae) * (model.r_eq_e - model.r_eq_g) ** 2))
    assert math.isclose(model.franck_condon(), ref, rel_tol=1e-12)
    assert 0.0 < model.franck_condon() < 1.0
    assert model.r_eq_g < model.center("g", "e") < model.r_eq_e


def test_quadrature():
    model = VibronicModel()
    for si, sj in (("g", "g"), ("e", "e"), ("g", "e")):
        bonds, weights = model.quadrature(si, sj)
        total = np.sum(weights)
        ref = 1.0 if si == sj else model.franck_condon()
        assert math.isclose(total, ref, rel_tol=1e-7)
    # mean bond of the ground vibrational state
    bonds, weights = model.quadrature("g", "g")
    assert math.isclose(weights @ bonds, model.r_eq_g, rel_tol=1e-8)
    chi = model.chi("g", bonds)
    assert chi.shape == bonds.shape


def test_analytic_average():
    times = np.linspace(0.0, 100.0, 501)
    coherent = averaged_energy(TERMS, DecoherenceParams(sigma=0.0), times)
    assert math.isclose(coherent.mean[0], -0.4 + 0.05)
    assert np.allclose(coherent.mean, -0.4 + 0.05 * np.cos(0.4 * times))
    assert np.all(coherent.stderr == 0.0)
    damped = averaged_energy(TERMS, DecoherenceParams(sigma=0.05), times)
    assert math.isclose(damped.mean[0], coherent.mean[0])
    # the oscillation is gone after many envelope widths
    assert math.isclose(damped.mean[-1], -0.4, abs_tol=1e-6)
    # a micro-hartree spread fades out within a few million au
    late = averaged_energy(TERMS, DecoherenceParams(), np.array([0.0, 4e6]))
    assert abs(late.mean[1] + 0.4) <= 0.05 * abs(late.mean[0] + 0.4)
    pops = averaged_energy(TERMS, DecoherenceParams(sigma=0.0), times,
                           channel="population")
    assert np.allclose(pops.mean, 1.0 + 0.02 * np.cos(0.4 * times))
    with pytest.raises(ValueError):
        averaged_energy(TERMS, DecoherenceParams(), -times)
    with pytest.raises(ValueError):
        averaged_energy(TERMS, DecoherenceParams(), times, method="exact")
    with pytest.raises(ValueError):
        averaged_energy(TERMS, DecoherenceParams(), times, channel="spin")


def test_montecarlo_average():
    times = np.linspace(0.0, 100.0, 201)
    params = DecoherenceParams(sigma=0.02, samples=20000, seed=5)
    sampled = averaged_energy(TERMS, params, times, method="montecarlo")
    exact = averaged_energy(TERMS, params, times)
    assert sampled.stderr[0] == 0.0
    # Bound holds jointly over 200 sampled times; 3 stderr per point would
    # miss at least one of them for roughly 40% of seeds.
    assert np.all(np.abs(sampled.mean - exact.mean) <= 6.0 * sampled.stderr + 1e-12)
    again = averaged_energy(TERMS, params, times, method="montecarlo")
    assert np.array_equal(sampled.mean, again.mean)


def test_decoherence_series():
    times = np.linspace(0.0, 50.0, 64)
    terms = {"A": TERMS, "B": SiteTerms("B", -0.6, -0.2, -0.05, 1.0, 1.0,
                                        -0.02, 0.4, 0.9)}
    series = decoherence_series(terms, DecoherenceParams(sigma=0.1), times)
    cols = series.columns()
    assert list(cols) == ["t_au", "E_A", "E_B", "N_A", "N_B", "E_total",
                          "ens_E_A", "ens_E_B", "ens_N_A", "ens_N_B",
                          "ens_envelope"]
    assert np.allclose(series.total, -0.8)
    assert np.allclose(cols["ens_envelope"], np.exp(-0.005 * times ** 2))
    assert series.metadata == {"sigma": 0.1, "method": "analytic", "seed": 0}
    mc = decoherence_series(terms, DecoherenceParams(sigma=0.1, samples=100),
                            times, "montecarlo")
    assert "ens_E_A_se" in mc.ensemble
    assert "ens_N_A_se" not in mc.ensemble


def test_h2_site_terms():
    model = VibronicModel(nodes=2)
    surfaces = H2Surfaces("sto-3g", "coarse")
    A = vibronic_site_terms(model, surfaces, "A")
    B = vibronic_site_terms(model, surfaces, "B")
    # mirror symmetry of H2
    assert math.isclose(A.E_g, B.E_g, abs_tol=1e-8)
    assert math.isclose(A.E_e, B.E_e, abs_tol=1e-8)
    assert math.isclose(A.delta, -B.delta, abs_tol=1e-8)
    assert math.isclose(A.delta_N, -B.delta_N, abs_tol=1e-8)
    assert abs(A.delta) > 1e-3
    assert math.isclose(A.N_g, 1.0, abs_tol=1e-2)
    assert A.omega > 0.0
    assert A.E_e > A.E_g
    assert math.isclose(A.fc, model.franck_condon())
    assert math.isclose(condon_delta(model, surfaces, "A"), A.delta, rel_tol=0.1)
    point = surfaces.point(model.r_eq_g)
    assert point.vectors.shape[1] == 2
    assert point.energies[0] < point.energies[1]


def test_track_nearest_neighbour(monkeypatch):
    surfaces = H2Surfaces("sto-3g", "coarse")
    surfaces.track([1.2, 1.6])
    calls = []
    follow = H2Surfaces._follow

    def record(self, chain, start):
        calls.append((list(chain), start))
        follow(self, chain, start)

    monkeypatch.setattr(H2Surfaces, "_follow", record)
    tracked = surfaces.track([1.0, 1.3, 1.5, 1.8])
    assert sorted(c for c in calls if c[0]) == [([1.0], 1.2), ([1.3], 1.2),
                                                ([1.5], 1.6), ([1.8], 1.6)]
    monkeypatch.undo()

    fresh = H2Surfaces("sto-3g", "coarse").track([1.0, 1.2, 1.3, 1.5, 1.6, 1.8])
    bonds = sorted(tracked)
    assert bonds == sorted(fresh)
    # one global sign per state between the two runs
    sign = np.sign(np.sum(tracked[1.2].vectors * fresh[1.2].vectors, axis=0))
    for bond in bonds:
        assert np.allclose(tracked[bond].vectors, sign * fresh[bond].vectors,
                           atol=1e-8)
    for near, far in zip(bonds, bonds[1:]):
        ovl = np.sum(tracked[near].vectors * tracked[far].vectors, axis=0)
        assert np.all(ovl > 0.5)

"""Eigensolver, Weyl counting, model fitting, and the inverse pipeline."""

import math

import numpy as np
import pytest

from bnflab import (
    Frequencies,
    PotentialJet,
    SpectrumSample,
    builtin_potential,
    eigensolve,
    eigensolve_many,
    fit_model_from_spectra,
    model_eigenvalue,
    pipeline_invert,
    potential_function,
    quantum_normal_form,
    weyl_count,
)
from bnflab.errors import (
    AmbiguousLabels,
    BoxTooSmall,
    GridConvergenceError,
    RankDeficientFit,
)
from bnflab.exactnum import Q

from conftest import quartic_oscillator_levels


def harmonic_V():
    jet, omega = builtin_potential("harmonic1d")
    return potential_function(jet, omega.values)


def quartic_V():
    jet, omega = builtin_potential("quartic1d")
    return potential_function(jet, omega.values)


# ---------------------------------------------------------------------------
# eigensolve
# ---------------------------------------------------------------------------

def test_harmonic_1d_levels():
    sample = eigensolve(harmonic_V(), 0.1, dim=1, box_halfwidth=4.0,
                        grid_points=4000, count=6)
    exact = 0.1 * (2 * np.arange(6) + 1)
    assert np.abs(sample.energies - exact).max() < 1e-6
    assert sample.meta["refinement_drift"] < 2e-5


def test_harmonic_2d_separable_levels():
    omega = (1.0, math.sqrt(2.0))
    V = potential_function(PotentialJet(2, {}), omega)
    sample = eigensolve(V, 0.1, dim=2, box_halfwidth=4.0, grid_points=180,
                        count=6)
    preds = sorted(0.1 * (w1 * (2 * k1 + 1) + w2 * (2 * k2 + 1))
                   for w1 in [1.0] for w2 in [math.sqrt(2.0)]
                   for k1 in range(5) for k2 in range(5))[:6]
    assert np.abs(sample.energies - np.array(preds)).max() < 5e-3


def test_quartic_ground_state_matches_model(unit_numeric_1d, quartic_jet):
    pieces = quantum_normal_form(quartic_jet, unit_numeric_1d, 6, 2)
    sample = eigensolve(quartic_V(), 0.1, dim=1, box_halfwidth=3.5,
                        grid_points=6000, count=1)
    model = model_eigenvalue(pieces, (0,), 0.1)
    assert abs(sample.energies[0] - model) < 1e-3


def test_discretization_second_order():
    """Eigenvalue error drops about 4x per grid doubling."""
    exact = 0.1 * (2 * np.arange(4) + 1)
    errs = []
    for grid in (500, 1000, 2000):
        sample = eigensolve(harmonic_V(), 0.1, dim=1, box_halfwidth=4.0,
                            grid_points=grid, count=4)
        errs.append(np.abs(sample.energies - exact).max())
    for a, b in zip(errs, errs[1:]):
        assert 3.0 < a / b < 5.0


def test_eigensolve_validation_and_refine_tol():
    with pytest.raises(ValueError):
        eigensolve(harmonic_V(), -0.1)
    with pytest.raises(ValueError):
        eigensolve(harmonic_V(), 0.1, dim=3)
    with pytest.raises(ValueError):
        eigensolve(harmonic_V(), 0.1, grid_points=100, count=80)
    with pytest.raises(GridConvergenceError):
        eigensolve(harmonic_V(), 0.1, grid_points=300, count=4,
                   refine_tol=1e-12)


def test_eigensolve_many_parallel_matches_serial():
    hbars = [0.1, 0.05]
    serial = eigensolve_many(harmonic_V(), hbars, workers=1,
                             dim=1, box_halfwidth=4.0, grid_points=1000,
                             count=4)
    parallel = eigensolve_many(harmonic_V(), hbars, workers=2,
                               dim=1, box_halfwidth=4.0, grid_points=1000,
                               count=4)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.energies, b.energies)


def test_spectrum_sample_validation():
    with pytest.raises(ValueError):
        SpectrumSample(0.1, np.array([]))
    with pytest.raises(ValueError):
        SpectrumSample(0.1, np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        SpectrumSample(-0.1, np.array([1.0]))


# ---------------------------------------------------------------------------
# weyl_count
# ---------------------------------------------------------------------------

def test_weyl_harmonic_fine():
    sample = eigensolve(harmonic_V(), 0.01, dim=1, box_halfwidth=4.0,
                        grid_points=4000, count=60)
    count, prediction, ratio = weyl_count(harmonic_V(), 1.0, 0.01, sample)
    assert count == 50
    assert abs(prediction - 50.0) < 0.01
    assert abs(ratio - 1.0) < 1e-3


def test_weyl_harmonic_coarse():
    sample = eigensolve(harmonic_V(), 0.1, dim=1, box_halfwidth=4.0,
                        grid_points=2000, count=10)
    count, prediction, ratio = weyl_count(harmonic_V(), 1.0, 0.1, sample)
    assert count == 5
    assert abs(ratio - 1.0) < 0.1


def test_weyl_quartic():
    sample = eigensolve(quartic_V(), 0.005, dim=1, box_halfwidth=3.0,
                        grid_points=6000, count=60)
    count, prediction, ratio = weyl_count(quartic_V(), 0.5, 0.005, sample)
    assert abs(ratio - 1.0) < 0.05


def test_weyl_guards():
    sample = eigensolve(harmonic_V(), 0.1, dim=1, box_halfwidth=4.0,
                        grid_points=1000, count=4)
    with pytest.raises(ValueError):
        weyl_count(harmonic_V(), 2.0, 0.1, sample)   # not exhausted
    small = eigensolve(harmonic_V(), 0.1, dim=1, box_halfwidth=0.8,
                       grid_points=1000, count=4)
    with pytest.raises(BoxTooSmall):
        weyl_count(harmonic_V(), 1.0, 0.1, small)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _synthetic_samples(pieces, hbars, count):
    out = []
    for hbar in hbars:
        es = sorted(model_eigenvalue(pieces, (k,), hbar)
                    for k in range(count))
        out.append(SpectrumSample(hbar, np.array(es), {"dim": 1}))
    return out


def test_fit_recovers_its_generator(unit_numeric_1d, quartic_jet):
    pieces = quantum_normal_form(quartic_jet, unit_numeric_1d, 4, 2)
    samples = _synthetic_samples(pieces, (0.2, 0.1, 0.05, 0.025), 8)
    fitted = fit_model_from_spectra(samples, 1, Frequencies.numeric([1.0]),
                                    4, 2)
    assert abs(fitted.coefficients[(0, (2,))] - 0.375) < 1e-8
    assert abs(fitted.coefficients[(2, (0,))] - 0.375) < 1e-8
    assert abs(fitted.coefficients[(0, (1,))] - 1.0) < 1e-9
    assert fitted.residual_norm < 1e-9


def test_fit_quartic_spectra_leading_coefficient():
    V = quartic_V()
    samples = eigensolve_many(V, [0.2, 0.1, 0.05, 0.025], dim=1,
                              box_halfwidth=3.5, grid_points=6000, count=8)
    fitted = fit_model_from_spectra(samples, 1, Frequencies.numeric([1.0]),
                                    6, 2, max_k=5)
    assert abs(fitted.coefficients[(0, (2,))] - 0.375) < 1e-3


def test_fit_guards():
    pieces = [None]
    samples = _synthetic_samples(
        quantum_normal_form(PotentialJet(1, {}),
                            Frequencies.numeric([Q(1)]), 4, 0),
        (0.2, 0.1, 0.05), 3)
    with pytest.raises(RankDeficientFit):
        fit_model_from_spectra(samples, 1, Frequencies.numeric([1.0]), 8, 4)
    with pytest.raises(ValueError):
        fit_model_from_spectra(samples[:2], 1, Frequencies.numeric([1.0]),
                               4, 2)
    # near-coincident harmonic predictions are rejected
    close = Frequencies.numeric([1.0, 1.0 + 1e-9])
    V2 = potential_function(PotentialJet(2, {}), close.values)
    s2 = [SpectrumSample(h, np.array([h * (2 + 2e-9) * (k + 1)
                                      for k in range(6)]), {"dim": 2})
          for h in (0.2, 0.1, 0.05)]
    with pytest.raises(AmbiguousLabels):
        fit_model_from_spectra(s2, 2, close, 4, 2)


def test_pipeline_harmonic_empty(unit_numeric_1d):
    pieces = quantum_normal_form(PotentialJet(1, {}), unit_numeric_1d, 4, 2)
    samples = _synthetic_samples(pieces, (0.2, 0.1, 0.05, 0.025), 8)
    jet, diag = pipeline_invert(samples, Frequencies.numeric([1.0]), 4, 2)
    assert all(abs(c) < 1e-6 for c in jet.terms.values())


def test_pipeline_quartic_recovery():
    V = quartic_V()
    samples = eigensolve_many(V, [0.2, 0.1, 0.05, 0.025], dim=1,
                              box_halfwidth=3.5, grid_points=6000, count=8)
    jet, diag = pipeline_invert(samples, Frequencies.numeric([1.0]), 6, 2,
                                max_k=5)
    assert abs(jet.terms[(2,)] - 1.0) < 5e-3
    assert diag["fit_residual"] < 0.01


def test_pipeline_sextic_term():
    omega = Frequencies.numeric([1.0])
    jet_in = PotentialJet(1, {(2,): Q(1), (3,): Q(1, 10)})
    V = potential_function(jet_in, omega.values)
    samples = eigensolve_many(V, [0.2, 0.1, 0.05, 0.025], dim=1,
                              box_halfwidth=3.0, grid_points=6000, count=8)
    jet, _ = pipeline_invert(samples, omega, 6, 2, max_k=5)
    assert abs(jet.terms[(2,)] - 1.0) < 5e-3
    assert abs(jet.terms[(3,)] - 0.1) < 0.02


def test_pipeline_2d_coupling():
    jet_in, omega = builtin_potential("coupled2d")
    V = potential_function(jet_in, omega.values)
    samples = eigensolve_many(V, [0.2, 0.1, 0.05], dim=2,
                              box_halfwidth=4.0, grid_points=220, count=12)
    jet, _ = pipeline_invert(samples, omega, 4, 2)
    assert abs(jet.terms[(1, 1)] - 0.1) < 5e-3 * 1.0

"""Smoothed spectral traces and their small-hbar expansion.

The central object is the cutoff sum  sum_j psi(E_j / eps) e^(-i t E_j / hbar)
over low-lying eigenvalues, evaluated either on a computed spectrum or on
the eigenvalue lattice of a normal-form model.  For harmonic frequencies
the leading expansion coefficient has the closed form
prod_j 1 / (2i sin(omega_j t)), which anchors the numerical checks.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import IllConditionedLadder, ResonantTime, TruncatedSpectrum
from .phasepoly import ActionPoly, Frequencies
from .quantum import model_eigenvalue
from .spectral import SpectrumSample

RESONANCE_SIN_TOL = 1e-9


def bump(s):
    """Standard smooth cutoff: 1 for s <= 1/2, 0 for s >= 1.

    The transition glues the exponential mollifier m(t) = exp(-1/t):
    psi(s) = m(1 - s) / (m(1 - s) + m(s - 1/2)), monotone nonincreasing.
    """
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    out[s >= 1.0] = 0.0
    mid = (s > 0.5) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        m1 = np.exp(-1.0 / (1.0 - sm))
        m2 = np.exp(-1.0 / (sm - 0.5))
        out[mid] = m1 / (m1 + m2)
    if out.ndim == 0:
        return float(out)
    return out


def trace_spectrum(sample: SpectrumSample, t: float, epsilon: float) -> complex:
    """Cutoff trace sum over a computed spectrum.

    Requires the sample to exhaust [0, epsilon]: every eigenvalue below the
    cutoff must be present, i.e. the top stored level must reach epsilon.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    energies = sample.energies
    if energies[-1] < epsilon:
        raise TruncatedSpectrum(
            f"sample reaches only E = {energies[-1]:.6g} < epsilon = "
            f"{epsilon}; compute more levels")
    weights = bump(energies / epsilon)
    phases = np.exp(-1j * t * energies / sample.hbar)
    return complex(np.sum(weights * phases))


def _lattice_energies(p: Sequence[ActionPoly], hbar: float, epsilon: float,
                      margin: float) -> np.ndarray:
    """Model eigenvalues on the label lattice reaching past the cutoff."""
    p0 = p[0]
    n = p0.n
    linear = [0.0] * n
    for m, c in p0.terms.items():
        if sum(m) == 1:
            i = m.index(1)
            from .phasepoly import coeff_to_complex
            linear[i] = coeff_to_complex(c).real
    if any(w <= 0 for w in linear):
        raise ValueError("model needs a positive-definite linear part "
                         "to make the cutoff lattice sum finite")
    emax = epsilon * margin
    bounds = []
    base = sum(linear) * hbar
    for i in range(n):
        bounds.append(max(0, int((emax - base) / (2 * linear[i] * hbar))) + 1)
    energies = []

    def rec(prefix, cost):
        i = len(prefix)
        if i == n:
            energies.append(model_eigenvalue(p, tuple(prefix), hbar))
            return
        k = 0
        while cost + 2 * linear[i] * k * hbar <= emax:
            rec(prefix + [k], cost + 2 * linear[i] * k * hbar)
            k += 1

    rec([], base)
    return np.asarray(energies, dtype=float)


def trace_model(p: Sequence[ActionPoly], t: float, hbar: float,
                epsilon: float, margin: float = 1.5) -> complex:
    """Cutoff trace sum over the model eigenvalue lattice.

    Enumerates labels whose harmonic prediction stays below epsilon times a
    guard margin, evaluates the model there, and sums the same weighted
    phases as trace_spectrum.
    """
    if epsilon <= 0 or hbar <= 0:
        raise ValueError("epsilon and hbar must be positive")
    energies = _lattice_energies(p, hbar, epsilon, margin)
    weights = bump(energies / epsilon)
    phases = np.exp(-1j * t * energies / hbar)
    return complex(np.sum(weights * phases))


def harmonic_leading(omega: Frequencies, t: float) -> complex:
    """Leading expansion coefficient prod_j 1 / (2i sin(omega_j t)).

    Valid for t away from the periods of the harmonic flow; resonance is
    flagged per frequency through |sin(omega_j t)|.
    """
    if omega.is_symbolic:
        raise ValueError("harmonic_leading needs numeric frequencies")
    out = complex(1.0)
    for w in omega.float_values():
        s = math.sin(w * t)
        if abs(s) < RESONANCE_SIN_TOL:
            raise ResonantTime(w, t)
        out *= 1.0 / (2j * s)
    return out


def fit_expansion(traces: Sequence[tuple], t: float, order: int):
    """Least-squares fit of tr(t, hbar) ~ sum_{l <= order} a_l(t) hbar^l.

    traces is a list of (hbar, complex value) pairs on a geometric-ish
    ladder; needs at least order + 2 distinct hbar values with consecutive
    ratios bounded away from 1.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    hbars = np.asarray([h for h, _ in traces], dtype=float)
    values = np.asarray([v for _, v in traces], dtype=complex)
    if len(set(hbars.tolist())) < order + 2:
        raise ValueError(f"need at least {order + 2} distinct hbar values "
                         f"for order {order}")
    ratios = np.sort(hbars)[1:] / np.sort(hbars)[:-1]
    if np.any(ratios < 1.02):
        raise IllConditionedLadder(
            f"hbar ladder ratio {ratios.min():.4f} too close to 1")
    design = np.vander(hbars, order + 1, increasing=True)
    sol, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < order + 1:
        raise IllConditionedLadder("expansion orders are not separated by "
                                   "the hbar ladder")
    residual = float(np.linalg.norm(design @ sol - values))
    return sol, residual

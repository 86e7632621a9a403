"""Shared helpers: independent oracles used across test modules."""

import math

import numpy as np
import pytest

from bnflab import Frequencies, PotentialJet
from bnflab.exactnum import Q


def weyl_matrix(real_terms, hbar, size):
    """Weyl quantization of a 1D polynomial symbol on a truncated basis.

    real_terms maps ((x_power,), (xi_power,)) to a numeric coefficient.
    Uses the symmetrization W(x^m xi^n) = 2^-n sum_r C(n,r) P^r X^m P^(n-r)
    with ladder-operator matrices X, P satisfying [X, P] = i hbar.
    This oracle is independent of the package's symbol algebra.
    """
    a = np.diag(np.sqrt(np.arange(1, size)), 1)
    X = np.sqrt(hbar / 2.0) * (a + a.T)
    P = -1j * np.sqrt(hbar / 2.0) * (a - a.T)
    out = np.zeros((size, size), dtype=complex)
    for (xe, ke), c in real_terms.items():
        m, n = xe[0], ke[0]
        Xm = np.linalg.matrix_power(X, m)
        term = np.zeros_like(out)
        for r in range(n + 1):
            term += (math.comb(n, r)
                     * np.linalg.matrix_power(P, r)
                     @ Xm
                     @ np.linalg.matrix_power(P, n - r))
        out += complex(c) * term / 2.0 ** n
    return out


def quartic_oscillator_levels(hbar, size=600, count=8):
    """Eigenvalues of p^2 + x^2 + x^4 via a truncated Hermite basis."""
    a = np.diag(np.sqrt(np.arange(1, size)), 1)
    X = np.sqrt(hbar / 2.0) * (a + a.T)
    H = np.diag(hbar * (2.0 * np.arange(size) + 1.0)) \
        + np.linalg.matrix_power(X, 4)
    return np.linalg.eigvalsh(H)[:count]


@pytest.fixture
def quartic_jet():
    return PotentialJet(1, {(2,): Q(1)})


@pytest.fixture
def symbolic_1d():
    return Frequencies.symbolic(1)


@pytest.fixture
def unit_numeric_1d():
    return Frequencies.numeric([Q(1)])

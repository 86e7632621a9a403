"""Birkhoff normal forms of Schrodinger-type Hamiltonians.

Exact sparse phase-space polynomial algebra, the forward normal-form
induction and its inverse (recovering the potential's Taylor series),
a semiclassical normal form at the symbol level, and numerical
validation tools: eigensolvers, Weyl counts, model fitting, and
smoothed spectral traces.
"""

from .classical import (
    MetricJet,
    NormalForm,
    PotentialJet,
    classical_bnf,
    exp_ad,
    hamiltonian_poly,
    jet_from_normal_coordinates,
    jet_to_normal_coordinates,
    normalize_quadratic,
    solve_homological,
    verify_conjugation,
)
from .errors import (
    AmbiguousLabels,
    BoxTooSmall,
    GridConvergenceError,
    IllConditionedLadder,
    MathError,
    NonRepresentableScaling,
    RankDeficientFit,
    ResonantInput,
    ResonantTime,
    SmallDivisor,
    TruncatedSpectrum,
)
from .exactnum import GaussianRational, Q, Scalar, as_rational
from .inverse import artifact_term, diagonal_weight, recover_potential
from .phasepoly import (
    ActionPoly,
    Frequencies,
    PhasePoly,
    complex_to_real,
    diagonal_part,
    harmonic_oscillator,
    poisson_bracket,
    real_to_complex,
    scalar_div_linear_form,
)
from .quantum import (
    SemiclassicalJet,
    action_star_power,
    conjugate_graded,
    model_eigenvalue,
    moyal_bracket,
    moyal_star,
    quantum_normal_form,
    substitute_frequencies,
)
from .spectral import (
    FittedModel,
    SpectrumSample,
    builtin_potential,
    eigensolve,
    eigensolve_many,
    fit_model_from_spectra,
    pipeline_invert,
    potential_function,
    weyl_count,
)
from .traces import (
    bump,
    fit_expansion,
    harmonic_leading,
    trace_model,
    trace_spectrum,
)

__version__ = "0.1.0"

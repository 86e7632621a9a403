"""Forward normal form: homological solves, Lie series, full induction."""

import math
import random

import numpy as np
import pytest
from scipy import integrate

from bnflab import (
    ActionPoly,
    Frequencies,
    MetricJet,
    PhasePoly,
    PotentialJet,
    classical_bnf,
    exp_ad,
    harmonic_oscillator,
    normalize_quadratic,
    poisson_bracket,
    real_to_complex,
    solve_homological,
    verify_conjugation,
)
from bnflab.errors import NonRepresentableScaling, SmallDivisor
from bnflab.exactnum import GaussianRational, Q, Scalar
from bnflab.randjets import random_case, random_potential_jet


def test_jet_validation():
    with pytest.raises(ValueError):
        PotentialJet(1, {(1,): Q(1)})        # below quartic order
    with pytest.raises(ValueError):
        PotentialJet(2, {(2,): Q(1)})        # wrong index length
    with pytest.raises(ValueError):
        PotentialJet(1, {(3,): Q(1)}, max_half_degree=2)
    jet = PotentialJet(1, {(2,): Q(1), (3,): Q(0)})
    assert dict(jet.terms) == {(2,): Q(1)}   # zero terms dropped


def test_metric_validation():
    with pytest.raises(ValueError):
        MetricJet(2, {(0, 0, (0, 0)): Q(1)})  # must vanish at origin
    # symmetric entries collapse onto one triangle
    m = MetricJet(2, {(0, 1, (1, 0)): Q(1), (1, 0, (1, 0)): Q(2)})
    assert dict(m.terms) == {(0, 1, (1, 0)): Q(3)}


# ---------------------------------------------------------------------------
# solve_homological
# ---------------------------------------------------------------------------

def test_solve_homological_quartic_values(symbolic_1d):
    r = real_to_complex({((4,), (0,)): 1}, symbolic_1d)
    gen, act = solve_homological(r, symbolic_1d)
    assert act == ActionPoly(1, {(2,): Scalar.from_rational(Q(3, 8), 1)})
    inv_w = Scalar.from_rational(1, 1).div_form((1,))
    want = {
        ((4,), (0,)): inv_w.scale(Q(1, 128)).mul_imag(1),
        ((3,), (1,)): inv_w.scale(Q(1, 16)).mul_imag(1),
        ((1,), (3,)): inv_w.scale(Q(1, 16)).mul_imag(-1),
        ((0,), (4,)): inv_w.scale(Q(1, 128)).mul_imag(-1),
    }
    assert gen == PhasePoly(1, want)
    assert gen.real_valued() and gen.even_symmetric
    assert gen.diagonal_part().is_zero


def test_solve_homological_diagonal_input(symbolic_1d):
    r = PhasePoly(1, {((2,), (2,)): Scalar.from_rational(Q(5, 3), 1)})
    gen, act = solve_homological(r, symbolic_1d)
    assert gen.is_zero
    assert act.embed() == r


def test_solve_homological_product_case():
    omega = Frequencies.symbolic(2)
    r = real_to_complex({((2, 2), (0, 0)): 1}, omega)
    gen, act = solve_homological(r, omega)
    assert act == ActionPoly(2, {(1, 1): Scalar.from_rational(Q(1, 4), 2)})
    assert len(gen.terms) == 8
    assert gen.diagonal_part().is_zero
    # defining identity
    h1 = harmonic_oscillator(omega)
    assert (poisson_bracket(h1, gen) + act.embed() - r).is_zero


def test_solve_homological_rejects_bad_input(symbolic_1d):
    odd = PhasePoly(1, {((2,), (1,)): Scalar.from_rational(1, 1)})
    with pytest.raises(ValueError):
        solve_homological(odd, symbolic_1d)
    mixed = PhasePoly(1, {((1,), (1,)): Scalar.from_rational(1, 1),
                          ((2,), (2,)): Scalar.from_rational(1, 1)})
    with pytest.raises(ValueError):
        solve_homological(mixed, symbolic_1d)


def test_solve_homological_small_divisor():
    omega = Frequencies.numeric([1.0, 1.0 + 1e-13], resonance_tol=1e-9)
    r = PhasePoly(2, {((2, 0), (0, 2)): complex(1.0),
                      ((0, 2), (2, 0)): complex(1.0)})
    with pytest.raises(SmallDivisor):
        solve_homological(r, omega)


# ---------------------------------------------------------------------------
# exp_ad
# ---------------------------------------------------------------------------

def test_exp_ad_commuting_pair(symbolic_1d):
    h1 = harmonic_oscillator(symbolic_1d)
    diag = PhasePoly(1, {((2,), (2,)): Scalar.from_rational(1, 1)})
    assert exp_ad(diag, h1, 8) == h1


def test_exp_ad_first_order_identity(symbolic_1d, quartic_jet):
    r2 = real_to_complex(quartic_jet.real_terms(), symbolic_1d)
    gen, act = solve_homological(r2, symbolic_1d)
    h1 = harmonic_oscillator(symbolic_1d)
    assert exp_ad(gen, h1, 4) == h1 - r2 + act.embed()


def test_exp_ad_second_order_term(symbolic_1d, quartic_jet):
    r2 = real_to_complex(quartic_jet.real_terms(), symbolic_1d)
    gen, act = solve_homological(r2, symbolic_1d)
    h1 = harmonic_oscillator(symbolic_1d)
    series = exp_ad(gen, h1, 6)
    cascade = poisson_bracket(gen, act.embed() - r2).scale(Q(1, 2))
    assert series.homogeneous_part(6) == cascade.homogeneous_part(6)


def test_exp_ad_validates_generator(symbolic_1d):
    h1 = harmonic_oscillator(symbolic_1d)
    quad = PhasePoly(1, {((2,), (0,)): Scalar.from_rational(1, 1)})
    with pytest.raises(ValueError):
        exp_ad(quad, h1, 6)
    mixed = PhasePoly(1, {((4,), (0,)): Scalar.from_rational(1, 1),
                          ((3,), (3,)): Scalar.from_rational(1, 1)})
    with pytest.raises(ValueError):
        exp_ad(mixed, h1, 6)


# ---------------------------------------------------------------------------
# classical_bnf
# ---------------------------------------------------------------------------

def test_bnf_quartic_leading_coefficient(symbolic_1d):
    for c in (Q(1), Q(3, 7), Q(-2, 5)):
        nf = classical_bnf(PotentialJet(1, {(2,): c}), symbolic_1d, order=2)
        want = Scalar.from_rational(c * Q(3, 8), 1)
        assert nf.actions[2] == ActionPoly(1, {(2,): want})


def test_bnf_empty_jet(symbolic_1d):
    nf = classical_bnf(PotentialJet(1, {}), symbolic_1d, order=5)
    assert all(nf.actions[i].is_zero for i in range(2, 6))
    assert all(nf.generators[i].is_zero for i in range(2, 6))


def test_bnf_metric_example():
    omega = Frequencies.symbolic(2)
    metric = MetricJet(2, {(0, 0, (0, 1)): Q(1)})
    nf = classical_bnf(PotentialJet(2, {}), omega, metric=metric, order=2)
    want = Scalar.from_rational(Q(1, 4), 2)
    assert nf.actions[2] == ActionPoly(2, {(1, 1): want})


def test_bnf_order_exceeds_jet_data(symbolic_1d):
    jet = PotentialJet(1, {(2,): Q(1)}, max_half_degree=3)
    with pytest.raises(ValueError):
        classical_bnf(jet, symbolic_1d, order=4)
    classical_bnf(jet, symbolic_1d, order=3)   # allowed at the boundary


def test_bnf_homological_identities(symbolic_1d, quartic_jet):
    nf = classical_bnf(quartic_jet, symbolic_1d, order=5)
    h1 = harmonic_oscillator(symbolic_1d)
    for i in range(2, 6):
        lhs = (poisson_bracket(h1, nf.generators[i])
               + nf.actions[i].embed() - nf.remainders[i])
        assert lhs.is_zero
        assert nf.generators[i].diagonal_part().is_zero
        assert nf.remainders[i].even_symmetric
        assert nf.actions[i].real_valued()


def test_bnf_artifact_terms_recorded(symbolic_1d, quartic_jet):
    nf = classical_bnf(quartic_jet, symbolic_1d, order=4)
    assert nf.artifacts[2].is_zero            # first step has no carry-over
    assert not nf.artifacts[3].is_zero
    direct3 = nf.remainders[3] - nf.artifacts[3]
    assert direct3.is_zero                    # x^4 jet has no degree-6 part


def test_verify_conjugation_zero_and_tamper(symbolic_1d, quartic_jet):
    nf = classical_bnf(quartic_jet, symbolic_1d, order=4)
    assert verify_conjugation(nf, quartic_jet).is_zero
    # perturb one action coefficient: residual must become nonzero
    tampered = nf.actions[3].scale(Q(2))
    nf.actions[3] = tampered
    assert not verify_conjugation(nf, quartic_jet).is_zero


def test_verify_conjugation_float_mode():
    omega = Frequencies.numeric([1.0, math.sqrt(2.0)])
    jet = PotentialJet(2, {(2, 0): 0.3, (1, 1): -0.2, (0, 2): 0.15,
                           (2, 2): 0.05})
    nf = classical_bnf(jet, omega, order=4)
    res = verify_conjugation(nf, jet)
    worst = max((abs(c) for c in res.terms.values()), default=0.0)
    assert worst < 1e-9


def test_permutation_equivariance():
    rng = random.Random(41)
    for _ in range(5):
        n = rng.choice([2, 3])
        jet = random_potential_jet(rng, n, 3)
        omega = Frequencies.symbolic(n)
        sigma = list(range(n))
        rng.shuffle(sigma)
        nf = classical_bnf(jet, omega, order=3)
        nf_p = classical_bnf(jet.permute(sigma), omega, order=3)
        for i in range(2, 4):
            mapped = nf.actions[i].permute(sigma)
            mapped = mapped.map_coefficients(
                lambda c: _permute_scalar(c, sigma))
            assert nf_p.actions[i] == mapped


def _permute_scalar(c, sigma):
    num = {tuple(e[sigma[i]] for i in range(len(sigma))): v
           for e, v in c.num.items()}
    forms = tuple(tuple(f[sigma[i]] for i in range(len(sigma)))
                  for f in c.forms)
    out = Scalar(c.nvars, num)
    for f in forms:
        out = out.div_form(f)
    return out


def test_scaling_covariance(symbolic_1d):
    # first-appearing action term is linear in the jet coefficient
    base = classical_bnf(PotentialJet(1, {(3,): Q(1)}), symbolic_1d, order=3)
    scaled = classical_bnf(PotentialJet(1, {(3,): Q(7, 2)}), symbolic_1d,
                           order=3)
    assert scaled.actions[3] == base.actions[3].scale(Q(7, 2))


# ---------------------------------------------------------------------------
# action-angle oracle: the 1D normal form is the energy as a function of
# the action, computable independently by quadrature
# ---------------------------------------------------------------------------

def quartic_action(E):
    """s = 2J with J the classical action of xi^2 + x^2 + x^4 at energy E."""
    xt = math.sqrt((-1 + math.sqrt(1 + 4 * E)) / 2)

    def integrand(theta):
        x = xt * math.sin(theta)
        return math.sqrt(max(E - x * x - x ** 4, 0.0)) * xt * math.cos(theta)

    val, _ = integrate.quad(integrand, -math.pi / 2, math.pi / 2,
                            limit=400, epsabs=1e-14, epsrel=1e-13)
    return 2.0 * val / math.pi


def test_bnf_matches_action_quadrature(symbolic_1d, quartic_jet):
    """Freeze H_2..H_4 against an action-angle quadrature oracle."""
    nf = classical_bnf(quartic_jet, symbolic_1d, order=4)
    series = [1.0]
    for i in range(2, 5):
        c = nf.actions[i].terms[(i,)].evaluate((1.0,))
        assert abs(c.imag) < 1e-15
        series.append(c.real)
    # invert E -> s numerically and fit s -> E as a polynomial
    energies = np.linspace(1e-4, 2e-2, 60)
    actions = np.array([quartic_action(E) for E in energies])
    design = np.vander(actions, 5, increasing=True)[:, 1:]
    coeffs, *_ = np.linalg.lstsq(design, energies, rcond=None)
    assert abs(coeffs[0] - series[0]) < 1e-7
    assert abs(coeffs[1] - series[1]) < 1e-5       # 3/8
    assert abs(coeffs[2] - series[2]) < 2e-3       # -17/64
    assert abs(coeffs[3] - series[3]) < 0.2        # 375/1024, poorly conditioned


# ---------------------------------------------------------------------------
# normalize_quadratic
# ---------------------------------------------------------------------------

def test_normalize_quadratic_exact():
    omega, jet = normalize_quadratic([Q(4)], PotentialJet(1, {(2,): Q(1)}))
    assert omega.values == (Q(2),)
    assert dict(jet.terms) == {(2,): Q(1, 4)}


def test_normalize_quadratic_identity():
    # u_i = 1 leaves everything unchanged (distinct frequencies: n = 1
    # or mixed entries; equal frequencies are rejected as resonant)
    omega, jet = normalize_quadratic([Q(1)], PotentialJet(1, {(3,): Q(3)}))
    assert omega.values == (Q(1),)
    assert dict(jet.terms) == {(3,): Q(3)}
    with pytest.raises(ValueError):
        normalize_quadratic([Q(1), Q(1)], PotentialJet(2, {(1, 1): Q(3)}))


def test_normalize_quadratic_irrational_rejected():
    with pytest.raises(NonRepresentableScaling):
        normalize_quadratic([Q(2)], PotentialJet(1, {(2,): Q(1)}))


def test_normalize_quadratic_float_mode():
    omega, jet = normalize_quadratic([2.0], PotentialJet(1, {(2,): Q(1)}),
                                     exact=False)
    assert abs(omega.values[0] - math.sqrt(2)) < 1e-15
    # x^4 coefficient scales by lambda^4 = 1/u = 1/2
    assert abs(jet.terms[(2,)] - 0.5) < 1e-15


def test_normalize_quadratic_consistency_with_bnf():
    """Rescaled jet + frequencies give the same spectrum model as direct."""
    omega, jet = normalize_quadratic([Q(4)], PotentialJet(1, {(2,): Q(1)}))
    nf = classical_bnf(jet, omega, order=2)
    c = nf.actions[2].terms[(2,)]
    assert c == GaussianRational(Q(3, 32))   # (3/8) * (1/4)

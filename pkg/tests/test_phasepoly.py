"""Phase-space polynomial algebra: coordinate changes, brackets, structure."""

import random

import pytest

from bnflab import (
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
from bnflab.errors import ResonantInput, SmallDivisor
from bnflab.exactnum import GaussianRational, Q, Scalar


def sym(n):
    return Frequencies.symbolic(n)


def one(omega):
    return omega.rational(1)


# ---------------------------------------------------------------------------
# real_to_complex
# ---------------------------------------------------------------------------

def test_rtc_linear():
    p = real_to_complex({((1,), (0,)): 1}, sym(1))
    half = Scalar.from_rational(Q(1, 2), 1)
    assert p == PhasePoly(1, {((1,), (0,)): half, ((0,), (1,)): half})


def test_rtc_action_identity():
    p = real_to_complex({((2,), (0,)): 1, ((0,), (2,)): 1}, sym(1))
    assert p == PhasePoly(1, {((1,), (1,)): Scalar.from_rational(1, 1)})


def test_rtc_quartic_binomial():
    p = real_to_complex({((4,), (0,)): 1}, sym(1))
    want = {((4,), (0,)): Q(1, 16), ((3,), (1,)): Q(4, 16),
            ((2,), (2,)): Q(6, 16), ((1,), (3,)): Q(4, 16),
            ((0,), (4,)): Q(1, 16)}
    assert p == PhasePoly(1, {k: Scalar.from_rational(c, 1)
                              for k, c in want.items()})


def test_rtc_inverse_roundtrip_random():
    rng = random.Random(11)
    for n in (1, 2):
        omega = sym(n)
        for _ in range(10):
            coeffs = {}
            for _ in range(rng.randint(1, 5)):
                xe = tuple(rng.randint(0, 5) for _ in range(n))
                ke = tuple(rng.randint(0, 5 - max(xe)) for _ in range(n))
                coeffs[(xe, ke)] = Q(rng.randint(-50, 50) or 1,
                                     rng.randint(1, 50))
            back = complex_to_real(real_to_complex(coeffs, omega))
            assert set(back) == set(coeffs)
            for key, c in coeffs.items():
                assert back[key] == Scalar.from_rational(c, n)


# ---------------------------------------------------------------------------
# bracket
# ---------------------------------------------------------------------------

def test_bracket_eigenrelation_exact():
    rng = random.Random(5)
    for n in (1, 2, 3):
        omega = sym(n)
        h1 = harmonic_oscillator(omega)
        for _ in range(8):
            alpha = tuple(rng.randint(0, 3) for _ in range(n))
            beta = tuple(rng.randint(0, 3) for _ in range(n))
            mono = PhasePoly.monomial(alpha, beta, one(omega))
            br = poisson_bracket(h1, mono)
            m = tuple(a - b for a, b in zip(alpha, beta))
            form = Scalar.from_rational(0, n)
            for i, mi in enumerate(m):
                if mi:
                    form = form + Scalar.variable(i, n).scale(mi)
            if alpha == beta:
                assert br.is_zero
            else:
                want = PhasePoly.monomial(alpha, beta, form.mul_imag(-2))
                assert br == want


def test_bracket_specific_values():
    # {z zbar, z^4} = -8i z^4 at omega = 1
    omega = Frequencies.numeric([Q(1)])
    zz = PhasePoly.monomial((1,), (1,), GaussianRational(1))
    z4 = PhasePoly.monomial((4,), (0,), GaussianRational(1))
    assert poisson_bracket(zz, z4) == PhasePoly.monomial(
        (4,), (0,), GaussianRational(0, -8))


def test_bracket_antisymmetry_and_self():
    rng = random.Random(7)
    omega = sym(2)
    for _ in range(5):
        p = _random_poly(rng, 2, 6)
        q = _random_poly(rng, 2, 6)
        assert poisson_bracket(p, p).is_zero
        assert (poisson_bracket(p, q) + poisson_bracket(q, p)).is_zero


def _random_poly(rng, n, maxdeg, even=False, real=False):
    terms = {}
    for _ in range(rng.randint(1, 6)):
        while True:
            alpha = tuple(rng.randint(0, maxdeg // 2) for _ in range(n))
            beta = tuple(rng.randint(0, maxdeg // 2) for _ in range(n))
            if sum(alpha) + sum(beta) > maxdeg:
                continue
            if even and any((a + b) % 2 for a, b in zip(alpha, beta)):
                continue
            break
        c = GaussianRational(Q(rng.randint(-20, 20), rng.randint(1, 9)),
                             Q(rng.randint(-20, 20), rng.randint(1, 9)))
        terms[(alpha, beta)] = Scalar.from_gaussian(c, n)
    p = PhasePoly(2, terms) if n == 2 else PhasePoly(n, terms)
    if real:
        p = p + p.conjugate()
    return p


def test_jacobi_identity_random():
    rng = random.Random(13)
    for _ in range(6):
        a = _random_poly(rng, 2, 6)
        b = _random_poly(rng, 2, 6)
        c = _random_poly(rng, 2, 6)
        total = (poisson_bracket(a, poisson_bracket(b, c))
                 + poisson_bracket(b, poisson_bracket(c, a))
                 + poisson_bracket(c, poisson_bracket(a, b)))
        assert total.is_zero


def test_leibniz_rule_random():
    rng = random.Random(17)
    for _ in range(4):
        a = _random_poly(rng, 2, 4)
        b = _random_poly(rng, 2, 4)
        c = _random_poly(rng, 2, 4)
        lhs = poisson_bracket(a, b * c)
        rhs = poisson_bracket(a, b) * c + b * poisson_bracket(a, c)
        assert (lhs - rhs).is_zero


def test_bracket_degree_shift():
    one2 = Scalar.from_rational(1, 2)
    a = PhasePoly(2, {((2, 0), (1, 1)): one2, ((0, 2), (2, 0)): one2})
    b = PhasePoly(2, {((3, 1), (1, 1)): one2, ((1, 1), (2, 2)): one2})
    br = poisson_bracket(a, b)
    assert not br.is_zero
    assert br.degrees() == [8]


def test_parity_and_reality_closure():
    rng = random.Random(23)
    for _ in range(6):
        a = _random_poly(rng, 2, 6, even=True, real=True)
        b = _random_poly(rng, 2, 6, even=True, real=True)
        assert a.even_symmetric and a.real_valued()
        br = poisson_bracket(a, b)
        assert br.even_symmetric
        assert br.real_valued()
        prod = a * b
        assert prod.even_symmetric
        assert prod.real_valued()


def test_dimension_mismatch_raises():
    a = PhasePoly.monomial((1,), (0,), GaussianRational(1))
    b = PhasePoly.monomial((1, 0), (0, 0), GaussianRational(1))
    with pytest.raises(ValueError):
        poisson_bracket(a, b)


# ---------------------------------------------------------------------------
# diagonal part and embedding
# ---------------------------------------------------------------------------

def test_diagonal_part_examples():
    omega = sym(1)
    p4 = real_to_complex({((4,), (0,)): 1}, omega)
    d = diagonal_part(p4)
    assert d == ActionPoly(1, {(2,): Scalar.from_rational(Q(3, 8), 1)})

    omega2 = sym(2)
    pxy = real_to_complex({((2, 2), (0, 0)): 1}, omega2)
    assert diagonal_part(pxy) == ActionPoly(
        2, {(1, 1): Scalar.from_rational(Q(1, 4), 2)})

    z3zb = PhasePoly.monomial((3,), (1,), Scalar.from_rational(1, 1))
    assert diagonal_part(z3zb).is_zero


def test_embed_roundtrip():
    a = ActionPoly(2, {(1, 2): Scalar.from_rational(Q(5, 7), 2)})
    assert a.embed().diagonal_part() == a
    # off-diagonal remainder is recoverable
    omega = sym(2)
    p = real_to_complex({((2, 2), (0, 0)): 1}, omega2 := omega)
    rem = p - diagonal_part(p).embed()
    assert rem.diagonal_part().is_zero
    assert (rem + diagonal_part(p).embed()) == p


# ---------------------------------------------------------------------------
# scalar division by forms
# ---------------------------------------------------------------------------

def test_div_form_small_divisor_guard():
    omega = Frequencies.numeric([1.0, 1.0 + 1e-14], resonance_tol=1e-9)
    with pytest.raises(SmallDivisor):
        scalar_div_linear_form(complex(1.0), (1, -1), omega)


def test_div_form_resonant_exact():
    omega = Frequencies.numeric([Q(1), Q(2)])
    with pytest.raises(ResonantInput):
        scalar_div_linear_form(GaussianRational(1), (2, -1), omega)


def test_div_form_symbolic_roundtrip():
    omega = sym(2)
    c = Scalar.from_rational(Q(3, 8), 2)
    out = omega.mul_form(omega.div_form(c, (2, 0)), (2, 0))
    assert out == c


# ---------------------------------------------------------------------------
# frequencies validation
# ---------------------------------------------------------------------------

def test_frequencies_validation():
    with pytest.raises(ValueError):
        Frequencies.numeric([1.0, 1.0])
    with pytest.raises(ValueError):
        Frequencies.numeric([-1.0])
    with pytest.raises(ValueError):
        Frequencies.numeric([])
    assert Frequencies.numeric([Q(1), Q(2)]).is_exact
    assert not Frequencies.numeric([1.0, 2.0]).is_exact
    assert Frequencies.symbolic(3).is_symbolic


def test_permutation_helpers():
    p = PhasePoly.monomial((2, 0), (0, 1), GaussianRational(1))
    q = p.permute([1, 0])
    assert list(q.terms) == [((0, 2), (1, 0))]

"""Forward Birkhoff normal form for even Hamiltonians.

Input data are Taylor jets of an even potential (and optionally of an even
inverse metric in geodesic normal coordinates); the quadratic part is
carried separately as a frequency vector.  The induction works degree by
degree: extract the degree-2i remainder, solve the homological equation,
conjugate by the Lie series of the generator, repeat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import NonRepresentableScaling
from .exactnum import Q, as_rational, RATIONAL_TYPES
from .phasepoly import (
    ActionPoly,
    Frequencies,
    PhasePoly,
    harmonic_oscillator,
    poisson_bracket,
    real_to_complex,
    unit_index,
)


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------

def _normalize_jet_value(c):
    if isinstance(c, float):
        return c
    return as_rational(c)


@dataclass(frozen=True)
class PotentialJet:
    """Even Taylor data of the potential above the quadratic part.

    terms maps a multi-index k (|k| >= 2) to the coefficient of x^(2k).
    max_half_degree, when given, marks the truncation order of the data:
    coefficients with |k| beyond it are unknown rather than zero.  When it
    is None the jet is read as an exact polynomial potential.
    """

    n: int
    terms: Mapping[tuple, object] = field(default_factory=dict)
    max_half_degree: Optional[int] = None

    def __post_init__(self):
        clean = {}
        for k, c in self.terms.items():
            k = tuple(int(v) for v in k)
            if len(k) != self.n or any(v < 0 for v in k):
                raise ValueError(f"bad multi-index {k} for dimension {self.n}")
            if sum(k) < 2:
                raise ValueError(f"jet term x^{tuple(2 * v for v in k)} is "
                                 "below quartic order; quadratic data belongs "
                                 "to the frequency vector")
            c = _normalize_jet_value(c)
            if c:
                clean[k] = c
        if self.max_half_degree is not None:
            if self.max_half_degree < 2:
                raise ValueError("max_half_degree must be >= 2")
            too_big = [k for k in clean if sum(k) > self.max_half_degree]
            if too_big:
                raise ValueError(f"jet terms {too_big} exceed max_half_degree")
        object.__setattr__(self, "terms", clean)

    @property
    def half_degree(self) -> int:
        """Largest half-degree with usable data."""
        if self.max_half_degree is not None:
            return self.max_half_degree
        return max((sum(k) for k in self.terms), default=2)

    def available_to(self, order: int) -> bool:
        return self.max_half_degree is None or order <= self.max_half_degree

    def restricted(self, order: int) -> "PotentialJet":
        return PotentialJet(self.n,
                            {k: c for k, c in self.terms.items()
                             if sum(k) <= order},
                            max_half_degree=None)

    def permute(self, sigma) -> "PotentialJet":
        return PotentialJet(
            self.n,
            {tuple(k[sigma[i]] for i in range(self.n)): c
             for k, c in self.terms.items()},
            max_half_degree=self.max_half_degree)

    def real_terms(self) -> dict:
        """As a dict of (x_exponents, xi_exponents) monomials."""
        zero = (0,) * self.n
        return {(tuple(2 * v for v in k), zero): c
                for k, c in self.terms.items()}


@dataclass(frozen=True)
class MetricJet:
    """Even Taylor data of the inverse metric minus the identity.

    terms maps (i, j, k) with i <= j and |k| >= 1 to a coefficient of the
    symmetric kinetic perturbation sum_{i,j} h^ij xi_i xi_j.  A diagonal
    entry contributes h^ii_k x^(2k) xi_i^2.  Reflection symmetry about each
    coordinate axis forces off-diagonal inverse-metric entries to vanish on
    the axes, so an entry with i < j contributes
    h^ij_k x^(2k) x_i x_j xi_i xi_j.
    """

    n: int
    terms: Mapping[tuple, object] = field(default_factory=dict)
    max_half_degree: Optional[int] = None

    def __post_init__(self):
        clean = {}
        for (i, j, k), c in self.terms.items():
            k = tuple(int(v) for v in k)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"metric indices ({i}, {j}) out of range")
            if len(k) != self.n or any(v < 0 for v in k):
                raise ValueError(f"bad multi-index {k}")
            if sum(k) < 1:
                raise ValueError("metric perturbation must vanish at the "
                                 "origin (|k| >= 1)")
            key = (min(i, j), max(i, j), k)
            c = _normalize_jet_value(c)
            prev = clean.get(key)
            total = c if prev is None else prev + c
            if total:
                clean[key] = total
            else:
                clean.pop(key, None)
        object.__setattr__(self, "terms", clean)

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def available_to(self, order: int) -> bool:
        """Data suffices for remainders of half-degree <= order."""
        if self.max_half_degree is None:
            return True
        return order - 1 <= self.max_half_degree

    def permute(self, sigma) -> "MetricJet":
        inv = [0] * self.n
        for i in range(self.n):
            inv[sigma[i]] = i
        return MetricJet(
            self.n,
            {(inv[i], inv[j], tuple(k[sigma[t]] for t in range(self.n))): c
             for (i, j, k), c in self.terms.items()},
            max_half_degree=self.max_half_degree)

    def real_terms(self, max_degree: Optional[int] = None) -> dict:
        """As a dict of (x_exponents, xi_exponents) monomials."""
        out = {}
        for (i, j, k), c in self.terms.items():
            xe = [2 * v for v in k]
            ke = [0] * self.n
            ke[i] += 1
            ke[j] += 1
            if i == j:
                w = c
            else:
                # the even core is multiplied by x_i x_j, and the entry
                # appears twice in the symmetric double sum
                xe[i] += 1
                xe[j] += 1
                w = c + c
            if max_degree is not None and sum(xe) + 2 > max_degree:
                continue
            key = (tuple(xe), tuple(ke))
            prev = out.get(key)
            out[key] = w if prev is None else prev + w
        return out


# ---------------------------------------------------------------------------
# normal form container
# ---------------------------------------------------------------------------

@dataclass
class NormalForm:
    """Result of the forward normalization.

    actions[i]    -- the degree-i action polynomial kept at step i
    generators[i] -- the diagonal-free generator removed at step i
    remainders[i] -- the full degree-2i remainder seen at step i
    artifacts[i]  -- the part of remainders[i] produced by earlier steps
                     (everything except the direct jet and metric terms)
    """

    omega: Frequencies
    order: int
    actions: dict
    generators: dict
    remainders: dict
    artifacts: dict

    @property
    def n(self) -> int:
        return self.omega.n

    def action_list(self):
        return [self.actions[i] for i in range(2, self.order + 1)]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def solve_homological(remainder: PhasePoly, omega: Frequencies):
    """Split a remainder R into {H1, G} + diagonal.

    Returns (G, H) with H the diagonal part of R and G the unique
    diagonal-free polynomial with {sum omega_i z_i zbar_i, G} = R - embed(H).
    Each off-diagonal coefficient is divided by the bracket eigenvalue
    -2i <omega, alpha - beta>.
    """
    if not remainder.is_homogeneous():
        raise ValueError("remainder must be homogeneous")
    if remainder.max_degree() % 2:
        raise ValueError("remainder must have even degree")
    if not remainder.even_symmetric:
        raise ValueError("remainder must be even in every coordinate")
    diag = {}
    gen = {}
    for (alpha, beta), c in remainder.terms.items():
        if alpha == beta:
            diag[alpha] = c
            continue
        m = tuple(a - b for a, b in zip(alpha, beta))
        # divide by -2i<omega, m>:  1/(-2i) = i/2
        g = omega.div_form(c, m)
        gen[(alpha, beta)] = coeff_mul_imag_half(g)
    G = PhasePoly(remainder.n)
    G.terms = gen
    H = ActionPoly(remainder.n)
    H.terms = diag
    return G, H


def coeff_mul_imag_half(c):
    """c * (i/2)."""
    if isinstance(c, complex):
        return c * 0.5j
    return c.mul_imag(1).scale(Q(1, 2))


def exp_ad(generator: PhasePoly, target: PhasePoly, degree_cap: int) -> PhasePoly:
    """Truncated Lie series sum_k ad_G^k(F) / k! of the time-1 flow of G.

    Each bracket with a homogeneous generator of degree 2N raises the degree
    by 2N - 2 >= 2, so the series below any degree cap is finite.
    """
    if not generator.is_homogeneous():
        raise ValueError("generator must be homogeneous")
    if not generator.is_zero and generator.max_degree() < 4:
        raise ValueError("generator degree must be >= 4")
    if degree_cap < target.max_degree():
        raise ValueError("degree cap is below the degree of the target")
    acc = target.truncate(degree_cap)
    term = acc
    k = 1
    while True:
        term = poisson_bracket(generator, term, degree_cap)
        if term.is_zero:
            return acc
        scaled = term.scale(Q(1, math.factorial(k)))
        acc = acc + scaled
        k += 1


def hamiltonian_poly(jet: PotentialJet, omega: Frequencies,
                     metric: Optional[MetricJet] = None,
                     degree_cap: Optional[int] = None) -> PhasePoly:
    """The full truncated Hamiltonian sum omega_i s_i + metric part + jet."""
    if jet.n != omega.n:
        raise ValueError("jet dimension does not match the frequencies")
    h = harmonic_oscillator(omega)
    real_terms = dict(jet.real_terms())
    if metric is not None:
        if metric.n != omega.n:
            raise ValueError("metric dimension does not match the frequencies")
        for key, c in metric.real_terms(degree_cap).items():
            prev = real_terms.get(key)
            real_terms[key] = c if prev is None else prev + c
    if real_terms:
        h = h + real_to_complex(real_terms, omega)
    if degree_cap is not None:
        h = h.truncate(degree_cap)
    return h


def classical_bnf(jet: PotentialJet, omega: Frequencies,
                  metric: Optional[MetricJet] = None,
                  order: int = 2) -> NormalForm:
    """Normalize degree by degree up to action order `order`.

    For i = 2..order: take the degree-2i part of the current Hamiltonian,
    keep its diagonal as the degree-i action polynomial, remove the rest by
    conjugating with the Lie flow of the homological generator.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    if not jet.available_to(order):
        raise ValueError(f"jet data stops at half-degree "
                         f"{jet.max_half_degree}; cannot normalize to "
                         f"order {order}")
    if metric is not None and not metric.available_to(order):
        raise ValueError("metric data stops below the requested order")
    cap = 2 * order
    current = hamiltonian_poly(jet, omega, metric, cap)

    # direct (non-artifact) contributions at each degree, for the audit trail
    direct = {}
    direct_terms = dict(jet.real_terms())
    if metric is not None:
        for key, c in metric.real_terms(cap).items():
            prev = direct_terms.get(key)
            direct_terms[key] = c if prev is None else prev + c
    if direct_terms:
        direct_poly = real_to_complex(direct_terms, omega)
        for i in range(2, order + 1):
            direct[i] = direct_poly.homogeneous_part(2 * i)

    actions, generators, remainders, artifacts = {}, {}, {}, {}
    for i in range(2, order + 1):
        remainder = current.homogeneous_part(2 * i).simplified()
        gen, act = solve_homological(remainder, omega)
        gen = gen.simplified()
        act = act.simplified()
        if omega.is_exact and not act.real_valued():
            raise AssertionError(
                f"degree-{i} action polynomial has a nonzero imaginary part")
        actions[i] = act
        generators[i] = gen
        remainders[i] = remainder
        artifacts[i] = (remainder - direct.get(i, PhasePoly.zero(omega.n))
                        ).simplified()
        if not gen.is_zero:
            current = exp_ad(gen, current, cap).simplified()
    return NormalForm(omega=omega, order=order, actions=actions,
                      generators=generators, remainders=remainders,
                      artifacts=artifacts)


def verify_conjugation(nf: NormalForm, jet: PotentialJet,
                       metric: Optional[MetricJet] = None) -> PhasePoly:
    """Recompute the conjugation and return the residual.

    The residual is (conjugated Hamiltonian) - (harmonic part + actions),
    truncated at degree 2*order; it is exactly zero for a normal form
    produced from the same inputs in exact mode.
    """
    cap = 2 * nf.order
    current = hamiltonian_poly(jet, nf.omega, metric, cap)
    for i in range(2, nf.order + 1):
        gen = nf.generators[i]
        if not gen.is_zero:
            current = exp_ad(gen, current, cap)
    target = harmonic_oscillator(nf.omega)
    for i in range(2, nf.order + 1):
        target = target + nf.actions[i].embed()
    return (current - target).truncate(cap)


# ---------------------------------------------------------------------------
# quadratic normalization
# ---------------------------------------------------------------------------

def _rational_sqrt(q):
    q = as_rational(q)
    p, d = q.numerator, q.denominator
    sp, sd = math.isqrt(p), math.isqrt(d)
    if sp * sp != p or sd * sd != d:
        return None
    return Q(sp, sd)


def jet_to_normal_coordinates(jet: PotentialJet,
                              omega: Frequencies) -> PotentialJet:
    """Rescale a physical potential jet into harmonic normal coordinates.

    The normal-form algorithms take the Hamiltonian as
    sum omega_i (x_i^2 + xi_i^2) + jet, reached from the physical
    |xi|^2 + sum omega_i^2 x_i^2 + jet by x_i -> x_i / sqrt(omega_i),
    xi_i -> sqrt(omega_i) xi_i; each coefficient of x^(2k) picks up
    prod omega_i^(-k_i).  Identity when every frequency is 1.
    """
    return _rescale_jet(jet, omega, -1)


def jet_from_normal_coordinates(jet: PotentialJet,
                                omega: Frequencies) -> PotentialJet:
    """Undo jet_to_normal_coordinates (coefficients gain prod omega^k)."""
    return _rescale_jet(jet, omega, +1)


def _rescale_jet(jet, omega, sign):
    if omega.is_symbolic:
        raise ValueError("coordinate rescaling needs numeric frequencies")
    if omega.n != jet.n:
        raise ValueError("frequency count does not match jet dimension")
    terms = {}
    for k, c in jet.terms.items():
        if omega.is_exact and not isinstance(c, float):
            scale = Q(1)
            for w, ki in zip(omega.values, k):
                scale *= Q(w) ** (sign * ki)
            terms[k] = as_rational(c) * scale
        else:
            scale = 1.0
            for w, ki in zip(omega.values, k):
                scale *= float(w) ** (sign * ki)
            terms[k] = float(c) * scale
    return PotentialJet(jet.n, terms, max_half_degree=jet.max_half_degree)


def normalize_quadratic(hessian_diag, jet: PotentialJet, exact: bool = True):
    """Rescale xi^2 + sum u_i x_i^2 + ... to sum omega_i (x_i^2 + xi_i^2) + ...

    Applies x_i -> lambda_i x_i, xi_i -> xi_i / lambda_i with
    lambda_i = u_i^(-1/4), giving omega_i = sqrt(u_i); each jet coefficient
    picks up the factor prod omega_i^(-k_i).  In exact mode every u_i must be
    the square of a rational so that the scaling stays rational.
    """
    u = list(hessian_diag)
    if len(u) != jet.n:
        raise ValueError("Hessian diagonal length does not match jet dimension")
    if any(float(v) <= 0 for v in u):
        raise ValueError("Hessian eigenvalues must be positive")
    if exact:
        roots = [_rational_sqrt(v) for v in u]
        if any(r is None for r in roots):
            bad = [v for v, r in zip(u, roots) if r is None]
            raise NonRepresentableScaling(
                f"no exact rational square root for {bad}; "
                "rerun with exact=False or supply omega directly")
        omega = Frequencies.numeric(tuple(roots))
        new_terms = {}
        for k, c in jet.terms.items():
            scale = Q(1)
            for r, ki in zip(roots, k):
                scale /= r ** ki
            new_terms[k] = as_rational(c) * scale
    else:
        roots = [math.sqrt(float(v)) for v in u]
        omega = Frequencies.numeric(tuple(roots))
        new_terms = {}
        for k, c in jet.terms.items():
            scale = 1.0
            for r, ki in zip(roots, k):
                scale /= r ** ki
            new_terms[k] = float(c) * scale
    return omega, PotentialJet(jet.n, new_terms,
                               max_half_degree=jet.max_half_degree)

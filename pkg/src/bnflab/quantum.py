"""Semiclassical normal form at the level of symbol jets.

Symbols are polynomials graded by powers of hbar.  Conjugation by the Weyl
quantization of a generator acts on symbols through the Moyal bracket,
whose hbar-expansion adds even-order corrections to the Poisson bracket.
The normalization proceeds in two stages: the classical one (grading 0)
removes off-diagonal terms of the leading symbol while its Moyal
corrections populate higher orders; the quantum one removes, order by
order in hbar, the off-diagonal part of each correction.

Everything here is exact truncation bookkeeping: remainders beyond the
degree and hbar caps are dropped, never estimated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .classical import PotentialJet, hamiltonian_poly, solve_homological
from .exactnum import Q
from .phasepoly import (
    ActionPoly,
    Frequencies,
    PhasePoly,
    coeff_to_complex,
    poisson_bracket,
)


@dataclass
class SemiclassicalJet:
    """A polynomial symbol graded by powers of hbar, with truncation caps."""

    n: int
    pieces: dict
    degree_cap: int
    hbar_cap: int

    def __post_init__(self):
        self.pieces = {j: p for j, p in self.pieces.items()
                       if j <= self.hbar_cap and not p.is_zero}

    def piece(self, j: int) -> PhasePoly:
        return self.pieces.get(j, PhasePoly.zero(self.n))

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    def __add__(self, other: "SemiclassicalJet") -> "SemiclassicalJet":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        pieces = dict(self.pieces)
        for j, p in other.pieces.items():
            pieces[j] = pieces[j] + p if j in pieces else p
        return SemiclassicalJet(self.n, pieces, self.degree_cap, self.hbar_cap)

    def scale(self, q) -> "SemiclassicalJet":
        return SemiclassicalJet(self.n,
                                {j: p.scale(q) for j, p in self.pieces.items()},
                                self.degree_cap, self.hbar_cap)

    def shifted(self, dj: int) -> "SemiclassicalJet":
        return SemiclassicalJet(self.n,
                                {j + dj: p for j, p in self.pieces.items()},
                                self.degree_cap, self.hbar_cap)

    def simplified(self) -> "SemiclassicalJet":
        return SemiclassicalJet(self.n,
                                {j: p.simplified() for j, p in self.pieces.items()},
                                self.degree_cap, self.hbar_cap)


def _multi_indices(n: int, total: int):
    """All length-n tuples of non-negative integers summing to total."""
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _multi_indices(n - 1, total - first):
            yield (first,) + rest


def _multi_factorial(m) -> int:
    out = 1
    for v in m:
        out *= math.factorial(v)
    return out


def _sym_bidiff(a: PhasePoly, b: PhasePoly, k: int,
                degree_cap: int) -> PhasePoly:
    """The order-k bidifferential term of the Moyal series:

        sum_{|mu|+|nu| = k} (-1)^|nu| / (mu! nu!)
            (d_zbar^mu d_z^nu A) (d_z^mu d_zbar^nu B).
    """
    n = a.n
    acc = PhasePoly.zero(n)
    for t in range(k + 1):
        for mu in _multi_indices(n, t):
            for nu in _multi_indices(n, k - t):
                da = a.derive(nu, mu)
                if da.is_zero:
                    continue
                db = b.derive(mu, nu)
                if db.is_zero:
                    continue
                w = Q((-1) ** (k - t),
                      _multi_factorial(mu) * _multi_factorial(nu))
                acc = acc + (da * db).truncate(degree_cap).scale(w)
    return acc


def moyal_bracket(a: PhasePoly, b: PhasePoly, hbar_cap: int,
                  degree_cap: int) -> SemiclassicalJet:
    """Graded symbol of (i/hbar) [A, B] for Weyl-quantized A, B.

    The hbar^0 piece is the Poisson bracket; the hbar^(2r) piece is -2i
    times the order-(2r+1) bidifferential term.  Corrections vanish
    identically when either argument is quadratic.
    """
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    n = a.n
    pieces = {}
    p0 = poisson_bracket(a, b, degree_cap)
    if not p0.is_zero:
        pieces[0] = p0
    max_deg = a.max_degree() + b.max_degree()
    for r in range(1, hbar_cap // 2 + 1):
        k = 2 * r + 1
        if 2 * k > max_deg:
            break
        acc = _sym_bidiff(a, b, k, degree_cap).mul_imag(-2)
        if not acc.is_zero:
            pieces[2 * r] = acc
    return SemiclassicalJet(n, pieces, degree_cap, hbar_cap)


def moyal_star(a: PhasePoly, b: PhasePoly, hbar_cap: int,
               degree_cap: int) -> SemiclassicalJet:
    """Graded symbol of the operator product A^W B^W.

    The hbar^k piece is (-1)^k times the order-k bidifferential term; the
    hbar^0 piece is the plain product.
    """
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    pieces = {}
    p0 = (a * b).truncate(degree_cap)
    if not p0.is_zero:
        pieces[0] = p0
    max_deg = a.max_degree() + b.max_degree()
    for k in range(1, hbar_cap + 1):
        if 2 * k > max_deg:
            break
        acc = _sym_bidiff(a, b, k, degree_cap)
        if k % 2:
            acc = -acc
        if not acc.is_zero:
            pieces[k] = acc
    return SemiclassicalJet(a.n, pieces, degree_cap, hbar_cap)


def _apply_bracket(gen: PhasePoly, jet: SemiclassicalJet) -> SemiclassicalJet:
    """Moyal bracket of a generator with every graded piece of a jet."""
    out = {}
    for l, piece in jet.pieces.items():
        mb = moyal_bracket(gen, piece, jet.hbar_cap - l, jet.degree_cap)
        for r, p in mb.pieces.items():
            j = l + r
            out[j] = out[j] + p if j in out else p
    return SemiclassicalJet(jet.n, out, jet.degree_cap, jet.hbar_cap)


def conjugate_graded(gen: PhasePoly, jet: SemiclassicalJet,
                     grading: int) -> SemiclassicalJet:
    """Conjugate a symbol jet by the flow of a generator at hbar^grading.

    Computes sum_t hbar^(grading*t) L_gen^t(jet) / t! where L_gen is the
    graded Moyal bracket; the series is finite under the jet's caps.
    """
    acc = jet
    term = jet
    t = 1
    while True:
        term = _apply_bracket(gen, term).shifted(grading).scale(Q(1, t))
        if term.is_zero:
            return acc
        acc = acc + term
        t += 1


def action_star_power(m, omega: Frequencies, hbar_cap: int) -> SemiclassicalJet:
    """Weyl symbol of the operator product prod_i (hbar^2 D_i^2 + x_i^2)^m_i.

    Iterated star products of the action coordinates; the leading piece is
    s^m and the corrections sit at even hbar orders with lower degree.
    The family is triangular, which is what lets a diagonal symbol jet be
    rewritten as a function of the commuting oscillator operators.
    """
    n = omega.n
    degree_cap = 2 * sum(m)
    one = ActionPoly(n, {(0,) * n: omega.rational(1)})
    jet = SemiclassicalJet(n, {0: one.embed()}, degree_cap, hbar_cap)
    for i in range(n):
        e = [0] * n
        e[i] = 1
        s_i = ActionPoly(n, {tuple(e): omega.rational(1)}).embed()
        for _ in range(m[i]):
            pieces = {}
            for l, piece in jet.pieces.items():
                st = moyal_star(piece, s_i, hbar_cap - l, degree_cap)
                for k, p in st.pieces.items():
                    j = l + k
                    pieces[j] = pieces[j] + p if j in pieces else p
            jet = SemiclassicalJet(n, pieces, degree_cap, hbar_cap)
    return jet


def _spectral_reindex(pieces: dict, omega: Frequencies, degree_cap: int,
                      hbar_cap: int) -> list:
    """Rewrite a diagonal symbol jet as a polynomial in the oscillators.

    Input maps hbar order j to a diagonal PhasePoly.  Expresses the jet in
    the triangular basis of action star powers, so the result read at
    s = (2k+1) hbar gives exact model eigenvalues.
    """
    n = omega.n
    remaining = {j: dict(p.diagonal_part().terms) for j, p in pieces.items()}
    out = [ActionPoly.zero(n) for _ in range(hbar_cap + 1)]
    for j in range(hbar_cap + 1):
        layer = remaining.get(j)
        if not layer:
            continue
        out[j] = ActionPoly(n, layer).simplified()
        for m, c in layer.items():
            if sum(m) < 2:
                continue  # star powers of degree < 2 have no corrections
            sigma = action_star_power(m, omega, hbar_cap - j)
            for k, piece in sigma.pieces.items():
                if k == 0:
                    continue
                corr = piece.diagonal_part().map_coefficients(
                    lambda b, c=c: b * c)
                target = remaining.setdefault(j + k, {})
                for mm, cc in corr.terms.items():
                    prev = target.get(mm)
                    total = -cc if prev is None else prev - cc
                    if coeff_is_zero_dispatch(total):
                        target.pop(mm, None)
                    else:
                        target[mm] = total
        remaining[j] = {}
    return out


def coeff_is_zero_dispatch(c) -> bool:
    if isinstance(c, complex):
        return c == 0
    return c.is_zero


def quantum_normal_form(jet: PotentialJet, omega: Frequencies,
                        degree_cap: int, hbar_cap: int) -> list:
    """Normal form of the symbol of -hbar^2 Laplacian + potential.

    Returns action polynomials p_0..p_hbar_cap with all pieces diagonal:
    the operator equals sum_j hbar^j p_j evaluated on the commuting
    oscillator operators hbar^2 D_i^2 + x_i^2, so its model eigenvalues are
    sum_j hbar^j p_j((2k+1) hbar).  p_0 is the classical normal form with
    the harmonic part included.
    """
    if degree_cap < 2 or degree_cap % 2:
        raise ValueError("degree cap must be a positive even integer")
    if hbar_cap < 0:
        raise ValueError("hbar cap must be >= 0")
    if not jet.available_to(degree_cap // 2):
        raise ValueError("jet data stops below the degree cap")
    n = omega.n
    symbol = hamiltonian_poly(jet, omega, None, degree_cap)
    current = SemiclassicalJet(n, {0: symbol}, degree_cap, hbar_cap)

    # classical stage: normalize the leading symbol, tracking Moyal
    # corrections at higher orders
    for i in range(2, degree_cap // 2 + 1):
        remainder = current.piece(0).homogeneous_part(2 * i).simplified()
        if remainder.is_zero:
            continue
        gen, _ = solve_homological(remainder, omega)
        gen = gen.simplified()
        if not gen.is_zero:
            current = conjugate_graded(gen, current, 0).simplified()

    leading = current.piece(0)
    offdiag = leading.off_diagonal()
    if not offdiag.is_zero:
        if omega.is_exact:
            raise AssertionError("leading symbol failed to normalize")
        scale = max(abs(c) for c in leading.terms.values())
        worst = max(abs(c) for c in offdiag.terms.values())
        if worst > 1e-9 * scale:
            raise AssertionError(
                f"leading symbol failed to normalize: off-diagonal "
                f"residue {worst:.3e}")
        leading = leading.diagonal_part().embed()
    p0_prime = leading - leading.truncate(2)

    # quantum stage: clean each hbar order with a graded generator
    for j in range(1, hbar_cap + 1):
        q = current.piece(j)
        gen = PhasePoly.zero(n)
        p_j = ActionPoly.zero(n)
        for d in range(0, degree_cap + 1, 2):
            rhs = q.homogeneous_part(d)
            if not gen.is_zero and not p0_prime.is_zero:
                feedback = poisson_bracket(p0_prime, gen, d)
                rhs = rhs - feedback.homogeneous_part(d)
            if rhs.is_zero:
                continue
            a_d, h_d = solve_homological(rhs.simplified(), omega)
            gen = gen + a_d
            p_j = p_j + h_d
        if not gen.is_zero:
            gen = gen.simplified()
            current = conjugate_graded(gen, current, j).simplified()
        residual = current.piece(j) - p_j.embed()
        if omega.is_exact and not residual.is_zero:
            raise AssertionError(f"hbar^{j} piece failed to normalize")

    # reindex the diagonal symbol jet as a function of the oscillator
    # operators; this moves part of each s^m coefficient into higher hbar
    # orders and is what makes the eigenvalue model exact
    return _spectral_reindex(dict(current.pieces), omega, degree_cap,
                             hbar_cap)


def substitute_frequencies(p: Sequence[ActionPoly], omega_values) -> list:
    """Evaluate symbolic coefficients at numeric frequencies."""
    values = tuple(float(v) for v in omega_values)
    return [piece.to_float(values) for piece in p]


def model_eigenvalue(p: Sequence[ActionPoly], k, hbar: float) -> float:
    """Evaluate the eigenvalue model sum_j hbar^j p_j((2k+1) hbar).

    The action polynomials must carry numeric coefficients; symbolic output
    of quantum_normal_form goes through substitute_frequencies first.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    n = p[0].n
    k = tuple(int(v) for v in k)
    if len(k) != n or any(v < 0 for v in k):
        raise ValueError(f"bad lattice label {k}")
    s = tuple((2 * v + 1) * hbar for v in k)
    total = 0.0
    for j, piece in enumerate(p):
        if piece.is_zero:
            continue
        try:
            val = piece.evaluate(s)
        except ValueError as exc:
            raise ValueError(
                "symbolic coefficients need substitute_frequencies before "
                "numeric evaluation") from exc
        if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
            raise ValueError(f"hbar^{j} coefficient is not real: {val}")
        total += (hbar ** j) * val.real
    return total

"""Recovering the potential jet from the action polynomials.

The recovery replays the forward induction with data it already owns: at
each degree the carry-over of earlier generators (and of the known metric)
is recomputed and subtracted from the given action polynomial; dividing
what is left by the diagonal weight of each monomial yields the next batch
of potential coefficients, which in turn determines the next generator.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

from .classical import (
    MetricJet,
    PotentialJet,
    exp_ad,
    hamiltonian_poly,
    solve_homological,
)
from .exactnum import Q
from .phasepoly import ActionPoly, Frequencies, PhasePoly, real_to_complex


def diagonal_weight(k) -> Q:
    """Coefficient of |z|^(2k) in the expansion of x^(2k).

    Each factor x_i^(2k_i) contributes binom(2k_i, k_i) / 4^k_i.
    """
    w = Q(1)
    for ki in k:
        w *= Q(math.comb(2 * ki, ki), 4 ** ki)
    return w


def _as_action_map(actions) -> dict:
    """Accept a dict {degree: ActionPoly} or a sequence H_2, H_3, ..."""
    if isinstance(actions, Mapping):
        out = dict(actions)
    else:
        out = {i + 2: h for i, h in enumerate(actions)}
    for i, h in out.items():
        if not isinstance(h, ActionPoly):
            raise TypeError(f"expected ActionPoly at degree {i}")
        bad = [m for m in h.terms if sum(m) != i]
        if bad:
            raise ValueError(f"action polynomial at degree {i} has "
                             f"off-degree monomials {bad}")
    return out


def _metric_direct(metric: Optional[MetricJet], omega: Frequencies,
                   degree: int) -> PhasePoly:
    """Direct degree-`degree` metric contribution, in complex coordinates."""
    if metric is None:
        return PhasePoly.zero(omega.n)
    terms = {key: c for key, c in metric.real_terms(degree).items()
             if sum(key[0]) + sum(key[1]) == degree}
    if not terms:
        return PhasePoly.zero(omega.n)
    return real_to_complex(terms, omega)


def artifact_term(generators: Sequence[PhasePoly], omega: Frequencies,
                  known_jet: PotentialJet, i: int,
                  metric: Optional[MetricJet] = None) -> PhasePoly:
    """Degree-2i carry-over produced by the generators of earlier steps.

    Conjugates the Hamiltonian assembled from the quadratic part, the
    potential terms of half-degree < i and the metric by the given
    generators, takes the degree-2i part, and removes the direct degree-2i
    metric contribution.  The result is what must be subtracted (together
    with that direct metric part) from the degree-2i remainder before
    reading off potential coefficients.
    """
    if len(generators) < i - 2:
        raise ValueError(f"step {i} needs the {i - 2} earlier generators, "
                         f"got {len(generators)}")
    cap = 2 * i
    current = hamiltonian_poly(known_jet.restricted(i - 1), omega, metric, cap)
    for gen in generators[: i - 2]:
        if not gen.is_zero:
            current = exp_ad(gen, current, cap)
    carried = current.homogeneous_part(cap) - _metric_direct(metric, omega, cap)
    return carried.simplified()


def _coeff_div_rational(c, q):
    if isinstance(c, complex):
        return c / float(q)
    return c.scale(Q(1) / q)


def _coeff_as_potential_value(c, omega: Frequencies):
    """Turn a recovered coefficient back into a plain jet value."""
    if isinstance(c, complex):
        return c.real
    if omega.is_symbolic:
        c = c.simplified()
        if not c.is_constant:
            raise ValueError(
                "recovered coefficient still depends on the frequencies; "
                "the action data is not the normal form of an even potential")
        g = c.constant_value()
    else:
        g = c
    if not g.is_real:
        raise ValueError("recovered coefficient has an imaginary part")
    return g.re


def recover_potential(actions, omega: Frequencies,
                      metric: Optional[MetricJet] = None) -> PotentialJet:
    """Reconstruct the even potential jet from its normal form.

    actions holds the homogeneous action polynomials for degrees 2..N
    (sequence or {degree: ActionPoly}); the metric, when present, must be
    the exact one used in the forward construction.  In exact mode this
    inverts the forward normalization up to half-degree N.
    """
    action_map = _as_action_map(actions)
    n = omega.n
    if not action_map:
        return PotentialJet(n, {})
    order = max(action_map)
    recovered = {}
    generators = []
    for i in range(2, order + 1):
        carried = artifact_term(generators, omega,
                                PotentialJet(n, dict(recovered)), i, metric)
        full_carry = carried + _metric_direct(metric, omega, 2 * i)
        h_i = action_map.get(i, ActionPoly.zero(n))
        residue = h_i - full_carry.diagonal_part()
        batch = {}
        for m, c in residue.terms.items():
            value = _coeff_as_potential_value(
                _coeff_div_rational(c, diagonal_weight(m)), omega)
            if value:
                batch[m] = value
        recovered.update(batch)
        if i == order:
            break
        remainder = full_carry
        if batch:
            zero = (0,) * n
            v_terms = {(tuple(2 * v for v in m), zero): c
                       for m, c in batch.items()}
            remainder = remainder + real_to_complex(v_terms, omega)
        gen, _ = solve_homological(remainder, omega)
        generators.append(gen.simplified())
    return PotentialJet(n, recovered)

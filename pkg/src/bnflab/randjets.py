"""Seeded random even jets for round-trip property checks."""

from __future__ import annotations

import random

from .classical import MetricJet, PotentialJet
from .exactnum import Q


def random_rational(rng: random.Random, bound: int = 100) -> Q:
    return Q(rng.randint(1, bound) * rng.choice([-1, 1]), rng.randint(1, bound))


def random_potential_jet(rng: random.Random, n: int, max_half_degree: int,
                         max_terms: int = 4, bound: int = 100) -> PotentialJet:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        for _ in range(60):
            k = tuple(rng.randint(0, max_half_degree) for _ in range(n))
            if 2 <= sum(k) <= max_half_degree:
                terms[k] = random_rational(rng, bound)
                break
    return PotentialJet(n, terms)


def random_metric_jet(rng: random.Random, n: int, max_half_degree: int,
                      max_terms: int = 2, bound: int = 100) -> MetricJet:
    """A random even metric perturbation contributing at degrees
    <= 2 * max_half_degree."""
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        for _ in range(60):
            i = rng.randint(0, n - 1)
            j = rng.randint(0, n - 1)
            k = tuple(rng.randint(0, max(max_half_degree - 2, 1))
                      for _ in range(n))
            degree = sum(k) + (1 if i == j else 2)
            if 1 <= sum(k) and degree <= max_half_degree:
                terms[(min(i, j), max(i, j), k)] = random_rational(rng, bound)
                break
    return MetricJet(n, terms)


def random_case(rng: random.Random, with_metric: bool | None = None):
    """One round-trip case: (n, order, jet, metric or None).

    Dimension and degree are drawn jointly so that the large corner
    (n = 3 at half-degree 5) stays represented but does not dominate
    the runtime of a long randomized suite.
    """
    n = rng.choice([1, 1, 2, 2, 3])
    if n == 3:
        order = rng.choice([2, 3, 3, 4, 5])
    else:
        order = rng.randint(2, 5)
    jet = random_potential_jet(rng, n, order)
    if with_metric is None:
        with_metric = rng.random() < 0.5
    metric = random_metric_jet(rng, n, order) if with_metric else None
    return n, order, jet, metric

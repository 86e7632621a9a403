"""Numerical spectra, eigenvalue counting, and model fitting.

Finite-difference Dirichlet eigensolver for -hbar^2 Lap + V on a box (1D
and 2D), phase-space-volume eigenvalue counts, and least-squares recovery
of the eigenvalue model from computed spectra.  The fitted leading
coefficients feed the exact inverse machinery, closing the loop from
spectra back to the potential's Taylor coefficients.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, sparse
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from .classical import PotentialJet, jet_from_normal_coordinates
from .errors import (
    AmbiguousLabels,
    BoxTooSmall,
    GridConvergenceError,
    RankDeficientFit,
)
from .inverse import recover_potential
from .phasepoly import ActionPoly, Frequencies


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

def potential_function(jet: PotentialJet, omega_values) -> Callable:
    """Numpy-evaluable V(x) = sum omega_i^2 x_i^2 + jet terms."""
    if len(omega_values) != jet.n:
        raise ValueError("frequency count does not match jet dimension")
    weights = tuple(float(v) for v in omega_values)
    coeffs = [(k, float(c)) for k, c in jet.terms.items()]

    def V(*coords):
        if len(coords) != jet.n:
            raise ValueError(f"expected {jet.n} coordinate arrays")
        total = sum((w * w) * np.asarray(x) ** 2
                    for w, x in zip(weights, coords))
        for k, c in coeffs:
            mono = c
            for x, ki in zip(coords, k):
                if ki:
                    mono = mono * np.asarray(x) ** (2 * ki)
            total = total + mono
        return total

    return V


BUILTIN_POTENTIALS = {
    # name: (dimension, omega, jet)
    "harmonic1d": (1, (1.0,), {}),
    "quartic1d": (1, (1.0,), {(2,): 1}),
    "coupled2d": (2, (1.0, math.sqrt(2.0)), {(1, 1): 0.1}),
}


def builtin_potential(name: str):
    """Return (jet, Frequencies) for a named test potential."""
    try:
        dim, omega, terms = BUILTIN_POTENTIALS[name]
    except KeyError:
        raise ValueError(f"unknown builtin potential {name!r}; choices: "
                         f"{sorted(BUILTIN_POTENTIALS)}") from None
    return PotentialJet(dim, terms), Frequencies.numeric(omega)


# ---------------------------------------------------------------------------
# spectrum samples
# ---------------------------------------------------------------------------

@dataclass
class SpectrumSample:
    """Low-lying eigenvalues computed at one value of hbar."""

    hbar: float
    energies: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        if self.energies.size < 1:
            raise ValueError("a spectrum sample needs at least one level")
        if np.any(np.diff(self.energies) < 0):
            raise ValueError("energies must be sorted ascending")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @property
    def count(self) -> int:
        return int(self.energies.size)


def _solve_1d(V, hbar, box, grid, count):
    x = np.linspace(-box, box, grid + 2)[1:-1]
    dx = x[1] - x[0]
    diag = 2.0 * hbar**2 / dx**2 + V(x)
    off = -(hbar**2) / dx**2 * np.ones(grid - 1)
    vals = eigh_tridiagonal(diag, off, select="i",
                            select_range=(0, count - 1),
                            eigvals_only=True)
    return np.sort(vals)


def _solve_2d(V, hbar, box, grid, count):
    x = np.linspace(-box, box, grid + 2)[1:-1]
    dx = x[1] - x[0]
    lap1 = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1],
                        shape=(grid, grid)) / dx**2
    eye = sparse.identity(grid)
    lap = sparse.kron(lap1, eye) + sparse.kron(eye, lap1)
    X, Y = np.meshgrid(x, x, indexing="ij")
    H = (-(hbar**2) * lap + sparse.diags(V(X, Y).ravel())).tocsc()
    vals = eigsh(H, k=count, sigma=0.0, which="LM",
                 return_eigenvectors=False)
    return np.sort(vals)


def eigensolve(V: Callable, hbar: float, dim: int = 1,
               box_halfwidth: float = 4.0, grid_points: int = 2000,
               count: int = 10, refine_tol: Optional[float] = None
               ) -> SpectrumSample:
    """Lowest Dirichlet eigenvalues of -hbar^2 Lap + V on a centered box.

    Second-order central differences on a uniform grid; the symmetric
    eigenproblem is solved to machine precision.  The grid is doubled once
    and the refined energies are returned, with the drift between the two
    grids recorded in meta["refinement_drift"] (and checked against
    refine_tol when given).
    """
    if hbar <= 0 or box_halfwidth <= 0:
        raise ValueError("hbar and box_halfwidth must be positive")
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if count < 1:
        raise ValueError("count must be >= 1")
    limit = grid_points if dim == 1 else grid_points**2
    if count * 4 > limit:
        raise ValueError("count too large for the grid")
    solver = _solve_1d if dim == 1 else _solve_2d
    coarse = solver(V, hbar, box_halfwidth, grid_points, count)
    fine = solver(V, hbar, box_halfwidth, 2 * grid_points, count)
    drift = float(np.max(np.abs(fine - coarse)))
    if refine_tol is not None and drift > refine_tol:
        raise GridConvergenceError(
            f"refinement drift {drift:.3e} exceeds tolerance {refine_tol:.3e}")
    meta = {
        "dim": dim,
        "box_halfwidth": float(box_halfwidth),
        "grid_points": int(2 * grid_points),
        "coarse_grid_points": int(grid_points),
        "discretization_order": 2,
        "refinement_drift": drift,
    }
    return SpectrumSample(hbar=hbar, energies=fine, meta=meta)


# ---------------------------------------------------------------------------
# Weyl counting
# ---------------------------------------------------------------------------

def weyl_count(V: Callable, delta: float, hbar: float,
               spectrum: SpectrumSample):
    """Compare the eigenvalue count below delta with the phase-space volume.

    Returns (count, prediction, ratio) where prediction is
    (2 pi hbar)^-n * Vol{ |xi|^2 + V(x) <= delta }, computed by adaptive
    quadrature over the classically allowed region.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    dim = spectrum.meta.get("dim", 1)
    box = spectrum.meta.get("box_halfwidth")
    if box is None:
        raise ValueError("spectrum sample lacks box metadata")
    if spectrum.energies[-1] < delta:
        raise ValueError(
            "spectrum does not exhaust [0, delta]; request more levels")
    # the allowed region must stay inside the box
    edge = 1e-3 * box
    if dim == 1:
        boundary_vals = [float(V(np.array([b]))[0])
                         for b in (-box + edge, box - edge)]
    else:
        pts = [(-box + edge, 0.0), (box - edge, 0.0),
               (0.0, -box + edge), (0.0, box - edge),
               (-box + edge, -box + edge), (box - edge, box - edge)]
        boundary_vals = [float(V(np.array([p[0]]), np.array([p[1]]))[0])
                         for p in pts]
    if min(boundary_vals) <= delta:
        raise BoxTooSmall(
            f"V on the box boundary dips to {min(boundary_vals):.3g} "
            f"<= delta = {delta}; enlarge the box")

    count = int(np.searchsorted(spectrum.energies, delta, side="right"))
    if dim == 1:
        vol, _ = integrate.quad(
            lambda x: 2.0 * math.sqrt(max(delta - float(V(np.array([x]))[0]), 0.0)),
            -box, box, limit=400)
        prediction = vol / (2 * math.pi * hbar)
    else:
        vol, _ = integrate.dblquad(
            lambda y, x: math.pi * max(
                delta - float(V(np.array([x]), np.array([y]))[0]), 0.0),
            -box, box, -box, box)
        prediction = vol / (2 * math.pi * hbar) ** 2
    return count, prediction, count / prediction


# ---------------------------------------------------------------------------
# model fitting
# ---------------------------------------------------------------------------

def _lattice_labels(n: int, omega_f, hbar: float, emax: float):
    """Harmonic labels k with sum omega_i (2k_i + 1) hbar <= emax."""
    bounds = []
    base = sum(omega_f) * hbar
    for i in range(n):
        if base > emax:
            return []
        bounds.append(int((emax - base) / (2 * omega_f[i] * hbar)) + 1)
    labels = []

    def rec(prefix, cost):
        i = len(prefix)
        if i == n:
            labels.append(tuple(prefix))
            return
        k = 0
        while cost + 2 * omega_f[i] * k * hbar <= emax:
            rec(prefix + [k], cost + 2 * omega_f[i] * k * hbar)
            k += 1

    rec([], base)
    return labels


@dataclass
class FittedModel:
    """Least-squares estimate of the eigenvalue model coefficients."""

    n: int
    omega: tuple
    degree_cap: int
    hbar_cap: int
    coefficients: dict           # (j, m) -> float
    residual_norm: float
    rank: int
    n_rows: int
    assignments: dict            # hbar -> number of levels used

    def action_polys(self) -> list:
        """The fitted p_j as float ActionPoly objects."""
        out = [ActionPoly.zero(self.n) for _ in range(self.hbar_cap + 1)]
        for (j, m), c in self.coefficients.items():
            out[j] = out[j] + ActionPoly(self.n, {m: complex(c)})
        return out

    def classical_actions(self) -> dict:
        """The degree >= 2 part of p_0, keyed by degree, for inversion."""
        actions = {}
        for (j, m), c in self.coefficients.items():
            if j != 0 or sum(m) < 2:
                continue
            d = sum(m)
            if d not in actions:
                actions[d] = ActionPoly.zero(self.n)
            actions[d] = actions[d] + ActionPoly(self.n, {m: complex(c)})
        if not actions:
            return {}
        top = max(actions)
        return {d: actions.get(d, ActionPoly.zero(self.n))
                for d in range(2, top + 1)}


def fit_model_from_spectra(samples: Sequence[SpectrumSample], n: int,
                           omega: Frequencies, degree_cap: int,
                           hbar_cap: int, max_k: Optional[int] = None,
                           energy_cutoff: Optional[float] = None,
                           gap_guard: float = 0.25,
                           grid_error_columns: bool = False) -> FittedModel:
    """Least-squares fit of E_k(hbar) ~ sum_j hbar^j p_j((2k+1) hbar).

    Levels are labelled by sorting against the harmonic prediction
    sum omega_i (2k_i+1) hbar; the assignment is rejected when two
    predictions are closer than gap_guard times the smallest single-mode
    spacing.  The monomial basis runs over hbar orders j <= hbar_cap and
    action exponents |m| <= degree_cap / 2 (the constant is excluded at
    j = 0 since the potential vanishes at its minimum).

    grid_error_columns adds nuisance columns 1, (2k_i+1)^2 at hbar order
    zero.  A second-order finite-difference eigensolve on a fixed grid
    carries an hbar-independent error of exactly that shape, which would
    otherwise alias onto the physical coefficients; the nuisance estimates
    are discarded.
    """
    if len(samples) < 3:
        raise ValueError("need at least 3 distinct hbar values")
    if omega.is_symbolic:
        raise ValueError("fitting needs numeric frequencies")
    omega_f = omega.float_values()
    if len(omega_f) != n:
        raise ValueError("frequency count does not match the dimension")
    hbars = [s.hbar for s in samples]
    if len(set(hbars)) != len(hbars):
        raise ValueError("hbar values must be distinct")

    basis = []
    for j in range(hbar_cap + 1):
        for d in range(0, degree_cap // 2 + 1):
            for m in _multi_indices_of_degree(n, d):
                if j == 0 and d == 0:
                    continue
                basis.append((j, m))
    nuisance = []
    if grid_error_columns:
        nuisance.append(None)                      # constant offset
        for i in range(n):
            nuisance.append(i)                     # (2 k_i + 1)^2

    rows, rhs = [], []
    assignments = {}
    for sample in samples:
        hbar = sample.hbar
        emax = float(sample.energies[-1])
        if energy_cutoff is not None:
            emax = min(emax, energy_cutoff)
        labels = _lattice_labels(n, omega_f, hbar, emax)
        predictions = sorted((sum(w * (2 * k + 1) for w, k in zip(omega_f, kk)) * hbar, kk)
                             for kk in labels)
        if max_k is not None:
            predictions = [(e, kk) for e, kk in predictions
                           if max(kk) <= max_k]
        used = min(len(predictions), sample.count)
        # ambiguity only matters among levels actually assigned (plus the
        # one just past the cut, which competes for the last slot)
        mingap = 2 * min(omega_f) * hbar
        window = predictions[: used + 1]
        for (e1, k1), (e2, k2) in zip(window, window[1:]):
            if e2 - e1 < gap_guard * mingap:
                raise AmbiguousLabels(
                    f"harmonic predictions for {k1} and {k2} differ by "
                    f"{e2 - e1:.3e} < {gap_guard} * {mingap:.3e} at "
                    f"hbar = {hbar}")
        assignments[hbar] = used
        for idx in range(used):
            _, kk = predictions[idx]
            energy = float(sample.energies[idx])
            s_vals = [(2 * k + 1) * hbar for k in kk]
            row = []
            for j, m in basis:
                phi = hbar ** j
                for sv, mi in zip(s_vals, m):
                    phi *= sv ** mi
                row.append(phi)
            for which in nuisance:
                row.append(1.0 if which is None
                           else float((2 * kk[which] + 1) ** 2))
            rows.append(row)
            rhs.append(energy)

    design = np.asarray(rows, dtype=float)
    target = np.asarray(rhs, dtype=float)
    n_unknowns = len(basis) + len(nuisance)
    if design.shape[0] < n_unknowns:
        raise RankDeficientFit(
            f"{design.shape[0]} level observations cannot determine "
            f"{n_unknowns} coefficients; lower the caps or add data")
    sol, res, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < n_unknowns:
        raise RankDeficientFit(
            f"design matrix rank {rank} < {n_unknowns} unknowns")
    residual = float(np.linalg.norm(design @ sol - target))
    coefficients = {key: float(v) for key, v in zip(basis, sol)}
    return FittedModel(n=n, omega=tuple(omega_f), degree_cap=degree_cap,
                       hbar_cap=hbar_cap, coefficients=coefficients,
                       residual_norm=residual, rank=int(rank),
                       n_rows=design.shape[0], assignments=assignments)


def _multi_indices_of_degree(n, d):
    if n == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _multi_indices_of_degree(n - 1, d - first):
            yield (first,) + rest


def pipeline_invert(samples: Sequence[SpectrumSample], omega: Frequencies,
                    degree_cap: int, hbar_cap: int,
                    max_k: Optional[int] = None,
                    energy_cutoff: Optional[float] = None,
                    gap_guard: float = 0.25,
                    grid_error_columns: bool = False):
    """Spectra -> fitted eigenvalue model -> potential jet estimate.

    Returns (jet, diagnostics): the float-coefficient jet recovered from
    the fitted leading symbol, plus fit residuals for judging it.
    """
    n = omega.n
    fitted = fit_model_from_spectra(samples, n, omega, degree_cap, hbar_cap,
                                    max_k=max_k, energy_cutoff=energy_cutoff,
                                    gap_guard=gap_guard,
                                    grid_error_columns=grid_error_columns)
    actions = fitted.classical_actions()
    float_omega = Frequencies.numeric(fitted.omega,
                                      resonance_tol=omega.resonance_tol)
    if actions:
        # the spectrum determines the jet in harmonic normal coordinates;
        # scale back to the physical potential
        jet = jet_from_normal_coordinates(
            recover_potential(actions, float_omega), float_omega)
    else:
        jet = PotentialJet(n, {})
    diagnostics = {
        "fit_residual": fitted.residual_norm,
        "rows": fitted.n_rows,
        "rank": fitted.rank,
        "assignments": fitted.assignments,
        "coefficients": {f"{j}:{','.join(map(str, m))}": c
                         for (j, m), c in sorted(fitted.coefficients.items())},
    }
    return jet, diagnostics


def eigensolve_many(V: Callable, hbars: Sequence[float], workers: int = 1,
                    **kwargs) -> list:
    """Eigensolve at several hbar values, optionally in a thread pool."""
    if workers <= 1 or len(hbars) <= 1:
        return [eigensolve(V, h, **kwargs) for h in hbars]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(eigensolve, V, h, **kwargs) for h in hbars]
        return [f.result() for f in futures]

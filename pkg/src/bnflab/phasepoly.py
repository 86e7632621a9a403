"""Sparse phase-space polynomials in complex coordinates.

A polynomial is stored as a dict mapping exponent pairs (alpha, beta) --
meaning the monomial z^alpha * zbar^beta with z_j = x_j + i*xi_j -- to a
coefficient.  Three coefficient fields are supported, selected by the
:class:`Frequencies` object of a computation:

* symbolic frequencies  -> :class:`~bnflab.exactnum.Scalar`
* exact rational frequencies -> :class:`~bnflab.exactnum.GaussianRational`
* floating frequencies  -> built-in ``complex``

All values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ResonantInput, SmallDivisor
from .exactnum import (
    GR_ONE,
    RATIONAL_TYPES,
    GaussianRational,
    Q,
    Scalar,
    as_rational,
    scalar_sum,
)

DEFAULT_RESONANCE_TOL = 1e-9


# ---------------------------------------------------------------------------
# coefficient dispatch: complex vs GaussianRational vs Scalar
# ---------------------------------------------------------------------------

def coeff_is_zero(c) -> bool:
    if isinstance(c, complex):
        return c == 0
    return c.is_zero


def coeff_conj(c):
    return c.conjugate()


def coeff_mul_imag(c, k: int):
    """c * (i*k)."""
    if isinstance(c, complex):
        return c * complex(0, k)
    return c.mul_imag(k)


def coeff_scale(c, q):
    """c * q for a rational q (converted to float in float mode)."""
    if isinstance(c, complex):
        return c * float(q)
    return c.scale(q)


def coeff_is_real(c, tol: float = 1e-9) -> bool:
    if isinstance(c, complex):
        return abs(c.imag) <= tol * max(1.0, abs(c))
    return c.is_real


def coeff_to_complex(c, omega_values=None) -> complex:
    if isinstance(c, complex):
        return c
    return c.evaluate(omega_values)


def coeff_eq(a, b) -> bool:
    if isinstance(a, complex) or isinstance(b, complex):
        return complex(a) == complex(b)
    return a == b


# ---------------------------------------------------------------------------
# frequencies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Frequencies:
    """Frequency vector of the quadratic part, and the coefficient field.

    mode is "symbolic" (indeterminates w_1..w_n, exact arithmetic) or
    "numeric".  Numeric values that are all rational stay exact; any float
    value switches the whole computation to complex floating arithmetic.
    """

    n: int
    mode: str
    values: tuple = None
    resonance_tol: float = DEFAULT_RESONANCE_TOL
    names: tuple = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.mode == "symbolic":
            names = self.names or tuple(f"w{i + 1}" for i in range(self.n))
            if len(set(names)) != len(names) or len(names) != self.n:
                raise ValueError("symbolic frequencies need n distinct names")
            object.__setattr__(self, "names", tuple(names))
        elif self.mode == "numeric":
            if self.values is None or len(self.values) != self.n:
                raise ValueError("numeric frequencies need n values")
            exact = all(isinstance(v, RATIONAL_TYPES) for v in self.values)
            vals = tuple(Q(v) for v in self.values) if exact \
                else tuple(float(v) for v in self.values)
            if any(v <= 0 for v in vals):
                raise ValueError("frequencies must be positive")
            if len(set(vals)) != len(vals):
                raise ValueError("frequencies must be pairwise distinct")
            if self.resonance_tol <= 0:
                raise ValueError("resonance tolerance must be positive")
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def symbolic(cls, n, names=None):
        return cls(n=n, mode="symbolic", names=names)

    @classmethod
    def numeric(cls, values, resonance_tol=DEFAULT_RESONANCE_TOL):
        values = tuple(values)
        return cls(n=len(values), mode="numeric", values=values,
                   resonance_tol=resonance_tol)

    # -- field queries --------------------------------------------------------
    @property
    def is_symbolic(self) -> bool:
        return self.mode == "symbolic"

    @property
    def is_exact(self) -> bool:
        return self.mode == "symbolic" or not isinstance(self.values[0], float)

    def rational(self, q):
        """Embed an exact rational into the coefficient field."""
        if self.is_symbolic:
            return Scalar.from_rational(q, self.n)
        if self.is_exact:
            return GaussianRational(as_rational(q))
        return complex(float(as_rational(q)))

    def coefficient(self, value):
        """Embed a rational or float into the coefficient field."""
        if isinstance(value, float) and not self.is_exact:
            return complex(value)
        return self.rational(as_rational(value))

    def zero(self):
        return self.rational(0)

    def omega(self, i):
        """The i-th frequency as a coefficient."""
        if self.is_symbolic:
            return Scalar.variable(i, self.n)
        if self.is_exact:
            return GaussianRational(self.values[i])
        return complex(self.values[i])

    def form_value(self, m) -> float:
        if self.is_symbolic:
            raise ValueError("symbolic frequencies have no numeric forms")
        return float(sum(v * c for v, c in zip(self.values, m)))

    def div_form(self, c, m):
        """Divide a coefficient by <omega, m>, guarding against resonance."""
        if not any(m):
            raise ValueError("division by the zero form")
        if self.is_symbolic:
            return c.div_form(m)
        if self.is_exact:
            val = sum(v * k for v, k in zip(self.values, m))
            if val == 0:
                raise ResonantInput(m)
            return c.div_rational(val)
        val = self.form_value(m)
        if abs(val) <= self.resonance_tol:
            raise SmallDivisor(m, val, self.resonance_tol)
        return c / val

    def mul_form(self, c, m):
        """Multiply a coefficient by <omega, m> (inverse of div_form)."""
        if self.is_symbolic:
            return c.mul_form(m)
        if self.is_exact:
            return c * sum(Q(v) * k for v, k in zip(self.values, m))
        return c * self.form_value(m)

    def float_values(self):
        if self.is_symbolic:
            raise ValueError("symbolic frequencies have no numeric values")
        return tuple(float(v) for v in self.values)


def scalar_div_linear_form(c, m, omega: Frequencies):
    """Divide the coefficient c by the linear form <omega, m>."""
    return omega.div_form(c, m)


# ---------------------------------------------------------------------------
# multi-index helpers
# ---------------------------------------------------------------------------

def degree(k) -> int:
    return sum(k)


def zero_index(n) -> tuple:
    return (0,) * n


def unit_index(n, i) -> tuple:
    e = [0] * n
    e[i] = 1
    return tuple(e)


# ---------------------------------------------------------------------------
# PhasePoly
# ---------------------------------------------------------------------------

class PhasePoly:
    """Sparse polynomial in z_1..z_n, zbar_1..zbar_n."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        clean = {}
        for key, c in (terms or {}).items():
            if not coeff_is_zero(c):
                clean[key] = c
        self.terms = clean

    @classmethod
    def zero(cls, n):
        return cls(n)

    @classmethod
    def monomial(cls, alpha, beta, coeff):
        return cls(len(alpha), {(tuple(alpha), tuple(beta)): coeff})

    # -- ring operations ------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, PhasePoly):
            raise TypeError(f"expected PhasePoly, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key)
            s = c if s is None else s + c
            if coeff_is_zero(s):
                out.pop(key, None)
            else:
                out[key] = s
        result = PhasePoly(self.n)
        result.terms = out
        return result

    def __neg__(self):
        result = PhasePoly(self.n)
        result.terms = {k: -c for k, c in self.terms.items()}
        return result

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        out = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (tuple(x + y for x, y in zip(a1, a2)),
                       tuple(x + y for x, y in zip(b1, b2)))
                c = c1 * c2
                s = out.get(key)
                s = c if s is None else s + c
                if coeff_is_zero(s):
                    out.pop(key, None)
                else:
                    out[key] = s
        result = PhasePoly(self.n)
        result.terms = out
        return result

    def scale(self, q) -> "PhasePoly":
        if as_rational(q) == 0:
            return PhasePoly(self.n)
        result = PhasePoly(self.n)
        result.terms = {k: coeff_scale(c, q) for k, c in self.terms.items()}
        return result

    def mul_imag(self, k: int) -> "PhasePoly":
        result = PhasePoly(self.n)
        result.terms = {key: coeff_mul_imag(c, k) for key, c in self.terms.items()}
        return result

    # -- structure -------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def term_degree(self, key) -> int:
        return sum(key[0]) + sum(key[1])

    def degrees(self):
        return sorted({self.term_degree(k) for k in self.terms})

    def min_degree(self):
        return min((self.term_degree(k) for k in self.terms), default=0)

    def max_degree(self):
        return max((self.term_degree(k) for k in self.terms), default=0)

    def homogeneous_part(self, d) -> "PhasePoly":
        result = PhasePoly(self.n)
        result.terms = {k: c for k, c in self.terms.items()
                        if self.term_degree(k) == d}
        return result

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def truncate(self, max_degree) -> "PhasePoly":
        result = PhasePoly(self.n)
        result.terms = {k: c for k, c in self.terms.items()
                        if self.term_degree(k) <= max_degree}
        return result

    @property
    def even_symmetric(self) -> bool:
        return all((a + b) % 2 == 0
                   for alpha, beta in self.terms
                   for a, b in zip(alpha, beta))

    def real_valued(self, tol: float = 1e-9) -> bool:
        seen = set()
        for (alpha, beta), c in self.terms.items():
            if (alpha, beta) in seen:
                continue
            seen.add((beta, alpha))
            mirror = self.terms.get((beta, alpha))
            if mirror is None:
                return False
            if isinstance(c, complex):
                if abs(c.conjugate() - mirror) > tol * max(1.0, abs(c)):
                    return False
            elif not coeff_eq(coeff_conj(c), mirror):
                return False
        return True

    def conjugate(self) -> "PhasePoly":
        """Complex conjugation: swaps z and zbar, conjugates coefficients."""
        result = PhasePoly(self.n)
        result.terms = {(beta, alpha): coeff_conj(c)
                        for (alpha, beta), c in self.terms.items()}
        return result

    def diagonal_part(self) -> "ActionPoly":
        out = {}
        for (alpha, beta), c in self.terms.items():
            if alpha == beta:
                out[alpha] = c
        result = ActionPoly(self.n)
        result.terms = out
        return result

    def off_diagonal(self) -> "PhasePoly":
        result = PhasePoly(self.n)
        result.terms = {k: c for k, c in self.terms.items() if k[0] != k[1]}
        return result

    def derive(self, nu, mu) -> "PhasePoly":
        """Apply d^nu/dz^nu d^mu/dzbar^mu with falling-factorial weights."""
        out = {}
        for (alpha, beta), c in self.terms.items():
            w = 1
            na, nb = list(alpha), list(beta)
            ok = True
            for i in range(self.n):
                if alpha[i] < nu[i] or beta[i] < mu[i]:
                    ok = False
                    break
                for r in range(nu[i]):
                    w *= alpha[i] - r
                for r in range(mu[i]):
                    w *= beta[i] - r
                na[i] = alpha[i] - nu[i]
                nb[i] = beta[i] - mu[i]
            if not ok or w == 0:
                continue
            key = (tuple(na), tuple(nb))
            add = coeff_scale(c, w) if w != 1 else c
            s = out.get(key)
            s = add if s is None else s + add
            if coeff_is_zero(s):
                out.pop(key, None)
            else:
                out[key] = s
        result = PhasePoly(self.n)
        result.terms = out
        return result

    def permute(self, sigma) -> "PhasePoly":
        """Relabel coordinates: new variable i is the old variable sigma[i]."""
        result = PhasePoly(self.n)
        result.terms = {
            (tuple(alpha[sigma[i]] for i in range(self.n)),
             tuple(beta[sigma[i]] for i in range(self.n))): c
            for (alpha, beta), c in self.terms.items()
        }
        return result

    def map_coefficients(self, fn) -> "PhasePoly":
        return PhasePoly(self.n, {k: fn(c) for k, c in self.terms.items()})

    def simplified(self) -> "PhasePoly":
        """Reduce Scalar coefficients to cancelled form (no-op otherwise)."""
        if not self.terms or not isinstance(next(iter(self.terms.values())), Scalar):
            return self
        return self.map_coefficients(lambda c: c.simplified())

    def to_float(self, omega_values=None) -> "PhasePoly":
        return self.map_coefficients(lambda c: coeff_to_complex(c, omega_values))

    def __eq__(self, other):
        if not isinstance(other, PhasePoly) or other.n != self.n:
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(coeff_eq(c, other.terms[k]) for k, c in self.terms.items())

    def __hash__(self):
        raise TypeError("PhasePoly is not hashable")

    def __repr__(self):
        parts = []
        for (alpha, beta), c in sorted(self.terms.items())[:8]:
            parts.append(f"z^{list(alpha)} zbar^{list(beta)}: {c!r}")
        more = "" if len(self.terms) <= 8 else f" ... ({len(self.terms)} terms)"
        return f"PhasePoly(n={self.n}, {{{'; '.join(parts)}}}{more})"


# ---------------------------------------------------------------------------
# ActionPoly
# ---------------------------------------------------------------------------

class ActionPoly:
    """Polynomial in the action variables s_i = |z_i|^2 = x_i^2 + xi_i^2."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        clean = {}
        for k, c in (terms or {}).items():
            if not coeff_is_zero(c):
                clean[tuple(k)] = c
        self.terms = clean

    @classmethod
    def zero(cls, n):
        return cls(n)

    def embed(self) -> PhasePoly:
        """The diagonal embedding s^m -> z^m zbar^m."""
        result = PhasePoly(self.n)
        result.terms = {(m, m): c for m, c in self.terms.items()}
        return result

    def __add__(self, other):
        if not isinstance(other, ActionPoly) or other.n != self.n:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if coeff_is_zero(s):
                out.pop(m, None)
            else:
                out[m] = s
        result = ActionPoly(self.n)
        result.terms = out
        return result

    def __neg__(self):
        result = ActionPoly(self.n)
        result.terms = {m: -c for m, c in self.terms.items()}
        return result

    def __sub__(self, other):
        return self + (-other)

    def scale(self, q) -> "ActionPoly":
        result = ActionPoly(self.n)
        result.terms = {m: coeff_scale(c, q) for m, c in self.terms.items()}
        return result

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        return sorted({sum(m) for m in self.terms})

    def homogeneous_part(self, d) -> "ActionPoly":
        result = ActionPoly(self.n)
        result.terms = {m: c for m, c in self.terms.items() if sum(m) == d}
        return result

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def real_valued(self, tol: float = 1e-9) -> bool:
        return all(coeff_is_real(c, tol) for c in self.terms.values())

    def permute(self, sigma) -> "ActionPoly":
        result = ActionPoly(self.n)
        result.terms = {tuple(m[sigma[i]] for i in range(self.n)): c
                        for m, c in self.terms.items()}
        return result

    def map_coefficients(self, fn) -> "ActionPoly":
        return ActionPoly(self.n, {m: fn(c) for m, c in self.terms.items()})

    def simplified(self) -> "ActionPoly":
        if not self.terms or not isinstance(next(iter(self.terms.values())), Scalar):
            return self
        return self.map_coefficients(lambda c: c.simplified())

    def to_float(self, omega_values=None) -> "ActionPoly":
        return self.map_coefficients(lambda c: coeff_to_complex(c, omega_values))

    def evaluate(self, s_values) -> complex:
        """Evaluate at numeric action values (requires numeric coefficients)."""
        total = 0j
        for m, c in self.terms.items():
            mono = 1.0
            for v, p in zip(s_values, m):
                mono *= float(v) ** p
            total += coeff_to_complex(c) * mono
        return total

    def __eq__(self, other):
        if not isinstance(other, ActionPoly) or other.n != self.n:
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(coeff_eq(c, other.terms[m]) for m, c in self.terms.items())

    def __hash__(self):
        raise TypeError("ActionPoly is not hashable")

    def __repr__(self):
        parts = [f"s^{list(m)}: {c!r}" for m, c in sorted(self.terms.items())[:8]]
        more = "" if len(self.terms) <= 8 else f" ... ({len(self.terms)} terms)"
        return f"ActionPoly(n={self.n}, {{{'; '.join(parts)}}}{more})"


def diagonal_part(p: PhasePoly) -> ActionPoly:
    """Keep exactly the terms with alpha = beta, as an action polynomial."""
    return p.diagonal_part()


# ---------------------------------------------------------------------------
# coordinate changes
# ---------------------------------------------------------------------------

def _x_factor_expansion(a: int):
    """x^a = 2^-a sum_r C(a,r) z^r zbar^(a-r); list of (r, a-r, re, im)."""
    out = []
    for r in range(a + 1):
        out.append((r, a - r, Q(math.comb(a, r), 2 ** a), Q(0)))
    return out

def _xi_factor_expansion(b: int):
    """xi^b expansion: coefficient i^b (-1)^s C(b,s) / 2^b at z^s zbar^(b-s)."""
    out = []
    # i^b cycles through 1, i, -1, -i
    ib_re, ib_im = [(1, 0), (0, 1), (-1, 0), (0, -1)][b % 4]
    for s in range(b + 1):
        q = Q(math.comb(b, s), 2 ** b) * (-1) ** s
        out.append((s, b - s, q * ib_re, q * ib_im))
    return out


def real_to_complex(coeffs, omega: Frequencies) -> PhasePoly:
    """Convert a polynomial in x, xi monomials to complex coordinates.

    coeffs maps pairs (x_exponents, xi_exponents) of length-n tuples to
    rational or float values.  Substitutes x = (z + zbar)/2 and
    xi = (z - zbar)/(2i), expands and collects.
    """
    n = omega.n
    result = {}
    for (xe, ke), value in coeffs.items():
        if len(xe) != n or len(ke) != n:
            raise ValueError("exponent length does not match the dimension")
        # per-variable factors, then an n-fold product
        partial = {(zero_index(n), zero_index(n)): (Q(1), Q(0))}
        for i in range(n):
            factors = []
            for (r1, s1, re1, im1) in _x_factor_expansion(xe[i]):
                for (r2, s2, re2, im2) in _xi_factor_expansion(ke[i]):
                    re = re1 * re2 - im1 * im2
                    im = re1 * im2 + im1 * re2
                    factors.append((r1 + r2, s1 + s2, re, im))
            nxt = {}
            for (alpha, beta), (re0, im0) in partial.items():
                for (r, s, re1, im1) in factors:
                    key = (alpha[:i] + (r,) + alpha[i + 1:],
                           beta[:i] + (s,) + beta[i + 1:])
                    re = re0 * re1 - im0 * im1
                    im = re0 * im1 + im0 * re1
                    if key in nxt:
                        ore, oim = nxt[key]
                        nxt[key] = (ore + re, oim + im)
                    else:
                        nxt[key] = (re, im)
            partial = nxt
        for key, (re, im) in partial.items():
            if not re and not im:
                continue
            if omega.is_exact:
                g = GaussianRational(re, im)
                c = Scalar.from_gaussian(g, n) if omega.is_symbolic else g
                c = c.scale(as_rational(value))
            else:
                c = complex(float(re), float(im)) * float(value)
            if key in result:
                result[key] = result[key] + c
            else:
                result[key] = c
    return PhasePoly(n, result)


def complex_to_real(p: PhasePoly):
    """Inverse substitution z = x + i*xi, zbar = x - i*xi.

    Returns a dict mapping (x_exponents, xi_exponents) to coefficients in
    the same field as the input polynomial.
    """
    n = p.n
    out = {}
    for (alpha, beta), c in p.terms.items():
        # z^alpha zbar^beta = prod_i (x_i + i xi_i)^alpha_i (x_i - i xi_i)^beta_i
        partial = {(zero_index(n), zero_index(n)): (Q(1), Q(0))}
        for i in range(n):
            factors = {}
            for r in range(alpha[i] + 1):
                for s in range(beta[i] + 1):
                    # choose r xi's from the z factor, s from the zbar factor
                    xdeg = alpha[i] - r + beta[i] - s
                    kdeg = r + s
                    w = Q(math.comb(alpha[i], r) * math.comb(beta[i], s))
                    ib_re, ib_im = [(1, 0), (0, 1), (-1, 0), (0, -1)][r % 4]
                    jb_re, jb_im = [(1, 0), (0, -1), (-1, 0), (0, 1)][s % 4]
                    re = w * (ib_re * jb_re - ib_im * jb_im)
                    im = w * (ib_re * jb_im + ib_im * jb_re)
                    key = (xdeg, kdeg)
                    if key in factors:
                        ore, oim = factors[key]
                        factors[key] = (ore + re, oim + im)
                    else:
                        factors[key] = (re, im)
            nxt = {}
            for (xe, ke), (re0, im0) in partial.items():
                for (xdeg, kdeg), (re1, im1) in factors.items():
                    key = (xe[:i] + (xdeg,) + xe[i + 1:],
                           ke[:i] + (kdeg,) + ke[i + 1:])
                    re = re0 * re1 - im0 * im1
                    im = re0 * im1 + im0 * re1
                    if key in nxt:
                        ore, oim = nxt[key]
                        nxt[key] = (ore + re, oim + im)
                    else:
                        nxt[key] = (re, im)
            partial = nxt
        for key, (re, im) in partial.items():
            if not re and not im:
                continue
            if isinstance(c, complex):
                add = c * complex(float(re), float(im))
            else:
                add = c * GaussianRational(re, im)
            if key in out:
                add = out[key] + add
            if coeff_is_zero(add):
                out.pop(key, None)
            else:
                out[key] = add
    return out


# ---------------------------------------------------------------------------
# Poisson bracket
# ---------------------------------------------------------------------------

def poisson_bracket(a: PhasePoly, b: PhasePoly,
                    degree_cap: int | None = None) -> PhasePoly:
    """Canonical bracket {a, b} = sum_i a_xi b_x - a_x b_xi.

    In complex coordinates this is 2i * sum_i (a_z b_zbar - a_zbar b_z);
    on monomials it satisfies
    {sum omega_i z_i zbar_i, z^alpha zbar^beta}
        = -2i <omega, alpha - beta> z^alpha zbar^beta.

    With degree_cap, term pairs whose bracket exceeds the cap are skipped.
    """
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    n = a.n
    a_items = [(key, sum(key[0]) + sum(key[1]), c) for key, c in a.terms.items()]
    b_items = [(key, sum(key[0]) + sum(key[1]), c) for key, c in b.terms.items()]
    symbolic = bool(a_items) and isinstance(a_items[0][2], Scalar)
    out = {}
    for (aa, ab), da, ca in a_items:
        for (ba, bb), db, cb in b_items:
            if degree_cap is not None and da + db - 2 > degree_cap:
                continue
            prod = None
            for i in range(n):
                w = aa[i] * bb[i] - ab[i] * ba[i]
                if not w:
                    continue
                if prod is None:
                    prod = ca * cb
                asum = tuple(x + y - (1 if j == i else 0)
                             for j, (x, y) in enumerate(zip(aa, ba)))
                bsum = tuple(x + y - (1 if j == i else 0)
                             for j, (x, y) in enumerate(zip(ab, bb)))
                key = (asum, bsum)
                add = coeff_mul_imag(prod, 2 * w)
                if symbolic:
                    out.setdefault(key, []).append(add)
                else:
                    s = out.get(key)
                    s = add if s is None else s + add
                    if coeff_is_zero(s):
                        out.pop(key, None)
                    else:
                        out[key] = s
    result = PhasePoly(n)
    if symbolic:
        terms = {}
        for key, parts in out.items():
            s = scalar_sum(parts) if len(parts) > 1 else parts[0]
            if not s.is_zero:
                terms[key] = s
        result.terms = terms
    else:
        result.terms = out
    return result


def harmonic_oscillator(omega: Frequencies) -> PhasePoly:
    """The quadratic part sum_i omega_i z_i zbar_i."""
    terms = {}
    for i in range(omega.n):
        e = unit_index(omega.n, i)
        terms[(e, e)] = omega.omega(i)
    return PhasePoly(omega.n, terms)

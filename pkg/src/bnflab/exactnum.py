"""Exact coefficient arithmetic.

Two layers:

* :class:`GaussianRational` -- a complex number a + b*i with exact rational
  a, b.  This is the coefficient field for numeric-but-exact frequency
  vectors (all entries rational).

* :class:`Scalar` -- a rational function in the frequency indeterminates
  w_1..w_n of the restricted shape

      (polynomial in w with GaussianRational coefficients)
      / (product of integer linear forms <m, w>).

  The denominator is kept as an explicit multiset of primitive,
  sign-normalized integer vectors; it is never expanded.  Every division
  the normal-form algorithms perform is by such a form, so the shape is
  closed under +, -, * and division by forms.  Cancellation is multiset
  removal plus exact synthetic division of the numerator by a linear form;
  no general multivariate gcd is ever attempted.

Rational numbers are gmpy2.mpq when available (much faster), otherwise
fractions.Fraction.  Both print as "p/q" and accept the same constructors.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    Q = Fraction

#: types accepted wherever an exact rational is expected
RATIONAL_TYPES = (int, Fraction, type(Q(0)))

_Q0 = Q(0)
_Q1 = Q(1)


def as_rational(value) -> Q:
    """Coerce ints, Fractions, floats and 'p/q' strings to the rational type.

    Floats convert exactly (binary value, no rounding), which keeps float
    inputs honest when they are fed into exact code paths.
    """
    if isinstance(value, RATIONAL_TYPES):
        return Q(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot represent {value} as a rational")
        return Q(*value.as_integer_ratio())
    if isinstance(value, str):
        return Q(value)
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def rational_str(q) -> str:
    """Render a rational as 'p/q' with an explicit denominator."""
    q = Q(q)
    return f"{q.numerator}/{q.denominator}"


class GaussianRational:
    """Exact complex scalar with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, type(_Q0)) else as_rational(re)
        self.im = im if isinstance(im, type(_Q0)) else as_rational(im)

    # -- ring operations ------------------------------------------------
    def __add__(self, other):
        other = _coerce_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(other.re - self.re, other.im - self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, RATIONAL_TYPES):
            return GaussianRational(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    # -- field-protocol helpers used by the polynomial layer -------------
    def mul_imag(self, k: int) -> "GaussianRational":
        """Multiply by i*k for an integer k."""
        return GaussianRational(-self.im * k, self.re * k)

    def scale(self, q) -> "GaussianRational":
        return GaussianRational(self.re * q, self.im * q)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def div_rational(self, q) -> "GaussianRational":
        return GaussianRational(self.re / q, self.im / q)

    @property
    def is_zero(self) -> bool:
        return not self.re and not self.im

    @property
    def is_real(self) -> bool:
        return not self.im

    def evaluate(self, omega_values=None) -> complex:
        return complex(float(self.re), float(self.im))

    # -- comparisons ------------------------------------------------------
    def __eq__(self, other):
        other = _coerce_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _coerce_gaussian(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, RATIONAL_TYPES):
        return GaussianRational(value)
    return NotImplemented


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)


# ---------------------------------------------------------------------------
# linear forms <m, w>
# ---------------------------------------------------------------------------

def canonical_form(m) -> tuple[tuple[int, ...], int]:
    """Normalize an integer vector to primitive shape with positive lead.

    Returns (form, factor) with <m, w> = factor * <form, w>, gcd(form) = 1
    and the first nonzero entry of form positive.
    """
    m = tuple(int(v) for v in m)
    if not any(m):
        raise ValueError("linear form must be a nonzero integer vector")
    g = 0
    for v in m:
        g = math.gcd(g, abs(v))
    lead = next(v for v in m if v)
    if lead < 0:
        g = -g
    return tuple(v // g for v in m), g


def _form_poly(form, nvars):
    """The linear form <form, w> as a numerator polynomial."""
    poly = {}
    for i, c in enumerate(form):
        if c:
            e = [0] * nvars
            e[i] = 1
            poly[tuple(e)] = GaussianRational(c)
    return poly


def _poly_add(a, b):
    out = dict(a)
    for e, c in b.items():
        s = out.get(e)
        s = c if s is None else s + c
        if s.is_zero:
            out.pop(e, None)
        else:
            out[e] = s
    return out


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = ca * cb
            s = out.get(e)
            s = c if s is None else s + c
            if s.is_zero:
                out.pop(e, None)
            else:
                out[e] = s
    return out


def _poly_scale(a, q):
    return {e: c.scale(q) for e, c in a.items()}


def _try_divide_by_form(num, form):
    """Exact synthetic division of a numerator polynomial by <form, w>.

    Returns the quotient polynomial, or None when the division is not exact.
    Uses the monomial order (degree in w_j, then lex) where j is the first
    nonzero component of the form, under which the form's leading term is
    form[j] * w_j.
    """
    j = next(i for i, v in enumerate(form) if v)
    fj = form[j]
    rem = dict(num)
    quo = {}
    while rem:
        e = max(rem, key=lambda t: (t[j], t))
        if e[j] == 0:
            return None
        c = rem.pop(e)
        qe = list(e)
        qe[j] -= 1
        qe = tuple(qe)
        qc = c.scale(Q(1, fj))
        quo[qe] = qc
        # popping the leading term already cancelled the j-component of
        # qc * <form, w>; subtract only the remaining components
        for i, fi in enumerate(form):
            if not fi or i == j:
                continue
            te = list(qe)
            te[i] += 1
            te = tuple(te)
            s = rem.get(te)
            s = -(qc * fi) if s is None else s - qc * fi
            if s.is_zero:
                rem.pop(te, None)
            else:
                rem[te] = s
    return quo


# ---------------------------------------------------------------------------
# Scalar
# ---------------------------------------------------------------------------

class Scalar:
    """Rational function in the frequency indeterminates.

    num   -- dict mapping exponent tuples (length nvars) to GaussianRational
    forms -- sorted tuple of canonical integer vectors; the denominator is
             the product of <form, w> over the multiset
    """

    __slots__ = ("nvars", "num", "forms")

    def __init__(self, nvars, num, forms=()):
        self.nvars = nvars
        num = {e: c for e, c in num.items() if not c.is_zero}
        if not num:
            forms = ()
        self.num = num
        self.forms = forms

    def simplified(self) -> "Scalar":
        """Cancel denominator forms that divide the numerator exactly.

        Arithmetic keeps scalars lazily unreduced for speed; call this on
        values that are recorded or serialized.
        """
        num, forms = self.num, self.forms
        if not num or not forms:
            return self
        zero = (0,) * self.nvars
        if all(e == zero for e in num):
            return self
        forms = Counter(forms)
        changed = True
        while changed and num:
            changed = False
            for f in list(forms):
                while forms[f]:
                    quo = _try_divide_by_form(num, f)
                    if quo is None:
                        break
                    num = quo
                    forms[f] -= 1
                    changed = True
        return Scalar(self.nvars, num, tuple(sorted(forms.elements())))

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_rational(cls, q, nvars):
        return cls(nvars, {(0,) * nvars: GaussianRational(as_rational(q))})

    @classmethod
    def from_gaussian(cls, g: GaussianRational, nvars):
        return cls(nvars, {(0,) * nvars: g})

    @classmethod
    def variable(cls, i, nvars):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): GR_ONE})

    # -- ring operations ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.nvars != self.nvars:
                raise ValueError("scalars live over different frequency spaces")
            return other
        if isinstance(other, GaussianRational):
            return Scalar.from_gaussian(other, self.nvars)
        if isinstance(other, RATIONAL_TYPES):
            return Scalar.from_rational(other, self.nvars)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.forms == other.forms:
            return Scalar(self.nvars, _poly_add(self.num, other.num), self.forms)
        fa, fb = Counter(self.forms), Counter(other.forms)
        union = fa | fb
        num_a = self.num
        for f in (union - fa).elements():
            num_a = _poly_mul(num_a, _form_poly(f, self.nvars))
        num_b = other.num
        for f in (union - fb).elements():
            num_b = _poly_mul(num_b, _form_poly(f, self.nvars))
        return Scalar(self.nvars, _poly_add(num_a, num_b),
                      tuple(sorted(union.elements())))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.nvars, {e: -c for e, c in self.num.items()}, self.forms)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Scalar):
            if other.nvars != self.nvars:
                raise ValueError("scalars live over different frequency spaces")
            return Scalar(self.nvars, _poly_mul(self.num, other.num),
                          tuple(sorted(self.forms + other.forms)))
        if isinstance(other, GaussianRational):
            return Scalar(self.nvars, {e: c * other for e, c in self.num.items()},
                          self.forms)
        if isinstance(other, RATIONAL_TYPES):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    # -- field-protocol helpers ---------------------------------------------
    def mul_imag(self, k: int) -> "Scalar":
        return Scalar(self.nvars, {e: c.mul_imag(k) for e, c in self.num.items()},
                      self.forms)

    def scale(self, q) -> "Scalar":
        q = as_rational(q)
        if not q:
            return Scalar(self.nvars, {})
        return Scalar(self.nvars, _poly_scale(self.num, q), self.forms)

    def conjugate(self) -> "Scalar":
        return Scalar(self.nvars, {e: c.conjugate() for e, c in self.num.items()},
                      self.forms)

    def div_form(self, m) -> "Scalar":
        """Divide by the linear form <m, w>."""
        form, factor = canonical_form(m)
        num = _poly_scale(self.num, Q(1, factor))
        return Scalar(self.nvars, num, tuple(sorted(self.forms + (form,))))

    def mul_form(self, m) -> "Scalar":
        """Multiply by the linear form <m, w>."""
        form, factor = canonical_form(m)
        num = _poly_scale(self.num, Q(factor))
        if form in self.forms:
            forms = list(self.forms)
            forms.remove(form)
            return Scalar(self.nvars, num, tuple(forms))
        return Scalar(self.nvars, _poly_mul(num, _form_poly(form, self.nvars)),
                      self.forms)

    # -- predicates ----------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_real(self) -> bool:
        # denominator forms are real for real w, so reality is a numerator test
        return all(c.is_real for c in self.num.values())

    @property
    def is_constant(self) -> bool:
        zero = (0,) * self.nvars
        return not self.forms and all(e == zero for e in self.num)

    def constant_value(self) -> GaussianRational:
        if not self.is_constant:
            raise ValueError("scalar depends on the frequency indeterminates")
        return self.num.get((0,) * self.nvars, GR_ZERO)

    def __eq__(self, other):
        if isinstance(other, (Scalar, GaussianRational) + RATIONAL_TYPES):
            diff = self - other
            if diff is NotImplemented:
                return NotImplemented
            return diff.is_zero
        return NotImplemented

    def __hash__(self):
        raise TypeError("Scalar is not hashable; compare with ==")

    def __bool__(self):
        return not self.is_zero

    # -- evaluation ------------------------------------------------------------
    def evaluate(self, omega_values) -> complex:
        """Substitute numeric frequencies and return a complex value."""
        if omega_values is None and self.nvars:
            raise ValueError("symbolic scalar needs frequency values")
        total = 0j
        for e, c in self.num.items():
            mono = 1.0
            for v, p in zip(omega_values or (), e):
                mono *= float(v) ** p
            total += c.evaluate() * mono
        for f in self.forms:
            total /= sum(float(v) * c for v, c in zip(omega_values, f))
        return total

    def __repr__(self):
        body = " + ".join(
            f"({c.re}{'+' if c.im >= 0 else ''}{c.im}i)*w^{list(e)}"
            for e, c in sorted(self.num.items())
        ) or "0"
        if self.forms:
            body += " / " + "*".join(f"<{list(f)},w>" for f in self.forms)
        return f"Scalar({body})"


def scalar_sum(scalars) -> Scalar:
    """Sum scalars over a single common denominator.

    Groups summands by denominator multiset first (numerator-only adds),
    then brings every group to the union denominator once.  Much cheaper
    than folding with pairwise '+' when many terms share a key.
    """
    scalars = [s for s in scalars if s.num]
    if not scalars:
        raise ValueError("scalar_sum needs at least one nonzero candidate")
    nvars = scalars[0].nvars
    groups = {}
    for s in scalars:
        if s.forms in groups:
            groups[s.forms] = _poly_add(groups[s.forms], s.num)
        else:
            groups[s.forms] = dict(s.num)
    if len(groups) == 1:
        forms, num = next(iter(groups.items()))
        return Scalar(nvars, num, forms)
    union = Counter()
    for forms in groups:
        union |= Counter(forms)
    total = {}
    for forms, num in groups.items():
        for f in (union - Counter(forms)).elements():
            num = _poly_mul(num, _form_poly(f, nvars))
        total = _poly_add(total, num)
    return Scalar(nvars, total, tuple(sorted(union.elements())))

"""Exact arithmetic over Q(i)(pi) and polynomial rings over it.

Three layers:

* :class:`GaussRational` -- an element ``re + i*im`` of Q(i).
* :class:`Scalar` -- a rational function in the transcendental symbol ``pi``
  with Gaussian-rational coefficients, kept in lowest terms with a monic
  denominator.  Because pi is transcendental a Scalar is zero exactly when
  its numerator polynomial is zero.
* :class:`CoeffFn` -- a multivariate polynomial in named real symbols
  (coordinates, Fourier indices, the exponent ``m``) with Scalar
  coefficients.

:class:`RatFn` is a thin quotient of two CoeffFn values, used for the
deformation-family matrices whose entries are ratios in ``ret``/``imt``.

All values are immutable.  Every symbol (including ``pi``) is real, so
conjugation only flips the sign of ``i``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from math import lcm
from numbers import Rational
from typing import Iterable, Mapping, Union

__all__ = [
    "ArithmeticError_",
    "GaussRational",
    "Scalar",
    "CoeffFn",
    "RatFn",
    "PI",
    "I",
    "ONE",
    "ZERO",
    "symbol",
    "as_scalar",
    "as_coeff",
    "real_imag_parts",
    "pi_rational_multiple",
]


class ArithmeticError_(ArithmeticError):
    """Raised for division by zero and forbidden substitutions."""


# --------------------------------------------------------------------------
# Gaussian rationals
# --------------------------------------------------------------------------


class GaussRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, v) -> "GaussRational":
        if isinstance(v, GaussRational):
            return v
        if isinstance(v, (int, Fraction, Rational)):
            return cls(v, 0)
        raise TypeError(f"cannot coerce {v!r} to GaussRational")

    def __add__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GaussRational.coerce(o))

    def __rsub__(self, o):
        return GaussRational.coerce(o) - self

    def __mul__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re * o.re - self.im * o.im,
                             self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GaussRational":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ArithmeticError_("division by zero Gaussian rational")
        return GaussRational(self.re / n, -self.im / n)

    def __truediv__(self, o):
        return self * GaussRational.coerce(o).inverse()

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        try:
            o = GaussRational.coerce(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def denominator_lcm(self) -> int:
        return lcm(self.re.denominator, self.im.denominator)

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"

    def __str__(self):
        return _fmt_gauss(self)


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_gauss(g: GaussRational) -> str:
    """Format a Gaussian rational so the expression grammar reads it back."""
    if g.im == 0:
        return _fmt_frac(g.re)
    if g.re == 0:
        if g.im == 1:
            return "i"
        if g.im == -1:
            return "-i"
        return f"{_fmt_frac(g.im)}*i"
    im = g.im
    sign = "+" if im > 0 else "-"
    a = abs(im)
    ipart = "i" if a == 1 else f"{_fmt_frac(a)}*i"
    return f"({_fmt_frac(g.re)} {sign} {ipart})"


G0 = GaussRational(0)
G1 = GaussRational(1)


# --------------------------------------------------------------------------
# Univariate polynomials in pi over Q(i); tuples of GaussRational, low -> high
# --------------------------------------------------------------------------


def _trim(c: list) -> tuple:
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def _padd(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, v in enumerate(b):
        out[k] = out[k] + v
    return _trim(out)


def _pneg(a: tuple) -> tuple:
    return tuple(-v for v in a)


def _pmul(a: tuple, b: tuple) -> tuple:
    if not a or not b:
        return ()
    out = [G0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = out[i + j] + x * y
    return _trim(out)


def _pscale(a: tuple, s: GaussRational) -> tuple:
    if not s:
        return ()
    return _trim([v * s for v in a])


def _pdivmod(a: tuple, b: tuple) -> tuple[tuple, tuple]:
    if not b:
        raise ArithmeticError_("polynomial division by zero")
    rem = list(a)
    q = [G0] * max(len(a) - len(b) + 1, 0)
    inv_lead = b[-1].inverse()
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        f = rem[-1] * inv_lead
        q[shift] = f
        for k, v in enumerate(b):
            rem[shift + k] = rem[shift + k] - f * v
        rem = list(_trim(rem))
    return _trim(q), tuple(rem)


def _pmonic(a: tuple) -> tuple:
    if not a:
        return a
    return _pscale(a, a[-1].inverse())


def _pgcd(a: tuple, b: tuple) -> tuple:
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return _pmonic(a)


def _pconj(a: tuple) -> tuple:
    return tuple(v.conjugate() for v in a)


_P1 = (G1,)


# --------------------------------------------------------------------------
# Scalars: Q(i)(pi)
# --------------------------------------------------------------------------


@total_ordering
class Scalar:
    """Element of Q(i)(pi), stored as num(pi)/den(pi) in lowest terms."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: tuple = (), den: tuple = _P1, _normalized: bool = False):
        if not _normalized:
            if not den:
                raise ArithmeticError_("Scalar with zero denominator")
            if not num:
                num, den = (), _P1
            else:
                g = _pgcd(num, den)
                if len(g) > 1:
                    num, _ = _pdivmod(num, g)
                    den, _ = _pdivmod(den, g)
                lead = den[-1]
                if lead != G1:
                    inv = lead.inverse()
                    num = _pscale(num, inv)
                    den = _pscale(den, inv)
        self.num = num
        self.den = den
        self._hash = None

    # construction --------------------------------------------------------
    @classmethod
    def from_gauss(cls, g) -> "Scalar":
        g = GaussRational.coerce(g)
        return cls((g,) if g else (), _P1, True)

    @classmethod
    def from_complex_parts(cls, re, im=0) -> "Scalar":
        return cls.from_gauss(GaussRational(re, im))

    @classmethod
    def pi_power(cls, k: int) -> "Scalar":
        if k >= 0:
            return cls(tuple([G0] * k + [G1]), _P1, True)
        return cls(_P1, tuple([G0] * (-k) + [G1]), True)

    # predicates ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_constant(self) -> bool:
        """True if free of pi, i.e. an element of Q(i)."""
        return len(self.num) <= 1 and len(self.den) == 1

    def is_real(self) -> bool:
        return self == self.conjugate()

    def is_rational(self) -> bool:
        return self.is_constant() and (not self.num or self.num[0].im == 0)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.num[0].re if self.num else Fraction(0)

    def as_gauss(self) -> GaussRational:
        if not self.is_constant():
            raise ValueError(f"{self} depends on pi")
        return self.num[0] if self.num else G0

    # arithmetic ------------------------------------------------------------
    def __add__(self, o):
        o = as_scalar(o)
        if o is NotImplemented:
            return NotImplemented
        if self.den == o.den:
            return Scalar(_padd(self.num, o.num), self.den)
        return Scalar(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)),
                      _pmul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(_pneg(self.num), self.den, True)

    def __sub__(self, o):
        o = as_scalar(o)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return as_scalar(o) - self

    def __mul__(self, o):
        o = as_scalar(o)
        if o is NotImplemented:
            return NotImplemented
        return Scalar(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self.num:
            raise ArithmeticError_("division by zero Scalar")
        return Scalar(self.den, self.num)

    def __truediv__(self, o):
        o = as_scalar(o)
        if o is NotImplemented:
            return NotImplemented
        if not o.num:
            raise ArithmeticError_(f"division by zero Scalar: ({self}) / ({o})")
        return self * o.inverse()

    def __rtruediv__(self, o):
        return as_scalar(o) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "Scalar":
        return Scalar(_pconj(self.num), _pconj(self.den))

    def real_imag(self) -> tuple["Scalar", "Scalar"]:
        """Split into real and imaginary parts (both real Scalars)."""
        if all(g.im == 0 for g in self.den):
            nr = _trim([GaussRational(g.re) for g in self.num])
            ni = _trim([GaussRational(g.im) for g in self.num])
            return Scalar(nr, self.den), Scalar(ni, self.den)
        cd = _pconj(self.den)
        n = _pmul(self.num, cd)
        d = _pmul(self.den, cd)
        d = tuple(GaussRational(g.re) for g in d)
        nr = _trim([GaussRational(g.re) for g in n])
        ni = _trim([GaussRational(g.im) for g in n])
        return Scalar(nr, d), Scalar(ni, d)

    # comparisons -----------------------------------------------------------
    def __eq__(self, o):
        o = as_scalar(o)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __lt__(self, o):
        return (self - as_scalar(o)).sign() < 0

    def sign(self) -> int:
        """Exact sign of a real Scalar (decided by interval evaluation)."""
        if not self.num:
            return 0
        if not self.is_real():
            raise ValueError(f"sign of non-real Scalar {self}")
        if self.is_constant():
            v = self.num[0].re
            return (v > 0) - (v < 0)
        return _interval_sign(self)

    def to_complex(self, prec: int = 53) -> complex:
        import mpmath

        with mpmath.workprec(prec + 20):
            pi = mpmath.pi

            def ev(p):
                acc = mpmath.mpc(0)
                for g in reversed(p):
                    acc = acc * pi + mpmath.mpc(mpmath.mpf(g.re.numerator) / g.re.denominator,
                                                mpmath.mpf(g.im.numerator) / g.im.denominator)
                return acc

            v = ev(self.num) / ev(self.den)
            return complex(v)

    # pi-structure ----------------------------------------------------------
    def pi_degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def cleared(self) -> tuple[tuple, tuple]:
        """Return (num, den) coefficient tuples (pi ascending)."""
        return self.num, self.den

    def denominator_lcm(self) -> int:
        """lcm of rational denominators appearing in the numerator."""
        out = 1
        for g in self.num:
            out = lcm(out, g.denominator_lcm())
        return out

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        num = _fmt_upoly(self.num)
        if self.den == _P1:
            return num
        if _count_terms(self.num) > 1:
            num = f"({num})"
        den = _fmt_upoly(self.den)
        if not _is_bare_power(self.den):
            den = f"({den})"
        return f"{num}/{den}"


def _count_terms(p: tuple) -> int:
    return sum(1 for g in p if g)


def _is_bare_power(p: tuple) -> bool:
    return _count_terms(p) == 1 and p[-1] == G1


def _fmt_pi(k: int) -> str:
    return "pi" if k == 1 else f"pi^{k}"


def _fmt_upoly(p: tuple) -> str:
    if not p:
        return "0"
    parts: list[tuple[str, str]] = []  # (sign, body)
    for k in range(len(p) - 1, -1, -1):
        g = p[k]
        if not g:
            continue
        parts.append(_signed_term(g, _fmt_pi(k) if k else ""))
    return _join_terms(parts)


def _signed_term(g: GaussRational, mono: str) -> tuple[str, str]:
    """Render coefficient*monomial as (sign, body) with a positive-looking body."""
    if g.im == 0:
        sign = "-" if g.re < 0 else "+"
        c = abs(g.re)
        if not mono:
            return sign, _fmt_frac(c)
        if c == 1:
            return sign, mono
        return sign, f"{_fmt_frac(c)}*{mono}"
    if g.re == 0:
        sign = "-" if g.im < 0 else "+"
        c = abs(g.im)
        body = "i" if c == 1 else f"{_fmt_frac(c)}*i"
        return sign, body if not mono else f"{body}*{mono}"
    body = _fmt_gauss(g)
    return "+", body if not mono else f"{body}*{mono}"


def _join_terms(parts: list[tuple[str, str]]) -> str:
    if not parts:
        return "0"
    s0, b0 = parts[0]
    out = ("-" if s0 == "-" else "") + b0
    for s, b in parts[1:]:
        out += f" {s} {b}"
    return out


def _interval_sign(s: Scalar) -> int:
    import mpmath

    prec = 64
    while prec < 20000:
        with mpmath.workprec(prec):
            pi = mpmath.iv.pi

            def ev(p):
                acc = mpmath.iv.mpf(0)
                for g in reversed(p):
                    acc = acc * pi + mpmath.iv.mpf(g.re.numerator) / g.re.denominator
                return acc

            # real scalar: after normalization with real denominator both parts are real
            re, _ = s.real_imag()
            v = ev(re.num) / ev(re.den) if re.den[-1].im == 0 else None
            if v is None:
                raise ValueError("unexpected complex denominator")
            if v.a > 0:
                return 1
            if v.b < 0:
                return -1
        prec *= 2
    raise ArithmeticError_(f"could not decide sign of {s}")


ZERO = Scalar()
ONE = Scalar((G1,), _P1, True)
I = Scalar((GaussRational(0, 1),), _P1, True)
PI = Scalar.pi_power(1)


def as_scalar(v) -> Scalar:
    if isinstance(v, Scalar):
        return v
    if isinstance(v, bool):
        return NotImplemented
    if isinstance(v, (int, Fraction)):
        return Scalar.from_gauss(GaussRational(v))
    if isinstance(v, GaussRational):
        return Scalar.from_gauss(v)
    return NotImplemented


def pi_rational_multiple(s: Scalar) -> Fraction | None:
    """Return q if s == q*pi with q rational, else None."""
    q = s / PI
    if q.is_rational():
        return q.as_fraction()
    return None


# --------------------------------------------------------------------------
# Multivariate polynomials over Scalar
# --------------------------------------------------------------------------

Monomial = tuple  # tuple of (name, exponent) sorted by name


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _mono_deg(a: Monomial) -> int:
    return sum(e for _, e in a)


def _mono_key(a: Monomial):
    """Degree-lexicographic sort key: higher degree first, then lex on names."""
    return (-_mono_deg(a), tuple((n, -e) for n, e in a))


def _fmt_mono(a: Monomial) -> str:
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in a)


class CoeffFn:
    """Polynomial in named real symbols with Scalar coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None, _clean: bool = False):
        if terms is None:
            terms = {}
        if not _clean:
            terms = {m: c for m, c in terms.items() if c}
        self.terms = terms
        self._hash = None

    @classmethod
    def const(cls, s) -> "CoeffFn":
        s = as_scalar(s) if not isinstance(s, Scalar) else s
        return cls({(): s}) if s else cls()

    @classmethod
    def sym(cls, name: str) -> "CoeffFn":
        if name in ("pi", "i"):
            raise ValueError(f"{name!r} is reserved")
        return cls({((name, 1),): ONE}, True)

    # predicates -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_value(self) -> Scalar:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), ZERO)

    def symbols(self) -> set[str]:
        return {n for m in self.terms for n, _ in m}

    def degree_in(self, name: str) -> int:
        return max((dict(m).get(name, 0) for m in self.terms), default=-1)

    def total_degree(self) -> int:
        return max((_mono_deg(m) for m in self.terms), default=-1)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    # arithmetic -----------------------------------------------------------
    def __add__(self, o):
        o = as_coeff(o)
        if o is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in o.terms.items():
            v = out.get(m)
            out[m] = c if v is None else v + c
        return CoeffFn(out)

    __radd__ = __add__

    def __neg__(self):
        return CoeffFn({m: -c for m, c in self.terms.items()}, True)

    def __sub__(self, o):
        o = as_coeff(o)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return as_coeff(o) - self

    def __mul__(self, o):
        if isinstance(o, RatFn):
            return NotImplemented
        o = as_coeff(o)
        if o is NotImplemented:
            return NotImplemented
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                v = c1 * c2
                w = out.get(m)
                out[m] = v if w is None else w + v
        return CoeffFn(out)

    __rmul__ = __mul__

    def scale(self, s: Scalar) -> "CoeffFn":
        if not s:
            return CoeffFn()
        return CoeffFn({m: c * s for m, c in self.terms.items()}, True)

    def __truediv__(self, o):
        if isinstance(o, CoeffFn):
            if not o.is_constant():
                return RatFn(self, o)
            o = o.constant_value()
        o = as_scalar(o)
        if o is NotImplemented:
            return NotImplemented
        if not o:
            raise ArithmeticError_(f"division by zero: ({self}) / ({o})")
        return self.scale(o.inverse())

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out, base = CoeffFn.const(ONE), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "CoeffFn":
        return CoeffFn({m: c.conjugate() for m, c in self.terms.items()}, True)

    def real_imag(self) -> tuple["CoeffFn", "CoeffFn"]:
        re, im = {}, {}
        for m, c in self.terms.items():
            r, i = c.real_imag()
            re[m] = r
            im[m] = i
        return CoeffFn(re), CoeffFn(im)

    def diff(self, name: str) -> "CoeffFn":
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(name, 0)
            if not e:
                continue
            if e == 1:
                del d[name]
            else:
                d[name] = e - 1
            out[tuple(sorted(d.items()))] = c * e
        return CoeffFn(out)

    def integrate(self, name: str) -> "CoeffFn":
        """Antiderivative in ``name`` with zero constant of integration."""
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(name, 0) + 1
            d[name] = e
            out[tuple(sorted(d.items()))] = c * Fraction(1, e)
        return CoeffFn(out)

    def subs(self, bindings: Mapping[str, object]) -> "CoeffFn":
        """Substitute symbols by Scalars, integers or CoeffFn values."""
        if "pi" in bindings:
            raise ArithmeticError_("pi is a transcendental constant and cannot be substituted")
        if "i" in bindings:
            raise ArithmeticError_("i cannot be substituted")
        if not bindings:
            return self
        vals = {k: as_coeff(v) for k, v in bindings.items()}
        pow_cache: dict = {}
        out = CoeffFn()
        for m, c in self.terms.items():
            term = CoeffFn.const(c)
            rest = []
            for n, e in m:
                if n in vals:
                    key = (n, e)
                    if key not in pow_cache:
                        pow_cache[key] = vals[n] ** e
                    term = term * pow_cache[key]
                else:
                    rest.append((n, e))
            if rest:
                term = term * CoeffFn({tuple(rest): ONE}, True)
            out = out + term
        return out

    def coefficients_in(self, name: str) -> dict[int, "CoeffFn"]:
        """Group as a polynomial in one symbol: {power: coefficient}."""
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.pop(name, 0)
            out.setdefault(e, {})[tuple(sorted(d.items()))] = c
        return {e: CoeffFn(t) for e, t in sorted(out.items())}

    def pi_split(self) -> dict[int, "CoeffFn"]:
        """Split a real polynomial into pi-power components with rational coefficients.

        The denominators are cleared first (by the product of all distinct
        Scalar denominators, which is a positive-degree-free normalisation),
        so the result vanishes identically exactly when ``self`` does,
        provided every other symbol takes rational values.
        """
        dens: list[tuple] = []
        for c in self.terms.values():
            if c.den not in dens:
                dens.append(c.den)
        common = _P1
        for d in dens:
            common = _pmul(common, d)
        common_s = Scalar(common, _P1, True)
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            num = (c * common_s)
            assert num.den == _P1
            for k, g in enumerate(num.num):
                if g:
                    out.setdefault(k, {})[m] = Scalar.from_gauss(g)
        return {k: CoeffFn(v) for k, v in sorted(out.items())}

    def eval_complex(self, values: Mapping[str, complex]) -> complex:
        tot = 0j
        for m, c in self.terms.items():
            v = c.to_complex()
            for n, e in m:
                v *= values[n] ** e
            tot += v
        return tot

    def sorted_terms(self) -> list[tuple[Monomial, Scalar]]:
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]))

    # comparisons ----------------------------------------------------------
    def __eq__(self, o):
        if isinstance(o, RatFn):
            return o == self
        o = as_coeff(o)
        if o is NotImplemented:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"CoeffFn({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            parts.append(_coeff_term(c, _fmt_mono(m)))
        return _join_terms(parts)


def _coeff_term(c: Scalar, mono: str) -> tuple[str, str]:
    if c.den == _P1 and _count_terms(c.num) == 1:
        k = len(c.num) - 1
        g = c.num[k]
        pi_part = _fmt_pi(k) if k else ""
        body = "*".join(p for p in (pi_part, mono) if p)
        return _signed_term(g, body)
    s = str(c)
    if not mono:
        if s.startswith("-") and _count_terms(c.num) == 1 and c.den == _P1:
            return "-", s[1:]
        return "+", s if c.den == _P1 and _count_terms(c.num) == 1 else f"({s})"
    return "+", f"({s})*{mono}"


def as_coeff(v) -> CoeffFn:
    if isinstance(v, CoeffFn):
        return v
    s = as_scalar(v)
    if s is NotImplemented:
        return NotImplemented
    return CoeffFn.const(s)


def symbol(name: str) -> CoeffFn:
    return CoeffFn.sym(name)


def real_imag_parts(p) -> tuple:
    """Split a Scalar or CoeffFn into real and imaginary parts."""
    return p.real_imag()


# --------------------------------------------------------------------------
# Ratios of CoeffFn values
# --------------------------------------------------------------------------


class RatFn:
    """num/den with CoeffFn parts; equality by cross multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = as_coeff(num)
        den = CoeffFn.const(ONE) if den is None else as_coeff(den)
        if not den:
            raise ArithmeticError_(f"RatFn with zero denominator: {num}/0")
        if den.is_constant():
            num = num / den.constant_value()
            den = CoeffFn.const(ONE)
        elif not num:
            den = CoeffFn.const(ONE)
        self.num = num
        self.den = den

    @classmethod
    def coerce(cls, v) -> "RatFn":
        if isinstance(v, RatFn):
            return v
        c = as_coeff(v)
        if c is NotImplemented:
            raise TypeError(f"cannot coerce {v!r} to RatFn")
        return cls(c)

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def to_coeff(self) -> CoeffFn:
        if not self.is_polynomial():
            raise ValueError(f"{self} is not a polynomial")
        return self.num

    def __add__(self, o):
        o = RatFn.coerce(o)
        if self.den == o.den:
            return RatFn(self.num + o.num, self.den)
        return RatFn(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den)

    def __sub__(self, o):
        return self + (-RatFn.coerce(o))

    def __rsub__(self, o):
        return RatFn.coerce(o) - self

    def __mul__(self, o):
        o = RatFn.coerce(o)
        return RatFn(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = RatFn.coerce(o)
        if not o.num:
            raise ArithmeticError_(f"division by zero: ({self}) / ({o})")
        return RatFn(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, o):
        return RatFn.coerce(o) / self

    def __pow__(self, k: int):
        if k < 0:
            return RatFn(self.den ** (-k), self.num ** (-k))
        return RatFn(self.num ** k, self.den ** k)

    def conjugate(self) -> "RatFn":
        return RatFn(self.num.conjugate(), self.den.conjugate())

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def symbols(self) -> set[str]:
        return self.num.symbols() | self.den.symbols()

    def subs(self, bindings) -> "RatFn":
        den = self.den.subs(bindings)
        if not den:
            raise ArithmeticError_(f"denominator {self.den} vanishes at {dict(bindings)}")
        return RatFn(self.num.subs(bindings), den)

    def __eq__(self, o):
        try:
            o = RatFn.coerce(o)
        except TypeError:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    def __hash__(self):
        if self.is_polynomial():
            return hash(self.num)
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFn({self})"

    def __str__(self):
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"


Number = Union[int, Fraction, Scalar, CoeffFn]


def lcm_of(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = lcm(out, v)
    return out

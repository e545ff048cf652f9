from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acskod.parsing import ExprSyntaxError, parse_coeff, parse_expr, parse_scalar
from acskod.scalars import I, ONE, PI, ZERO, ArithmeticError_, CoeffFn, GaussRational, Scalar, as_scalar, \
    pi_rational_multiple

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def scalars(draw, allow_pi=True):
    re, im = draw(small), draw(small)
    s = Scalar.from_gauss(GaussRational(re, im))
    if allow_pi and draw(st.booleans()):
        s = s + as_scalar(draw(small)) * PI ** draw(st.integers(1, 2))
    if allow_pi and draw(st.booleans()):
        den = as_scalar(draw(small)) + PI
        s = s / den
    return s


@given(scalars(), scalars(), scalars())
def test_field_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + ZERO == a and a * ONE == a
    assert a - a == ZERO
    if a:
        assert a * a.inverse() == ONE


@given(scalars())
def test_conjugation_is_an_involution(a):
    assert a.conjugate().conjugate() == a
    re, im = a.real_imag()
    assert re + I * im == a
    assert re.is_real() and im.is_real()


@given(scalars())
def test_printed_form_parses_back(a):
    assert parse_scalar(str(a)) == a


@given(scalars(allow_pi=True))
def test_sign_matches_numeric_value(a):
    re, _ = a.real_imag()
    v = re.to_complex().real
    if abs(v) > 1e-9:
        assert re.sign() == (1 if v > 0 else -1)


def test_pi_is_transcendental_in_comparisons():
    assert PI * PI != as_scalar(10)
    assert (PI - as_scalar(Fraction(355, 113))).sign() == -1
    assert (PI - as_scalar(Fraction(22, 7))).sign() == -1
    assert (PI - as_scalar(Fraction(333, 106))).sign() == 1


@pytest.mark.parametrize("text,q", [("pi/2", Fraction(1, 2)), ("-3*pi/4", Fraction(-3, 4)), ("0", Fraction(0)),
                                    ("1/2", None), ("pi + 1", None), ("pi^2", None)])
def test_pi_rational_multiple(text, q):
    assert pi_rational_multiple(parse_scalar(text)) == q


def test_division_by_zero_raises():
    with pytest.raises(ArithmeticError_):
        ONE / ZERO


@pytest.mark.parametrize("text,col", [("1 +", 4), ("(1", 3), ("x", 1), ("2 $ 3", 3)])
def test_parse_errors_carry_columns(text, col):
    with pytest.raises(ExprSyntaxError) as ei:
        parse_scalar(text)
    assert ei.value.column == col


def test_rational_functions_and_polynomials():
    f = parse_expr("-((ret + pi)^2 + imt^2)/(ret + pi)", ["ret", "imt"])
    assert not f.is_polynomial()
    g = f.subs({"ret": as_scalar(0), "imt": as_scalar(0)})
    assert g.is_polynomial() and g.num.constant_value() == -PI
    p = parse_coeff("x^2/2 - x*y + 3", ["x", "y"])
    assert p.diff("x") == parse_coeff("x - y", ["x", "y"])
    assert p.integrate("y") == parse_coeff("x^2*y/2 - x*y^2/2 + 3*y", ["x", "y"])


polys = st.builds(lambda a, b, c, d: parse_coeff(f"({a})*x^2 + ({b})*x*y + ({c})*y + ({d})", ["x", "y"]),
                  small, small, small, small)


@given(polys, polys)
def test_product_rule(p, q):
    assert (p * q).diff("x") == p.diff("x") * q + p * q.diff("x")


@given(polys)
def test_pi_split_reassembles(p):
    q = p * CoeffFn.const(PI) + p
    parts = q.pi_split()
    total = CoeffFn()
    for k, c in parts.items():
        total = total + c * CoeffFn.const(PI ** k)
    assert total == q

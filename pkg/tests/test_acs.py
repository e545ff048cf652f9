import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acskod.acs import AcsError, AlmostComplexStructure, GcyInput, alpha_of, bidegree_split, conjugate, del_, \
    delbar, gcy_check, is_integrable, mu, mubar, pseudoholomorphic_check, validate
from acskod.exterior import Form, d
from acskod.linalg import det, inverse, matmul
from acskod.parsing import parse_coeff
from acskod.scalars import I, as_scalar
from acskod.specfiles import load_acs, load_gcy, load_manifold, parse_gcy


def test_nilmanifold_structure_equations(nil):
    # reference value: delbar parts of d phi^1, d phi^2
    phi1, phi2 = nil.phi_forms()
    assert str(delbar(phi1, nil)) == "-1/4*i*phi1^phib2 + 1/4*i*phi2^phib1"
    assert str(delbar(phi2, nil)) == "1/2*phi1^phib1"
    assert str(mubar(phi1, nil)) == "-1/4*i*phib1^phib2"
    assert not mubar(phi2, nil)


def test_nilmanifold_alpha(nil):
    assert str(alpha_of(nil)) == "1/4*i*phib2"


def test_coframe_has_type_10(nil, torus):
    for acs in (nil, torus):
        J = acs.Jc
        for row in acs.coframe10:
            # row J = i row
            lhs = [sum((row[a] * J[a][b] for a in range(len(row))), as_scalar(0)) for b in range(len(row))]
            assert lhs == [I * v for v in row]


def test_integrability(nil, torus):
    assert is_integrable(torus)
    r = is_integrable(nil)
    assert not r and r.witness_index == 0


def _std(n):
    J = [[as_scalar(0)] * n for _ in range(n)]
    for k in range(0, n, 2):
        J[k + 1][k] = as_scalar(1)
        J[k][k + 1] = as_scalar(-1)
    return J


invertible = st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=4, max_size=4).map(
    lambda rows: [[as_scalar(v) for v in r] for r in rows]).filter(lambda P: bool(det(P)))


@given(invertible, st.integers(0, 3), st.integers(0, 3), st.integers(1, 5))
def test_J_squared_validation(P, i, j, bump):
    J = matmul(matmul(P, _std(4)), inverse(P))
    validate(J)
    bad = [list(r) for r in J]
    bad[i][j] = bad[i][j] + as_scalar(bump)
    with pytest.raises(AcsError) as ei:
        validate(bad)
    assert ei.value.entry is not None


def test_J_must_be_real_and_square():
    with pytest.raises(AcsError):
        validate([[I, 0], [0, I]])
    with pytest.raises(AcsError):
        validate([[0, -1, 0], [1, 0, 0], [0, 0, 1]])


coef = st.builds(lambda a, b, c: parse_coeff(f"({a}) + ({b})*i*x + ({c})*x^2", ["x"]),
                 st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3))


@st.composite
def homogeneous(draw, acs, p, q):
    n = acs.n
    f = Form(acs.basis, p + q)
    for _ in range(draw(st.integers(1, 3))):
        hol = draw(st.lists(st.integers(0, n - 1), min_size=p, max_size=p, unique=True))
        anti = draw(st.lists(st.integers(n, 2 * n - 1), min_size=q, max_size=q, unique=True))
        f = f + Form.basic(acs.basis, *hol, *anti, coef=draw(coef))
    return f


SHIFTS = {mu: (2, -1), del_: (1, 0), delbar: (0, 1), mubar: (-1, 2)}


@given(data=st.data())
def test_bidegree_shift_table(nil, data):
    p = data.draw(st.integers(0, 2))
    q = data.draw(st.integers(0, 2 - p))
    f = data.draw(homogeneous(nil, p, q))
    parts = bidegree_split(d(f), nil)
    assert set(parts) <= {(p + dp, q + dq) for dp, dq in SHIFTS.values()}
    total = Form(nil.basis, p + q + 1)
    for op, (dp, dq) in SHIFTS.items():
        g = op(f, nil)
        if g:
            assert set(bidegree_split(g, nil)) == {(p + dp, q + dq)}
        total = total + g
    assert total == d(f)


@given(data=st.data())
def test_conjugation_involution(nil, data):
    p = data.draw(st.integers(0, 2))
    q = data.draw(st.integers(0, 2 - p))
    f = data.draw(homogeneous(nil, p, q))
    g = conjugate(f, nil)
    assert conjugate(g, nil) == f
    if g:
        assert set(bidegree_split(g, nil)) == {(q, p)}
    real = nil.frame.to_real(f)
    assert conjugate(conjugate(real, nil), nil) == real


def test_pseudoholomorphic_check_identity_map(torus):
    one = as_scalar(1)
    zero = as_scalar(0)
    ident = [[one if i == j else zero for j in range(4)] for i in range(4)]
    assert pseudoholomorphic_check(ident, torus.Jc, torus.Jc)
    swapped = [[-x for x in row] for row in torus.Jc]
    assert not pseudoholomorphic_check(ident, torus.Jc, swapped)


# generalized Calabi-Yau conditions ---------------------------------------------------------------


def _gcy(acs, sigma, eps):
    text = ('{"sigma": {"1,2": "%s", "3,4": "%s"}, "epsilon": {"basis": "complex", "terms": {"1,2": "%s"}}}'
            % (sigma, sigma, eps))
    return parse_gcy(text, acs)


def test_gcy_flat_torus_passes(torus):
    rep = gcy_check(torus, load_gcy("torus4", torus))
    assert rep.verdicts() == ("Pass", "Pass", "Pass")


def test_gcy_scaled_epsilon_fails_volume_only(torus):
    rep = gcy_check(torus, _gcy(torus, "1", "1"))
    assert rep.verdicts() == ("Pass", "Fail", "Pass")


def test_gcy_sign_flipped_sigma_fails_metric_only(torus):
    rep = gcy_check(torus, _gcy(torus, "-1", "1/2"))
    assert rep.verdicts() == ("Fail", "Pass", "Pass")


def test_gcy_is_unknown_for_nonconstant_data():
    M = load_manifold("nilmanifold_N")
    acs = load_acs("builtin", M)
    g = parse_gcy('{"sigma": {"1,2": "x"}, "epsilon": {"basis": "complex", "terms": {"1,2": "1"}}}', acs)
    assert "Unknown" in gcy_check(acs, g).verdicts()


def test_random_conjugate_structures_are_valid():
    rng = random.Random(3)
    M = load_manifold("torus4")
    for _ in range(5):
        while True:
            P = [[as_scalar(rng.randint(-2, 2)) for _ in range(4)] for _ in range(4)]
            if det(P):
                break
        J = matmul(matmul(P, _std(4)), inverse(P))
        acs = AlmostComplexStructure(M, J)
        assert is_integrable(acs)  # constant J on a torus is integrable

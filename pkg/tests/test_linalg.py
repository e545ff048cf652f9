import itertools
from fractions import Fraction

import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from acskod.linalg import det, identity, integer_solutions, inverse, matmul, maximal_minors, solve
from acskod.scalars import PI, as_scalar

ints = st.integers(-5, 5)
square3 = st.lists(st.lists(ints, min_size=3, max_size=3), min_size=3, max_size=3)


@given(square3, st.booleans())
def test_det_matches_sympy(rows, with_pi):
    A = [[as_scalar(v) + (PI if with_pi and i == j else 0) for j, v in enumerate(r)] for i, r in enumerate(rows)]
    ref = sp.Matrix([[v + (sp.pi if with_pi and i == j else 0) for j, v in enumerate(r)]
                     for i, r in enumerate(rows)]).det()
    got = det(A)
    assert abs(complex(got.to_complex()) - complex(sp.N(ref, 30))) < 1e-9


@given(square3)
def test_inverse_round_trip(rows):
    A = [[as_scalar(v) for v in r] for r in rows]
    if not det(A):
        return
    assert matmul(A, inverse(A)) == identity(3)


def test_maximal_minors_of_tall_matrix():
    A = [[as_scalar(v) for v in r] for r in [[1, 2], [3, 4], [5, 6]]]
    assert [m.as_fraction() for m in maximal_minors(A)] == [-2, -4, -2]


def test_solve_unique_and_inconsistent():
    A = [[as_scalar(1), as_scalar(1)], [as_scalar(1), as_scalar(-1)]]
    assert solve(A, [as_scalar(2), as_scalar(0)]) == [as_scalar(1), as_scalar(1)]
    B = [[as_scalar(1), as_scalar(1)], [as_scalar(2), as_scalar(2)]]
    assert solve(B, [as_scalar(1), as_scalar(3)]) is None


small_rows = st.lists(st.lists(st.fractions(-4, 4, max_denominator=3), min_size=3, max_size=3), min_size=1, max_size=2)


@given(small_rows, st.lists(st.fractions(-4, 4, max_denominator=3), min_size=2, max_size=2))
def test_integer_solutions_against_brute_force(rows, rhs):
    rhs = rhs[: len(rows)]
    res = integer_solutions(rows, rhs)
    box = range(-4, 5)
    brute = [x for x in itertools.product(box, repeat=3)
             if all(sum(Fraction(a) * b for a, b in zip(r, x)) == v for r, v in zip(rows, rhs))]
    if res is None:
        assert brute == []
        return
    x0, kernel = res
    assert all(sum(Fraction(a) * b for a, b in zip(r, x0)) == v for r, v in zip(rows, rhs))
    for k in kernel:
        assert all(sum(Fraction(a) * b for a, b in zip(r, k)) == 0 for r in rows)
    # every brute-force solution lies on the returned lattice
    if kernel:
        K = sp.Matrix(kernel).T
        for x in brute:
            diff = sp.Matrix([a - b for a, b in zip(x, x0)])
            sol, params = K.gauss_jordan_solve(diff)
            sol = sol.subs({p: 0 for p in params})
            assert all(v.is_integer for v in sol)
    else:
        assert all(list(x) == list(x0) for x in brute)

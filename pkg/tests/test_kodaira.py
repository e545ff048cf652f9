import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from acskod.kodaira import (NEG_INF, growth_exponent, kod_from_reports, pi_rational_approach, rational_approach,
                            usc_table_check)
from acskod.parsing import parse_scalar
from acskod.plurigenera import PlurigenusReport, compute_plurigenus
from acskod.scalars import PI, as_scalar, pi_rational_multiple


def _exact(m, dim):
    return PlurigenusReport("M", "J", m, "ExactDim", dimension=dim)


def _reports(values):
    return [_exact(m, v) for m, v in values.items()]


@pytest.mark.parametrize("kappa", [0, 1, 2, 3])
def test_growth_recovers_exponent(kappa):
    values = {m: math.comb(m + kappa, kappa) for m in range(1, 65)}
    v = kod_from_reports(_reports(values))
    assert v.kind == "Exact" and v.value == kappa
    assert not v.certified and v.caveat
    assert v.summary() == f"kod = {kappa} (growth fit on m = 1..64, not certified)"


@given(st.integers(0, 3), st.integers(1, 50), st.integers(0, 2))
def test_growth_is_scale_robust(kappa, scale, k):
    # P_m = scale * (m^kappa + k); a lower-order term comparable to the
    # leading coefficient must not move the fit out of the snap window
    values = {m: scale * (m**kappa + k) for m in range(1, 65)}
    slope = growth_exponent(values)
    assert round(slope) == kappa
    assert abs(slope - kappa) <= 0.15 or kappa == 0


@given(st.integers(0, 3), st.integers(2, 6))
def test_growth_on_periodic_support(kappa, period):
    # nonzero only on multiples of the period, as for the KT plurigenera
    values = {m: (m**kappa if m % period == 0 else 0) for m in range(1, 65)}
    assert round(growth_exponent(values)) == kappa


def test_all_zero_is_evidence_only():
    v = kod_from_reports(_reports({m: 0 for m in range(1, 9)}))
    assert v.kind == "NegInfinity" and not v.certified
    assert v.summary() == "kod = -inf (evidence only)"
    assert v.numeric == NEG_INF


def test_symbolic_reports_are_certified():
    vanish = PlurigenusReport("M", "J", "symbolic", "VanishAllM")
    assert kod_from_reports([vanish]).summary() == "kod = -inf (certified)"
    per = PlurigenusReport("M", "J", "symbolic", "Periodic", pattern=[(0, 4)])
    v = kod_from_reports([per])
    assert v.kind == "Exact" and v.value == 0 and v.certified


def test_non_contiguous_reports_are_rejected():
    with pytest.raises(ValueError):
        kod_from_reports(_reports({1: 1, 2: 1, 4: 1}))
    with pytest.raises(ValueError):
        kod_from_reports([])


def test_uncertified_cell_gives_estimate():
    reps = _reports({1: 1, 2: 1})
    reps.append(PlurigenusReport("M", "J", 3, "Bounds", lower=0, upper=None, reason="gap"))
    v = kod_from_reports(reps)
    assert v.kind == "Estimate" and not v.certified


def test_nilmanifold_and_torus(nil, torus):
    assert kod_from_reports([compute_plurigenus(nil)]).summary() == "kod = -inf (certified)"
    reps = [compute_plurigenus(torus, m) for m in range(1, 9)]
    assert [r.dimension for r in reps] == [1] * 8
    v = kod_from_reports(reps)
    assert v.value == 0


def test_usc_detects_a_jump_down():
    t0 = as_scalar(0)
    seq = [as_scalar(Fraction(1, k)) for k in range(1, 7)]
    table = {t0: {"kod": NEG_INF}}
    table.update({t: {"kod": 0} for t in seq})
    (v,) = usc_table_check(table, [(t0, seq)])
    assert v.column == "kod" and v.value == NEG_INF and v.eventual == 0
    table[t0] = {"kod": 0}
    assert usc_table_check(table, [(t0, seq)]) == []


def test_usc_ignores_missing_points():
    t0 = as_scalar(0)
    assert usc_table_check({t0: {1: 0}}, [(t0, [as_scalar(1)])]) == []


@given(st.fractions(min_value=-3, max_value=3, max_denominator=20))
def test_rational_approach_stays_in_disc(q):
    t0 = as_scalar(q)
    seq = rational_approach(t0)
    assert len(seq) == 6
    assert all(pi_rational_multiple(t) is None or t == 0 for t in seq)
    assert all(abs(t.to_complex()) <= max(abs(float(q)), 0.25) + 1e-12 for t in seq)
    dists = [abs((t - t0).to_complex()) for t in seq]
    assert dists == sorted(dists, reverse=True)


@given(st.fractions(min_value=-Fraction(9, 10), max_value=Fraction(9, 10), max_denominator=12))
def test_pi_rational_approach_converges(q):
    t0 = PI * as_scalar(q)
    seq = pi_rational_approach(t0)
    assert all(pi_rational_multiple(t) is not None for t in seq)
    assert all(abs(t.to_complex()) < math.pi for t in seq)
    assert abs((seq[-1] - t0).to_complex()) < abs((seq[0] - t0).to_complex())


def test_pi_rational_approach_from_rational_point():
    seq = pi_rational_approach(parse_scalar("1/2"))
    assert seq and all(pi_rational_multiple(t) is not None for t in seq)
    errs = [abs(t.to_complex() - 0.5) for t in seq]
    assert errs[-1] < 1e-3

"""Acceptance criteria, one line each in the terminal summary.

Each test records PASS or FAIL with a short detail; conftest prints the
collected lines after the run.  The one sub-check that cannot be met as
stated is recorded as FAIL and marked xfail, so it shows up red in the
summary without turning the suite red.
"""

import math
import time
from contextlib import contextmanager

import pytest

import test_acs
import test_exterior
from acskod.acs import alpha_of, delbar, gcy_check
from acskod.deformation import accumulation_scan, scan, total_space
from acskod.kodaira import kod_from_reports, usc_table_check
from acskod.parsing import parse_coeff, parse_scalar
from acskod.plurigenera import (PlurigenusReport, build_section_equation, certificate_document, compute_plurigenus,
                                fourier_reduce, verify_certificate)
from acskod.specfiles import load_acs, load_gcy, load_manifold, parse_gcy

RESULTS: list[tuple[str, bool, str]] = []
KT_SAMPLES = ["0", "1/2", "-1/2", "1", "-1", "pi/2", "-pi/2", "3*pi/4", "-3*pi/4"]


@contextmanager
def criterion(label: str):
    info: dict = {"detail": ""}
    try:
        yield info
    except BaseException as exc:
        RESULTS.append((label, False, info["detail"] or f"{type(exc).__name__}: {exc}"))
        raise
    RESULTS.append((label, True, info["detail"]))


@pytest.fixture(scope="module")
def kt_scan(kt_family):
    start = time.perf_counter()
    table = scan(kt_family, [parse_scalar(t) for t in KT_SAMPLES], 12)
    return table, time.perf_counter() - start


def test_criterion_01_structure_equations():
    with criterion("1  structure equations of N (exact, < 1 s)") as c:
        start = time.perf_counter()
        acs = load_acs("builtin", load_manifold("nilmanifold_N"))
        phi1, phi2 = acs.phi_forms()
        got = (str(delbar(phi1, acs)), str(delbar(phi2, acs)))
        elapsed = time.perf_counter() - start
        assert got == ("-1/4*i*phi1^phib2 + 1/4*i*phi2^phib1", "1/2*phi1^phib1")
        assert elapsed < 1
        c["detail"] = f"{got[0]} ; {got[1]} in {elapsed:.2f} s"


def test_criterion_02_alpha(nil):
    with criterion("2  alpha of N = 1/4 i phib2") as c:
        a = str(alpha_of(nil))
        assert a == "1/4*i*phib2"
        c["detail"] = a


def test_criterion_03_fourier_determinant(nil):
    with criterion("3  Fourier determinant of N, imaginary part 4 pi m c") as c:
        det = fourier_reduce(build_section_equation(nil), "real").determinant()
        syms = ["a", "b", "c", "m", "x"]
        assert det == parse_coeff("-4*pi^2*(a + b*x + c*x^2/2)^2 + (m + 2*i*pi*c)^2", syms)
        im = det.real_imag()[1]
        assert im == parse_coeff("4*pi*m*c", syms)
        c["detail"] = f"Im = {im}"


def test_criterion_04_vanishing_certificate(nil):
    with criterion("4  symbolic vanishing certificate for N, kod = -inf (< 10 s)") as c:
        start = time.perf_counter()
        r = compute_plurigenus(nil)
        problems = verify_certificate(certificate_document(r, nil))
        kv = kod_from_reports([r])
        elapsed = time.perf_counter() - start
        assert r.kind == "VanishAllM" and problems == []
        assert kv.summary() == "kod = -inf (certified)"
        assert elapsed < 10
        c["detail"] = f"{kv.summary()}, certificate re-verified, {elapsed:.2f} s"


def test_criterion_05_kt_dichotomy(kt_scan):
    with criterion("5  KT scan: kod 0 on pi*Q, -inf on Q \\ {0} (< 5 min)") as c:
        table, elapsed = kt_scan
        got = {r.label: r.kod.label() for r in table.rows}
        for r in table.rows:
            assert r.kod.certified
            assert r.kod.label() == ("0" if r.pi_rational else "-inf")
        assert elapsed < 300
        c["detail"] = ", ".join(f"{t}: {k}" for t, k in got.items()) + f"; {elapsed:.1f} s"


def test_criterion_05_witness_sections(kt_scan):
    with criterion("5  KT scan: verified section at every pi*Q sample (any m)") as c:
        table, _ = kt_scan
        wit = {r.label: r.witness for r in table.rows if r.pi_rational}
        assert all(w and w["verified"] for w in wit.values())
        c["detail"] = ", ".join(f"{t}: m = {w['m']}" for t, w in wit.items())


def test_criterion_05_witness_m_at_most_12(kt_scan):
    # the least m with P_m > 0 at t = +-3pi/4 is 16 (P_m = [m = 0 mod 16]); see the decisions ledger
    table, _ = kt_scan
    wit = {r.label: r.witness for r in table.rows if r.pi_rational}
    over = {t: w["m"] for t, w in wit.items() if w["m"] > 12}
    ok = not over
    RESULTS.append(("5  KT scan: constructive section with m <= 12 at every pi*Q sample", ok,
                    "unattainable: " + ", ".join(f"{t} needs m = {m}" for t, m in over.items())
                    + " (P_m = 0 for all m < 16 there, checked by resonance, sympy and the oracle)"
                    if over else "all witnesses have m <= 12"))
    if over:
        pytest.xfail("minimal m at +-3pi/4 is 16")


def test_criterion_06_projection(kt_family):
    with criterion("6  projection M x disc -> disc is pseudoholomorphic (exact)") as c:
        assert total_space(kt_family).projection_pseudoholomorphic()
        c["detail"] = "d(pi) J = J_disc d(pi)"


def test_criterion_07_semicontinuity(kt_family):
    with criterion("7  usc: 0 violations per m, kod row non-semicontinuous") as c:
        table, patterns = accumulation_scan(kt_family, [parse_scalar(t) for t in KT_SAMPLES], 6)
        v = usc_table_check(table.usc_table(), patterns)
        pm = [x for x in v if x.column != "kod"]
        kod = sorted({str(x.t0) for x in v if x.column == "kod"})
        assert pm == [] and kod
        c["detail"] = f"{len(table.rows)} points; P_m violations 0; kod violations at {', '.join(kod)}"


def test_criterion_08_flat_torus(torus):
    with criterion("8  flat torus: P_m = 1 for m = 1..8, kod = 0, oracle 8^4 agrees") as c:
        reps = [compute_plurigenus(torus, m, oracle_grid=8) for m in range(1, 9)]
        assert all(r.certified and r.dimension == 1 for r in reps)
        assert all(r.oracle.dimension == r.dimension for r in reps)
        kv = kod_from_reports(reps + [compute_plurigenus(torus)])
        assert kv.value == 0 and kv.certified
        c["detail"] = f"P_1..P_8 = {[r.dimension for r in reps]}, {kv.summary()}"


def test_criterion_09_oracle_equivalence(torus, nil, kt):
    with criterion("9  oracle matches certified dimensions, m <= 3") as c:
        cases = {"torus": torus, "N": nil, "KT(0)": kt("0"), "KT(1/2)": kt("1/2")}
        seen = []
        for name, acs in cases.items():
            for m in (1, 2, 3):
                r = compute_plurigenus(acs, m, oracle_grid=8)
                assert r.certified
                assert r.oracle.dimension == r.dimension, (name, m)
                seen.append(f"{name}:{r.dimension}")
        c["detail"] = f"{len(seen)} cases agree"


def test_criterion_10_gcy(torus):
    def data(sigma, eps):
        return parse_gcy('{"sigma": {"1,2": "%s", "3,4": "%s"}, "epsilon": {"basis": "complex", '
                         '"terms": {"1,2": "%s"}}}' % (sigma, sigma, eps), torus)

    with criterion("10 gcy on flat torus: pass / scaled eps fails (2) / flipped sigma fails (1)") as c:
        base = gcy_check(torus, load_gcy("torus4", torus)).verdicts()
        scaled = gcy_check(torus, data("1", "1")).verdicts()
        flipped = gcy_check(torus, data("-1", "1/2")).verdicts()
        assert base == ("Pass", "Pass", "Pass")
        assert scaled == ("Pass", "Fail", "Pass")
        assert flipped == ("Fail", "Pass", "Pass")
        c["detail"] = f"{base} {scaled} {flipped}"


def _count(test, *args):
    """Run a hypothesis test and return how many examples it executed."""
    inner = test.hypothesis.inner_test
    n = 0

    def counted(*a, **k):
        nonlocal n
        n += 1
        return inner(*a, **k)

    test.hypothesis.inner_test = counted
    try:
        test(*args)
    finally:
        test.hypothesis.inner_test = inner
    return n


def test_criterion_11_property_suites(nil):
    with criterion("11 property suites, >= 100 instances each") as c:
        runs = {
            "d^2 = 0": _count(test_exterior.test_d_squared_vanishes, "nilmanifold_N"),
            "Leibniz": _count(test_exterior.test_graded_leibniz, "kodaira_thurston"),
            "bidegree shifts": _count(test_acs.test_bidegree_shift_table, nil),
            "J^2 = -I validation": _count(test_acs.test_J_squared_validation),
            "conjugation": _count(test_acs.test_conjugation_involution, nil),
        }
        assert all(n >= 100 for n in runs.values()), runs
        c["detail"] = ", ".join(f"{k}: {n}" for k, n in runs.items())


def test_criterion_12_growth():
    with criterion("12 growth estimator recovers kappa in {0,1,2,3} at M = 64") as c:
        got = []
        for kappa in range(4):
            reps = [PlurigenusReport("synthetic", "J", m, "ExactDim", dimension=math.comb(m + kappa, kappa))
                    for m in range(1, 65)]
            kv = kod_from_reports(reps)
            assert kv.value == kappa
            got.append(f"{kappa}->{kv.exponent:.3f}")
        c["detail"] = ", ".join(got)

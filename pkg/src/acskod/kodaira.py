"""Kodaira dimension from plurigenus reports, and semicontinuity checks on scan tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .plurigenera.pipeline import PlurigenusReport
from .scalars import PI, Scalar, as_scalar, pi_rational_multiple

__all__ = [
    "KodairaVerdict",
    "kod_from_reports",
    "growth_exponent",
    "SNAP_TOLERANCE",
    "NEG_INF",
    "usc_table_check",
    "Violation",
    "rational_approach",
    "pi_rational_approach",
]

SNAP_TOLERANCE = 0.15
NEG_INF = float("-inf")


@dataclass
class KodairaVerdict:
    kind: str  # 'NegInfinity', 'Exact', 'Estimate'
    value: int | None
    certified: bool
    rationale: str
    exponent: float | None = None
    m_range: tuple[int, int] | None = None
    caveat: bool = False
    table: list[tuple[int, int | None, bool]] = field(default_factory=list)

    @property
    def numeric(self) -> float | None:
        """-inf, an integer, or None when no value can be stated."""
        if self.kind == "NegInfinity":
            return NEG_INF
        return self.value

    def label(self) -> str:
        if self.kind == "NegInfinity":
            v = "-inf"
        elif self.value is not None:
            v = str(self.value)
        elif self.exponent is not None:
            v = f"~{self.exponent:.3f}"
        else:
            v = "unknown"
        return v

    def summary(self) -> str:
        tag = "certified" if self.certified else "not certified"
        if self.kind == "Estimate":
            tag = "estimate"
        if self.kind == "NegInfinity" and not self.certified:
            tag = "evidence only"
        if self.kind == "Exact" and not self.certified and self.m_range:
            tag = f"growth fit on m = {self.m_range[0]}..{self.m_range[1]}, not certified"
        return f"kod = {self.label()} ({tag})"

    def as_json(self) -> dict:
        out = {"kind": self.kind, "value": self.label(), "certified": self.certified,
               "summary": self.summary(), "rationale": self.rationale}
        if self.exponent is not None:
            out["exponent"] = round(self.exponent, 6)
        if self.m_range is not None:
            out["m_range"] = list(self.m_range)
        out["caveat"] = self.caveat
        if self.table:
            out["table"] = [{"m": m, "P_m": p, "certified": c} for m, p, c in self.table]
        return out


def _tail_windows(ms: list[int], M: int) -> list[list[int]]:
    out = []
    start = M
    while start > 1:
        start = max(1, start // 2)
        w = [m for m in ms if m >= start]
        if len(w) >= 2 and (not out or len(w) > len(out[-1])):
            out.append(w)
    return out


def growth_exponent(values: dict[int, int]) -> float | None:
    """limsup-style growth of P_m: max least-squares log-log slope over tail windows.

    Windows are [M/2, M], [M/4, M], ... restricted to nonzero P_m.  Returns
    None when fewer than two nonzero values exist; a single nonzero value
    gives no slope information.
    """
    ms = sorted(m for m, p in values.items() if p)
    if not ms:
        return None
    M = max(values)
    best = None
    for w in _tail_windows(ms, M):
        xs = [math.log(m) for m in w]
        ys = [math.log(values[m]) for m in w]
        mx = sum(xs) / len(xs)
        my = sum(ys) / len(ys)
        sxx = sum((x - mx) ** 2 for x in xs)
        if sxx == 0:
            continue
        slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
        best = slope if best is None else max(best, slope)
    if best is None:
        return None
    return max(best, 0.0)


def kod_from_reports(reports: list[PlurigenusReport]) -> KodairaVerdict:
    """Combine reports for symbolic m and/or a contiguous range m = 1..M."""
    if not reports:
        raise ValueError("no plurigenus reports given")
    symbolic = [r for r in reports if r.m == "symbolic"]
    concrete = {r.m: r for r in reports if r.m != "symbolic"}
    for r in symbolic:
        if r.kind == "VanishAllM":
            return KodairaVerdict("NegInfinity", None, True, "P_m = 0 for every m >= 1 by a re-verifiable certificate",
                                  table=_table(concrete))
        if r.kind == "Periodic":
            return KodairaVerdict("Exact", 0, True,
                                  f"P_m = {_pattern(r)} is bounded and positive for infinitely many m",
                                  table=_table(concrete))
    if not concrete:
        return KodairaVerdict("Estimate", None, False, "no certified symbolic result and no per-m data", caveat=True)
    M = max(concrete)
    if sorted(concrete) != list(range(1, M + 1)):
        raise ValueError(f"per-m reports must cover m = 1..{M} contiguously")
    table = _table(concrete)
    values = {m: p for m, p, _ in table}
    all_cert = all(c for _, _, c in table)
    known = {m: p for m, p in values.items() if p is not None}
    if len(known) < len(values):
        missing = [m for m, p in values.items() if p is None]
        return KodairaVerdict("Estimate", None, False, f"P_m undetermined for m in {missing}", m_range=(1, M),
                              caveat=True, table=table)
    if not any(known.values()):
        return KodairaVerdict("NegInfinity", None, False,
                              f"P_m = 0 for m = 1..{M}; vanishing for larger m is not certified",
                              m_range=(1, M), caveat=True, table=table)
    slope = growth_exponent(known)
    if slope is None:
        return KodairaVerdict("Estimate", None, False, "a single nonzero plurigenus carries no growth information",
                              m_range=(1, M), caveat=True, table=table)
    k = round(slope)
    if abs(slope - k) <= SNAP_TOLERANCE and all_cert:
        return KodairaVerdict("Exact", k, False,
                              f"log-log slope {slope:.3f} on tail windows of m = 1..{M} snaps to {k} "
                              f"(tolerance {SNAP_TOLERANCE}); growth beyond m = {M} is assumed",
                              exponent=slope, m_range=(1, M), caveat=True, table=table)
    return KodairaVerdict("Estimate", None, False, f"log-log slope {slope:.3f} on m = 1..{M}",
                          exponent=slope, m_range=(1, M), caveat=True, table=table)


def _pattern(r: PlurigenusReport) -> str:
    return r.summary().split(" for every")[0].removeprefix("P_m = ")


def _table(concrete: dict) -> list[tuple[int, int | None, bool]]:
    out = []
    for m in sorted(concrete):
        r = concrete[m]
        out.append((m, r.value_at(m), r.certified))
    return out


# --------------------------------------------------------------------------
# upper semicontinuity
# --------------------------------------------------------------------------


@dataclass
class Violation:
    column: object  # m or 'kod'
    t0: Scalar
    value: float
    eventual: float
    sequence: list[Scalar]

    def __str__(self):
        return (f"column {self.column}: value {_fmt(self.value)} at t = {self.t0} is below the eventual "
                f"value {_fmt(self.eventual)} along a sequence approaching it")


def _fmt(v) -> str:
    return "-inf" if v == NEG_INF else str(v)


def usc_table_check(table: dict, patterns: list[tuple[Scalar, list[Scalar]]]) -> list[Violation]:
    """Check upper semicontinuity along sampled accumulation patterns.

    ``table`` maps t to a map column -> value (P_m, or kod with -inf).
    Each pattern is (t0, [t_1, t_2, ...]) with t_k -> t0; points missing
    from the table are ignored.  The eventual value of a sequence is the
    max over its second half, and a value at t0 strictly below it is a
    violation.
    """
    violations = []
    for t0, seq in patterns:
        if t0 not in table:
            continue
        seq = [t for t in seq if t in table]
        tail = seq[len(seq) // 2:]
        if not tail:
            continue
        for col, v0 in table[t0].items():
            vals = [table[t].get(col) for t in tail]
            if v0 is None or any(v is None for v in vals):
                continue
            ev = max(vals)
            if v0 < ev:
                violations.append(Violation(col, t0, v0, ev, seq))
    return violations


def _toward_zero(t0: Scalar) -> int:
    re = t0.real_imag()[0]
    return -1 if re.sign() > 0 else 1


def rational_approach(t0: Scalar, count: int = 6, scale: Fraction = Fraction(1, 4)) -> list[Scalar]:
    """t0 +- scale/k, k = 1..count, stepping toward 0 so a disc around 0 is never left.

    The points avoid pi*Q whenever t0 is in pi*Q (pi is transcendental).
    """
    sgn = _toward_zero(t0)
    return [t0 + as_scalar(sgn * scale / k) for k in range(1, count + 1)]


def pi_rational_approach(t0: Scalar, count: int = 6) -> list[Scalar]:
    """Points q_k*pi -> t0.

    For t0 outside pi*Q these are the continued-fraction convergents of
    t0/pi; for t0 in pi*Q, t0 +- pi/(4k).
    """
    q0 = pi_rational_multiple(t0)
    if q0 is not None:
        sgn = _toward_zero(t0)
        return [t0 + PI * as_scalar(Fraction(sgn, 4 * k)) for k in range(1, count + 1)]
    out: list[Scalar] = []
    seen = set()
    with mpmath.workdps(30):
        y = mpmath.mpf(t0.to_complex().real) / mpmath.pi
        h0, h1, k0, k1 = 0, 1, 1, 0
        for _ in range(4 * count):
            a = int(mpmath.floor(y))
            h0, h1 = h1, a * h1 + h0
            k0, k1 = k1, a * k1 + k0
            q = Fraction(h1, k1)
            s = as_scalar(q) * PI
            if q not in seen and s != t0:
                seen.add(q)
                out.append(s)
            frac = y - a
            if frac < mpmath.mpf(10) ** -12 or len(out) >= count:
                break
            y = 1 / frac
    return out

"""Exact treatment of Fourier modes that algebraic forcing cannot kill.

For a case fixed by every lattice shift, the first d/dx row gives
``f_I' = lambda f_I`` with lambda polynomial in x, so ``f_I = exp(E)``
with ``E = integral of lambda``.  The remaining rows and the shift
equivariance ``E(x + p) - E(x) + 2 pi i (phase) = 2 pi i n`` become linear
equations over Q (after splitting real/imaginary parts and pi-powers) in
the free indices, m and the winding integers n.  Their integer solutions
are exactly the resonant sections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from ..linalg import integer_solutions
from ..scalars import I, PI, CoeffFn
from .equation import M_SYMBOL, SectionEquation
from .fourier import FourierSystem

__all__ = ["Section", "CaseResonance", "resonance", "verify_section", "pattern_value"]


@dataclass(frozen=True)
class Section:
    """f = exp(phi) with phi a polynomial in the coordinates."""

    m: int
    index: dict
    exponent: CoeffFn

    def __str__(self):
        return f"exp({self.exponent})" if self.exponent else "1"

    def as_json(self) -> dict:
        return {"m": self.m, "index": {k: self.index[k] for k in sorted(self.index)},
                "section": str(self), "exponent": str(self.exponent)}


@dataclass
class CaseResonance:
    case: dict
    status: str  # 'solved' or 'gap'
    reason: str = ""
    pattern: list[tuple[int, int]] = field(default_factory=list)  # (residue, modulus); modulus 0 = single m
    sections: list[Section] = field(default_factory=list)
    equations: list[str] = field(default_factory=list)


def pattern_value(pattern, m: int) -> int:
    out = 0
    for r, g in pattern:
        if (g == 0 and m == r) or (g > 0 and (m - r) % g == 0):
            out += 1
    return out


class _Gap(Exception):
    pass


def _linear_rows(poly: CoeffFn, x: str | None, unknowns: list[str]) -> list[tuple[list[Fraction], Fraction]]:
    """Split ``poly == 0`` into rational linear equations in ``unknowns``."""
    rows = []
    groups = poly.coefficients_in(x) if x else {0: poly}
    for g in groups.values():
        for part in g.real_imag():
            if not part:
                continue
            for comp in part.pi_split().values():
                row = [Fraction(0)] * len(unknowns)
                const = Fraction(0)
                for mono, c in comp.terms.items():
                    q = c.as_fraction()
                    if not mono:
                        const += q
                    elif len(mono) == 1 and mono[0][1] == 1 and mono[0][0] in unknowns:
                        row[unknowns.index(mono[0][0])] += q
                    else:
                        raise _Gap(f"nonlinear resonance condition {comp} = 0")
                rows.append((row, -const))
    return rows


def _shift_subs(E: CoeffFn, x: str, step: Fraction) -> CoeffFn:
    return E.subs({x: CoeffFn.sym(x) + step})


def _solve_case(sys: FourierSystem, case: dict, m) -> CaseResonance:
    zero = {v for v, s in case.items() if s == "zero" and v != M_SYMBOL}
    nonzero = {v for v, s in case.items() if s == "nonzero" and v != M_SYMBOL}
    res = CaseResonance(dict(case), "gap")
    if nonzero:
        res.reason = f"case carries nonzero constraints on {sorted(nonzero)}"
        return res
    for k, sh in enumerate(sys.shifts):
        if not sh.fixes(zero):
            res.reason = f"modes in this case are permuted by lattice shift {k + 1} (mixed orbit)"
            return res
    free = [v for v in sys.indices if v not in zero]
    bind = {v: 0 for v in zero}
    if m != "symbolic":
        bind[M_SYMBOL] = int(m)
    sub = sys.subs(bind)
    x = sys.x
    drows = sub.derivative_rows()
    constraints: list[CoeffFn] = []
    if x is None:
        E = CoeffFn()
        for r in range(len(sub.M)):
            constraints.append(sub.M[r][0])
    else:
        if not drows:
            res.reason = "no d/dx equation: the x-profile of these modes is unconstrained"
            return res
        r0 = drows[0]
        N0 = sub.N[r0][0]
        if not N0.is_constant():
            res.reason = f"d/dx coefficient {N0} is not constant"
            return res
        lam = -sub.M[r0][0] * N0.constant_value().inverse()
        E = lam.integrate(x)
        for r in range(len(sub.M)):
            if r == r0:
                continue
            constraints.append(sub.N[r][0] * lam + sub.M[r][0])
    windings = [f"n{k + 1}" for k in range(len(sys.shifts))]
    for k, sh in enumerate(sys.shifts):
        phase = (sh.phase_x * CoeffFn.sym(x) if x else CoeffFn()) + sh.phase_const
        D = (_shift_subs(E, x, sh.step) - E if x else CoeffFn()) + (phase.subs(bind) - CoeffFn.sym(windings[k])) * (2 * PI * I)
        constraints.append(D)
    unknowns = free + ([M_SYMBOL] if m == "symbolic" else []) + windings
    try:
        lin = [row for c in constraints for row in _linear_rows(c, x, unknowns)]
    except _Gap as exc:
        res.reason = str(exc)
        return res
    res.equations = [_fmt_lin(r, b, unknowns) for r, b in lin]
    sol = integer_solutions([r for r, _ in lin], [b for _, b in lin]) if lin else ([0] * len(unknowns), [
        [1 if i == j else 0 for i in range(len(unknowns))] for j in range(len(unknowns))])
    res.status = "solved"
    if sol is None:
        res.reason = "no integer solution: no resonant section"
        return res
    x0, kernel = sol
    nidx = len(free)
    if m == "symbolic":
        mi = nidx
        # directions keeping m fixed must not move the index
        mcol = [k[mi] for k in kernel]
        sub_sol = integer_solutions([mcol], [0]) if kernel else None
        fixed_dirs = []
        if sub_sol is not None:
            for z in sub_sol[1]:
                fixed_dirs.append([sum(zk * kv[i] for zk, kv in zip(z, kernel)) for i in range(len(unknowns))])
        if any(any(v[i] for i in range(nidx)) for v in fixed_dirs):
            res.status = "gap"
            res.reason = "infinitely many resonant modes for a single m"
            return res
        g = 0
        for v in mcol:
            g = gcd(g, abs(v))
        r0 = x0[mi] % g if g else x0[mi]
        res.pattern = [(r0, g)]
        res.reason = f"resonant for m = {r0} mod {g}" if g else f"resonant only for m = {r0}"
        return res
    if any(any(k[i] for i in range(nidx)) for k in kernel):
        res.status = "gap"
        res.reason = "infinitely many resonant modes"
        return res
    index = {v: 0 for v in zero}
    index.update({v: x0[i] for i, v in enumerate(free)})
    E_val = E.subs({**{v: x0[i] for i, v in enumerate(free)}, **bind})
    phi = E_val
    for sym in sys.indices:
        if index[sym]:
            w = sys.index_coords[sym]
            phi = phi + CoeffFn.sym(w) * (2 * PI * I * index[sym] / sys.periods[sym])
    res.sections = [Section(int(m), index, phi)]
    res.pattern = [(int(m), 0)]
    res.reason = "resonant section found"
    return res


def _fmt_lin(row, b, names) -> str:
    out = ""
    for c, n in zip(row, names):
        if not c:
            continue
        mag = "" if abs(c) == 1 else f"{abs(c)}*"
        if not out:
            out = f"{'-' if c < 0 else ''}{mag}{n}"
        else:
            out += f" {'-' if c < 0 else '+'} {mag}{n}"
    return (out or "0") + f" = {b}"


def resonance(sys: FourierSystem, cases: list[dict], m="symbolic") -> list[CaseResonance]:
    if sys.form != "complex":
        raise ValueError("resonance works on the complex form")
    return [_solve_case(sys, case, m) for case in cases]


def verify_section(eq: SectionEquation, s: Section) -> list[str]:
    """Exact check: equations, periodicity and lattice-shift invariance of exp(phi)."""
    problems = []
    M = eq.manifold
    for j in range(eq.n):
        r = eq.exponent_residual(j, s.exponent, s.m)
        if r:
            problems.append(f"equation {j + 1} leaves residual {r}")
    two_pi_i = 2 * PI * I

    def winding(delta: CoeffFn, what: str):
        if not delta.is_constant():
            problems.append(f"{what}: exponent changes by non-constant {delta}")
            return
        q = delta.constant_value() / two_pi_i
        if not q.is_rational() or q.as_fraction().denominator != 1:
            problems.append(f"{what}: exponent changes by {delta}, not in 2*pi*i*Z")

    for c, L in M.periodic.items():
        winding(s.exponent.subs({c: CoeffFn.sym(c) + L}) - s.exponent, f"period of {c}")
    for k, sh in enumerate(M.lattice_shifts):
        winding(s.exponent.subs(sh) - s.exponent, f"lattice shift {k + 1}")
    return problems

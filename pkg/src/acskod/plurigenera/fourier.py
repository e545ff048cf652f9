"""Fourier reduction of the section equation along the periodic coordinates.

A solution is expanded as ``f = sum_I f_I(x) exp(2 pi i sum_c I_c w_c / L_c)``
over the periodic coordinates ``w_c`` (period ``L_c``); ``x`` is the single
non-periodic coordinate, if any.  Each equation becomes

    N(I) d f_I/dx + M(x, I, m) f_I = 0

row by row.  Rows without a d/dx part form the algebraic system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from string import ascii_lowercase

from ..linalg import det, maximal_minors
from ..scalars import I, PI, CoeffFn, as_coeff
from .equation import M_SYMBOL, SectionEquation, _scale_factor

__all__ = ["FourierError", "ShiftAction", "FourierSystem", "fourier_reduce", "index_symbols"]


class FourierError(ValueError):
    """The manifold is outside the class handled by the Fourier method."""


_RESERVED = {"i", "m", "n", "x", "pi", "e"}


def index_symbols(coords: list[str], periodic: list[str]) -> dict[str, str]:
    """Pick one index name per periodic coordinate: a, b, c, ... avoiding clashes."""
    taken = set(coords) | _RESERVED
    pool = [ch for ch in ascii_lowercase if ch not in taken]
    if len(pool) < len(periodic):
        raise FourierError("too many periodic coordinates to name Fourier indices")
    return dict(zip(periodic, pool))


@dataclass(frozen=True)
class ShiftAction:
    """Action of one lattice shift on Fourier modes.

    Invariance of f reads ``f_{remap(I)}(x) = f_I(x + step) exp(2 pi i (phase_x(I) x + phase_const(I)))``.
    """

    remap: dict  # index symbol -> CoeffFn in the index symbols
    step: Fraction
    phase_x: CoeffFn
    phase_const: CoeffFn

    def fixes(self, zero: set[str] = frozenset()) -> bool:
        bind = {s: 0 for s in zero}
        return all((v - CoeffFn.sym(k)).subs(bind).is_zero() for k, v in self.remap.items())


@dataclass
class FourierSystem:
    form: str  # 'complex' or 'real'
    unknowns: list[str]
    indices: list[str]
    index_coords: dict[str, str]  # index symbol -> coordinate
    periods: dict[str, Fraction]  # index symbol -> period
    x: str | None
    N: list[list[CoeffFn]]
    M: list[list[CoeffFn]]
    shifts: list[ShiftAction] = field(default_factory=list)
    equation: SectionEquation | None = None

    @property
    def symbols(self) -> list[str]:
        return list(self.indices) + [M_SYMBOL]

    def algebraic_rows(self) -> list[int]:
        return [r for r, row in enumerate(self.N) if not any(row)]

    def derivative_rows(self) -> list[int]:
        return [r for r, row in enumerate(self.N) if any(row)]

    def algebraic_matrix(self) -> list[list[CoeffFn]]:
        return [self.M[r] for r in self.algebraic_rows()]

    def determinant(self) -> CoeffFn:
        A = self.algebraic_matrix()
        if not A or len(A) != len(A[0]):
            raise FourierError(f"algebraic part is {len(A)}x{len(self.unknowns)}, not square")
        return det(A)

    def forcing_polys(self) -> list[CoeffFn]:
        """det of a square algebraic part, else its maximal minors (needs rank = #unknowns)."""
        A = self.algebraic_matrix()
        if len(A) < len(self.unknowns):
            return []
        if len(A) == len(A[0]):
            return [det(A)]
        return [p for p in maximal_minors(A)]

    def mode_factor(self, w: str) -> CoeffFn:
        """Multiplier of d/dw on exp(2 pi i I_w w / L_w)."""
        sym = next(s for s, c in self.index_coords.items() if c == w)
        return CoeffFn.sym(sym) * (2 * PI * I / self.periods[sym])

    def subs(self, bindings: dict) -> "FourierSystem":
        return FourierSystem(self.form, self.unknowns, self.indices, self.index_coords, self.periods, self.x,
                             [[c.subs(bindings) for c in r] for r in self.N],
                             [[c.subs(bindings) for c in r] for r in self.M], self.shifts, self.equation)

    def describe(self) -> list[str]:
        out = []
        for r in range(len(self.M)):
            terms = []
            for k, u in enumerate(self.unknowns):
                if self.N[r][k]:
                    terms.append(f"({self.N[r][k]})*d{u}/d{self.x}")
                if self.M[r][k]:
                    terms.append(f"({self.M[r][k]})*{u}")
            out.append(" + ".join(terms or ["0"]) + " = 0")
        return out


def _shift_actions(M, idx_of: dict[str, str], periods: dict[str, Fraction], x: str | None) -> list[ShiftAction]:
    out = []
    coords = M.coordinates
    for k, s in enumerate(M.lattice_shifts):
        if x is not None:
            xs = s[x] - CoeffFn.sym(x)
            if not xs.is_constant() or not xs.constant_value().is_rational():
                raise FourierError(f"lattice shift {k + 1}: the x-component must be x + rational constant")
            step = xs.constant_value().as_fraction()
        else:
            step = Fraction(0)
        remap = {sym: CoeffFn.sym(sym) for sym in idx_of.values()}
        phase_x = CoeffFn()
        phase_c = CoeffFn()
        for w, sym in idx_of.items():
            delta = s[w] - CoeffFn.sym(w)
            Iw = CoeffFn.sym(sym) * Fraction(1) / periods[sym]
            for c in coords:
                coef = delta.diff(c)
                if not coef:
                    continue
                if not coef.is_constant() or not coef.constant_value().is_rational():
                    raise FourierError(f"lattice shift {k + 1} is not affine with rational coefficients")
                q = coef.constant_value().as_fraction()
                if c == x:
                    phase_x = phase_x + Iw * q
                elif c in idx_of:
                    tgt = idx_of[c]
                    remap[tgt] = remap[tgt] + CoeffFn.sym(sym) * (q * periods[tgt] / periods[sym])
                else:  # pragma: no cover - every coordinate is periodic or x
                    raise FourierError(f"lattice shift {k + 1} couples to unknown coordinate {c}")
            const = delta.subs({c: 0 for c in coords})
            if not const.is_constant() or not const.constant_value().is_rational():
                raise FourierError(f"lattice shift {k + 1} has a non-rational translation part")
            phase_c = phase_c + Iw * const.constant_value().as_fraction()
        for sym, v in remap.items():
            if any(not c.is_rational() or c.as_fraction().denominator != 1 for c in v.terms.values()):
                raise FourierError(f"lattice shift {k + 1} does not map integer indices to integer indices")
        out.append(ShiftAction(remap, step, phase_x, phase_c))
    return out


def fourier_reduce(eq: SectionEquation, form: str = "complex") -> FourierSystem:
    M = eq.manifold
    if eq.coord is None:
        raise FourierError(f"manifold {M.name!r} has no coordinates; the Fourier method needs a coordinate frame")
    nonper = M.nonperiodic
    if len(nonper) > 1:
        raise FourierError(f"more than one non-periodic coordinate ({', '.join(nonper)}); outside the supported class")
    x = nonper[0] if nonper else None
    periodic = [c for c in M.coordinates if c in M.periodic]
    idx_of = index_symbols(M.coordinates, periodic)
    periods = {idx_of[c]: M.periodic[c] for c in periodic}
    index_coords = {v: k for k, v in idx_of.items()}
    for row in (M.frame_vectors or []):
        for c, v in zip(M.coordinates, row):
            bad = v.symbols() - ({x} if x else set())
            if bad:
                raise FourierError(f"frame entry {v} depends on periodic coordinates {sorted(bad)}")

    def factor(c: str) -> CoeffFn:
        sym = idx_of[c]
        return CoeffFn.sym(sym) * (2 * PI * I / periods[sym])

    coords = M.coordinates

    def derivation(coefs) -> tuple[CoeffFn, CoeffFn]:
        """(d/dx coefficient, algebraic multiplier) of sum coefs[c] d/dc on a mode."""
        nx, alg = CoeffFn(), CoeffFn()
        for c, v in zip(coords, coefs):
            if not v:
                continue
            if c == x:
                nx = nx + v
            else:
                alg = alg + v * factor(c)
        return nx, alg

    Nrows, Mrows = [], []
    if form == "complex":
        unknowns = ["f"]
        for j in range(eq.n):
            nx, alg = derivation(eq.coord[j])
            alg = alg + eq.zero_order(j)
            k = _scale_factor([nx, alg])
            Nrows.append([nx * k])
            Mrows.append([alg * k])
    elif form == "real":
        unknowns = ["u", "v"]
        fv = M.frame_vectors
        for req in eq.real_system():
            nrow = {"u": CoeffFn(), "v": CoeffFn()}
            mrow = {"u": CoeffFn(), "v": CoeffFn()}
            for coef, i, w in req.derivative_terms:
                nx, alg = derivation(fv[i])
                nrow[w] = nrow[w] + coef * nx
                mrow[w] = mrow[w] + coef * alg
            for coef, w in req.zero_order_terms:
                mrow[w] = mrow[w] + coef
            Nrows.append([nrow["u"], nrow["v"]])
            Mrows.append([mrow["u"], mrow["v"]])
    else:
        raise ValueError(f"unknown form {form!r}")
    shifts = _shift_actions(M, idx_of, periods, x)
    return FourierSystem(form, unknowns, [idx_of[c] for c in periodic], index_coords, periods, x,
                         Nrows, Mrows, shifts, eq)

"""The section equation dbar(f psi^m) = 0 as a first-order system for f.

With psi = phi^1 ^ ... ^ phi^n and dbar psi = alpha ^ psi, alpha = sum a_j phib^j,
the Leibniz rule gives dbar(f psi^m) = (dbar f + m f alpha) psi^m, i.e.

    Xbar_j(f) + m a_j f = 0,    j = 1..n,

where Xbar_j is dual to phib^j.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

from ..acs import AcsError, AlmostComplexStructure
from ..scalars import ONE, ZERO, CoeffFn, Scalar, as_coeff

__all__ = ["SectionEquation", "RealEquation", "build_section_equation", "M_SYMBOL"]

M_SYMBOL = "m"


@dataclass(frozen=True)
class RealEquation:
    """sum coef * e_i(unknown) + sum coef * unknown = 0 with unknowns 'u', 'v'."""

    derivative_terms: tuple[tuple[CoeffFn, int, str], ...]  # (coef, frame index, unknown)
    zero_order_terms: tuple[tuple[CoeffFn, str], ...]  # (coef, unknown)

    def __str__(self):
        parts = []
        for c, i, w in self.derivative_terms:
            parts.append((c, f"e{i + 1}({w})"))
        for c, w in self.zero_order_terms:
            parts.append((c, w))
        return _format_sum(parts) + " = 0"


def _format_sum(parts) -> str:
    out = ""
    for c, body in parts:
        s = str(c)
        if s == "1":
            t, neg = body, False
        elif s == "-1":
            t, neg = body, True
        elif len(c.terms) == 1 and " " not in s:
            neg = s.startswith("-")
            t = f"{s[1:] if neg else s}*{body}"
        else:
            t, neg = f"({s})*{body}", False
        if not out:
            out = f"-{t}" if neg else t
        else:
            out += f" - {t}" if neg else f" + {t}"
    return out or "0"


@dataclass
class SectionEquation:
    """Xbar_j(f) + m a_j f = 0 for j = 1..n.

    ``xbar[j]`` holds the frame components of Xbar_j and ``coord[j]`` the
    coefficients of the coordinate derivations (``None`` for manifolds given
    only by structure equations).
    """

    acs: AlmostComplexStructure
    xbar: list[list[Scalar]]
    a: list[Scalar]
    coord: list[list[CoeffFn]] | None

    @property
    def manifold(self):
        return self.acs.manifold

    @property
    def n(self) -> int:
        return len(self.xbar)

    def zero_order(self, j: int, m=None) -> CoeffFn:
        mm = CoeffFn.sym(M_SYMBOL) if m is None else as_coeff(m)
        return mm * self.a[j]

    def apply(self, j: int, f: CoeffFn, m=None) -> CoeffFn:
        """Xbar_j(f) + m a_j f for polynomial f in the coordinates."""
        if self.coord is None:
            raise AcsError("section equations need coordinates")
        acc = self.zero_order(j, m) * f
        for coef, c in zip(self.coord[j], self.manifold.coordinates):
            if coef:
                acc = acc + coef * f.diff(c)
        return acc

    def exponent_residual(self, j: int, phi: CoeffFn, m=None) -> CoeffFn:
        """(Xbar_j + m a_j)(exp(phi)) / exp(phi) = Xbar_j(phi) + m a_j."""
        if self.coord is None:
            raise AcsError("section equations need coordinates")
        acc = self.zero_order(j, m)
        for coef, c in zip(self.coord[j], self.manifold.coordinates):
            if coef:
                acc = acc + coef * phi.diff(c)
        return acc

    def describe(self) -> list[str]:
        out = []
        for j in range(self.n):
            parts = [(as_coeff(c), f"e{i + 1}") for i, c in enumerate(self.xbar[j]) if c]
            op = _format_sum(parts)
            line = f"Xbar{j + 1}(f) = 0" if not self.a[j] else f"Xbar{j + 1}(f) + ({self.a[j]})*m*f = 0"
            out.append(f"{line}    where Xbar{j + 1} = {op}")
        return out

    def real_system(self, scaled: bool = True) -> list[RealEquation]:
        """Split f = u + i v; each equation is scaled by the lcm of its rational denominators."""
        m = CoeffFn.sym(M_SYMBOL)
        out = []
        for j in range(self.n):
            p_q = [c.real_imag() for c in self.xbar[j]]
            r, s = self.a[j].real_imag()
            re_d, im_d = [], []
            for i, (p, q) in enumerate(p_q):
                if p:
                    re_d.append((as_coeff(p), i, "u"))
                if q:
                    re_d.append((as_coeff(-q), i, "v"))
                if q:
                    im_d.append((as_coeff(q), i, "u"))
                if p:
                    im_d.append((as_coeff(p), i, "v"))
            re_z = [(m * r, "u"), (m * (-s), "v")]
            im_z = [(m * s, "u"), (m * r, "v")]
            for der, zer in ((re_d, re_z), (im_d, im_z)):
                zer = [(c, w) for c, w in zer if c]
                coefs = [c for c, _, _ in der] + [c for c, _ in zer]
                k = _scale_factor(coefs) if scaled else 1
                der.sort(key=lambda t: (t[1], t[2]))
                out.append(RealEquation(tuple((c * k, i, w) for c, i, w in der),
                                        tuple((c * k, w) for c, w in zer)))
        return out


def _scale_factor(coefs) -> int:
    k = 1
    for c in coefs:
        for s in c.terms.values():
            if s.is_constant() and s.num and len(s.den) == 1:
                k = lcm(k, s.denominator_lcm())
    return k


def build_section_equation(acs: AlmostComplexStructure) -> SectionEquation:
    acs.require_constant("the section equation")
    alpha = acs.alpha
    n = acs.n
    a = []
    for j in range(n):
        c = alpha.terms.get((n + j,))
        a.append(c.constant_value() if c is not None else ZERO)
    _, xbar = acs.vector_fields()
    M = acs.manifold
    coord = None
    if M.has_coordinates:
        coord = []
        for j in range(n):
            row = []
            for ci in range(len(M.coordinates)):
                acc = CoeffFn()
                for i in range(M.dimension):
                    if xbar[j][i]:
                        acc = acc + M.frame_vectors[i][ci] * xbar[j][i]
                row.append(acc)
            coord.append(row)
    return SectionEquation(acs, xbar, a, coord)

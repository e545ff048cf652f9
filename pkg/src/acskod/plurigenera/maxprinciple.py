"""Maximum-principle strategy for the equations Xbar_j(f) = 0 with a_j = 0.

Write Xbar_j = (A_j + i B_j)/2 with real fields A_j, B_j.  Then
X_j Xbar_j = (A_j^2 + B_j^2 + i [A_j, B_j]) / 4.  If every bracket vanishes
and the principal symbol sum_j (A_j A_j^T + B_j B_j^T) is positive definite,
the sum of these operators is real, elliptic and has no zero-order term, so
u = Re f and v = Im f are constant on the compact manifold.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..linalg import det
from ..scalars import CoeffFn
from .equation import SectionEquation

__all__ = ["MaxPrincipleResult", "strategy_max_principle"]


@dataclass
class MaxPrincipleResult:
    verdict: str  # 'elliptic', 'unknown', 'not-applicable'
    reason: str
    equations: list[int]
    symbol: list[list[CoeffFn]] | None = None
    dimension: int | None = None  # 0 or 1 once f is known to be constant
    dimension_rule: str = ""

    def dimension_for(self, m) -> int | None:
        """P_m implied by constancy; ``m`` may be 'symbolic' (then valid for all m >= 1)."""
        return self.dimension


def _bracket(A: list[CoeffFn], B: list[CoeffFn], coords: list[str]) -> list[CoeffFn]:
    out = []
    for c in range(len(coords)):
        acc = CoeffFn()
        for d, name in enumerate(coords):
            if A[d]:
                acc = acc + A[d] * B[c].diff(name)
            if B[d]:
                acc = acc - B[d] * A[c].diff(name)
        out.append(acc)
    return out


def strategy_max_principle(eq: SectionEquation) -> MaxPrincipleResult:
    pure = [j for j in range(eq.n) if not eq.a[j]]
    if not pure:
        return MaxPrincipleResult("not-applicable", "no equation of the form Xbar(f) = 0", [])
    if eq.coord is None:
        return MaxPrincipleResult("not-applicable", "manifold has no coordinate frame", pure)
    coords = eq.manifold.coordinates
    k = len(coords)
    sym = [[CoeffFn() for _ in range(k)] for _ in range(k)]
    fields = []
    for j in pure:
        A, B = [], []
        for v in eq.coord[j]:
            re, im = v.real_imag()
            A.append(re * 2)
            B.append(im * 2)
        fields.append((j, A, B))
        for r in range(k):
            for c in range(k):
                sym[r][c] = sym[r][c] + A[r] * A[c] + B[r] * B[c]
    labels = ", ".join(f"Xbar{j + 1}" for j in pure)
    for size in range(1, k + 1):
        minor = det([row[:size] for row in sym[:size]])
        if not minor.is_constant():
            return MaxPrincipleResult("unknown", f"leading minor {size} of the symbol of {labels} is {minor}, "
                                      "sign not decidable", pure, sym)
        s = minor.constant_value().sign()
        if s <= 0:
            return MaxPrincipleResult("unknown", f"principal symbol of {labels} is degenerate: leading minor {size} "
                                      f"is {minor.constant_value()}", pure, sym)
    for j, A, B in fields:
        br = _bracket(A, B, coords)
        if any(br):
            return MaxPrincipleResult("unknown", f"[Re, Im] of 2*Xbar{j + 1} is nonzero, the operator is not real",
                                      pure, sym)
    if len(pure) == eq.n:
        dim, rule = 1, "constants solve every equation"
    else:
        dim, rule = 0, "constants must satisfy m a_j f = 0 with some a_j != 0, so f = 0 for m >= 1"
    return MaxPrincipleResult("elliptic", f"sum of X_j Xbar_j over {labels} is real and elliptic: f is constant",
                              pure, sym, dim, rule)

"""Numerical kernel estimate for the section equation (not certified).

The grid has N points per coordinate.  Periodic directions are handled by
the discrete Fourier transform (spectral differentiation with wavenumbers
-N/2 .. N/2-1), which block-diagonalises the operator.  The lattice shift
glues the x-interval [0, p) of a mode to the next mode of its orbit, so
each orbit of length l becomes one periodic function on [0, l p) sampled
at l N points and differentiated spectrally.  The kernel dimension is the
number of singular values below ``threshold * scale``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..scalars import CoeffFn
from .equation import SectionEquation

__all__ = ["OracleResult", "OracleError", "oracle_numeric_kernel"]

log = logging.getLogger(__name__)


class OracleError(ValueError):
    pass


@dataclass
class OracleResult:
    dimension: int
    grid: int
    threshold: float
    smallest: list[float]
    gap_ratio: float
    warnings: list[str] = field(default_factory=list)
    certified: bool = False

    def as_json(self) -> dict:
        return {"dimension": self.dimension, "grid": self.grid, "threshold": repr(self.threshold),
                "smallest_singular_values": [float(f"{v:.6e}") for v in self.smallest],
                "gap_ratio": float(f"{self.gap_ratio:.6e}"), "certified": False, "warnings": list(self.warnings)}


def _spectral_derivative(npts: int, period: float) -> np.ndarray:
    k = np.fft.fftfreq(npts, d=1.0 / npts)  # 0..N/2-1, -N/2..-1
    mult = 2j * np.pi * k / period
    eye = np.eye(npts)
    return np.fft.ifft(mult[:, None] * np.fft.fft(eye, axis=0), axis=0)


def _rep(k: int, n: int) -> int:
    k %= n
    return k - n if k >= n // 2 else k


def _affine_parts(expr: CoeffFn, coords: list[str]) -> tuple[dict[str, Fraction], Fraction]:
    lin = {}
    for c in coords:
        q = expr.diff(c)
        if q and (not q.is_constant() or not q.constant_value().is_rational()):
            raise OracleError(f"lattice shift component {expr} is not affine with rational coefficients")
        lin[c] = q.constant_value().as_fraction() if q else Fraction(0)
    const = expr.subs({c: 0 for c in coords})
    if not const.is_constant() or not const.constant_value().is_rational():
        raise OracleError(f"lattice shift component {expr} has a non-rational translation")
    return lin, const.constant_value().as_fraction()


def oracle_numeric_kernel(eq: SectionEquation, m: int, grid: int = 8, threshold: float = 1e-8) -> OracleResult:
    M = eq.manifold
    if eq.coord is None:
        raise OracleError("the oracle needs a coordinate frame")
    if grid < 2 or grid % 2:
        raise OracleError("grid resolution must be an even integer >= 2")
    coords = M.coordinates
    per = [c for c in coords if c in M.periodic]
    nonper = [c for c in coords if c not in M.periodic]
    if len(nonper) > 1:
        raise OracleError("more than one non-periodic coordinate")
    x = nonper[0] if nonper else None
    N = grid
    L = {c: float(M.periodic[c]) for c in per}
    n_eq = eq.n
    a = np.array([complex(s.to_complex()) for s in eq.a]) * m

    # coefficient functions of each coordinate derivation, as numerical polynomials in x
    def coef_fn(j: int, c: str):
        v = eq.coord[j][coords.index(c)]
        if x is None:
            val = v.eval_complex({})
            return lambda xs: np.full(np.shape(xs), val, dtype=complex)
        groups = {e: g.eval_complex({}) for e, g in v.coefficients_in(x).items()}
        return lambda xs: sum(val * np.asarray(xs, dtype=float) ** e for e, val in groups.items()) + 0j * np.asarray(xs)

    for j in range(n_eq):
        for c in per:
            v = eq.coord[j][coords.index(c)]
            if v.symbols() - ({x} if x else set()):
                raise OracleError("frame coefficients depend on periodic coordinates")

    warnings: list[str] = []
    modes = list(itertools.product(range(-N // 2, N // 2), repeat=len(per)))
    if x is None:
        sv_all, dim = [], 0
        for I in modes:
            vals = np.array([sum(coef_fn(j, c)(0.0) * 2j * np.pi * I[k] / L[c] for k, c in enumerate(per)) + a[j]
                             for j in range(n_eq)])
            s = float(np.linalg.norm(vals))
            sv_all.append(s)
        return _finish(sv_all, None, N, threshold, warnings)

    shifts = M.lattice_shifts
    if len(shifts) != 1:
        raise OracleError("the oracle needs exactly one lattice shift along the non-periodic coordinate")
    sh = shifts[0]
    lin_x, step = _affine_parts(sh[x], coords)
    if any(v for c, v in lin_x.items() if c != x) or lin_x[x] != 1 or step <= 0:
        raise OracleError("the shift must act on x as x + p with p > 0")
    p = float(step)
    # mode remap: f_{R(I)}(x) = f_I(x + p) * exp(2 pi i (phase))
    R = [[Fraction(0)] * len(per) for _ in per]  # R[target][source]
    phase_const = [Fraction(0)] * len(per)
    for k, c in enumerate(per):
        lin, const = _affine_parts(sh[c], coords)
        if lin[x]:
            raise OracleError("shifts coupling periodic coordinates to x are not supported by the oracle")
        for k2, c2 in enumerate(per):
            R[k2][k] += lin[c2] * M.periodic[c2] / M.periodic[c]
        phase_const[k] = const / M.periodic[c]

    def remap(I):
        out = []
        for k2 in range(len(per)):
            v = sum(R[k2][k] * I[k] for k in range(len(per)))
            if v.denominator != 1:
                raise OracleError("shift does not preserve integer mode indices")
            out.append(_rep(int(v), N))
        return tuple(out)

    def phase(I):
        ph = sum(phase_const[k] * I[k] for k in range(len(per)))
        return np.exp(2j * np.pi * float(ph))

    xs = np.arange(N) * p / N
    seen = set()
    sv_all = []
    dim = 0
    zero_per_cycle = []
    for I0 in modes:
        if I0 in seen:
            continue
        cyc = [I0]
        seen.add(I0)
        nxt = remap(I0)
        while nxt != I0:
            if nxt in seen:  # pragma: no cover - remap is a bijection
                raise OracleError("mode remap is not a permutation")
            cyc.append(nxt)
            seen.add(nxt)
            nxt = remap(nxt)
        ell = len(cyc)
        # g(y) on [0, ell p): g(x + k p) = f_{I_k}(x) / prod_{r<k} phase(I_r)
        total = np.prod([phase(I) for I in cyc])
        if abs(total - 1) > 1e-12:
            raise OracleError("non-trivial holonomy phase along a mode orbit is not supported")
        D = _spectral_derivative(ell * N, ell * p)
        rows = []
        for j in range(n_eq):
            nx = coef_fn(j, x)(np.tile(xs, ell))
            mult = np.concatenate([
                sum(coef_fn(j, c)(xs) * 2j * np.pi * I[k] / L[c] for k, c in enumerate(per)) + a[j] + 0j * xs
                for I in cyc])
            rows.append(nx[:, None] * D + np.diag(mult))
        A = np.vstack(rows)
        s = np.linalg.svd(A, compute_uv=False)
        sv_all.extend(s.tolist())
        zero_per_cycle.append(s)
    return _finish(sv_all, zero_per_cycle, N, threshold, warnings)


def _finish(sv_all, blocks, N, threshold, warnings) -> OracleResult:
    sv = np.sort(np.asarray(sv_all, dtype=float))
    scale = max(1.0, float(sv[-1]))
    tol = threshold * scale
    dim = int(np.sum(sv < tol))
    above = sv[sv >= tol]
    below = sv[sv < tol]
    lo = float(above[0]) if above.size else float("inf")
    hi = float(below[-1]) if below.size else tol
    gap = min(lo / max(hi, 1e-300), 1e300)
    if lo < 1e3 * tol:
        warnings.append(f"smallest retained singular value {lo:.3e} is close to the threshold {tol:.3e}; "
                        "resolution may be too coarse")
    for w in warnings:
        log.warning(w)
    return OracleResult(dim, N, threshold, [float(v) for v in sv[: max(dim + 2, 3)]], gap, warnings)

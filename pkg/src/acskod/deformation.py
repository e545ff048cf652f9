"""Families J(t) over a disc, the total space M x disc, and (t, m)-scans.

A family is given by a matrix of rational functions in two real symbols
(by default ``ret`` and ``imt``, the real and imaginary parts of t).
Sample points are exact Scalars; membership in pi*Q decides the expected
Kodaira dimension on the Kodaira-Thurston family, so floats never enter.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .acs import AlmostComplexStructure, pseudoholomorphic_check
from .exterior import ManifoldSpec
from .kodaira import KodairaVerdict, kod_from_reports, pi_rational_approach, rational_approach
from .linalg import matmul
from .parsing import parse_scalar
from .plurigenera.pipeline import PlurigenusReport, compute_plurigenus
from .plurigenera.equation import build_section_equation
from .plurigenera.resonance import verify_section
from .scalars import ONE, ZERO, CoeffFn, RatFn, Scalar, as_scalar, pi_rational_multiple
from .specfiles import SpecError, _Ctx, builtin_names, load_json, parse_manifold, read_source

__all__ = [
    "FamilySpec",
    "FamilyError",
    "parse_family",
    "load_family",
    "family_validate",
    "evaluate",
    "in_domain",
    "is_pi_rational",
    "TotalSpace",
    "total_space",
    "fiber_restriction",
    "ScanRow",
    "ScanTable",
    "scan",
    "scan_sample",
    "accumulation_scan",
    "worker_count",
    "WORKERS_ENV",
]

WORKERS_ENV = "ACSKOD_WORKERS"


class FamilyError(ValueError):
    """Family fails J^2 = -I or degenerates on its domain."""

    def __init__(self, message: str, entry: tuple[int, int] | None = None, sample=None):
        self.entry = entry
        self.sample = sample
        super().__init__(message)


@dataclass
class FamilySpec:
    name: str
    manifold: ManifoldSpec
    parameters: tuple[str, str]
    radius: Scalar
    J: list[list[RatFn]]
    description: str = ""
    source_text: str = ""
    source: str = ""


def parse_family(text: str, source: str = "<family>") -> FamilySpec:
    data = load_json(text, source)
    ctx = _Ctx(text, source)
    if not ctx.keys(data, "", ("manifold", "radius", "J"), ("name", "description", "parameters")):
        ctx.raise_if_any()
    params = data.get("parameters", ["ret", "imt"])
    if (not isinstance(params, list) or len(params) != 2 or not all(isinstance(p, str) for p in params)
            or params[0] == params[1]):
        ctx.add("parameters", "expected two distinct symbol names (real and imaginary part of t)", params)
        params = ["ret", "imt"]
    mref = data["manifold"]
    M = None
    if not isinstance(mref, str):
        ctx.add("manifold", "expected a built-in manifold name or a file path", mref)
    else:
        if mref not in builtin_names("manifolds") and source and Path(source).parent.exists():
            cand = Path(source).parent / mref
            mref = str(cand) if cand.exists() else mref
        try:
            mtext, mlabel = read_source(mref, "manifolds")
            M = parse_manifold(mtext, mlabel)
        except SpecError as exc:
            ctx.add("manifold", f"cannot load manifold: {exc.issues[0].message}", data["manifold"])
    if M is not None and set(params) & set(M.symbols()):
        ctx.add("parameters", f"parameter names clash with coordinates {', '.join(M.coordinates)}", params)
    radius = ctx.const(data["radius"], "radius")
    if radius is not None and not (radius.is_real() and radius.sign() > 0):
        ctx.add("radius", f"radius must be a positive real constant, got {radius}", data["radius"])
    ctx.raise_if_any()
    syms = list(M.coordinates) + list(params)
    J = ctx.matrix(data["J"], "J", M.dimension, M.dimension, lambda x, p: ctx.expr(x, p, syms))
    ctx.raise_if_any()
    fam = FamilySpec(str(data.get("name", source)), M, (params[0], params[1]), radius,
                     [[RatFn.coerce(v) for v in row] for row in J], str(data.get("description", "")), text, source)
    try:
        family_validate(fam)
    except FamilyError as exc:
        if exc.entry is not None:
            i, j = exc.entry
            ctx.add(f"J[{i}][{j}]", str(exc), data["J"][i][j])
        else:
            ctx.add("J", str(exc), data["J"])
        ctx.raise_if_any()
    return fam


def load_family(ref: str) -> FamilySpec:
    text, label = read_source(ref, "families")
    return parse_family(text, label if label.startswith("builtin:") else ref)


# --------------------------------------------------------------------------
# validation and evaluation
# --------------------------------------------------------------------------


def _denominators(fam: FamilySpec) -> list[tuple[tuple[int, int], CoeffFn]]:
    out, seen = [], set()
    for i, row in enumerate(fam.J):
        for j, x in enumerate(row):
            if not x.is_polynomial() and str(x.den) not in seen:
                seen.add(str(x.den))
                out.append(((i, j), x.den))
    return out


def _probe_points(r: Scalar) -> list[tuple[Scalar, Scalar]]:
    pts = []
    for k in range(-3, 4):
        for l in range(-3, 4):
            if k * k + l * l < 16:
                pts.append((r * as_scalar(Fraction(k, 4)), r * as_scalar(Fraction(l, 4))))
    return pts


def family_validate(fam: FamilySpec) -> bool:
    """J(t)^2 = -I identically and no denominator vanishes in the open disc.

    Denominators affine in (ret, imt) are decided exactly; others are
    probed on a grid inside the disc.
    """
    J = fam.J
    n = len(J)
    sq = matmul(J, J)
    for i in range(n):
        for j in range(n):
            v = sq[i][j] + (1 if i == j else 0)
            if v:
                raise FamilyError(f"J(t)^2 != -I: entry ({i + 1},{j + 1}) of J^2 + I is {v}", (i, j))
            if J[i][j].conjugate() != J[i][j]:
                raise FamilyError(f"J[{i + 1},{j + 1}] = {J[i][j]} is not real", (i, j))
    re, im = fam.parameters
    r = fam.radius
    for (i, j), den in _denominators(fam):
        if den.symbols() - {re, im}:
            raise FamilyError(f"denominator {den} of J[{i + 1},{j + 1}] depends on manifold coordinates", (i, j))
        if den.total_degree() <= 1:
            a = den.diff(re).constant_value()
            b = den.diff(im).constant_value()
            c = den.subs({re: 0, im: 0}).constant_value()
            # the zero line a*x + b*y + c = 0 meets the open disc iff c^2 < r^2 (a^2 + b^2)
            if (r * r * (a * a + b * b) - c * c).sign() > 0:
                s = -c / (a * a + b * b)
                raise FamilyError(f"denominator {den} of J[{i + 1},{j + 1}] vanishes inside |t| < {r}, "
                                  f"e.g. at t = {a * s} + i*({b * s})", (i, j), (a * s, b * s))
            continue
        for x, y in _probe_points(r):
            if not den.subs({re: x, im: y}):
                raise FamilyError(f"denominator {den} of J[{i + 1},{j + 1}] vanishes at t = {x} + i*({y})",
                                  (i, j), (x, y))
    return True


def in_domain(fam: FamilySpec, t: Scalar) -> bool:
    re, im = t.real_imag()
    return (fam.radius * fam.radius - re * re - im * im).sign() > 0


def is_pi_rational(t: Scalar) -> bool:
    """t = q*pi for some rational q (exact, using the transcendence of pi)."""
    return pi_rational_multiple(t) is not None


def _fiber_matrix(fam: FamilySpec, t: Scalar) -> list[list]:
    re, im = t.real_imag()
    b = {fam.parameters[0]: re, fam.parameters[1]: im}
    out = []
    for i, row in enumerate(fam.J):
        r = []
        for j, x in enumerate(row):
            if not x.is_polynomial() and not x.den.subs(b):
                raise FamilyError(f"denominator of J[{i + 1},{j + 1}] vanishes at t = {t}", (i, j), t)
            v = x.subs(b)
            r.append(v.num if v.is_polynomial() else v)
        out.append(r)
    return out


def evaluate(fam: FamilySpec, t: Scalar) -> AlmostComplexStructure:
    if not in_domain(fam, t):
        raise FamilyError(f"t = {t} lies outside the disc |t| < {fam.radius}", sample=t)
    return AlmostComplexStructure(fam.manifold, _fiber_matrix(fam, t), name=f"{fam.name}(t={t})")


# --------------------------------------------------------------------------
# total space M x disc
# --------------------------------------------------------------------------


@dataclass
class TotalSpace:
    manifold: ManifoldSpec
    acs: AlmostComplexStructure
    projection: list[list[Scalar]]  # d(pi) in the frames e_1..e_{2n+2} -> d/d ret, d/d imt
    J_disc: list[list[Scalar]]

    def projection_pseudoholomorphic(self) -> bool:
        return pseudoholomorphic_check(self.projection, self.acs.J, self.J_disc)


def total_space(fam: FamilySpec) -> TotalSpace:
    """M x disc with J = diag(J(t), J_disc); e_{2n+1}, e_{2n+2} are d/d ret, d/d imt."""
    M = fam.manifold
    if not M.has_coordinates:
        raise FamilyError(f"manifold {M.name} has no coordinate frame; the total space needs coordinates")
    k = M.dimension
    re, im = fam.parameters
    coords = list(M.coordinates) + [re, im]
    c = len(coords)

    def extend(rows):
        out = [list(r) + [CoeffFn(), CoeffFn()] for r in rows]
        out.append([CoeffFn()] * (c - 2) + [CoeffFn.const(ONE), CoeffFn()])
        out.append([CoeffFn()] * (c - 1) + [CoeffFn.const(ONE)])
        return out

    T = ManifoldSpec(f"{M.name} x disc", k + 2, coords, dict(M.periodic), extend(M.frame_vectors),
                     extend(M.coframe), [dict(s) for s in M.lattice_shifts], None, M.extra_symbols)
    J_disc = [[ZERO, -ONE], [ONE, ZERO]]
    zero = RatFn.coerce(0)
    J = [list(row) + [zero, zero] for row in fam.J]
    J.append([zero] * k + [RatFn.coerce(J_disc[0][0]), RatFn.coerce(J_disc[0][1])])
    J.append([zero] * k + [RatFn.coerce(J_disc[1][0]), RatFn.coerce(J_disc[1][1])])
    J = [[x.num if x.is_polynomial() else x for x in row] for row in J]
    acs = AlmostComplexStructure(T, J, name=f"total space of {fam.name}")
    dpi = [[ZERO] * k + [ONE, ZERO], [ZERO] * k + [ZERO, ONE]]
    return TotalSpace(T, acs, dpi, J_disc)


def fiber_restriction(ts: TotalSpace, fam: FamilySpec, t: Scalar) -> list[list]:
    """Upper-left block of the total-space J at the fixed parameter t."""
    re, im = t.real_imag()
    b = {fam.parameters[0]: re, fam.parameters[1]: im}
    k = fam.manifold.dimension
    return [[RatFn.coerce(x).subs(b) for x in row[:k]] for row in ts.acs.J[:k]]


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


@dataclass
class ScanRow:
    t: Scalar
    pi_rational: bool
    values: dict[int, int | None]
    certified: dict[int, bool]
    kod: KodairaVerdict
    reports: list[dict]
    witness: dict | None = None  # smallest-m constructed section, re-verified

    @property
    def label(self) -> str:
        return str(self.t)


@dataclass
class ScanTable:
    family: str
    max_m: int
    rows: list[ScanRow]
    skipped: list[tuple[str, str]] = field(default_factory=list)

    def header(self) -> list[str]:
        cols = ["t", "is_pi_rational"]
        for m in range(1, self.max_m + 1):
            cols += [f"P_{m}", f"P_{m}_certified"]
        return cols + ["kod", "kod_certified"]

    def csv_rows(self) -> list[list[str]]:
        out = []
        for r in self.rows:
            line = [r.label, _b(r.pi_rational)]
            for m in range(1, self.max_m + 1):
                v = r.values.get(m)
                line += ["" if v is None else str(v), _b(r.certified.get(m, False))]
            line += [r.kod.label(), _b(r.kod.certified)]
            out.append(line)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.csv_rows())
        return buf.getvalue()

    def plot_data(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_label", "m", "P_m"])
        for r in self.rows:
            for m in range(1, self.max_m + 1):
                v = r.values.get(m)
                w.writerow([r.label, m, "" if v is None else v])
        return buf.getvalue()

    def usc_table(self) -> dict:
        """t -> {m: P_m, 'kod': value} for usc_table_check."""
        out = {}
        for r in self.rows:
            d: dict = {m: v for m, v in r.values.items()}
            d["kod"] = r.kod.numeric
            out[r.t] = d
        return out

    def as_json(self) -> dict:
        return {
            "family": self.family,
            "max_m": self.max_m,
            "rows": [{
                "t": r.label,
                "is_pi_rational": r.pi_rational,
                "P": [{"m": m, "value": r.values.get(m), "certified": r.certified.get(m, False)}
                      for m in range(1, self.max_m + 1)],
                "kod": r.kod.as_json(),
                "witness": r.witness,
                "reports": r.reports,
            } for r in self.rows],
            "skipped": [{"t": t, "reason": why} for t, why in self.skipped],
        }

    def plot(self, path: str) -> None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True, gridspec_kw={"height_ratios": [3, 1]})
        xs = [r.t.to_complex().real for r in self.rows]
        for r, x in zip(self.rows, xs):
            for m in range(1, self.max_m + 1):
                v = r.values.get(m)
                if v is None:
                    ax1.scatter([x], [m], marker="x", color="gray")
                elif v > 0:
                    ax1.scatter([x], [m], s=30 + 20 * v, color="tab:blue")
                else:
                    ax1.scatter([x], [m], s=8, facecolors="none", edgecolors="tab:gray")
        ax1.set_ylabel("m")
        ax1.set_title(f"plurigenera P_m(t) on {self.family} (filled: P_m > 0)")
        kod_y = [0 if r.kod.numeric == 0 else (-1 if r.kod.kind == "NegInfinity" else float("nan")) for r in self.rows]
        colors = ["tab:orange" if r.pi_rational else "tab:green" for r in self.rows]
        ax2.scatter(xs, kod_y, c=colors)
        ax2.set_yticks([-1, 0])
        ax2.set_yticklabels(["-inf", "0"])
        ax2.set_ylabel("kod")
        ax2.set_xlabel("t (orange: t in pi*Q)")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def _b(x: bool) -> str:
    return "true" if x else "false"


def _min_positive_m(pattern) -> int | None:
    cands = [(r if r > 0 else g) if g > 0 else r for r, g in pattern]
    cands = [c for c in cands if c >= 1]
    return min(cands) if cands else None


def scan_sample(fam: FamilySpec, t: Scalar, max_m: int, witness_limit: int = 64) -> ScanRow:
    acs = evaluate(fam, t)
    sym = compute_plurigenus(acs, "symbolic")
    reports: list[PlurigenusReport] = [sym]
    values: dict[int, int | None] = {}
    cert: dict[int, bool] = {}
    if sym.certified:
        for m in range(1, max_m + 1):
            values[m], cert[m] = sym.value_at(m), True
    else:
        for m in range(1, max_m + 1):
            r = compute_plurigenus(acs, m)
            reports.append(r)
            values[m], cert[m] = r.value_at(m), r.certified
    kod = kod_from_reports(reports)
    witness = None
    if sym.kind == "Periodic":
        m0 = _min_positive_m(sym.pattern)
        if m0 is not None and m0 <= witness_limit:
            r = compute_plurigenus(acs, m0)
            eq = build_section_equation(acs)
            if r.basis:
                s = r.basis[0]
                witness = {"m": m0, "section": f"{s} * psi^{m0}", "verified": not verify_section(eq, s)}
    return ScanRow(t, is_pi_rational(t), values, cert, kod, [r.as_json() for r in reports], witness)


def _worker(args) -> ScanRow:
    text, source, t_text, max_m = args
    fam = parse_family(text, source)
    return scan_sample(fam, parse_scalar(t_text), max_m)


def scan(fam: FamilySpec, samples: list[Scalar], max_m: int, workers: int | None = None) -> ScanTable:
    """Scan samples in parallel; the table keeps the sample order."""
    if max_m < 1:
        raise ValueError("max_m must be at least 1")
    todo, skipped = [], []
    for t in samples:
        if not in_domain(fam, t):
            skipped.append((str(t), f"outside the disc |t| < {fam.radius}"))
            continue
        todo.append(t)
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(todo) > 1 and fam.source_text:
        args = [(fam.source_text, fam.source, str(t), max_m) for t in todo]
        with ProcessPoolExecutor(max_workers=min(workers, len(todo))) as ex:
            rows = list(ex.map(_worker, args))
        # parsed in the worker; restore the caller's exact sample objects
        for r, t in zip(rows, todo):
            r.t = t
    else:
        rows = [scan_sample(fam, t, max_m) for t in todo]
    return ScanTable(fam.name, max_m, rows, skipped)


def accumulation_scan(fam: FamilySpec, samples: list[Scalar], max_m: int, count: int = 6,
                      workers: int | None = None) -> tuple[ScanTable, list[tuple[Scalar, list[Scalar]]]]:
    """Scan samples together with rational and pi-rational sequences converging to each.

    Returns the table over all points and the (t0, sequence) patterns for
    usc_table_check.
    """
    patterns = []
    points: list[Scalar] = []
    seen = set()

    def add(t):
        if t not in seen and in_domain(fam, t):
            seen.add(t)
            points.append(t)

    for t0 in samples:
        if not in_domain(fam, t0):
            continue
        add(t0)
        for seq in (rational_approach(t0, count), pi_rational_approach(t0, count)):
            seq = [t for t in seq if in_domain(fam, t)]
            for t in seq:
                add(t)
            patterns.append((t0, seq))
    return scan(fam, points, max_m, workers), patterns

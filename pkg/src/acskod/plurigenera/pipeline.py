"""Strategy pipeline producing a :class:`PlurigenusReport`.

Order: maximum principle, Fourier reduction with algebraic forcing, then
resonance for the cases forcing leaves open.  Every certified outcome is
cross-checked against the others; a disagreement is an internal error.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..acs import AlmostComplexStructure
from ..scalars import CoeffFn
from .equation import SectionEquation, build_section_equation
from .forcing import ForcingResult, algebraic_forcing, tree_from_json, tree_to_json, verify_tree
from .fourier import FourierError, FourierSystem, fourier_reduce
from .maxprinciple import MaxPrincipleResult, strategy_max_principle
from .oracle import OracleError, OracleResult, oracle_numeric_kernel
from .resonance import CaseResonance, Section, pattern_value, resonance, verify_section

__all__ = ["PlurigenusReport", "InternalInvariantError", "compute_plurigenus", "verify_certificate",
           "certificate_document",
           "CERTIFICATE_FORMAT"]

CERTIFICATE_FORMAT = "acskod-certificate/1"
_CHECK_RANGE = range(1, 49)


class InternalInvariantError(RuntimeError):
    """Two certified strategies disagree, or a constructed section fails re-verification."""


@dataclass
class PlurigenusReport:
    manifold: str
    structure: str
    m: object  # 'symbolic' or int
    kind: str  # 'VanishAllM', 'ExactDim', 'Periodic', 'Bounds'
    dimension: int | None = None
    basis: list[Section] = field(default_factory=list)
    pattern: list[tuple[int, int]] = field(default_factory=list)
    lower: int = 0
    upper: int | None = None
    reason: str = ""
    strategy_trace: list[tuple[str, str]] = field(default_factory=list)
    certificate: dict | None = None
    oracle: OracleResult | None = None

    @property
    def certified(self) -> bool:
        return self.kind != "Bounds"

    def value_at(self, m: int) -> int | None:
        """Certified P_m when known."""
        if self.kind == "VanishAllM":
            return 0
        if self.kind == "Periodic":
            return pattern_value(self.pattern, m)
        if self.kind == "ExactDim" and self.m == m:
            return self.dimension
        if self.kind == "Bounds" and self.m == m and self.upper == self.lower:
            return self.lower
        return None

    def summary(self) -> str:
        if self.kind == "VanishAllM":
            return "P_m = 0 for every m >= 1 (certified)"
        if self.kind == "Periodic":
            return f"P_m = {_pattern_text(self.pattern)} for every m >= 1 (certified)"
        if self.kind == "ExactDim":
            return f"P_{self.m} = {self.dimension} (certified)"
        up = "unknown" if self.upper is None else str(self.upper)
        sub = "m" if self.m == "symbolic" else self.m
        return f"{self.lower} <= P_{sub} <= {up} (not certified: {self.reason})"

    def as_json(self) -> dict:
        out = {
            "manifold": self.manifold,
            "structure": self.structure,
            "m": self.m,
            "verdict": self.kind,
            "certified": self.certified,
            "summary": self.summary(),
        }
        if self.kind == "ExactDim":
            out["dimension"] = self.dimension
            out["basis"] = [s.as_json() for s in self.basis]
        if self.kind == "Periodic":
            out["pattern"] = [{"residue": r, "modulus": g} for r, g in self.pattern]
        if self.kind == "Bounds":
            out["lower"] = self.lower
            out["upper"] = self.upper
        out["reason"] = self.reason
        out["strategy_trace"] = [{"strategy": s, "outcome": o} for s, o in self.strategy_trace]
        if self.oracle is not None:
            out["oracle"] = self.oracle.as_json()
        return out

    def text(self) -> str:
        lines = [f"manifold: {self.manifold}", f"structure: {self.structure}",
                 f"m: {self.m}", f"verdict: {self.kind}", f"result: {self.summary()}"]
        for s in self.basis:
            lines.append(f"  section: {s} * psi^{s.m}")
        lines.append("strategy trace:")
        for s, o in self.strategy_trace:
            lines.append(f"  {s}: {o}")
        if self.oracle is not None:
            o = self.oracle
            lines.append(f"oracle (not certified): dimension {o.dimension} at grid {o.grid}, "
                         f"smallest singular values {', '.join(f'{v:.3e}' for v in o.smallest)}")
            for w in o.warnings:
                lines.append(f"  warning: {w}")
        return "\n".join(lines)


def _pattern_text(pattern) -> str:
    if not pattern:
        return "0"
    parts = []
    for r, g in pattern:
        if g == 1:
            parts.append("1")
        elif g == 0:
            parts.append(f"[m = {r}]")
        else:
            parts.append(f"[m = {r} mod {g}]")
    return " + ".join(parts)


def _normalize(pattern) -> list[tuple[int, int]]:
    return sorted((r % g if g else r, g) for r, g in pattern)


def _positive(pattern) -> bool:
    return any(g > 0 or r >= 1 for r, g in pattern)


def _choose_forcing(eq: SectionEquation, m, trace) -> tuple[FourierSystem, FourierSystem, ForcingResult] | None:
    try:
        real = fourier_reduce(eq, "real")
        cplx = fourier_reduce(eq, "complex")
    except FourierError as exc:
        trace.append(("fourier_reduce", f"not applicable: {exc}"))
        return None
    trace.append(("fourier_reduce", f"{len(real.algebraic_rows())} algebraic real rows, "
                                    f"indices {', '.join(real.indices) or 'none'}"
                                    + (f", non-periodic coordinate {real.x}" if real.x else "")))
    chosen = real
    res = algebraic_forcing(real, m)
    if not res.polys:
        res = algebraic_forcing(cplx, m)
        chosen = cplx
    return chosen, cplx, res


def compute_plurigenus(acs: AlmostComplexStructure, m="symbolic", oracle_grid: int | None = None,
                       threshold: float = 1e-8) -> PlurigenusReport:
    """Run all strategies for one structure; ``m`` is 'symbolic' or a positive integer."""
    if m != "symbolic":
        m = int(m)
        if m < 1:
            raise ValueError("m must be a positive integer")
    eq = build_section_equation(acs)
    M = acs.manifold
    trace: list[tuple[str, str]] = []
    report = PlurigenusReport(M.name, acs.name, m, "Bounds", reason="no strategy certified a result")
    candidates: list[PlurigenusReport] = []

    mp = strategy_max_principle(eq)
    trace.append(("max_principle", f"{mp.verdict}: {mp.reason}"))
    if mp.verdict == "elliptic":
        candidates.append(_from_max_principle(report, mp, m))

    forced = _choose_forcing(eq, m, trace)
    resonances: list[CaseResonance] = []
    if forced is not None:
        sysf, cplx, fres = forced
        leaves = fres.leaves()
        if not fres.polys:
            trace.append(("algebraic_forcing", "not applicable: the algebraic part has too few rows"))
        else:
            trace.append(("algebraic_forcing", f"{sysf.form} form, {len(leaves)} case(s), "
                                               f"{len(fres.unresolved)} unresolved"))
        cert = {
            "format": CERTIFICATE_FORMAT,
            "method": "fourier",
            "m": m,
            "form": sysf.form,
            "polys": [str(p) for p in fres.polys],
            "tree": tree_to_json(fres.tree),
        }
        if fres.complete:
            c = _clone(report)
            c.certificate = cert
            if m == "symbolic":
                c.kind, c.reason = "VanishAllM", "every Fourier mode is forced to vanish for every m >= 1"
            else:
                c.kind, c.dimension, c.reason = "ExactDim", 0, "every Fourier mode is forced to vanish"
            candidates.append(c)
        elif fres.polys or not cplx.algebraic_rows():
            resonances = resonance(cplx, [u.case for u in fres.unresolved], m)
            for r in resonances:
                trace.append(("resonance", f"case {_case_text(r.case)}: {r.status}, {r.reason}"))
            cert["resonance"] = [_resonance_json(r) for r in resonances]
            gaps = [r for r in resonances if r.status == "gap"]
            if not gaps:
                c = _clone(report)
                c.certificate = cert
                if m == "symbolic":
                    pat = _normalize(p for r in resonances for p in r.pattern)
                    if _positive(pat):
                        c.kind, c.pattern = "Periodic", pat
                        c.reason = "forced modes vanish; resonant modes give exponential sections"
                    else:
                        c.kind, c.reason = "VanishAllM", "forced modes vanish and no resonance occurs for m >= 1"
                else:
                    basis = [s for r in resonances for s in r.sections]
                    for s in basis:
                        probs = verify_section(eq, s)
                        if probs:
                            raise InternalInvariantError(f"constructed section {s} fails: {'; '.join(probs)}")
                    c.kind, c.dimension, c.basis = "ExactDim", len(basis), basis
                    c.reason = "forced modes vanish; resonant sections verified by substitution"
                candidates.append(c)
            else:
                lower = sum(len(r.sections) for r in resonances) if m != "symbolic" else 0
                report.lower = lower
                report.basis = [s for r in resonances for s in r.sections]
                report.reason = "; ".join(f"case {_case_text(r.case)}: {r.reason}" for r in gaps)

    final = _merge(report, candidates, m)
    final.strategy_trace = trace
    if oracle_grid:
        if m == "symbolic":
            trace.append(("oracle", "skipped: needs a concrete m"))
        else:
            try:
                final.oracle = oracle_numeric_kernel(eq, m, oracle_grid, threshold)
                agrees = _oracle_consistent(final, final.oracle.dimension)
                trace.append(("oracle", f"dimension {final.oracle.dimension} at grid {oracle_grid} "
                                        f"({'consistent' if agrees else 'INCONSISTENT'} with the exact result)"))
            except OracleError as exc:
                trace.append(("oracle", f"not applicable: {exc}"))
    return final


def _oracle_consistent(rep: PlurigenusReport, dim: int) -> bool:
    if rep.certified:
        return rep.value_at(rep.m) == dim
    return dim >= rep.lower and (rep.upper is None or dim <= rep.upper)


def _clone(r: PlurigenusReport) -> PlurigenusReport:
    return PlurigenusReport(r.manifold, r.structure, r.m, r.kind)


def _from_max_principle(base: PlurigenusReport, mp: MaxPrincipleResult, m) -> PlurigenusReport:
    c = _clone(base)
    c.certificate = {"format": CERTIFICATE_FORMAT, "method": "max-principle", "m": m,
                     "equations": [j + 1 for j in mp.equations], "dimension": mp.dimension}
    if m == "symbolic":
        if mp.dimension == 1:
            c.kind, c.pattern = "Periodic", [(0, 1)]
        else:
            c.kind = "VanishAllM"
    else:
        c.kind, c.dimension = "ExactDim", mp.dimension
        c.basis = [Section(m, {}, CoeffFn())] if mp.dimension == 1 else []
    c.reason = f"maximum principle: {mp.dimension_rule}"
    return c


def _merge(base: PlurigenusReport, cands: list[PlurigenusReport], m) -> PlurigenusReport:
    if not cands:
        return base
    ref = cands[0]
    for c in cands[1:]:
        if m == "symbolic":
            same = all(c.value_at(k) == ref.value_at(k) for k in _CHECK_RANGE)
        else:
            same = c.dimension == ref.dimension
        if not same:
            raise InternalInvariantError(f"certified strategies disagree: {ref.summary()} vs {c.summary()}")
    # prefer the Fourier certificate, which carries the case tree
    fourier = [c for c in cands if c.certificate and c.certificate.get("method") == "fourier"]
    return fourier[0] if fourier else ref


def _case_text(case: dict) -> str:
    items = [f"{k}{'=0' if v == 'zero' else '!=0'}" for k, v in sorted(case.items()) if k != "m"]
    return "{" + ", ".join(items) + "}" if items else "{all indices}"


def _resonance_json(r: CaseResonance) -> dict:
    return {"case": {k: r.case[k] for k in sorted(r.case)}, "status": r.status, "reason": r.reason,
            "pattern": [[a, b] for a, b in r.pattern], "equations": list(r.equations),
            "sections": [s.as_json() for s in r.sections]}


# --------------------------------------------------------------------------
# certificate re-verification
# --------------------------------------------------------------------------


def verify_certificate(cert: dict, seed: int = 0) -> list[str]:
    """Independently re-check a certificate produced by :func:`compute_plurigenus`.

    The certificate embeds the manifold and structure; everything else is
    recomputed from them.  Returns a list of problems (empty = valid).
    """
    from ..specfiles import SpecError, acs_from_dict, manifold_from_dict

    problems: list[str] = []
    if cert.get("format") != CERTIFICATE_FORMAT:
        return [f"unknown certificate format {cert.get('format')!r}"]
    try:
        M = manifold_from_dict(cert["manifold"])
        acs = acs_from_dict(cert["structure"], M)
    except (KeyError, SpecError) as exc:
        return [f"embedded inputs are invalid: {exc}"]
    m = cert.get("m", "symbolic")
    eq = build_section_equation(acs)
    claim = cert.get("claim", {})
    if cert.get("method") == "max-principle":
        mp = strategy_max_principle(eq)
        if mp.verdict != "elliptic":
            return [f"maximum principle does not apply: {mp.reason}"]
        if mp.dimension != cert.get("dimension"):
            problems.append(f"dimension {cert.get('dimension')} recorded, {mp.dimension} recomputed")
        return problems
    if cert.get("method") != "fourier":
        return [f"unknown method {cert.get('method')!r}"]
    sys = fourier_reduce(eq, cert.get("form", "real"))
    cplx = fourier_reduce(eq, "complex")
    polys = sys.forcing_polys()
    if m != "symbolic":
        polys = [p.subs({"m": int(m)}) for p in polys]
    if [str(p) for p in polys] != list(cert.get("polys", [])):
        problems.append("recorded forcing polynomials differ from the recomputed ones")
        return problems
    symbols = list(sys.indices) + ["m"] + ([sys.x] if sys.x else [])
    tree = tree_from_json(cert["tree"], symbols)
    tree_problems = verify_tree(tree, polys, sys.x, list(sys.indices), m, random.Random(seed))
    unresolved = [p for p in tree_problems if p.endswith("is unresolved")]
    problems.extend(p for p in tree_problems if not p.endswith("is unresolved"))
    recorded = cert.get("resonance", [])
    if unresolved:
        fres = ForcingResult(polys, tree, list(sys.indices), m)
        from .forcing import Unresolved

        cases = [t.case for t in fres.leaves() if isinstance(t, Unresolved)]
        got = resonance(cplx, cases, m)
        if [_resonance_json(r) for r in got] != recorded:
            problems.append("recorded resonance analysis differs from the recomputed one")
        for r in got:
            if r.status != "solved":
                problems.append(f"case {_case_text(r.case)} is not settled: {r.reason}")
            for s in r.sections:
                problems.extend(f"section {s}: {p}" for p in verify_section(eq, s))
        pattern = _normalize(p for r in got for p in r.pattern)
        count = sum(len(r.sections) for r in got)
    else:
        pattern, count = [], 0
    kind = claim.get("kind")
    if kind == "VanishAllM" and (m != "symbolic" or _positive(pattern)):
        problems.append("claim VanishAllM is not supported by the analysis")
    if kind == "Periodic" and [list(p) for p in pattern] != [list(p) for p in claim.get("pattern", [])]:
        problems.append("claimed pattern differs from the recomputed one")
    if kind == "ExactDim" and claim.get("dimension") != count:
        problems.append(f"claimed dimension {claim.get('dimension')} but {count} sections recomputed")
    return problems


def certificate_document(report: PlurigenusReport, acs: AlmostComplexStructure) -> dict | None:
    """Self-contained certificate: inputs, claim and the evidence."""
    from ..specfiles import acs_to_dict, manifold_to_dict

    if report.certificate is None:
        return None
    doc = dict(report.certificate)
    doc["manifold"] = manifold_to_dict(acs.manifold)
    doc["structure"] = acs_to_dict(acs)
    claim = {"kind": report.kind}
    if report.kind == "Periodic":
        claim["pattern"] = [[r, g] for r, g in report.pattern]
    if report.kind == "ExactDim":
        claim["dimension"] = report.dimension
    doc["claim"] = claim
    order = ["format", "claim", "method", "m", "form", "manifold", "structure", "polys", "tree", "resonance",
             "equations", "dimension"]
    return {k: doc[k] for k in order if k in doc}

"""Algebraic forcing: prove f_I = 0 for every index by a case tree.

For each case (an assignment of index symbols to ``zero`` / ``nonzero``) the
determinant of the algebraic part (or one of its maximal minors) must be a
nonzero polynomial in x.  Then f_I vanishes off finitely many x, hence
everywhere by continuity.  Nonvanishing is decided from one atomic
condition: the real or imaginary part of an x-coefficient, optionally split
into pi-power components (pi is transcendental and the indices are
integers).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..parsing import parse_coeff
from ..scalars import CoeffFn
from .equation import M_SYMBOL
from .fourier import FourierSystem

__all__ = ["Leaf", "Branch", "Unresolved", "ForcingResult", "algebraic_forcing", "verify_tree",
           "CertificateError", "tree_to_json", "tree_from_json"]


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class Condition:
    poly: int
    x_power: int
    part: str  # 're' or 'im'
    pi_power: int | None
    value: CoeffFn


@dataclass
class Leaf:
    case: dict
    reason: str  # 'monomial', 'definite', 'transcendence'
    condition: Condition


@dataclass
class Branch:
    case: dict
    var: str
    nonzero: object
    zero: object


@dataclass
class Unresolved:
    case: dict


@dataclass
class ForcingResult:
    polys: list[CoeffFn]
    tree: object
    variables: list[str]
    m: object  # 'symbolic' or int
    unresolved: list[Unresolved] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return bool(self.polys) and not self.unresolved

    def leaves(self) -> list:
        out = []

        def walk(t):
            if isinstance(t, Branch):
                walk(t.nonzero)
                walk(t.zero)
            else:
                out.append(t)

        walk(self.tree)
        return out


def _nonzero_vars(case: dict) -> set[str]:
    return {v for v, s in case.items() if s == "nonzero"}


def _zero_bind(case: dict) -> dict:
    return {v: 0 for v, s in case.items() if s == "zero"}


def certainly_nonzero(cond: CoeffFn, nonzero: set[str]) -> str | None:
    """Why ``cond`` cannot vanish at integers respecting ``nonzero``, or None."""
    if not cond:
        return None
    if cond.is_monomial():
        (mono, _), = cond.terms.items()
        if all(v in nonzero for v, _ in mono):
            return "monomial"
        return None
    signs = set()
    anchored = False
    for mono, c in cond.terms.items():
        if any(e % 2 for _, e in mono) or not c.is_real():
            return None
        signs.add(c.sign())
        if all(v in nonzero for v, _ in mono):
            anchored = True
    if len(signs) == 1 and anchored:
        return "definite"
    return None


def _conditions(polys: list[CoeffFn], x: str | None) -> list[Condition]:
    out = []
    for k, p in enumerate(polys):
        groups = p.coefficients_in(x) if x else {0: p}
        for e, g in sorted(groups.items()):
            re, im = g.real_imag()
            for part, v in (("im", im), ("re", re)):
                if v:
                    out.append(Condition(k, e, part, None, v))
    return out


def _pi_parts(c: Condition) -> list[Condition]:
    return [Condition(c.poly, c.x_power, c.part, k, v) for k, v in c.value.pi_split().items() if v]


def _undecided(mono, case: dict) -> list[str]:
    return [v for v, _ in mono if v not in case and v != M_SYMBOL]


def _solve_case(polys, x, variables, case) -> object:
    bind = _zero_bind(case)
    sub = [p.subs(bind) for p in polys]
    nz = _nonzero_vars(case)
    conds = _conditions(sub, x)
    # A: a condition that is certainly nonzero
    for c in conds:
        r = certainly_nonzero(c.value, nz)
        if r:
            return Leaf(dict(case), r, c)
    # B_imag: branch on a monomial imaginary condition
    for c in conds:
        if c.part == "im" and c.value.is_monomial():
            vs = _undecided(next(iter(c.value.terms)), case)
            if vs:
                return _branch(polys, x, variables, case, vs[0])
    # C: transcendence of pi
    pparts = [pc for c in conds for pc in _pi_parts(c)]
    for pc in pparts:
        r = certainly_nonzero(pc.value, nz)
        if r:
            return Leaf(dict(case), "transcendence", pc)
    # B_any: branch on any monomial condition, then on a definite one lacking an anchor
    for c in conds + pparts:
        if c.value.is_monomial():
            vs = _undecided(next(iter(c.value.terms)), case)
            if vs:
                return _branch(polys, x, variables, case, vs[0])
    for c in conds + pparts:
        if _definite_shape(c.value):
            vs = [v for mono in c.value.terms for v in _undecided(mono, case)]
            if vs:
                return _branch(polys, x, variables, case, sorted(vs)[0])
    return Unresolved(dict(case))


def _definite_shape(cond: CoeffFn) -> bool:
    """Same-sign real coefficients on even-power monomials."""
    if not cond:
        return False
    signs = set()
    for mono, c in cond.terms.items():
        if any(e % 2 for _, e in mono) or not c.is_real():
            return False
        signs.add(c.sign())
    return len(signs) == 1


def _branch(polys, x, variables, case, var):
    a = dict(case)
    a[var] = "nonzero"
    b = dict(case)
    b[var] = "zero"
    return Branch(dict(case), var, _solve_case(polys, x, variables, a), _solve_case(polys, x, variables, b))


def algebraic_forcing(sys: FourierSystem, m="symbolic") -> ForcingResult:
    """Run the case analysis; ``m`` is 'symbolic' (any m >= 1) or a concrete integer."""
    polys = sys.forcing_polys()
    if m != "symbolic":
        polys = [p.subs({M_SYMBOL: int(m)}) for p in polys]
    variables = list(sys.indices)
    if not polys or not any(polys):
        res = ForcingResult(polys, Unresolved({}), variables, m)
        res.unresolved = [res.tree]
        return res
    root = {M_SYMBOL: "nonzero"} if m == "symbolic" else {}
    tree = _solve_case(polys, sys.x, variables, root)
    res = ForcingResult(polys, tree, variables, m)
    res.unresolved = [t for t in res.leaves() if isinstance(t, Unresolved)]
    return res


# --------------------------------------------------------------------------
# serialization and independent re-verification
# --------------------------------------------------------------------------


def _case_json(case: dict) -> dict:
    return {k: case[k] for k in sorted(case)}


def tree_to_json(t) -> dict:
    if isinstance(t, Branch):
        return {"case": _case_json(t.case), "branch": t.var, "nonzero": tree_to_json(t.nonzero),
                "zero": tree_to_json(t.zero)}
    if isinstance(t, Leaf):
        c = t.condition
        return {"case": _case_json(t.case), "leaf": {"reason": t.reason, "poly": c.poly, "x_power": c.x_power,
                                                     "part": c.part, "pi_power": c.pi_power,
                                                     "witness": str(c.value)}}
    return {"case": _case_json(t.case), "unresolved": True}


def tree_from_json(node: dict, symbols) -> object:
    case = dict(node.get("case", {}))
    if "branch" in node:
        return Branch(case, node["branch"], tree_from_json(node["nonzero"], symbols),
                      tree_from_json(node["zero"], symbols))
    if "leaf" in node:
        lf = node["leaf"]
        cond = Condition(int(lf["poly"]), int(lf["x_power"]), lf["part"], lf["pi_power"],
                         parse_coeff(lf["witness"], symbols))
        return Leaf(case, lf["reason"], cond)
    return Unresolved(case)


def _recompute(polys, x, case, c: Condition) -> CoeffFn:
    p = polys[c.poly].subs(_zero_bind(case))
    g = (p.coefficients_in(x) if x else {0: p}).get(c.x_power, CoeffFn())
    re, im = g.real_imag()
    v = re if c.part == "re" else im
    if c.pi_power is not None:
        v = v.pi_split().get(c.pi_power, CoeffFn())
    return v


def verify_tree(tree, polys: list[CoeffFn], x: str | None, variables: list[str], m="symbolic",
                rng: random.Random | None = None, samples: int = 3) -> list[str]:
    """Re-check every node; returns a list of problems (empty means valid and complete)."""
    rng = rng or random.Random(0)
    problems: list[str] = []
    root = {M_SYMBOL: "nonzero"} if m == "symbolic" else {}

    def walk(t, expected: dict):
        if t.case != expected:
            problems.append(f"case {t.case} does not match the path assignment {expected}")
            return
        if isinstance(t, Branch):
            if t.var in expected or t.var not in variables:
                problems.append(f"branch on invalid or already decided variable {t.var!r}")
                return
            walk(t.nonzero, {**expected, t.var: "nonzero"})
            walk(t.zero, {**expected, t.var: "zero"})
            return
        if isinstance(t, Unresolved):
            problems.append(f"case {t.case} is unresolved")
            return
        c = t.condition
        actual = _recompute(polys, x, t.case, c)
        if actual != c.value:
            problems.append(f"witness mismatch in case {t.case}: recorded {c.value}, recomputed {actual}")
            return
        nz = _nonzero_vars(t.case)
        if certainly_nonzero(actual, nz) is None:
            problems.append(f"witness {actual} is not certainly nonzero in case {t.case}")
            return
        # numeric spot check of the full polynomial in x
        zero = _zero_bind(t.case)
        for _ in range(samples):
            vals = {}
            for v in variables + ([M_SYMBOL] if m == "symbolic" else []):
                if v in zero:
                    continue
                if v == M_SYMBOL:
                    vals[v] = rng.randint(1, 40)
                elif v in nz:
                    vals[v] = rng.choice([-1, 1]) * rng.randint(1, 40)
                else:
                    vals[v] = rng.randint(-40, 40)
            p = polys[c.poly].subs({**zero, **vals})
            if not p:
                problems.append(f"polynomial {c.poly} vanishes identically at {vals} in case {t.case}")

    walk(tree, root)
    return problems

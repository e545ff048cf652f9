"""Strict JSON spec files for manifolds, structures, families and samples.

Every value that carries mathematics is a string in the expression grammar
of :mod:`acskod.parsing`.  Parsing collects *all* problems it can find and
raises a single :class:`SpecError` listing them with line and column.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .exterior import Form, ManifoldSpec, d, pullback_coframe
from .parsing import ExprSyntaxError, parse_expr
from .scalars import CoeffFn, RatFn, Scalar

__all__ = [
    "Issue",
    "SpecError",
    "load_json",
    "parse_manifold",
    "parse_acs",
    "parse_gcy",
    "parse_samples",
    "load_manifold",
    "load_acs",
    "load_samples",
    "load_gcy",
    "builtin_names",
    "read_source",
    "manifold_to_dict",
    "acs_to_dict",
    "manifold_from_dict",
    "acs_from_dict",
]


@dataclass(frozen=True)
class Issue:
    path: str
    message: str
    line: int = 0
    column: int = 0

    def __str__(self):
        loc = f"{self.line}:{self.column}: " if self.line else ""
        where = f"{self.path}: " if self.path else ""
        return f"{loc}{where}{self.message}"


class SpecError(ValueError):
    def __init__(self, issues: list[Issue], source: str = "<spec>"):
        self.issues = list(issues)
        self.source = source
        body = "\n".join(f"{source}:{i}" if i.line else f"{source}: {i}" for i in self.issues)
        super().__init__(body or f"{source}: invalid spec")


# --------------------------------------------------------------------------
# JSON with source offsets
# --------------------------------------------------------------------------


class _PStr(str):
    offset = -1


class _PDict(dict):
    offset = -1


class _PList(list):
    offset = -1


def _make_decoder(text: str) -> json.JSONDecoder:
    dec = json.JSONDecoder()
    raw_string = dec.parse_string
    raw_object = dec.parse_object
    raw_array = dec.parse_array

    def parse_string(s, end, strict):
        val, nxt = raw_string(s, end, strict)
        out = _PStr(val)
        out.offset = end - 1
        return out, nxt

    def parse_object(s_and_end, *args, **kw):
        start = s_and_end[1] - 1
        val, nxt = raw_object(s_and_end, *args, **kw)
        out = _PDict(val)
        out.offset = start
        return out, nxt

    def parse_array(s_and_end, scan_once):
        start = s_and_end[1] - 1
        val, nxt = raw_array(s_and_end, scan_once)
        out = _PList(val)
        out.offset = start
        return out, nxt

    dec.parse_string = parse_string
    dec.parse_object = parse_object
    dec.parse_array = parse_array
    dec.scan_once = json.scanner.py_make_scanner(dec)
    return dec


def _line_col(text: str, offset: int) -> tuple[int, int]:
    if offset < 0:
        return 0, 0
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def load_json(text: str, source: str = "<spec>"):
    if not text.strip():
        raise SpecError([Issue("", "empty file", 1, 1)], source)
    try:
        return _make_decoder(text).decode(text)
    except json.JSONDecodeError as exc:
        raise SpecError([Issue("", f"JSON syntax error: {exc.msg}", exc.lineno, exc.colno)], source) from None


class _Ctx:
    """Issue collector that knows the source text for positions."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.issues: list[Issue] = []

    def add(self, path: str, message: str, node=None, extra: int = 0):
        off = getattr(node, "offset", -1)
        line, col = _line_col(self.text, off + extra if off >= 0 else -1)
        self.issues.append(Issue(path, message, line, col))

    def raise_if_any(self):
        if self.issues:
            raise SpecError(self.issues, self.source)

    def expr(self, node, path: str, symbols: Iterable[str] | None) -> RatFn | None:
        if isinstance(node, bool) or not isinstance(node, (str, int)):
            self.add(path, f"expected an expression string, got {type(node).__name__}", node)
            return None
        try:
            return parse_expr(node, symbols)
        except ExprSyntaxError as exc:
            # +1 skips the opening quote
            self.add(path, exc.bare, node, extra=exc.column if isinstance(node, _PStr) else 0)
            return None

    def poly(self, node, path: str, symbols) -> CoeffFn | None:
        v = self.expr(node, path, symbols)
        if v is None:
            return None
        if not v.is_polynomial():
            self.add(path, "expected a polynomial (no division by symbols)", node)
            return None
        return v.num

    def const(self, node, path: str) -> Scalar | None:
        v = self.poly(node, path, ())
        return None if v is None else v.constant_value()

    def keys(self, obj, path: str, required: Iterable[str], optional: Iterable[str]) -> bool:
        if not isinstance(obj, dict):
            self.add(path, f"expected an object, got {type(obj).__name__}", obj)
            return False
        allowed = set(required) | set(optional)
        for k in obj:
            if k not in allowed:
                self.add(_join(path, k), f"unknown key {k!r} (allowed: {', '.join(sorted(allowed))})", obj)
        for k in required:
            if k not in obj:
                self.add(path, f"missing required key {k!r}", obj)
        return True

    def matrix(self, node, path: str, rows: int, cols: int, parse) -> list[list] | None:
        if not isinstance(node, list) or len(node) != rows:
            self.add(path, f"expected a list of {rows} rows", node)
            return None
        out = []
        ok = True
        for i, row in enumerate(node):
            rp = f"{path}[{i}]"
            if not isinstance(row, list) or len(row) != cols:
                self.add(rp, f"expected a row of {cols} entries", row)
                ok = False
                continue
            r = []
            for j, x in enumerate(row):
                v = parse(x, f"{rp}[{j}]")
                ok = ok and v is not None
                r.append(v)
            out.append(r)
        return out if ok else None


def _join(path: str, key) -> str:
    return f"{path}.{key}" if path else str(key)


# --------------------------------------------------------------------------
# manifolds
# --------------------------------------------------------------------------

_MANIFOLD_KEYS = ("name", "description", "dimension", "coordinates", "periodic", "frame_vectors",
                  "coframe", "lattice_shifts", "structure")


def _index_pair(key: str, dim: int) -> tuple[int, ...] | None:
    try:
        parts = tuple(int(p) for p in key.split(","))
    except ValueError:
        return None
    if any(p < 1 or p > dim for p in parts) or len(set(parts)) != len(parts):
        return None
    return tuple(p - 1 for p in parts)


def _parse_form_terms(ctx: _Ctx, node, path: str, basis, symbols) -> Form | None:
    if not isinstance(node, dict):
        ctx.add(path, "expected an object mapping 'i,j,...' to coefficients", node)
        return None
    terms = []
    ok = True
    for key, val in node.items():
        idx = _index_pair(key, basis.size)
        if idx is None:
            ctx.add(_join(path, key), f"bad multi-index {key!r} (1-based, comma separated, distinct, <= {basis.size})",
                    node)
            ok = False
            continue
        v = ctx.poly(val, _join(path, key), symbols)
        if v is None:
            ok = False
            continue
        terms.append((idx, v))
    if not ok:
        return None
    degrees = {len(i) for i, _ in terms}
    if len(degrees) > 1:
        ctx.add(path, "terms of mixed degree", node)
        return None
    out = Form(basis, degrees.pop() if degrees else 0)
    for idx, v in terms:
        out = out + Form.basic(basis, *idx, coef=v)
    return out


def parse_manifold(text: str, source: str = "<manifold>") -> ManifoldSpec:
    data = load_json(text, source)
    ctx = _Ctx(text, source)
    if not isinstance(data, dict):
        ctx.keys(data, "", ("dimension",), _MANIFOLD_KEYS)
        ctx.raise_if_any()
    ctx.keys(data, "", ("dimension",), _MANIFOLD_KEYS)
    if "dimension" not in data:
        ctx.raise_if_any()
    dim = data.get("dimension")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim <= 0 or dim % 2:
        ctx.add("dimension", f"dimension must be a positive even integer, got {dim!r}", data)
        ctx.raise_if_any()
    name = str(data.get("name", source))
    coords = data.get("coordinates")
    has_frame = "frame_vectors" in data or "coframe" in data
    if "structure" in data:
        if has_frame or coords:
            ctx.add("structure", "give either coordinates with frame_vectors/coframe or structure, not both", data)
            ctx.raise_if_any()
        return _structure_manifold(ctx, data, name, dim)
    if not isinstance(coords, list) or not coords:
        ctx.add("coordinates", "expected a non-empty list of coordinate names", data)
        ctx.raise_if_any()
    if len(coords) != dim:
        ctx.add("coordinates", f"expected {dim} coordinates, got {len(coords)}", coords)
    for k, c in enumerate(coords):
        if not isinstance(c, str) or not c.isidentifier() or c in ("i", "pi"):
            ctx.add(f"coordinates[{k}]", f"invalid coordinate name {c!r}", coords)
    if len(set(coords)) != len(coords):
        ctx.add("coordinates", "duplicate coordinate names", coords)
    missing = [key for key in ("frame_vectors", "coframe") if key not in data]
    for key in missing:
        ctx.add("", f"missing required key {key!r}", data)
    if missing or len(coords) != dim or not all(isinstance(c, str) for c in coords):
        ctx.raise_if_any()
    coords = [str(c) for c in coords]

    periodic: dict[str, Fraction] = {}
    per = data.get("periodic", {})
    if ctx.keys(per, "periodic", (), coords):
        for c, v in per.items():
            if c not in coords:
                continue
            s = ctx.const(v, f"periodic.{c}")
            if s is None:
                continue
            if not s.is_rational() or s.as_fraction() <= 0:
                ctx.add(f"periodic.{c}", f"period must be a positive rational, got {s}", v)
                continue
            periodic[c] = s.as_fraction()

    def poly(x, p):
        return ctx.poly(x, p, coords)

    frame = ctx.matrix(data["frame_vectors"], "frame_vectors", dim, dim, poly)
    coframe = ctx.matrix(data["coframe"], "coframe", dim, dim, poly)

    shifts = []
    sh = data.get("lattice_shifts", [])
    if not isinstance(sh, list):
        ctx.add("lattice_shifts", "expected a list of coordinate maps", sh)
    else:
        for k, s in enumerate(sh):
            p = f"lattice_shifts[{k}]"
            if not ctx.keys(s, p, coords, ()):
                continue
            m = {}
            for c in coords:
                if c not in s:
                    continue
                v = poly(s[c], f"{p}.{c}")
                if v is None:
                    continue
                if v.total_degree() > 1:
                    ctx.add(f"{p}.{c}", f"lattice shift components must be affine, got {v}", s[c])
                m[c] = v
            if len(m) == len(coords):
                shifts.append((p, s, m))
    ctx.raise_if_any()

    M = ManifoldSpec(name=name, dimension=dim, coordinates=coords, periodic=periodic, frame_vectors=frame,
                     coframe=coframe, lattice_shifts=[m for _, _, m in shifts])
    for i, j, v in M.duality_defects():
        ctx.add("coframe", f"coframe and frame are not dual: e^{i + 1}(e_{j + 1}) - delta = {v}", data["coframe"])
    ctx.raise_if_any()
    base = [Form.basic(M.real_basis, i) for i in range(dim)]
    for p, node, m in shifts:
        for i, (pb, e) in enumerate(zip(pullback_coframe(M, m), base)):
            if pb != e:
                ctx.add(p, f"shift does not preserve the frame: pullback of e^{i + 1} is {pb}", node)
    ctx.raise_if_any()
    return M


def _structure_manifold(ctx: _Ctx, data, name: str, dim: int) -> ManifoldSpec:
    for key in ("periodic", "lattice_shifts"):
        if data.get(key):
            ctx.add(key, "not allowed for a structure-only manifold", data)
    node = data["structure"]
    if not isinstance(node, list) or len(node) != dim:
        ctx.add("structure", f"expected a list of {dim} objects (de^1 .. de^{dim})", node)
        ctx.raise_if_any()
    M = ManifoldSpec(name=name, dimension=dim)
    forms = []
    for k, entry in enumerate(node):
        f = _parse_form_terms(ctx, entry, f"structure[{k}]", M.real_basis, ())
        if f is not None and f and f.degree != 2:
            ctx.add(f"structure[{k}]", "structure equations must be 2-forms", entry)
            f = None
        forms.append(f if f is not None else Form(M.real_basis, 2))
    ctx.raise_if_any()
    M.structure = forms
    for k in range(dim):
        dd = d(forms[k])
        if dd:
            ctx.add(f"structure[{k}]", f"d(de^{k + 1}) = {dd} != 0 (Jacobi identity fails)", node[k])
    ctx.raise_if_any()
    return M


# --------------------------------------------------------------------------
# almost complex structures, gcy input, samples
# --------------------------------------------------------------------------


def parse_acs(text: str, manifold: ManifoldSpec, source: str = "<acs>"):
    from .acs import AcsError, AlmostComplexStructure

    data = load_json(text, source)
    ctx = _Ctx(text, source)
    if not ctx.keys(data, "", ("J",), ("description", "name")):
        ctx.raise_if_any()
    dim = manifold.dimension
    syms = manifold.coordinates
    J = ctx.matrix(data["J"], "J", dim, dim, lambda x, p: ctx.expr(x, p, syms))
    if J is None:
        ctx.raise_if_any()
    J = [[v.num if v.is_polynomial() else v for v in row] for row in J]
    try:
        acs = AlmostComplexStructure(manifold, J, name=str(data.get("name", source)))
    except AcsError as exc:
        node = data["J"]
        if exc.entry is not None:
            i, j = exc.entry
            node = data["J"][i][j]
            ctx.add(f"J[{i}][{j}]", str(exc), node)
        else:
            ctx.add("J", str(exc), node)
    ctx.raise_if_any()
    return acs


def parse_gcy(text: str, acs, source: str = "<gcy>"):
    from .acs import GcyInput

    data = load_json(text, source)
    ctx = _Ctx(text, source)
    if not ctx.keys(data, "", ("sigma", "epsilon"), ("description",)):
        ctx.raise_if_any()
    M = acs.manifold
    sigma = _parse_form_terms(ctx, data["sigma"], "sigma", M.real_basis, M.coordinates)
    eps_node = data["epsilon"]
    eps = None
    if ctx.keys(eps_node, "epsilon", ("basis", "terms"), ()):
        kind = eps_node.get("basis")
        if kind not in ("real", "complex"):
            ctx.add("epsilon.basis", f"basis must be 'real' or 'complex', got {kind!r}", eps_node)
        elif "terms" in eps_node:
            basis = M.real_basis if kind == "real" else acs.basis
            eps = _parse_form_terms(ctx, eps_node["terms"], "epsilon.terms", basis, M.coordinates)
    ctx.raise_if_any()
    if sigma.degree != 2 and sigma:
        ctx.add("sigma", "sigma must be a 2-form", data["sigma"])
    if eps.degree != acs.n and eps:
        ctx.add("epsilon", f"epsilon must be an {acs.n}-form", eps_node)
    ctx.raise_if_any()
    return GcyInput(sigma, eps)


def parse_samples(text: str, source: str = "<samples>") -> list[Scalar]:
    data = load_json(text, source)
    ctx = _Ctx(text, source)
    if not ctx.keys(data, "", ("samples",), ("description",)):
        ctx.raise_if_any()
    node = data["samples"]
    out = []
    if not isinstance(node, list) or not node:
        ctx.add("samples", "expected a non-empty list of expressions", node)
    else:
        for k, s in enumerate(node):
            v = ctx.const(s, f"samples[{k}]")
            if v is not None and not v.is_real():
                ctx.add(f"samples[{k}]", f"samples must be real, got {v}", s)
            out.append(v)
    ctx.raise_if_any()
    return out


# --------------------------------------------------------------------------
# built-ins and file lookup
# --------------------------------------------------------------------------


_KINDS = {"manifolds": "", "acs": "acs", "families": "families", "samples": "samples", "gcy": "gcy"}


def _data_dir():
    return resources.files("acskod") / "data"


def builtin_names(kind: str = "manifolds") -> list[str]:
    sub = _KINDS[kind]
    root = _data_dir() / sub if sub else _data_dir()
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_source(ref: str, kind: str = "manifolds") -> tuple[str, str]:
    """Return (text, label) for a built-in name or a file path."""
    sub = _KINDS[kind]
    if ref in builtin_names(kind):
        root = _data_dir() / sub if sub else _data_dir()
        return (root / f"{ref}.json").read_text(encoding="utf-8"), f"builtin:{ref}"
    p = Path(ref)
    if not p.exists():
        what = {"manifolds": "manifold", "acs": "structure", "families": "family", "samples": "sample set",
                "gcy": "gcy data"}[kind]
        raise SpecError([Issue("", f"no such file or built-in {what}: {ref!r}"
                               f" (built-ins: {', '.join(builtin_names(kind))})")], ref)
    return p.read_text(encoding="utf-8"), str(p)


_DEFAULT_ACS = {"nilmanifold_N": "nilmanifold_N", "torus4": "standard4", "nakamura": "standard6"}


def load_manifold(ref: str) -> ManifoldSpec:
    text, label = read_source(ref, "manifolds")
    return parse_manifold(text, label)


def load_acs(ref: str, manifold: ManifoldSpec):
    """Load a structure; ``builtin`` picks the default structure of a built-in manifold."""
    if ref == "builtin":
        name = _DEFAULT_ACS.get(manifold.name)
        if name is None:
            raise SpecError([Issue("", f"manifold {manifold.name!r} has no built-in structure; "
                                       "use a family (--family/--t) or a J file")], ref)
        ref = name
    elif ref == "standard":
        ref = f"standard{manifold.dimension}"
    text, label = read_source(ref, "acs")
    return parse_acs(text, manifold, label)


def load_gcy(ref: str, acs):
    text, label = read_source(ref, "gcy")
    return parse_gcy(text, acs, label)


def load_samples(ref: str) -> list[Scalar]:
    text, label = read_source(ref, "samples")
    return parse_samples(text, label)


# --------------------------------------------------------------------------
# writing specs back out (used to embed inputs in certificates)
# --------------------------------------------------------------------------


def _form_json(f: Form) -> dict:
    return {",".join(str(i + 1) for i in idx): str(c) for idx, c in sorted(f.terms.items())}


def manifold_to_dict(M: ManifoldSpec) -> dict:
    out: dict[str, Any] = {"name": M.name, "dimension": M.dimension}
    if M.has_coordinates:
        out["coordinates"] = list(M.coordinates)
        out["periodic"] = {c: str(q) for c, q in M.periodic.items()}
        out["frame_vectors"] = [[str(v) for v in row] for row in M.frame_vectors]
        out["coframe"] = [[str(v) for v in row] for row in M.coframe]
        out["lattice_shifts"] = [{c: str(s[c]) for c in M.coordinates} for s in M.lattice_shifts]
    else:
        out["structure"] = [_form_json(f) for f in M.de()]
    return out


def acs_to_dict(acs) -> dict:
    return {"name": acs.name, "J": [[str(v) for v in row] for row in acs.J]}


def manifold_from_dict(d: dict) -> ManifoldSpec:
    return parse_manifold(json.dumps(d), f"embedded:{d.get('name', '?')}")


def acs_from_dict(d: dict, M: ManifoldSpec):
    return parse_acs(json.dumps(d), M, f"embedded:{d.get('name', '?')}")

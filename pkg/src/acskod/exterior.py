"""Differential forms on parallelizable manifolds given by a global frame.

A :class:`ManifoldSpec` carries a coordinate description of an invariant
frame ``e_1..e_2n`` and its dual coframe ``e^1..e^2n``.  Forms are stored as
maps from strictly increasing multi-indices to coefficients on one of three
bases:

* ``real``    -- the coframe ``e^i``;
* ``coord``   -- the coordinate differentials ``dx_j``;
* ``complex`` -- ``phi^1..phi^n, conj(phi)^1..conj(phi)^n`` of an almost
  complex structure (built in :mod:`acskod.acs`).

The exterior derivative is computed in coordinates and pulled back to the
frame.  Manifolds given only by constant structure equations (no
coordinates) support ``d`` on constant-coefficient forms via Leibniz.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .linalg import inverse
from .scalars import ONE, ZERO, CoeffFn, Scalar, as_coeff

__all__ = [
    "ManifoldSpec",
    "Basis",
    "Form",
    "FormError",
    "wedge",
    "d",
    "change_basis",
    "coframe_forms",
    "structure_equations",
    "bracket_constants",
    "pullback_coframe",
]


class FormError(ValueError):
    pass


@dataclass(eq=False)
class ManifoldSpec:
    """Parallelizable 2n-manifold described by a global frame.

    ``frame_vectors[i][j]`` is ``e_i`` applied to coordinate ``j``;
    ``coframe[i][j]`` is the ``dx_j`` coefficient of ``e^i``.
    """

    name: str
    dimension: int
    coordinates: list[str] = field(default_factory=list)
    periodic: dict[str, Fraction] = field(default_factory=dict)
    frame_vectors: list[list[CoeffFn]] | None = None
    coframe: list[list[CoeffFn]] | None = None
    lattice_shifts: list[dict[str, CoeffFn]] = field(default_factory=list)
    structure: list["Form"] | None = None  # de^k, for coordinate-free manifolds
    extra_symbols: tuple[str, ...] = ()

    def __post_init__(self):
        self.real_basis = Basis("real", self.dimension, tuple(f"e{i + 1}" for i in range(self.dimension)), self)
        if self.coordinates:
            self.coord_basis = Basis("coord", len(self.coordinates), tuple(f"d{c}" for c in self.coordinates), self)
        else:
            self.coord_basis = None
        self._de_cache: list[Form] | None = None

    @property
    def n(self) -> int:
        return self.dimension // 2

    @property
    def has_coordinates(self) -> bool:
        return self.frame_vectors is not None

    @property
    def nonperiodic(self) -> list[str]:
        return [c for c in self.coordinates if c not in self.periodic]

    def symbols(self) -> tuple[str, ...]:
        return tuple(self.coordinates) + tuple(self.extra_symbols)

    def frame_derivation(self, i: int) -> Callable[[CoeffFn], CoeffFn]:
        row = self.frame_vectors[i]

        def apply(f: CoeffFn) -> CoeffFn:
            out = CoeffFn()
            for coef, c in zip(row, self.coordinates):
                if coef:
                    out = out + coef * f.diff(c)
            return out

        return apply

    def duality_defects(self) -> list[tuple[int, int, CoeffFn]]:
        """Entries (i, j, e^i(e_j) - delta_ij) that fail to vanish."""
        out = []
        dim = self.dimension
        for i in range(dim):
            for j in range(dim):
                acc = CoeffFn()
                for c in range(len(self.coordinates)):
                    acc = acc + self.coframe[i][c] * self.frame_vectors[j][c]
                if i == j:
                    acc = acc - 1
                if acc:
                    out.append((i, j, acc))
        return out

    def de(self) -> list["Form"]:
        """Exterior derivatives of the coframe elements, in the real frame."""
        if self._de_cache is None:
            if self.structure is not None:
                self._de_cache = list(self.structure)
            else:
                self._de_cache = [d(e) for e in coframe_forms(self)]
        return self._de_cache

    def __repr__(self):
        return f"ManifoldSpec({self.name!r}, dim={self.dimension})"


@dataclass(frozen=True, eq=False)
class Basis:
    kind: str
    size: int
    labels: tuple[str, ...]
    owner: object = field(repr=False)

    @property
    def manifold(self) -> ManifoldSpec:
        o = self.owner
        return o if isinstance(o, ManifoldSpec) else o.manifold


def _merge_sign(a: tuple, b: tuple) -> tuple[int, tuple]:
    """Sign and sorted concatenation of two increasing index tuples (0 if overlap)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sb = set(b)
    if any(x in sb for x in a):
        return 0, ()
    inv = 0
    j = 0
    # count pairs (x in a, y in b) with x > y
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inv += j
    return (-1 if inv % 2 else 1), tuple(sorted(a + b))


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple]:
    if len(set(idx)) != len(idx):
        return 0, ()
    inv = 0
    for p in range(len(idx)):
        for q in range(p + 1, len(idx)):
            if idx[p] > idx[q]:
                inv += 1
    return (-1 if inv % 2 else 1), tuple(sorted(idx))


class Form:
    """Homogeneous-degree exterior form on a fixed basis."""

    __slots__ = ("basis", "degree", "terms")

    def __init__(self, basis: Basis, degree: int, terms: Mapping[tuple, object] | None = None):
        self.basis = basis
        self.degree = degree
        clean = {}
        for k, v in (terms or {}).items():
            if len(k) != degree:
                raise FormError(f"multi-index {k} does not have degree {degree}")
            v = as_coeff(v) if not isinstance(v, CoeffFn) else v
            if v:
                clean[k] = v
        self.terms = clean

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, basis: Basis, degree: int) -> "Form":
        return cls(basis, degree)

    @classmethod
    def scalar(cls, basis: Basis, value) -> "Form":
        return cls(basis, 0, {(): value})

    @classmethod
    def basic(cls, basis: Basis, *indices: int, coef=ONE) -> "Form":
        """coef * b_{i1} ^ b_{i2} ^ ... with 0-based indices in any order."""
        sign, idx = _sort_sign(indices)
        if not sign:
            return cls(basis, len(indices))
        c = as_coeff(coef)
        return cls(basis, len(indices), {idx: c if sign > 0 else -c})

    @classmethod
    def from_vector(cls, basis: Basis, coeffs: Sequence) -> "Form":
        return cls(basis, 1, {(k,): c for k, c in enumerate(coeffs)})

    # predicates -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, o: "Form"):
        if not isinstance(o, Form):
            raise TypeError(f"expected Form, got {type(o).__name__}")
        if o.basis is not self.basis:
            if o.basis.manifold is not self.basis.manifold:
                raise FormError("forms live on different manifolds")
            raise FormError(f"basis mismatch: {self.basis.kind} vs {o.basis.kind}; convert first")

    # arithmetic -----------------------------------------------------------
    def __add__(self, o: "Form") -> "Form":
        self._check(o)
        if o.degree != self.degree:
            if not o.terms:
                return self
            if not self.terms:
                return o
            raise FormError(f"cannot add forms of degree {self.degree} and {o.degree}")
        out = dict(self.terms)
        for k, v in o.terms.items():
            w = out.get(k)
            out[k] = v if w is None else w + v
        return Form(self.basis, self.degree, out)

    def __neg__(self) -> "Form":
        return Form(self.basis, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, o: "Form") -> "Form":
        return self + (-o)

    def scale(self, c) -> "Form":
        c = as_coeff(c)
        if not c:
            return Form(self.basis, self.degree)
        return Form(self.basis, self.degree, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, c):
        if isinstance(c, Form):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __xor__(self, o: "Form") -> "Form":
        return wedge(self, o)

    def map_coefficients(self, f: Callable) -> "Form":
        return Form(self.basis, self.degree, {k: f(v) for k, v in self.terms.items()})

    def conjugate_coefficients(self) -> "Form":
        return self.map_coefficients(lambda v: v.conjugate())

    def coefficient(self, *indices: int):
        sign, idx = _sort_sign(indices)
        v = self.terms.get(idx, CoeffFn())
        return v if sign >= 0 else -v

    def __eq__(self, o):
        if not isinstance(o, Form):
            return NotImplemented
        if o.basis is not self.basis:
            return False
        if not self.terms and not o.terms:
            return True
        return self.degree == o.degree and self.terms == o.terms

    def __hash__(self):  # pragma: no cover - forms are not used as keys
        return hash((id(self.basis), self.degree, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Form({self})"

    def __str__(self):
        return format_form(self)


def format_form(f: Form) -> str:
    if not f.terms:
        return "0"
    labels = f.basis.labels
    parts = []
    for idx in sorted(f.terms):
        c = f.terms[idx]
        wedge_s = "^".join(labels[k] for k in idx)
        cs = str(c)
        if not idx:
            parts.append(cs)
            continue
        if cs == "1":
            parts.append(wedge_s)
        elif cs == "-1":
            parts.append(f"-{wedge_s}")
        elif len(c.terms) == 1 and " " not in cs:
            parts.append(f"{cs}*{wedge_s}")
        else:
            parts.append(f"({cs})*{wedge_s}")
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def wedge(a: Form, b: Form) -> Form:
    a._check(b)
    out: dict = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            sign, idx = _merge_sign(ia, ib)
            if not sign:
                continue
            v = ca * cb
            if sign < 0:
                v = -v
            w = out.get(idx)
            out[idx] = v if w is None else w + v
    return Form(a.basis, a.degree + b.degree, out)


def wedge_all(forms: Sequence[Form], basis: Basis | None = None) -> Form:
    if not forms:
        return Form.scalar(basis, ONE)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def change_basis(f: Form, images: Sequence[Form], target: Basis) -> Form:
    """Rewrite ``f`` by substituting each source basis 1-form with ``images[k]``."""
    out = Form(target, f.degree)
    cache: dict = {}
    for idx, c in f.terms.items():
        if idx not in cache:
            w = Form.scalar(target, ONE)
            for k in idx:
                w = wedge(w, images[k])
            cache[idx] = w
        out = out + cache[idx].scale(c)
    return out


def coframe_forms(M: ManifoldSpec) -> list[Form]:
    return [Form.basic(M.real_basis, i) for i in range(M.dimension)]


def _to_coord(f: Form) -> Form:
    M = f.basis.manifold
    images = [Form.from_vector(M.coord_basis, M.coframe[i]) for i in range(M.dimension)]
    return change_basis(f, images, M.coord_basis)


def _from_coord(f: Form) -> Form:
    M = f.basis.manifold
    dim = M.dimension
    images = [Form.from_vector(M.real_basis, [M.frame_vectors[i][j] for i in range(dim)])
              for j in range(len(M.coordinates))]
    return change_basis(f, images, M.real_basis)


def _d_coord(f: Form) -> Form:
    M = f.basis.manifold
    out = Form(f.basis, f.degree + 1)
    for idx, c in f.terms.items():
        for j, name in enumerate(M.coordinates):
            dc = c.diff(name)
            if dc:
                out = out + Form.basic(f.basis, j, *idx, coef=dc)
    return out


def _d_structure(f: Form) -> Form:
    M = f.basis.manifold
    de = M.de()
    out = Form(f.basis, f.degree + 1)
    for idx, c in f.terms.items():
        if not c.is_constant():
            raise FormError("manifold has no coordinates: only constant-coefficient forms can be differentiated")
        for pos, k in enumerate(idx):
            left = Form.basic(f.basis, *idx[:pos])
            right = Form.basic(f.basis, *idx[pos + 1:])
            term = wedge(wedge(left, de[k]), right)
            if pos % 2:
                term = -term
            out = out + term.scale(c)
    return out


def d(f: Form) -> Form:
    """Exterior derivative; the result is on the same basis as the input."""
    kind = f.basis.kind
    if kind == "coord":
        return _d_coord(f)
    if kind == "real":
        M = f.basis.manifold
        if M.has_coordinates:
            return _from_coord(_d_coord(_to_coord(f)))
        return _d_structure(f)
    if kind == "complex":
        owner = f.basis.owner
        return owner.to_complex(d(owner.to_real(f)))
    raise FormError(f"unknown basis kind {kind!r}")


def structure_equations(M: ManifoldSpec) -> list[Form]:
    return M.de()


def bracket_constants(M: ManifoldSpec) -> list[list[list[CoeffFn]]]:
    """c[i][j][k] with [e_i, e_j] = sum_k c[i][j][k] e_k, read off from de^k."""
    dim = M.dimension
    de = M.de()
    c = [[[CoeffFn() for _ in range(dim)] for _ in range(dim)] for _ in range(dim)]
    for k in range(dim):
        for (i, j), v in de[k].terms.items():
            # de^k(e_i, e_j) = -e^k([e_i, e_j])
            c[i][j][k] = -v
            c[j][i][k] = v
    return c


def pullback_coframe(M: ManifoldSpec, shift: Mapping[str, CoeffFn]) -> list[Form]:
    """Pull back every coframe element along a coordinate self-map."""
    coords = M.coordinates
    dphi = [Form.from_vector(M.coord_basis, [shift[c].diff(v) for v in coords]) for c in coords]
    out = []
    for i in range(M.dimension):
        acc = Form(M.coord_basis, 1)
        for j, c in enumerate(coords):
            coef = M.coframe[i][j].subs({v: shift[v] for v in coords})
            if coef:
                acc = acc + dphi[j].scale(coef)
        out.append(_from_coord(acc))
    return out


def constant_form(basis: Basis, terms: Mapping[tuple, Scalar]) -> Form:
    return Form(basis, len(next(iter(terms))) if terms else 0, terms)

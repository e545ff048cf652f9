"""Almost complex structures on a :class:`~acskod.exterior.ManifoldSpec`.

Matrix convention: column ``j`` of ``J`` holds the frame components of
``J e_j``.  A covector ``phi`` (row vector on the coframe) is of type (1,0)
when ``phi J = i phi``, so the (1,0)-coframe is read off from the columns of
the projector ``(I - i J^T)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Sequence

from .exterior import Basis, Form, FormError, ManifoldSpec, bracket_constants, change_basis, d, wedge
from .linalg import det, identity, independent_columns, inverse, matmul, rank, transpose
from .scalars import I, ONE, ZERO, CoeffFn, RatFn, Scalar, as_coeff

__all__ = [
    "AcsError",
    "AlmostComplexStructure",
    "ComplexFrame",
    "validate",
    "coframe10",
    "alpha_of",
    "is_integrable",
    "pseudoholomorphic_check",
    "bidegree_split",
    "conjugate",
    "mu",
    "delbar",
    "del_",
    "mubar",
    "GcyInput",
    "GcyReport",
    "gcy_check",
]


class AcsError(ValueError):
    """Invalid almost complex structure or unsupported input."""

    def __init__(self, message: str, entry: tuple[int, int] | None = None, value=None):
        self.entry = entry
        self.value = value
        super().__init__(message)


def _entry(x):
    if isinstance(x, (CoeffFn, RatFn)):
        return x
    return as_coeff(x)


def _is_zero(x) -> bool:
    return not x


def validate(J: Sequence[Sequence]) -> list[list]:
    """Check that ``J`` is square of even size, real, and squares to -I.

    Returns the matrix with entries coerced to CoeffFn (or RatFn).
    """
    rows = [[_entry(x) for x in row] for row in J]
    n = len(rows)
    if n == 0 or n % 2 or any(len(r) != n for r in rows):
        raise AcsError(f"J must be a square matrix of even size, got {n}x{len(rows[0]) if rows else 0}")
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if x.conjugate() != x:
                raise AcsError(f"J[{i + 1},{j + 1}] = {x} is not real", (i, j), x)
    sq = matmul(rows, rows)
    for i in range(n):
        for j in range(n):
            v = sq[i][j] + (1 if i == j else 0)
            if not _is_zero(v):
                raise AcsError(f"J^2 != -I: entry ({i + 1},{j + 1}) of J^2 + I is {v}", (i, j), v)
    return rows


def _constant_matrix(J) -> list[list[Scalar]] | None:
    out = []
    for row in J:
        r = []
        for x in row:
            if isinstance(x, RatFn):
                if not x.is_polynomial():
                    return None
                x = x.num
            if not x.is_constant():
                return None
            r.append(x.constant_value())
        out.append(r)
    return out


class ComplexFrame:
    """The basis phi^1..phi^n, conj(phi)^1..conj(phi)^n with exact change of basis."""

    def __init__(self, manifold: ManifoldSpec, phi_rows: list[list[Scalar]]):
        self.manifold = manifold
        n = len(phi_rows)
        self.n = n
        self.B = [list(r) for r in phi_rows] + [[x.conjugate() for x in r] for r in phi_rows]
        self.Binv = inverse(self.B)
        labels = tuple(f"phi{k + 1}" for k in range(n)) + tuple(f"phib{k + 1}" for k in range(n))
        self.basis = Basis("complex", 2 * n, labels, self)

    def to_real(self, f: Form) -> Form:
        if f.basis is not self.basis:
            raise FormError("form is not on this complex frame")
        M = self.manifold
        images = [Form.from_vector(M.real_basis, row) for row in self.B]
        return change_basis(f, images, M.real_basis)

    def to_complex(self, f: Form) -> Form:
        if f.basis is self.basis:
            return f
        if f.basis is not self.manifold.real_basis:
            raise FormError("expected a real-frame form")
        images = [Form.from_vector(self.basis, row) for row in self.Binv]
        return change_basis(f, images, self.basis)

    def bidegree(self, idx: tuple) -> tuple[int, int]:
        p = sum(1 for k in idx if k < self.n)
        return p, len(idx) - p

    def phi(self, k: int) -> Form:
        return Form.basic(self.basis, k)

    def phibar(self, k: int) -> Form:
        return Form.basic(self.basis, self.n + k)


class AlmostComplexStructure:
    """A validated J on a manifold with lazily derived complex data."""

    def __init__(self, manifold: ManifoldSpec, J: Sequence[Sequence], name: str = "J"):
        if len(J) != manifold.dimension:
            raise AcsError(f"J is {len(J)}x{len(J)} but the manifold has dimension {manifold.dimension}")
        self.manifold = manifold
        self.name = name
        self.J = validate(J)
        self.Jc = _constant_matrix(self.J)

    @property
    def n(self) -> int:
        return self.manifold.n

    @property
    def is_constant(self) -> bool:
        return self.Jc is not None

    def require_constant(self, what: str) -> list[list[Scalar]]:
        if self.Jc is None:
            for i, row in enumerate(self.J):
                for j, x in enumerate(row):
                    if isinstance(x, RatFn) or not x.is_constant():
                        raise AcsError(
                            f"{what} needs J with constant coefficients in the frame; J[{i + 1},{j + 1}] = {x}",
                            (i, j), x)
        return self.Jc

    @cached_property
    def coframe10(self) -> list[list[Scalar]]:
        """Rows of phi^1..phi^n on the real coframe (pivot-normalised)."""
        Jc = self.require_constant("the (1,0)-coframe")
        dim = self.manifold.dimension
        JT = transpose(Jc)
        cols = []
        for j in range(dim):
            cols.append([(ONE if k == j else ZERO) * Fraction(1, 2) - I * JT[k][j] * Fraction(1, 2) for k in range(dim)])
        chosen = independent_columns(cols, limit=self.n)
        rows = []
        for j in chosen:
            v = cols[j]
            piv = v[j]
            rows.append([x / piv for x in v])
        return rows

    @cached_property
    def frame(self) -> ComplexFrame:
        return ComplexFrame(self.manifold, self.coframe10)

    @property
    def basis(self) -> Basis:
        return self.frame.basis

    def phi_forms(self) -> list[Form]:
        return [self.frame.phi(k) for k in range(self.n)]

    @cached_property
    def psi(self) -> Form:
        out = Form.scalar(self.basis, ONE)
        for k in range(self.n):
            out = wedge(out, self.frame.phi(k))
        return out

    @cached_property
    def alpha(self) -> Form:
        return alpha_of(self)

    def vector_fields(self) -> tuple[list[list[Scalar]], list[list[Scalar]]]:
        """Frame components of X_k (dual to phi^k) and of their conjugates."""
        Binv = self.frame.Binv
        n = self.n
        dim = 2 * n
        X = [[Binv[i][k] for i in range(dim)] for k in range(n)]
        Xb = [[Binv[i][n + k] for i in range(dim)] for k in range(n)]
        return X, Xb


def coframe10(acs: AlmostComplexStructure) -> list[Form]:
    """The (1,0)-coframe as real-frame forms."""
    M = acs.manifold
    return [Form.from_vector(M.real_basis, row) for row in acs.coframe10]


def bidegree_split(f: Form, acs: AlmostComplexStructure) -> dict[tuple[int, int], Form]:
    g = acs.frame.to_complex(f)
    parts: dict[tuple[int, int], dict] = {}
    for idx, c in g.terms.items():
        parts.setdefault(acs.frame.bidegree(idx), {})[idx] = c
    return {pq: Form(acs.basis, g.degree, t) for pq, t in sorted(parts.items())}


_SHIFTS = {"mu": (2, -1), "del": (1, 0), "delbar": (0, 1), "mubar": (-1, 2)}


def _component(f: Form, acs: AlmostComplexStructure, which: str) -> Form:
    g = acs.frame.to_complex(f)
    types = set(bidegree_split(g, acs))
    if len(types) > 1:
        raise FormError(f"form is not homogeneous (types {sorted(types)}); split it with bidegree_split first")
    if types:
        p, q = types.pop()
    else:
        p, q = 0, g.degree
    dp, dq = _SHIFTS[which]
    target = (p + dp, q + dq)
    return bidegree_split(d(g), acs).get(target, Form(acs.basis, g.degree + 1))


def conjugate(f: Form, acs: AlmostComplexStructure) -> Form:
    """Complex conjugate of a form on the real or the complex frame (same frame out)."""
    if f.basis is acs.basis:
        return acs.frame.to_complex(acs.frame.to_real(f).conjugate_coefficients())
    return f.conjugate_coefficients()


def mu(f: Form, acs: AlmostComplexStructure) -> Form:
    return _component(f, acs, "mu")


def del_(f: Form, acs: AlmostComplexStructure) -> Form:
    return _component(f, acs, "del")


def delbar(f: Form, acs: AlmostComplexStructure) -> Form:
    return _component(f, acs, "delbar")


def mubar(f: Form, acs: AlmostComplexStructure) -> Form:
    return _component(f, acs, "mubar")


def alpha_of(acs: AlmostComplexStructure) -> Form:
    """The (0,1)-form alpha with delbar(psi) = alpha ^ psi."""
    n = acs.n
    psi = acs.psi
    dpsi = delbar(psi, acs)
    base = tuple(range(n))
    coeffs = {}
    sign = -1 if n % 2 else 1  # phib^j ^ psi = (-1)^n psi ^ phib^j
    for j in range(n):
        c = dpsi.terms.get(base + (n + j,))
        if c:
            coeffs[(n + j,)] = c if sign > 0 else -c
    alpha = Form(acs.basis, 1, coeffs)
    if wedge(alpha, psi) != dpsi:  # pragma: no cover - the (n,1) space is spanned by phib^j ^ psi
        raise AssertionError("delbar(psi) is not of the form alpha ^ psi")
    return alpha


@dataclass
class IntegrabilityResult:
    integrable: bool
    witness_index: int | None = None
    witness: Form | None = None

    def __bool__(self):
        return self.integrable


def is_integrable(acs: AlmostComplexStructure) -> IntegrabilityResult:
    for k, phi in enumerate(acs.phi_forms()):
        w = mubar(phi, acs)
        if w:
            return IntegrabilityResult(False, k, w)
    return IntegrabilityResult(True)


def pseudoholomorphic_check(dmap, J_src, J_tgt) -> bool:
    """True iff dmap J_src == J_tgt dmap as an exact matrix identity."""
    r = len(dmap)
    c = len(dmap[0]) if r else 0
    if len(J_src) != c or any(len(row) != c for row in J_src):
        raise AcsError(f"source J must be {c}x{c}")
    if len(J_tgt) != r or any(len(row) != r for row in J_tgt):
        raise AcsError(f"target J must be {r}x{r}")
    conv = lambda m: [[_entry(x) for x in row] for row in m]
    A = conv(dmap)
    left = matmul(A, conv(J_src))
    right = matmul(conv(J_tgt), A)
    return all(not (x - y) for lr, rr in zip(left, right) for x, y in zip(lr, rr))


# --------------------------------------------------------------------------
# generalized Calabi-Yau conditions
# --------------------------------------------------------------------------


@dataclass
class GcyInput:
    sigma: Form  # real-frame 2-form
    epsilon: Form  # (n,0)-form, real or complex frame


@dataclass
class GcyReport:
    metric: str
    metric_reason: str
    volume: str
    volume_reason: str
    parallel: str
    parallel_reason: str

    def as_dict(self) -> dict:
        return {
            "condition_1_metric": {"verdict": self.metric, "reason": self.metric_reason},
            "condition_2_volume": {"verdict": self.volume, "reason": self.volume_reason},
            "condition_3_parallel": {"verdict": self.parallel, "reason": self.parallel_reason},
        }

    def verdicts(self) -> tuple[str, str, str]:
        return self.metric, self.volume, self.parallel


def _form_is_constant(f: Form) -> bool:
    return all(c.is_constant() for c in f.terms.values())


def _pair2(f: Form, X: Sequence[Scalar], Y: Sequence[Scalar]) -> Scalar:
    """Evaluate a real-frame 2-form with constant coefficients on two frame vectors."""
    acc = ZERO
    for (a, b), c in f.terms.items():
        acc = acc + c.constant_value() * (X[a] * Y[b] - X[b] * Y[a])
    return acc


def _unknown(reason: str) -> GcyReport:
    return GcyReport("Unknown", reason, "Unknown", reason, "Unknown", reason)


def gcy_check(acs: AlmostComplexStructure, data: GcyInput) -> GcyReport:
    """Check the three generalized Calabi-Yau conditions in the invariant setting.

    The metric is ``g(X, Y) = sigma(X, J Y)``.
    """
    M = acs.manifold
    if not acs.is_constant:
        return _unknown("J has non-constant coefficients in the frame")
    sigma = data.sigma
    eps = data.epsilon
    if sigma.basis is not M.real_basis:
        return _unknown("sigma must be given on the real coframe")
    eps_real = acs.frame.to_real(eps) if eps.basis is acs.basis else eps
    if not (_form_is_constant(sigma) and _form_is_constant(eps_real)):
        return _unknown("sigma or epsilon has non-constant coefficients in the frame")
    consts = bracket_constants(M)
    if any(not c.is_constant() for a in consts for b in a for c in b):
        return _unknown("frame brackets are not constant")
    if d(sigma):
        return _unknown("sigma is not closed")
    n = acs.n
    dim = 2 * n
    sig_n = Form.scalar(M.real_basis, ONE)
    for _ in range(n):
        sig_n = wedge(sig_n, sigma)
    if not sig_n:
        return _unknown("sigma is degenerate")
    J = acs.Jc
    cols = [[J[r][c] for r in range(dim)] for c in range(dim)]  # J e_c
    unit = [[ONE if r == c else ZERO for r in range(dim)] for c in range(dim)]
    G = [[_pair2(sigma, unit[i], cols[j]) for j in range(dim)] for i in range(dim)]

    # (1) symmetric, J-invariant, positive definite
    reason = "positive definite J-Hermitian metric (all leading principal minors > 0)"
    metric = "Pass"
    asym = [(i, j) for i in range(dim) for j in range(dim) if G[i][j] != G[j][i]]
    if asym:
        metric, reason = "Fail", f"g is not symmetric at {asym[0]}"
    else:
        jinv = [(i, j) for i in range(dim) for j in range(dim)
                if _pair2(sigma, cols[i], [sum((cols[j][k] * J[r][k] for k in range(dim)), ZERO) for r in range(dim)]) != G[i][j]]
        if jinv:
            metric, reason = "Fail", f"g is not J-invariant at {jinv[0]}"
        else:
            for k in range(1, dim + 1):
                minor = det([row[:k] for row in G[:k]])
                s = minor.sign()
                if s <= 0:
                    metric = "Fail"
                    reason = f"leading principal minor {k} is {minor} (not positive)"
                    break

    # (2) eps ^ conj(eps) = (-1)^{n(n+1)/2} i^n sigma^n / n!
    lhs = wedge(eps_real, eps_real.conjugate_coefficients())
    sign = -1 if (n * (n + 1) // 2) % 2 else 1
    factor = (I ** n) * Fraction(sign, factorial(n))
    rhs = sig_n.scale(factor)
    if lhs == rhs:
        volume, vreason = "Pass", "eps ^ conj(eps) matches the normalised volume form"
    else:
        volume, vreason = "Fail", f"eps ^ conj(eps) = {lhs} but expected {rhs}"

    # (3) nabla^J eps = 0 with Levi-Civita from the Koszul formula on frame fields
    # the Koszul formula only needs g symmetric and nondegenerate
    if asym or not det(G):
        parallel, preason = "Unknown", "Levi-Civita connection needs a symmetric nondegenerate g"
    else:
        parallel, preason = _parallel_check(M, J, G, consts, eps_real)
    return GcyReport(metric, reason, volume, vreason, parallel, preason)


def _parallel_check(M, J, G, consts, eps: Form) -> tuple[str, str]:
    dim = M.dimension
    c = [[[consts[i][j][k].constant_value() for k in range(dim)] for j in range(dim)] for i in range(dim)]
    Ginv = inverse(G)

    def bracket_g(i, j, k):  # <[e_i, e_j], e_k>
        return sum((c[i][j][l] * G[l][k] for l in range(dim)), ZERO)

    # Gamma[i][j][k]: nabla_{e_i} e_j = sum_k Gamma[i][j][k] e_k
    gamma = [[[ZERO] * dim for _ in range(dim)] for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            low = [(bracket_g(i, j, k) - bracket_g(j, k, i) + bracket_g(k, i, j)) * Fraction(1, 2)
                   for k in range(dim)]
            for k in range(dim):
                gamma[i][j][k] = sum((low[l] * Ginv[l][k] for l in range(dim)), ZERO)
    # nabla^J_X Y = nabla_X Y - 1/2 J nabla_X (J Y); J constant in the frame
    gJ = []
    for i in range(dim):
        A = [[gamma[i][j][k] for j in range(dim)] for k in range(dim)]  # column j = nabla_i e_j
        JAJ = matmul(J, matmul(A, J))
        gJ.append([[A[k][j] - JAJ[k][j] * Fraction(1, 2) for j in range(dim)] for k in range(dim)])
    # on covectors: nabla_{e_i} e^k = - sum_j gJ_i[k][j] e^j; extend as a derivation
    basis = M.real_basis
    for i in range(dim):
        out = Form(basis, eps.degree)
        for idx, coef in eps.terms.items():
            for pos, k in enumerate(idx):
                for j in range(dim):
                    g = gJ[i][k][j]
                    if not g:
                        continue
                    new = idx[:pos] + (j,) + idx[pos + 1:]
                    out = out + Form.basic(basis, *new, coef=coef * (-g))
        if out:
            return "Fail", f"nabla^J_(e{i + 1}) eps = {out}"
    return "Pass", "nabla^J eps = 0 on every frame field"

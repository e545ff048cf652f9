"""Independent sympy computations used as test oracles.

Nothing here imports acskod: the manifold data is read straight from the
shipped JSON and every form is handled in coordinate differentials.
"""

from __future__ import annotations

import json
from importlib import resources
from itertools import combinations

import sympy as sp


def _sym(text: str, names: dict):
    return sp.sympify(text.replace("^", "**"), locals=names)


def manifold_data(name: str) -> dict:
    return json.loads((resources.files("acskod") / "data" / f"{name}.json").read_text())


def coordinates(data: dict):
    names = {c: sp.Symbol(c, real=True) for c in data["coordinates"]}
    return [names[c] for c in data["coordinates"]], names


def coframe(data: dict) -> sp.Matrix:
    _, names = coordinates(data)
    return sp.Matrix([[_sym(v, names) for v in row] for row in data["coframe"]])


def frame(data: dict) -> sp.Matrix:
    _, names = coordinates(data)
    return sp.Matrix([[_sym(v, names) for v in row] for row in data["frame_vectors"]])


# forms: dict sorted-index-tuple -> expr, over coordinate differentials


def _sort(idx):
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    if len(set(idx)) < len(idx):
        return 0, None
    return sign, tuple(idx)


def wedge(a: dict, b: dict) -> dict:
    out: dict = {}
    for ia, ca in a.items():
        for ib, cb in b.items():
            s, idx = _sort(ia + ib)
            if s:
                out[idx] = out.get(idx, 0) + s * ca * cb
    return {k: v for k, v in out.items() if sp.simplify(v) != 0}


def d(a: dict, xs) -> dict:
    out: dict = {}
    for idx, c in a.items():
        for k, x in enumerate(xs):
            dc = sp.diff(c, x)
            if dc == 0:
                continue
            s, new = _sort((k,) + idx)
            if s:
                out[new] = out.get(new, 0) + s * dc
    return {k: v for k, v in out.items() if sp.simplify(v) != 0}


def one_form(row) -> dict:
    return {(k,): c for k, c in enumerate(row) if c != 0}


def structure_constants(name: str) -> list[dict]:
    """de^k as {(a, b): coeff} on the frame, a < b (0-based)."""
    data = manifold_data(name)
    xs, _ = coordinates(data)
    C, F = coframe(data), frame(data)
    out = []
    for k in range(C.rows):
        dk = d(one_form(list(C.row(k))), xs)
        terms = {}
        for a, b in combinations(range(F.rows), 2):
            val = sum(c * (F[a, i] * F[b, j] - F[a, j] * F[b, i]) for (i, j), c in dk.items())
            val = sp.simplify(val)
            if val != 0:
                terms[(a, b)] = val
        out.append(terms)
    return out


def section_residuals(name: str, J: sp.Matrix, f, m: int) -> list:
    """Coefficients of (df ^ psi + m f dpsi) ^ conj(phi_k); all zero iff f psi^m is pseudoholomorphic.

    The (1,0)-coframe is any basis of row vectors xi with xi J = i xi.
    """
    data = manifold_data(name)
    xs, _ = coordinates(data)
    C = coframe(data)
    rows = (J.T - sp.I * sp.eye(J.rows)).nullspace()
    phis = []
    for v in rows:
        form: dict = {}
        for a in range(J.rows):
            for k, c in one_form(list(C.row(a))).items():
                form[k] = form.get(k, 0) + v[a] * c
        phis.append(form)
    psi = phis[0]
    for p in phis[1:]:
        psi = wedge(psi, p)
    dpsi = d(psi, xs)
    df = d({(): f}, xs)
    lhs = {k: v for k, v in wedge(df, psi).items()}
    for k, v in dpsi.items():
        lhs[k] = lhs.get(k, 0) + m * f * v
    out = []
    for p in phis:
        pbar = {k: sp.conjugate(v) for k, v in p.items()}
        top = wedge(lhs, pbar)
        out.append(sp.simplify(sum(top.values()) if top else 0))
    return out

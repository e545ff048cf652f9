"""Command-line interface.

Exit status: 0 success, 1 invalid input (spec files, options, failed
certificate), 2 internal invariant breach.  Everything written to stdout
starts with a single version header line; the rest is deterministic.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import __version__
from .acs import AcsError, AlmostComplexStructure, alpha_of, bidegree_split, coframe10, gcy_check, is_integrable
from .deformation import FamilyError, accumulation_scan, evaluate, load_family, scan, worker_count
from .exterior import FormError, d
from .kodaira import kod_from_reports, usc_table_check
from .parsing import ExprSyntaxError, parse_scalar
from .plurigenera import (FourierError, InternalInvariantError, OracleError, build_section_equation,
                          certificate_document, compute_plurigenus, oracle_numeric_kernel, verify_certificate)
from .specfiles import SpecError, builtin_names, load_acs, load_gcy, load_manifold, load_samples

log = logging.getLogger("acskod")

_TYPE_NAMES = {(2, -1): "mu", (1, 0): "del", (0, 1): "delbar", (-1, 2): "mubar"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------


class Out:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout
        self.stream.write(f"# acskod {__version__}\n")

    def text(self, lines):
        if isinstance(lines, str):
            lines = [lines]
        for line in lines:
            self.stream.write(line + "\n")

    def json(self, doc):
        self.stream.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")


def _threshold(text: str) -> float:
    try:
        v = Decimal(text)
    except InvalidOperation:
        raise UsageError(f"--threshold must be a decimal number, got {text!r}") from None
    if not v.is_finite() or v <= 0:
        raise UsageError(f"--threshold must be positive, got {text!r}")
    return float(v)


def _positive(name: str, v: int) -> int:
    if v < 1:
        raise UsageError(f"{name} must be a positive integer, got {v}")
    return v


def _structure(args) -> AlmostComplexStructure:
    """Resolve --manifold/--acs or --family/--t into a structure."""
    fam_ref = getattr(args, "family", None)
    if fam_ref:
        if args.t is None:
            raise UsageError("--family needs --t")
        fam = load_family(fam_ref)
        if args.manifold and args.manifold not in (fam.manifold.name,):
            raise UsageError(f"--manifold {args.manifold} conflicts with the family's manifold {fam.manifold.name}")
        return evaluate(fam, parse_scalar(args.t))
    if getattr(args, "t", None) is not None:
        raise UsageError("--t needs --family")
    if not args.manifold:
        raise UsageError("--manifold is required (or --family with --t)")
    M = load_manifold(args.manifold)
    return load_acs(args.acs, M)


def _add_structure_args(p, family: bool = True):
    p.add_argument("--manifold", help="built-in manifold name or spec file")
    p.add_argument("--acs", default="builtin",
                   help="built-in structure, 'builtin' (default for the manifold), 'standard', or a J file")
    if family:
        p.add_argument("--family", help="family spec (built-in name or file); use with --t")
        p.add_argument("--t", help="exact parameter value, e.g. 1/2 or 3*pi/4")


def _add_format(p):
    p.add_argument("--format", choices=("text", "json"), default="text")


# --------------------------------------------------------------------------
# acs subcommands
# --------------------------------------------------------------------------


def cmd_acs_validate(args) -> int:
    M = load_manifold(args.manifold)
    acs = load_acs(args.acs, M) if args.acs else None
    out = Out(args.format)
    de = M.de()
    doc = {"manifold": M.name, "dimension": M.dimension, "coordinates": list(M.coordinates),
           "structure_equations": {f"de{k + 1}": str(f) for k, f in enumerate(de)}, "valid": True}
    if acs is not None:
        doc["structure"] = acs.name
        doc["J"] = [[str(x) for x in row] for row in acs.J]
        doc["J_constant"] = acs.is_constant
    if args.format == "json":
        out.json(doc)
        return 0
    lines = [f"manifold {M.name}: valid, dimension {M.dimension}"]
    lines += [f"  de{k + 1} = {f}" for k, f in enumerate(de)]
    if acs is not None:
        lines.append(f"structure {acs.name}: valid (J^2 = -I), {'constant' if acs.is_constant else 'non-constant'} "
                     "in the frame")
    out.text(lines)
    return 0


def _acs_only(args):
    M = load_manifold(args.manifold)
    return load_acs(args.acs, M)


def cmd_acs_coframe(args) -> int:
    acs = _acs_only(args)
    out = Out(args.format)
    rows = []
    for k, (phi, real) in enumerate(zip(acs.phi_forms(), coframe10(acs))):
        parts = bidegree_split(d(phi), acs)
        rows.append((k, real, dict(sorted(parts.items(), reverse=True))))
    if args.format == "json":
        out.json({
            "structure": acs.name,
            "coframe": [{
                "form": f"phi{k + 1}",
                "real": str(real),
                "d": {_TYPE_NAMES.get((p - 1, q), f"({p},{q})"): str(f) for (p, q), f in parts.items()},
            } for k, real, parts in rows],
        })
        return 0
    lines = [f"structure {acs.name}"]
    for k, real, parts in rows:
        lines.append(f"phi{k + 1} = {real}")
        for (p, q), f in parts.items():
            lines.append(f"  {_TYPE_NAMES.get((p - 1, q), f'({p},{q})')} phi{k + 1} = {f}")
        if not parts:
            lines.append(f"  d phi{k + 1} = 0")
    out.text(lines)
    return 0


def cmd_acs_alpha(args) -> int:
    acs = _acs_only(args)
    a = alpha_of(acs)
    out = Out(args.format)
    if args.format == "json":
        out.json({"structure": acs.name, "psi": str(acs.psi), "alpha": str(a)})
    else:
        out.text([f"psi = {acs.psi}", f"alpha = {a if a else 0}"])
    return 0


def cmd_acs_integrable(args) -> int:
    acs = _acs_only(args)
    r = is_integrable(acs)
    out = Out(args.format)
    doc = {"structure": acs.name, "integrable": r.integrable}
    if not r.integrable:
        doc["witness"] = f"mubar(phi{r.witness_index + 1}) = {r.witness}"
    if args.format == "json":
        out.json(doc)
    else:
        out.text(["true" if r.integrable else "false"] + ([doc["witness"]] if not r.integrable else []))
    return 0


def cmd_acs_gcy(args) -> int:
    acs = _acs_only(args)
    ref = args.gcy
    if ref == "builtin":
        if acs.manifold.name not in builtin_names("gcy"):
            raise UsageError(f"no built-in gcy data for {acs.manifold.name}; pass --gcy FILE")
        ref = acs.manifold.name
    g = load_gcy(ref, acs)
    rep = gcy_check(acs, g)
    out = Out(args.format)
    if args.format == "json":
        out.json({"structure": acs.name, **rep.as_dict()})
    else:
        out.text([f"(1) metric:   {rep.metric}: {rep.metric_reason}",
                  f"(2) volume:   {rep.volume}: {rep.volume_reason}",
                  f"(3) parallel: {rep.parallel}: {rep.parallel_reason}"])
    return 0


# --------------------------------------------------------------------------
# plurigenus / kodaira / oracle
# --------------------------------------------------------------------------


def cmd_plurigenus(args) -> int:
    if args.verify:
        try:
            cert = json.loads(Path(args.verify).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read certificate {args.verify}: {exc}") from None
        problems = verify_certificate(cert)
        out = Out(args.format)
        if args.format == "json":
            out.json({"certificate": args.verify, "valid": not problems, "problems": problems,
                      "claim": cert.get("claim")})
        else:
            out.text([f"certificate {args.verify}: {'valid' if not problems else 'INVALID'}"]
                     + [f"  {p}" for p in problems])
        return 0 if not problems else 1
    acs = _structure(args)
    if args.m is None and not args.m_symbolic:
        raise UsageError("give --m N or --m-symbolic")
    m = "symbolic" if args.m_symbolic else _positive("--m", args.m)
    grid = _positive("--grid", args.grid) if args.oracle else None
    rep = compute_plurigenus(acs, m, oracle_grid=grid, threshold=_threshold(args.threshold))
    if args.certificate:
        doc = certificate_document(rep, acs)
        if doc is None:
            log.warning("no certificate: the result is not certified")
        else:
            Path(args.certificate).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    out = Out(args.format)
    if args.format == "json":
        out.json(rep.as_json())
    else:
        out.text(rep.text())
    return 0


def cmd_kodaira(args) -> int:
    acs = _structure(args)
    if args.symbolic:
        reports = [compute_plurigenus(acs, "symbolic")]
    else:
        M = _positive("--max-m", args.max_m)
        # a symbolic certificate, when one exists, settles the verdict; the table stays per-m
        reports = [compute_plurigenus(acs, m) for m in range(1, M + 1)] + [compute_plurigenus(acs, "symbolic")]
    kv = kod_from_reports(reports)
    out = Out(args.format)
    if args.format == "json":
        out.json({"manifold": acs.manifold.name, "structure": acs.name, "kod": kv.as_json()})
        return 0
    lines = [f"manifold: {acs.manifold.name}", f"structure: {acs.name}",
             kv.summary().replace("-inf", "−∞"), f"rationale: {kv.rationale}"]
    if kv.table:
        lines.append("m,P_m,certified")
        lines += [f"{m},{'' if p is None else p},{'true' if c else 'false'}" for m, p, c in kv.table]
    out.text(lines)
    return 0


def cmd_oracle(args) -> int:
    acs = _structure(args)
    m = _positive("--m", args.m)
    res = oracle_numeric_kernel(build_section_equation(acs), m, _positive("--grid", args.grid),
                                _threshold(args.threshold))
    out = Out(args.format)
    if args.format == "json":
        out.json({"structure": acs.name, "m": m, "oracle": res.as_json()})
    else:
        lines = [f"numerical kernel dimension at m = {m}: {res.dimension} (grid {res.grid}, threshold "
                 f"{args.threshold}; not certified)",
                 "smallest singular values: " + ", ".join(f"{v:.3e}" for v in res.smallest),
                 f"gap ratio: {res.gap_ratio:.3e}"]
        lines += [f"warning: {w}" for w in res.warnings]
        out.text(lines)
    return 0


# --------------------------------------------------------------------------
# scan
# --------------------------------------------------------------------------


def cmd_scan(args) -> int:
    fam = load_family(args.family)
    samples_ref = args.samples
    if samples_ref == "builtin":
        if fam.name not in builtin_names("samples"):
            raise UsageError(f"no built-in samples for family {fam.name}; pass --samples FILE")
        samples_ref = fam.name
    samples = load_samples(samples_ref)
    max_m = _positive("--max-m", args.max_m)
    try:
        workers = worker_count()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.usc:
        table, patterns = accumulation_scan(fam, samples, max_m, workers=workers)
        # report on the requested samples only; the approach points feed the check
        violations = usc_table_check(table.usc_table(), patterns)
        requested = set(samples)
        shown = [r for r in table.rows if r.t in requested]
        extra = len(table.rows) - len(shown)
        table.rows = shown
    else:
        table = scan(fam, samples, max_m, workers)
        violations, extra = None, 0
    for t, why in table.skipped:
        log.warning("skipped sample t = %s: %s", t, why)
    csv_text = table.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    if args.plot_data:
        Path(args.plot_data).write_text(table.plot_data(), encoding="utf-8")
    if args.plot:
        table.plot(args.plot)
    out = Out(args.format)
    if args.format == "json":
        doc = table.as_json()
        if violations is not None:
            doc["usc"] = _usc_json(violations, extra)
        out.json(doc)
        return 0
    if not args.out:
        out.stream.write(csv_text)
    else:
        lines = [f"family {table.family}: {len(table.rows)} samples, m = 1..{max_m}, table written to {args.out}"]
        for r in table.rows:
            w = ""
            if r.witness:
                w = f"; section {r.witness['section']} ({'verified' if r.witness['verified'] else 'NOT verified'})"
            lines.append(f"  t = {r.label}: {'pi*Q' if r.pi_rational else 'not pi*Q'}, {r.kod.summary()}{w}")
        out.text(lines)
    if violations is not None:
        out.text(_usc_lines(violations, extra, max_m))
    return 0


def _usc_json(violations, extra: int) -> dict:
    return {"approach_points": extra,
            "violations": [{"column": str(v.column), "t": str(v.t0), "value": _num(v.value),
                            "eventual": _num(v.eventual)} for v in violations]}


def _num(v):
    return "-inf" if v == float("-inf") else v


def _usc_lines(violations, extra: int, max_m: int) -> list[str]:
    pm = [v for v in violations if v.column != "kod"]
    kod = [v for v in violations if v.column == "kod"]
    lines = [f"# upper semicontinuity along approach sequences ({extra} extra points)",
             f"# P_m, m = 1..{max_m}: {len(pm)} violation(s)"]
    lines += [f"#   {v}" for v in pm]
    lines.append(f"# kod: {len(kod)} violation(s) (expected: kod is not semicontinuous)")
    lines += [f"#   {v}" for v in kod]
    return lines


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="acskod", description="Plurigenera and Kodaira dimension of almost complex structures.")
    p.add_argument("--version", action="version", version=f"acskod {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("acs", help="inspect an almost complex structure")
    asub = a.add_subparsers(dest="acs_command", required=True, parser_class=_Parser)
    v = asub.add_parser("validate", help="validate a manifold spec and optionally a structure")
    v.add_argument("--manifold", required=True)
    v.add_argument("--acs", help="structure to validate as well")
    _add_format(v)
    v.set_defaults(func=cmd_acs_validate)
    for name, func, helptext in (("coframe", cmd_acs_coframe, "(1,0)-coframe and the bidegree parts of d phi"),
                                 ("alpha", cmd_acs_alpha, "the (0,1)-form alpha with delbar psi = alpha ^ psi"),
                                 ("integrable", cmd_acs_integrable, "integrability (mubar = 0)"),
                                 ("gcy-check", cmd_acs_gcy, "generalized Calabi-Yau conditions")):
        s = asub.add_parser(name, help=helptext)
        s.add_argument("--manifold", required=True)
        s.add_argument("--acs", default="builtin")
        if name == "gcy-check":
            s.add_argument("--gcy", default="builtin", help="sigma/epsilon data file (default: built-in)")
        _add_format(s)
        s.set_defaults(func=func)

    pg = sub.add_parser("plurigenus", help="compute P_m")
    _add_structure_args(pg)
    g = pg.add_mutually_exclusive_group()
    g.add_argument("--m", type=int)
    g.add_argument("--m-symbolic", action="store_true", help="all m >= 1 at once")
    pg.add_argument("--oracle", action="store_true", help="attach the numerical kernel estimate (concrete m)")
    pg.add_argument("--grid", type=int, default=8)
    pg.add_argument("--threshold", default="1e-8", help="relative SVD threshold as a decimal string")
    pg.add_argument("--certificate", metavar="PATH", help="write a self-contained certificate")
    pg.add_argument("--verify", metavar="CERT", help="re-verify a certificate instead of computing")
    _add_format(pg)
    pg.set_defaults(func=cmd_plurigenus)

    k = sub.add_parser("kodaira", help="Kodaira dimension")
    _add_structure_args(k)
    g = k.add_mutually_exclusive_group(required=True)
    g.add_argument("--max-m", type=int)
    g.add_argument("--symbolic", action="store_true")
    _add_format(k)
    k.set_defaults(func=cmd_kodaira)

    s = sub.add_parser("scan", help="scan a family over sample parameters")
    s.add_argument("--family", required=True)
    s.add_argument("--samples", default="builtin")
    s.add_argument("--max-m", type=int, default=6)
    s.add_argument("--out", metavar="CSV")
    s.add_argument("--plot-data", metavar="CSV", help="write (t_label, m, P_m) triples")
    s.add_argument("--plot", metavar="PNG", help="render a figure of the table")
    s.add_argument("--usc", action="store_true", help="check upper semicontinuity along approach sequences")
    _add_format(s)
    s.set_defaults(func=cmd_scan)

    o = sub.add_parser("oracle", help="numerical kernel dimension (not certified)")
    _add_structure_args(o)
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--grid", type=int, default=8)
    o.add_argument("--threshold", default="1e-8")
    _add_format(o)
    o.set_defaults(func=cmd_oracle)
    return p


_INPUT_ERRORS = (SpecError, AcsError, FamilyError, ExprSyntaxError, UsageError, OracleError, FourierError, FormError)


def main(argv=None) -> int:
    logging.basicConfig(format="acskod: %(levelname)s: %(message)s", level=logging.WARNING, stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        return args.func(args)
    except InternalInvariantError as exc:
        print(f"acskod: internal error: {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"acskod: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"acskod: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - any other failure is a bug
        print(f"acskod: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

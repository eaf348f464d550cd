"""Command-line front end: ``deficiency <command> [options]``.

Every command builds a :class:`RunReport`.  ``--json`` prints it as JSON
with floats at 17 significant digits; otherwise a short table is printed
with 6 significant digits.  ``--report-dir`` (or the environment variable
``DEFICIENCY_REPORT_DIR``) additionally writes ``<command>.json`` there.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy as sp

SCHEMA = "deficiency.run/1"
REPORT_DIR_ENV = "DEFICIENCY_REPORT_DIR"

_NUMBER = re.compile(r"""^\s*(?:
      [+-]?\d+(?:/\d+)?                          # integer or fraction
    | [+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?  # decimal
    | [+-]?sqrt\(\d+\)(?:/\d+)?                  # sqrt(k)/d
    )\s*$""", re.VERBOSE)


class UsageError(ValueError):
    pass


def parse_number(text: str):
    """Exact value for integers, fractions and ``sqrt(k)/d``; float for decimals."""
    if not _NUMBER.match(text):
        raise UsageError(f"cannot parse number {text!r}; use an integer, a fraction p/q, "
                         f"a decimal or sqrt(k)/d")
    text = text.strip()
    if "sqrt" in text:
        return sp.sympify(text)
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    if re.fullmatch(r"[+-]?\d+/\d+", text):
        if text.endswith("/0"):
            raise UsageError("zero denominator")
        return Fraction(text)
    return float(text)


def parse_list(text: str, kind=float) -> list:
    try:
        return [kind(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}") from None


def parse_pair(text: str):
    from .counts import DefectPair

    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 2:
        raise UsageError(f"a pair needs two comma-separated counts, got {text!r}")
    try:
        return DefectPair(*parts)
    except (TypeError, ValueError):
        raise UsageError(f"cannot parse pair {text!r}") from None


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


# ---------------------------------------------------------------- reports


@dataclass
class RunReport:
    command: str
    parameters: dict
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    exit_status: int = 0

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "command": self.command, "parameters": self.parameters,
                "results": self.results, "checks": [c.to_json() for c in self.checks],
                "exit_status": self.exit_status}


_FLOAT_TOKEN = "\x00f17:"


def _prepare(v):
    """Replace floats by tokens so they can be printed with 17 digits."""
    from .verify import canonical

    v = canonical(v)
    if isinstance(v, dict):
        return {str(k): _prepare(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_prepare(x) for x in v]
    if isinstance(v, complex):
        return [_prepare(v.real), _prepare(v.imag)]
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return _FLOAT_TOKEN + format(v, ".17g")
    if isinstance(v, np.ndarray):
        return _prepare(v.tolist())
    return str(v)


def dumps(obj) -> str:
    text = json.dumps(_prepare(obj), indent=2, sort_keys=True, ensure_ascii=False)
    return re.sub(r'"\\u0000f17:([^"]*)"', r"\1", text)


def fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}i"
    return str(v)


def _table(rows: list, headers: list) -> str:
    cells = [[fmt(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


# ---------------------------------------------------------------- commands


def cmd_indices(args) -> tuple:
    from .counts import DefectPair, power_indices, polynomial_indices, product_defect

    pair = parse_pair(args.pair)
    params = {"pair": pair.to_json()}
    if args.power is not None:
        params["power"] = args.power
        result = power_indices(pair, args.power)
        how = f"power {args.power}"
    elif args.poly is not None:
        coeffs = parse_list(args.poly)
        params["poly"] = coeffs
        result = polynomial_indices(pair, coeffs)
        how = "polynomial " + " + ".join(f"{c:g}·t^{k}" for k, c in enumerate(coeffs))
    else:
        # a single count applies to both components
        spec = args.product if "," in args.product else f"{args.product},{args.product}"
        other = parse_pair(spec)
        params["product"] = other.to_json()
        result = DefectPair(product_defect(pair.n_plus, other.n_plus),
                            product_defect(pair.n_minus, other.n_minus))
        how = f"product with {other}"
    report = RunReport("indices", params, {"indices": result.to_json()})
    return report, f"{pair} -> {result}   ({how})"


def cmd_verify(args) -> tuple:
    from .verify import run_checks

    tolerances = {}
    for item in args.tol or []:
        key, _, val = item.rpartition("=")
        try:
            tolerances[key or "*"] = float(val)
        except ValueError:
            raise UsageError(f"--tol expects GROUP=VALUE or VALUE, got {item!r}") from None
    checks, timings = run_checks(args.filter, tolerances)
    failed = [c for c in checks if not c.passed]
    params = {"filter": args.filter, "tol": {k: tolerances[k] for k in sorted(tolerances)}}
    results = {"total": len(checks), "passed": len(checks) - len(failed),
               "failed": len(failed)}
    if args.timings:
        results["timings_s"] = {k: timings[k] for k in sorted(timings)}
    report = RunReport("verify", params, results, checks, 1 if failed else 0)
    if not checks:
        notice = f"0 checks matched filter {args.filter!r}; nothing to verify"
        if args.json:
            print(notice, file=sys.stderr)
        return report, notice
    rows = [[c.claim, c.expected, c.observed, "PASS" if c.passed else "FAIL"] for c in checks]
    text = _table(rows, ["claim", "expected", "observed", "pass"])
    text += f"\n{len(checks)} checks, {len(failed)} failed"
    if args.timings:
        text += "\n" + "\n".join(f"  {k}: {v:.3g} s" for k, v in sorted(timings.items()))
    return report, text


def cmd_roots(args) -> tuple:
    from .halfplane import RealPolynomial, find_roots, halfplane_counts, lemma_prediction, \
        safe_epsilon, track_roots

    p = RealPolynomial(tuple(parse_list(args.coeffs)))
    rs = find_roots(p)
    eps = args.eps if args.eps is not None else safe_epsilon(p)
    hc = halfplane_counts(p, eps, args.sign)
    results = {"roots": [complex(r) for r in rs.roots], "residual_bound": rs.residual_bound,
               "method": rs.method, "epsilon": eps, "sign": args.sign,
               "counts": {"upper": hc.in_upper, "lower": hc.in_lower, "axis": hc.on_axis}}
    if p.leading > 0:
        results["lemma_prediction"] = list(lemma_prediction(p.degree, args.sign))
    lines = [f"P = {p}", "roots:"] + [f"  {fmt(complex(r))}" for r in rs.roots]
    lines.append(f"eps = {fmt(eps)} ({args.sign}): upper {hc.in_upper}, lower {hc.in_lower}, "
                 f"axis {hc.on_axis}")
    if args.track:
        tr = track_roots(p, args.sign, parse_list(args.track))
        results["tracking"] = {"eps_grid": tr.eps_grid, "confined": tr.confined,
                               "halfplanes": tr.halfplanes}
        lines.append(f"tracked over {len(tr.eps_grid)} eps values: "
                     f"{'confined' if tr.confined else 'HALF-PLANE CHANGE'}")
    return RunReport("roots", {"coeffs": list(p.coefficients)}, results), "\n".join(lines)


def cmd_stirling(args) -> tuple:
    from .stirling import jacobi_stirling, legendre_stirling, stirling2

    alpha, beta = parse_number(args.alpha), parse_number(args.beta)
    if args.family == "classical":
        fn = stirling2
    elif args.family == "legendre":
        fn = legendre_stirling
    else:
        def fn(m, j):
            return jacobi_stirling(m, j, alpha, beta)
    js = [args.j] if args.j is not None else list(range(1, args.m + 1))
    entries = []
    for j in js:
        v = fn(args.m, j)
        exact = isinstance(v, Fraction)
        entries.append({"m": args.m, "j": j, "value": str(v) if exact else float(v),
                        "decimal": float(v), "exact": exact})
    params = {"family": args.family, "m": args.m}
    if args.family == "jacobi":
        params.update(alpha=str(alpha), beta=str(beta))
    rows = [[e["m"], e["j"], e["decimal"] if args.decimal or not e["exact"] else e["value"]]
            for e in entries]
    return RunReport("stirling", params, {"entries": entries}), _table(rows, ["m", "j", "value"])


def _expr_params(args) -> dict:
    params = {}
    for key in ("alpha", "beta", "gamma"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = _to_param(parse_number(v))
    for item in getattr(args, "param", None) or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        params[key] = _to_param(parse_number(val))
    return params


def _to_param(v):
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    return v


def cmd_expand(args) -> tuple:
    from .expressions import power_expansion

    params = _expr_params(args)
    if args.family == "jacobi":
        params = {k: _fraction_or_float(v) for k, v in params.items()}
    pe = power_expansion(args.family, args.m, **params)
    terms = [{"j": t.j, "coefficient": str(t.coefficient) if isinstance(t.coefficient, Fraction)
              else float(t.coefficient), "weight": str(t.weight)} for t in pe.terms]
    results = {"outer_weight": str(pe.outer_weight), "terms": terms, "exact": pe.exact,
               "form": "w^-1 * sum_j (-1)^j c_j D^j W_j D^j"}
    rows = [[t["j"], t["coefficient"], t["weight"]] for t in terms]
    text = f"{args.family}^{args.m} = ({pe.outer_weight})^-1 sum_j (-1)^j c_j D^j W_j D^j\n"
    text += _table(rows, ["j", "c_j", "W_j"])
    return RunReport("expand", {"family": args.family, "m": args.m,
                                **{k: str(v) for k, v in params.items()}}, results), text


def _fraction_or_float(v):
    if isinstance(v, sp.Rational):
        return Fraction(int(v.p), int(v.q))
    if isinstance(v, sp.Basic):
        return float(v)
    return v


def _test_function(spec: str, max_order: int):
    from .expressions import FunctionWithDerivatives, kernel_function

    if spec.startswith("kernel:"):
        return kernel_function(parse_number(spec.split(":", 1)[1]), max_order=max_order)
    try:
        expr = sp.sympify(spec, locals={"x": sp.Symbol("x", real=True)})
    except (sp.SympifyError, SyntaxError):
        raise UsageError(f"cannot parse test function {spec!r}") from None
    return FunctionWithDerivatives.from_sympy(expr, max_order=max_order, name=spec)


def cmd_apply(args) -> tuple:
    from .expressions import apply, build_classical

    expr = build_classical(args.expr, **_expr_params(args))
    u = _test_function(args.function, max(expr.order, 4))
    xs = np.array(parse_list(args.points))
    values = apply(expr, u, xs)
    vals = [complex(v) if np.iscomplexobj(values) else float(v) for v in values]
    rows = [[float(x), v] for x, v in zip(xs, vals)]
    return (RunReport("apply", {"expr": args.expr, "function": args.function,
                                "points": xs.tolist()}, {"values": vals}),
            _table(rows, ["x", "(tau u)(x)"]))


def cmd_classify(args) -> tuple:
    from .expressions import build_classical
    from .weyl import classify_endpoint, deficiency_report

    params = _expr_params(args)
    expr = build_classical(args.expr, **params)
    pstr = {k: str(v) for k, v in params.items()}
    if args.z is not None:
        z = parse_complex(args.z)
        ends = [classify_endpoint(expr, e, z) for e in ("a", "b")]
        results = {"z": z, "endpoints": [c.to_json() for c in ends],
                   "d_a": ends[0].d, "d_b": ends[1].d}
        lines = [f"{expr.describe()}", f"z = {fmt(z)}"]
    else:
        rep = deficiency_report(expr)
        ends = rep.plus
        results = rep.to_json()
        lines = [f"{expr.describe()}", f"deficiency indices {rep.pair}"]
    for c in ends:
        lines.append(f"  endpoint {fmt(c.endpoint.location)}: {c.kind}, d = {c.d}")
    return RunReport("classify", {"expr": args.expr, **pstr}, results), "\n".join(lines)


def cmd_pde(args) -> tuple:
    from .channels import decompose, dirichlet_report

    alpha = parse_number(args.alpha)
    rep = decompose(args.dim, args.L, _to_param(alpha), args.m)
    results = rep.to_json()
    results["dirichlet"] = dirichlet_report(args.m)
    return (RunReport("pde", {"dim": args.dim, "L": args.L, "alpha": str(alpha), "m": args.m},
                      results), rep.table())


# ---------------------------------------------------------------- parser


def _add_expr_options(p):
    p.add_argument("--alpha", help="parameter alpha (integer, p/q, decimal or sqrt(k)/d)")
    p.add_argument("--beta", help="parameter beta")
    p.add_argument("--gamma", help="parameter gamma")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="other builder parameters, e.g. n=3 ell=1 L=1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deficiency",
                                     description="Deficiency indices of powers of "
                                                 "differential operators.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the run report as JSON")
    common.add_argument("--report-dir", default=os.environ.get(REPORT_DIR_ENV),
                        help=f"also write <command>.json here (default ${REPORT_DIR_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indices", parents=[common], help="index arithmetic")
    p.add_argument("--pair", required=True, help="n_plus,n_minus (counts or inf)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--power", type=int)
    g.add_argument("--poly", help="coefficients a0,a1,...,am")
    g.add_argument("--product", help="defect count or pair of the second factor")
    p.set_defaults(func=cmd_indices)

    p = sub.add_parser("verify", parents=[common], help="run the reproduction checks")
    p.add_argument("--filter", help="substring of the claim id")
    p.add_argument("--tol", action="append", metavar="[GROUP=]VALUE",
                   help="override the tolerance of a check group")
    p.add_argument("--timings", action="store_true", help="report wall time per group")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roots", parents=[common], help="roots and half-plane counts")
    p.add_argument("--coeffs", required=True, help="a0,a1,...,am")
    p.add_argument("--eps", type=float)
    p.add_argument("--sign", choices=("plus", "minus"), default="plus")
    p.add_argument("--track", help="increasing eps grid e1,e2,...")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("stirling", parents=[common], help="Stirling-type numbers")
    p.add_argument("--family", choices=("classical", "legendre", "jacobi"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--j", type=int)
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", default="0")
    p.add_argument("--decimal", action="store_true")
    p.set_defaults(func=cmd_stirling)

    p = sub.add_parser("expand", parents=[common], help="symmetric form of a power")
    p.add_argument("--family", choices=("legendre", "laguerre", "hermite", "jacobi"),
                   required=True)
    p.add_argument("--m", type=int, required=True)
    _add_expr_options(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("apply", parents=[common], help="evaluate an expression on a function")
    p.add_argument("--expr", required=True)
    p.add_argument("--function", required=True,
                   help="sympy expression in x, or kernel:BETA for (1-x)^BETA")
    p.add_argument("--points", required=True, help="x1,x2,...")
    _add_expr_options(p)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("classify", parents=[common], help="endpoint classification")
    p.add_argument("--expr", required=True)
    p.add_argument("--z", help="spectral parameter for a single-z endpoint report")
    _add_expr_options(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pde", parents=[common], help="channel decomposition")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--alpha", default="0")
    p.add_argument("--m", type=int, default=1)
    p.set_defaults(func=cmd_pde)
    return parser


def main(argv=None) -> int:
    from .expressions import ParameterError
    from .weyl import InconclusiveError, IntegrationError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, text = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ParameterError, ValueError, InconclusiveError, IntegrationError) as exc:
        print(f"deficiency {args.command}: {exc}", file=sys.stderr)
        return 1
    out = dumps(report.to_json())
    print(out if args.json else text)
    if args.report_dir:
        path = Path(args.report_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"{args.command}.json").write_text(out + "\n")
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())

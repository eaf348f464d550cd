"""Reproduction suite behind ``deficiency verify``.

Each group produces :class:`Check` records with an id of the form
``group/case``.  Groups run in sorted order and their checks are sorted by
id, so a report is stable across runs.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy as sp

__all__ = ["Check", "GROUPS", "run_checks", "select_groups", "canonical"]


@dataclass(frozen=True)
class Check:
    claim: str
    expected: object
    observed: object
    tolerance: float | None
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"claim": self.claim, "expected": canonical(self.expected),
                "observed": canonical(self.observed), "tolerance": self.tolerance,
                "pass": self.passed, "detail": self.detail}


def canonical(v):
    """JSON-ready form: pairs as lists, fractions as strings, floats kept."""
    if hasattr(v, "to_json"):
        return v.to_json()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [canonical(x) for x in v]
    if isinstance(v, dict):
        return {str(k): canonical(x) for k, x in v.items()}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, sp.Basic):
        return str(v)
    return v


def _exact(claim, expected, observed, detail=""):
    return Check(claim, expected, observed, None, expected == observed, detail)


def _within(claim, observed, tol, expected=0.0, detail=""):
    ok = bool(np.isfinite(observed)) and abs(observed - expected) <= tol
    return Check(claim, expected, float(observed), tol, ok, detail)


def _bound(claim, observed, tol, detail=""):
    """``observed <= tol`` (errors and residuals)."""
    ok = bool(np.isfinite(observed)) and observed <= tol
    return Check(claim, f"<= {tol:g}", float(observed), tol, ok, detail)


# ---------------------------------------------------------------- groups

_LIMIT3_ALPHAS = (("1", 1), ("2", 2), ("5/2", Fraction(5, 2)),
                  ("sqrt(33)/2", sp.sqrt(33) / 2))


def _limit3(tol):
    from .weyl import kernel_l2_count

    out = []
    for label, a in _LIMIT3_ALPHAS:
        out.append(_exact(f"limit3/alpha={label}/power4", 3, kernel_l2_count(4, a)))
        out.append(_exact(f"limit3/alpha={label}/power2", 1, kernel_l2_count(2, a)))
        out.append(_exact(f"limit3/alpha={label}/square", 2,
                          kernel_l2_count(2, a, square=True)))
    return out


def _index_cases():
    from .counts import DefectPair

    cases = [("index-legendre", "legendre", {}, DefectPair(2, 2)),
             ("index-hermite", "hermite", {}, DefectPair(0, 0))]
    for a, exp in (("-1/2", 1), ("0", 1), ("1/2", 1), ("1", 0), ("2", 0)):
        cases.append((f"index-laguerre/alpha={a}", "laguerre", {"alpha": a},
                      DefectPair(exp, exp)))
    for g, exp in (("0", 1), ("1/2", 1), ("0.99", 1), ("1", 0), ("2", 0)):
        gv = 0.99 if g == "0.99" else g
        cases.append((f"index-bessel/gamma={g}", "bessel_gamma", {"gamma": gv},
                      DefectPair(exp, exp)))
    for a in ("-1/2", "1/2", "2"):
        for b in ("-1/2", "1/2", "2"):
            exp = (float(sp.sympify(a)) < 1) + (float(sp.sympify(b)) < 1)
            cases.append((f"jacobi-table/alpha={a},beta={b}", "jacobi",
                          {"alpha": a, "beta": b}, DefectPair(exp, exp)))
    return cases


def _classifier_group(prefix):
    def run(tol):
        from .expressions import build_classical
        from .weyl import InconclusiveError, deficiency_report

        width = 0.2 if tol is None else tol
        out = []
        for claim, name, params, expected in _index_cases():
            if not claim.startswith(prefix):
                continue
            try:
                rep = deficiency_report(build_classical(name, **params))
            except InconclusiveError as exc:
                out.append(Check(claim, expected, "inconclusive", None, False, str(exc)))
                continue
            w = rep.max_ci_width()
            out.append(_exact(claim, expected, rep.pair,
                              f"kinds {rep.plus[0].kind}/{rep.plus[1].kind}"))
            out.append(Check(f"{claim}/ci-width", f"< {width:g}", w, width, w < width))
        return out

    return run


def _power_formulas(tol):
    from .counts import DefectPair, power_indices

    out = []
    for claim, _, _, base in _index_cases():
        b = base.n_plus.value
        for m in range(1, 6):
            out.append(_exact(f"power-formulas/{claim}/m={m}", DefectPair(m * b, m * b),
                              power_indices(base, m)))
    for n in (1, 2):
        for m in range(1, 6):
            out.append(_exact(f"power-formulas/limit-circle-order{n}/m={m}",
                              DefectPair(2 * m * n, 2 * m * n),
                              power_indices(DefectPair(2 * n, 2 * n), m)))
    return out


def random_polynomials(count: int = 200, seed: int = 20240611, max_degree: int = 12):
    """Deterministic sample of real polynomials with positive leading coefficient."""
    from .halfplane import RealPolynomial, make_simple

    rng = np.random.default_rng(seed)
    polys = []
    for _ in range(count):
        m = int(rng.integers(1, max_degree + 1))
        c = rng.standard_normal(m + 1)
        c[-1] = abs(c[-1]) + 0.1
        polys.append(make_simple(RealPolynomial(tuple(c)))[0])
    return polys


def _halfplane(tol):
    import mpmath

    from .halfplane import find_roots, first_order_root_shift, halfplane_counts, \
        lemma_prediction, safe_epsilon

    out = []
    lemma_ok = oracle_ok = 0
    polys = random_polynomials()
    for p in polys:
        eps = safe_epsilon(p)
        for sign in ("plus", "minus"):
            hc = halfplane_counts(p, eps, sign)
            lemma_ok += (hc.in_upper, hc.in_lower, hc.on_axis) == (*lemma_prediction(p.degree, sign), 0)
            ref = np.roots(p.perturbed(eps, sign)[::-1])
            oracle_ok += (int(np.sum(ref.imag > 0)), int(np.sum(ref.imag < 0))) == \
                (hc.in_upper, hc.in_lower)
    total = 2 * len(polys)
    out.append(_exact("halfplane-counts/lemma", total, lemma_ok, f"{total} (polynomial, sign) cases"))
    out.append(_exact("halfplane-counts/companion-oracle", total, oracle_ok))

    # O(eps^2) decay of the predictor error, true roots from 40-digit Newton
    worst, cases, skipped = 0.0, 0, 0
    for p in polys:
        roots = find_roots(p).roots
        real = roots[np.abs(roots.imag) < 1e-9].real
        if len(real) == 0:
            continue
        z0 = float(real[0])
        eps0 = safe_epsilon(p)
        coeffs = list(reversed(p.coefficients))
        errs = []
        with mpmath.workdps(40):
            for eps in (eps0, eps0 / 2):
                pred = first_order_root_shift(p, z0, eps)
                true = mpmath.findroot(lambda z: mpmath.polyval(coeffs, z) - 1j * eps,
                                       mpmath.mpc(pred.real, pred.imag))
                errs.append(abs(complex(true) - pred))
        if errs[1] < 1e-12 * max(1.0, abs(z0)):
            skipped += 1  # second-order term below double-precision resolution
            continue
        worst = max(worst, abs(math.log2(errs[0] / errs[1] / 4)))
        cases += 1
    out.append(Check("halfplane-counts/shift-order", "ratio within factor 2 of 4",
                     4 * 2 ** worst if cases else None, 2.0, cases > 0 and worst <= 1.0,
                     f"{cases} polynomials with a real root, {skipped} below resolution; "
                     f"largest |log2(ratio/4)| = {worst:.3g}"))
    return out


def _stirling(tol):
    from .stirling import jacobi_stirling, legendre_stirling, recurrence_table, stirling2

    out = []
    rec = recurrence_table("classical", 20)
    bad = [k for k, v in rec.items() if stirling2(*k) != v]
    out.append(_exact("stirling-classical/recurrence-m<=20", [], bad, f"{len(rec)} entries"))
    rec = recurrence_table("legendre", 15)
    bad = [k for k, v in rec.items() if legendre_stirling(*k) != v]
    out.append(_exact("stirling-legendre/recurrence-m<=15", [], bad, f"{len(rec)} entries"))
    bad = [(m, j) for m in range(1, 16) for j in range(1, m + 1)
           if jacobi_stirling(m, j, 0, 0) != legendre_stirling(m, j)]
    out.append(_exact("stirling-jacobi/alpha=beta=0-equals-legendre", [], bad,
                      "Jacobi-Stirling index n matches Legendre-Stirling index m"))
    return out


_MFOLD_FAMILIES = (("legendre", {}), ("laguerre", {"alpha": Fraction(1, 2)}),
                   ("hermite", {}), ("jacobi", {"alpha": Fraction(1, 2), "beta": 2}))


def mfold_error(family: str, params: dict, m: int, samples: int = 20) -> float:
    """Largest relative error of the expanded ``τ^m`` against ``m`` applications.

    The reference iterates ``v <- -(A v'' + B v')`` on exact polynomials with
    ``A = p0/w`` and ``B = p0'/w``, which are polynomials for all four families.
    """
    from .expressions import X, FunctionWithDerivatives, apply_power_expansion, \
        build_classical, power_expansion

    tests = [1 + X + X ** 3, X ** 4 - 2 * X, X ** 5 + 3 * X ** 2 - 1,
             X ** 6 - X ** 3 + X, X ** 8 / 7 + X ** 7 - X]
    e = build_classical(family, **params)
    p0, w = e.coefficients[0].symbolic_form, e.weight.symbolic_form
    A = sp.Poly(sp.simplify(p0 / w), X)
    B = sp.Poly(sp.simplify(sp.diff(p0, X) / w), X)
    a, b = e.interval
    lo, hi = (a if np.isfinite(a) else -3.0), (b if np.isfinite(b) else 6.0)
    xs = np.linspace(lo, hi, samples + 2)[1:-1]
    pe = power_expansion(family, m, **params)
    err = 0.0
    for u in tests:
        v = sp.Poly(u, X)
        for _ in range(m):
            v = -(A * v.diff(X).diff(X) + B * v.diff(X))
        ref = np.array([float(v.eval(t)) for t in xs])
        got = apply_power_expansion(pe, FunctionWithDerivatives.from_sympy(u), xs)
        err = max(err, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
    return err


def _mfold(tol):
    tol = 1e-8 if tol is None else tol
    out = []
    for fam, params in _MFOLD_FAMILIES:
        for m in (2, 3, 4):
            out.append(_bound(f"mfold-{fam}/m={m}", mfold_error(fam, params, m), tol))
    return out


def _compose_square(tol):
    from .expressions import X, build_classical, compose_square

    tol = 1e-12 if tol is None else tol
    xs = np.linspace(0, 1, 52)[1:-1]
    out = []
    for label, a in (("1", 1), ("3/2", Fraction(3, 2)), ("2", 2),
                     ("sqrt(33)/2", sp.sqrt(33) / 2)):
        sq = compose_square(build_classical("bessel_alpha", alpha=a))
        av = float(a)
        p1_ref = (2 * av ** 2 - 0.5) / (1 - xs) ** 2
        p2_ref = (av ** 4 - 6.5 * av ** 2 + (5 / 4) ** 2) / (1 - xs) ** 4
        p0 = sq.coefficients[0](xs)
        p1 = sq.coefficients[1](xs)
        p2 = sq.coefficients[2](xs)
        scale1, scale2 = np.max(np.abs(p1_ref)), np.max(np.abs(p2_ref))
        out.append(_bound(f"compose-square/alpha={label}/p0", float(np.max(np.abs(p0 - 1))), tol))
        out.append(_bound(f"compose-square/alpha={label}/p1",
                          float(np.max(np.abs(p1 - p1_ref)) / scale1), tol))
        out.append(_bound(f"compose-square/alpha={label}/p2",
                          float(np.max(np.abs(p2 - p2_ref)) / scale2), tol))
        const = sp.simplify(sq.coefficients[2].symbolic_form * (1 - X) ** 4)
        out.append(_exact(f"compose-square/alpha={label}/p2-constant",
                          str(sp.expand(sp.sympify(a) ** 4 - sp.Rational(13, 2) * sp.sympify(a) ** 2
                                        + sp.Rational(25, 16))), str(sp.expand(const))))
    return out


def _liouville(tol):
    from .liouville import chaudhuri_everitt_chain, transport_solution

    chain = chaudhuri_everitt_chain()
    out = [_within("liouville/t(0)", chain.t_at_zero, 1e-10),
           _within("liouville/t(inf)", chain.t_at_infinity, 1e-10, math.sqrt(6)),
           _exact("liouville/alpha", "sqrt(33)/2", str(chain.alpha)),
           _exact("liouville/spectral-scale", "6", str(chain.spectral_scale)),
           _exact("liouville/identity", "0", str(chain.identity_residual))]
    tr = transport_solution()
    out.append(_bound("liouville/transport-residual", tr.max_residual,
                      1e-6 if tol is None else tol, "relative residual on the transported grid"))
    out.append(_bound("liouville/reintegration", tr.reintegration_error, 1e-6))
    return out


def _pde(tol):
    from .channels import cross_validate_channels, decompose, dirichlet_perturbation_indices
    from .counts import DefectPair

    rep = decompose(3, 2, 0, 3)
    out = [_exact("pde-decompose/n=3,L=2/total", DefectPair(3, 3), rep.total)]
    for m, exp in ((1, 3), (2, 6), (3, 9)):
        out.append(_exact(f"pde-decompose/n=3,L=2/m={m}", DefectPair(exp, exp), rep.powers[m]))
    out.append(_exact("pde-decompose/n=2,L=0/total", DefectPair(1, 1), decompose(2, 0).total))
    for c in cross_validate_channels():
        out.append(Check(f"pde-channels/n={c.n},L={c.L},ell={c.ell}", c.expected.to_json(),
                         [c.observed.to_json(), c.kind_at_zero, c.kind_at_infinity],
                         None, c.agree))
    for m in range(1, 6):
        out.append(_exact(f"pde-dirichlet/m={m}", DefectPair(m, m),
                          dirichlet_perturbation_indices(m)))
    return out


def _solution_facts(tol):
    from .expressions import apply, kernel_function

    tol = 1e-10 if tol is None else tol
    half = sp.Rational(1, 2)
    xs = np.linspace(0, 1, 22)[1:-1]
    from .expressions import build_classical

    out = []
    for label, a in (("1", sp.Integer(1)), ("2", sp.Integer(2)), ("sqrt(33)/2", sp.sqrt(33) / 2)):
        tau = build_classical("bessel_alpha", alpha=a)
        for name, src, dst, factor in (("b3", 5 * half + a, half + a, -4 * (1 + a)),
                                       ("b4", 5 * half - a, half - a, -4 * (1 - a))):
            got = apply(tau, kernel_function(src), xs)
            target = kernel_function(dst)(xs)
            # the factor vanishes at alpha = 1, so scale by max(|factor|, 1)
            scale = max(abs(float(factor)), 1.0) * np.abs(target)
            err = float(np.max(np.abs(got - float(factor) * target) / scale))
            out.append(_bound(f"solution-facts/alpha={label}/u_{name}", err, tol))
    return out


GROUPS: dict[str, Callable] = {
    "compose-square": _compose_square,
    "halfplane-counts": _halfplane,
    "index-bessel": _classifier_group("index-bessel"),
    "index-hermite": _classifier_group("index-hermite"),
    "index-laguerre": _classifier_group("index-laguerre"),
    "index-legendre": _classifier_group("index-legendre"),
    "jacobi-table": _classifier_group("jacobi-table"),
    "limit3": _limit3,
    "liouville": _liouville,
    "mfold": _mfold,
    "pde": _pde,
    "power-formulas": _power_formulas,
    "solution-facts": _solution_facts,
    "stirling": _stirling,
}


def select_groups(pattern: str | None) -> list:
    """Groups whose checks can match ``pattern`` (substring of the claim id)."""
    names = sorted(GROUPS)
    if not pattern:
        return names
    named = [g for g in names if pattern in g or g in pattern]
    # a pattern naming no group may still match case suffixes such as "alpha=2"
    return named or names


def run_checks(pattern: str | None = None, tolerances: dict | None = None) -> tuple:
    """Run the matching groups; returns ``(checks, timings)``."""
    tolerances = tolerances or {}
    checks, timings = [], {}
    for g in select_groups(pattern):
        t0 = time.perf_counter()
        try:
            got = GROUPS[g](tolerances.get(g, tolerances.get("*")))
        except Exception as exc:  # a crashing group is a failed check, not a crashed run
            got = [Check(f"{g}/error", "no exception", f"{type(exc).__name__}: {exc}",
                         None, False)]
        timings[g] = time.perf_counter() - t0
        checks.extend(c for c in got if not pattern or pattern in c.claim)
    checks.sort(key=lambda c: c.claim)
    return checks, timings

"""Command-line front end: ``kdvls <command> [options]``.

Every command computes one sweep (a table) and a scalar summary. Output is
written as CSV (``#`` header lines carrying version, grid, tolerances and the
summary, then one comma-separated table) or as JSON (summary, checks and
provenance; keys in a fixed order). ``--out PREFIX`` writes both
``PREFIX.csv`` and ``PREFIX.json``; without it the selected ``--format`` goes
to standard output.

Exit codes: 0 success, 2 domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__, continuation, discretize, greens, spectra, stability
from .discretize import Block
from .errors import DomainError, NumericalFailure, TruncationWarning
from .grid import Grid, default_grid, default_n_points
from .model import (ExactFamily, Family, ModelParams, WaveProfile, conserved_quantities,
                    first_invariant, residual_ode, sample_exact, second_invariant_k1,
                    second_invariant_melnikov)

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3


@dataclass
class Result:
    """What a command produces: a table, a scalar summary and named checks."""

    command: str
    columns: list
    rows: list
    summary: dict
    grid: Grid | None = None
    tolerances: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)


# -- formatting ----------------------------------------------------------------

def _num(x):
    """Deterministic scalar representation for CSV cells and JSON values."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    return str(x)


def _cell(x) -> str:
    x = _num(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


def _grid_info(g: Grid | None) -> dict:
    if g is None:
        return {}
    return {"half_length": g.half_length, "n_points": g.n_points, "order": g.order, "h": g.h}


def render_csv(res: Result) -> str:
    out = io.StringIO()
    out.write(f"# kdvls {__version__} command={res.command}\n")
    gi = _grid_info(res.grid)
    out.write("# grid: " + (", ".join(f"{k}={_cell(v)}" for k, v in gi.items()) or "none") + "\n")
    out.write("# tolerances: "
              + (", ".join(f"{k}={_cell(v)}" for k, v in res.tolerances.items()) or "none") + "\n")
    for k, v in res.summary.items():
        val = _num(v)
        out.write(f"# {k}=" + (json.dumps(val) if isinstance(val, (list, dict)) else _cell(val))
                  + "\n")
    for c in res.checks:
        out.write(f"# check {c['name']}: {'PASS' if c['passed'] else 'FAIL'}\n")
    out.write(",".join(res.columns) + "\n")
    for row in res.rows:
        out.write(",".join(_cell(v) for v in row) + "\n")
    return out.getvalue()


def render_json(res: Result) -> str:
    doc = {
        "command": res.command,
        "version": __version__,
        "grid": _num(_grid_info(res.grid)),
        "tolerances": _num(res.tolerances),
        "summary": _num(res.summary),
        "checks": _num(res.checks),
        "columns": list(res.columns),
        "n_rows": len(res.rows),
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _check(name, reference, computed, tol, passed=None) -> dict:
    if passed is None:
        passed = abs(computed - reference) <= tol
    return {"name": name, "reference": reference, "computed": computed, "tolerance": tol,
            "passed": bool(passed)}


# -- grid handling -------------------------------------------------------------

def _grid(args, c: float, Omega: float | None) -> Grid:
    n = args.N if args.N is not None else default_n_points()
    if args.L is not None:
        return Grid(args.L, n)
    return default_grid(c, Omega, n)


# -- commands ------------------------------------------------------------------

def cmd_exact(args) -> Result:
    fam = ExactFamily(Family(args.family), args.c, args.omega, args.k, args.s)
    om = None if fam.family is Family.KDV_UNCOUPLED else fam.Omega
    g = _grid(args, fam.c, om)
    prof = sample_exact(fam, g)
    p = fam.params
    rU, rA, rnorm = residual_ode(prof, p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        cons = conserved_quantities(prof, p)
    summary = {"family": fam.family.value, "c": fam.c, "Omega": fam.Omega, "k": fam.k,
               "s": fam.s, "Q": cons.Q, "P": cons.P, "P_U": cons.P_U, "H": cons.H,
               "truncated": cons.truncated, "residual_norm": rnorm,
               "first_invariant_deviation": float(np.max(np.abs(first_invariant(prof, p))))}
    second = None
    if fam.family is Family.SECH_BRIGHT:
        second = second_invariant_melnikov(prof, p)
    elif abs(fam.k - 1.0) < 1e-12 and abs(fam.Omega + fam.c) < 1e-12:
        second = second_invariant_k1(prof, p)
    if second is not None:
        summary["second_invariant_deviation"] = float(np.max(second) - np.min(second))
    rows = [row for row in zip(g.nodes, prof.U, prof.A, rU, rA)]
    return Result("exact", ["xi", "U", "A", "residual_U", "residual_A"], rows, summary, g,
                  {"boundary_tol": 1e-10})


def cmd_ladder(args) -> Result:
    lad = spectra.bifurcation_ladder(args.c, args.k)
    g = _grid(args, args.c, min(lad.points))
    prof = continuation.kdv_profile(args.c, g)
    rows, checks = [], []
    for j, (om, e) in enumerate(zip(lad.points, lad.exponents), start=1):
        L2 = discretize.assemble(Block.L2, prof, ModelParams(args.c, om, args.k), g)
        lam = float(discretize.lowest_eigs(L2, j)[j - 1])
        rows.append((j, om, e, lam))
        checks.append(_check(f"L2 eigenvalue {j} vanishes at Omega_c^({j})", 0.0, lam, 1e-4))
    summary = {"c": args.c, "k": args.k, "J": lad.J, "points": list(lad.points),
               "exponents": list(lad.exponents)}
    return Result("ladder", ["j", "Omega_c", "exponent", "l2_eigenvalue_j"], rows, summary, g,
                  {"zero_crossing": 1e-4}, checks)


def cmd_projection(args) -> Result:
    which = greens.Which.FIRST if args.which == "first" else greens.Which.SECOND
    if args.p is not None:
        exps = np.array([args.p], dtype=float)
    else:
        exps = np.round(np.arange(args.pmin, args.pmax + 0.5 * args.dp, args.dp), 12)
    exps, vals = greens.projection_curve(which, exps)
    summary = {"which": args.which, "n": int(exps.size), "sign_changes":
               greens.sign_changes(exps, vals) if exps.size > 1 else []}
    if exps.size == 1:
        summary["integral"] = float(vals[0])
    else:
        i = int(np.argmin(vals))
        summary["sampled_min_exponent"] = float(exps[i])
        summary["sampled_min_value"] = float(vals[i])
    rows = list(zip(exps, vals))
    return Result("projection", ["exponent", "integral"], rows, summary, None,
                  {"y_max": greens.Y_MAX, "n_y": greens.N_Y})


def cmd_branch(args) -> Result:
    c, k, j = args.c, args.k, args.j
    a = np.round(np.linspace(args.amax / args.na, args.amax, args.na), 12)
    parity = "even" if j == 1 else "odd"
    g = _grid(args, c, spectra.omega_bif(j, c, k)) if (args.L or args.N) else \
        continuation.branch_grid(j, c, k)
    cfg = continuation.BvpConfig(g, parity_a=parity)
    pts = continuation.continue_branch(j, c, k, a, cfg, analyze=not args.no_analyze)
    if not pts:
        raise NumericalFailure("no branch point converged", j=j, c=c, k=k)
    cols = ["a", "Omega", "amplitude", "residual_norm", "U_max", "A_max"]
    if not args.no_analyze:
        cols += ["morse_lj", "nullity_lj", "morse_full", "nullity_full",
                 "d11", "d12", "d21", "d22", "classification"]
    rows = []
    for pt in pts:
        r = [pt.a, pt.params.Omega, pt.amplitude, pt.profile.residual_norm,
             float(np.max(np.abs(pt.profile.U))), float(np.max(np.abs(pt.profile.A)))]
        if not args.no_analyze:
            D = pt.D
            r += [pt.spectrum_lj.morse_index, pt.spectrum_lj.nullity,
                  pt.spectrum_full.morse_index, pt.spectrum_full.nullity,
                  D.d11, D.d12, D.d21, D.d22, str(pt.classification)]
        rows.append(r)
    summary = {"j": j, "c": c, "k": k, "Omega_c": spectra.omega_bif(j, c, k),
               "n_converged": len(pts), "n_requested": int(a.size)}
    if len(pts) >= 3:
        fits = continuation.fit_branch(pts)
        summary.update(quad_coeff=fits.quad_coeff, quartic_coeff=fits.quartic_coeff,
                       slope_U=fits.slope_U, slope_A=fits.slope_A)
    if j == 1:
        summary["quad_coeff_prediction"] = greens.delta_omega_prediction(1.0, c, k)
    if not args.no_analyze:
        summary["classifications"] = sorted({str(pt.classification) for pt in pts})
    return Result("branch", cols, rows, summary, g,
                  {"newton_tol": cfg.newton_tol, "d_rel_step": continuation.D_REL_STEP})


def _spectrum_profile(args, g):
    if args.family == "kdv":
        return continuation.kdv_profile(args.c, g), ModelParams(args.c, args.omega, args.k)
    fam = ExactFamily(Family(args.family), args.c, args.omega, args.k)
    return sample_exact(fam, g), ModelParams(fam.c, fam.Omega, fam.k, fam.s)


def cmd_spectrum(args) -> Result:
    target = args.target
    if target == "lj_gamma":
        g = discretize.eta_grid(args.N)
        op = discretize.assemble(Block.LJ_GAMMA, None, None, g, gamma=args.gamma)
        rep = discretize.low_spectrum(op, args.m)
        summary = {"target": target, "gamma": args.gamma, "morse_index": rep.morse_index,
                   "nullity": rep.nullity}
        return Result("spectrum", ["index", "eigenvalue"], list(enumerate(rep.eigenvalues)),
                      summary, g, {"tol_zero": rep.tol_zero})
    if args.omega is None:
        raise DomainError("--omega is required for this target")
    g = _grid(args, args.c, args.omega)
    if target == "primary":
        pi = continuation.primary_branch_index(args.c, args.k, args.omega, g, args.m)
        rep = pi.spectrum
        summary = {"target": target, "c": args.c, "k": args.k, "Omega": args.omega,
                   "morse_index": pi.n, "nullity": pi.z, "n_beyond_kdv": pi.n_beyond_kdv,
                   "dP_dc": pi.dP_dc, "n_hat": pi.n_hat, "z_hat": pi.z_hat,
                   "classification": str(pi.classification)}
    else:
        prof, p = _spectrum_profile(args, g)
        op = discretize.assemble(Block[target.upper()], prof, p, g)
        rep = discretize.low_spectrum(op, args.m)
        summary = {"target": target, "family": args.family, "c": p.c, "k": p.k,
                   "Omega": p.Omega, "morse_index": rep.morse_index, "nullity": rep.nullity}
    return Result("spectrum", ["index", "eigenvalue"], list(enumerate(rep.eigenvalues)),
                  summary, g, {"tol_zero": rep.tol_zero})


def cmd_stability(args) -> Result:
    c, k = args.c, args.k
    if args.a is not None:
        if args.L is not None or args.N is not None:
            g = _grid(args, c, spectra.omega_bif(2, c, k))
        else:
            base = continuation.branch_grid(2, c, k)
            g = Grid(2.0 * base.half_length, 2 * base.n_points - 1, base.order)
        res = stability.branch_point_pair(k, args.a, c, grid=g)
        modes = [res.mode] if res.mode is not None else []
    else:
        om = stability.second_bifurcation_omega(c, k) if args.omega is None else args.omega
        p = ModelParams(c, om, k)
        g = _grid(args, c, om)
        prof = sample_exact(ExactFamily(Family.KDV_UNCOUPLED, c), g)
        res = stability.embedded_negative_pair(k, c, profile=prof, params=p)
        opr = stability.build_stability(prof, p, g)
        lo, hi = args.window if args.window else (res.omega_estimate - 0.05,
                                                  res.omega_estimate + 0.05)
        modes = stability.neutral_modes(opr, (lo, hi), localized_only=not args.all_modes)
    rows = [(m.eigenvalue.real, m.eigenvalue.imag, m.krein, m.krein_value, m.embedded,
             m.localization) for m in modes]
    summary = {"c": c, "k": k, "Omega": res.Omega, "omega_estimate": res.omega_estimate,
               "embedded": res.embedded, "band_tol": res.band_tol,
               "krein": None if res.mode is None else res.mode.krein,
               "in_closed_form_window": spectra.in_instability_window(k),
               "window": list(spectra.instability_k_window())}
    if args.a is not None:
        summary["a"] = args.a
    tol = {"localization_mass": stability.LOCALIZATION_MASS,
           "real_part_tol": stability.REAL_PART_TOL}
    return Result("stability", ["re", "im", "krein", "krein_value", "embedded", "localization"],
                  rows, summary, g, tol)


def _verify_checks() -> list:
    checks = []
    pt = spectra.poschl_teller_spectrum(12.0)
    checks.append(_check("T+4 spectrum (gamma=12) = {-5, 0(resonance), 3}", 0.0,
                         max(abs(a - b) for a, b in zip([e + 4 for e in pt.eigenvalues],
                                                        [-5.0, 0.0, 3.0])), 1e-12))
    g = default_grid(1.0)
    prof = continuation.kdv_profile(1.0, g)
    lam = discretize.lowest_eigs(discretize.assemble(Block.L1, prof, ModelParams(1, -1, 1), g),
                                  3)
    checks.append(_check("4 L1 spectrum at the KdV soliton", 0.0,
                         float(np.max(np.abs(4 * lam - [-5, 0, 3]))), 1e-4))
    lad = spectra.bifurcation_ladder(1.0, 0.5)
    checks.append(_check("ladder c=1 k=1/2 -> {-1, -1/4}", 0.0,
                         max(abs(lad.points[0] + 1), abs(lad.points[1] + 0.25)), 1e-14))
    checks.append(_check("int g^2 W dy at p=1", -0.25, greens.projection(greens.Which.FIRST, 1),
                         1e-7))
    checks.append(_check("int gt^2 Wt dy at q=1", 1 / 60,
                         greens.projection(greens.Which.SECOND, 1), 1e-7))
    h = 0.025
    v = [greens.projection(greens.Which.FIRST, 1 + d) for d in (-h, 0.0, h)]
    checks.append(_check("first projection curve has a local minimum at p=1", 1.0,
                         float(v[1] < v[0] and v[1] < v[2]), 0.0))
    pts = continuation.continue_branch(1, 1.0, 1 / 6, [0.1])
    x = abs(pts[0].params.Omega)
    checks.append(_check("numeric d22 vs reference 72 |Omega|^-1/2 (c - 16|Omega|)",
                         72 / math.sqrt(x) * (1 - 16 * x), pts[0].D.d22,
                         0.02 * abs(72 / math.sqrt(x) * (1 - 16 * x))))
    fb = ExactFamily(Family.SECH_BRIGHT, 1.0, -0.125)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        cb = conserved_quantities(sample_exact(fb), fb.params)
        ck = conserved_quantities(sample_exact(ExactFamily(Family.KDV_UNCOUPLED, 1.0)),
                                  ModelParams(1, -1, 1))
    checks.append(_check("P(KdV soliton, c=1) = 12", 12.0, ck.P, 1e-7))
    checks.append(_check("P_U bright (Omega=-1/8) = 96|Omega|^1.5", 96 * 0.125**1.5, cb.P_U,
                         1e-6 * 96 * 0.125**1.5))
    checks.append(_check("Q bright (Omega=-1/8)", 144 * 0.5 * 0.125**0.5, cb.Q,
                         1e-6 * 144 * 0.5 * 0.125**0.5))
    checks.append(_check("mu_0(6) = 8", 8.0, discretize.generalized_eigs_odd(6.0).mu_translation, 8e-3))
    checks.append(_check("<K z0, z0>(6) = 8/15", 8 / 15, discretize.k_quadratic_form_z0(6.0),
                         1e-5))
    checks.append(_check("<L1(4)^-1 sech^2, sech^2> = -1/4", -0.25,
                         discretize.green_scalar_gamma(4.0), 1e-6))
    zs = continuation.zero_sum_identity(1.0, 1 / 6)
    checks.append(_check("zero-sum identity", 0.0, zs.total, 1e-6))
    checks.append(_check("<U0, w2> at k=1/6", -6.0, continuation.u0_w2_inner(1.0), 1e-5))
    for k, want in [(0.5, True), (2.0, False)]:
        r = stability.embedded_negative_pair(k)
        checks.append(_check(f"embedded negative-Krein pair at k={k}", float(want),
                             float(r.embedded), 0.0))
    return checks


def cmd_verify(args) -> Result:
    checks = _verify_checks()
    rows = [(c["name"], c["reference"], c["computed"], c["tolerance"],
             "PASS" if c["passed"] else "FAIL") for c in checks]
    summary = {"n_checks": len(checks), "n_passed": sum(c["passed"] for c in checks)}
    return Result("verify", ["check", "reference", "computed", "tolerance", "status"], rows,
                  summary, None, {}, checks)


# -- argument parsing ----------------------------------------------------------

def _add_grid(p):
    p.add_argument("--L", type=float, default=None, help="domain half-length override")
    p.add_argument("--N", type=int, default=None,
                   help="number of grid nodes (odd; default KDVLS_GRID_N or 4001)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdvls", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"kdvls {__version__}")
    ap.add_argument("--format", choices=("csv", "json"), default="csv",
                    help="format written to stdout when --out is not given")
    ap.add_argument("--out", default=None, help="write PREFIX.csv and PREFIX.json")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="sample an exact family with residuals and invariants")
    p.add_argument("--family", choices=[f.value for f in Family], required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--s", type=int, choices=(-1, 1), default=1)
    _add_grid(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("ladder", help="pitchfork points Omega_c^(j) of the KdV soliton")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    _add_grid(p)
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("projection", help="projection integrals int g^2 W dy over an exponent")
    p.add_argument("--which", choices=("first", "second"), default="first")
    p.add_argument("--p", "--q", dest="p", type=float, default=None, help="single exponent")
    p.add_argument("--pmin", type=float, default=0.05)
    p.add_argument("--pmax", type=float, default=4.0)
    p.add_argument("--dp", type=float, default=0.025)
    p.set_defaults(func=cmd_projection)

    p = sub.add_parser("branch", help="continue the j-th pitchfork branch in amplitude a")
    p.add_argument("--j", type=int, choices=(1, 2), required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--amax", type=float, default=0.2)
    p.add_argument("--na", type=int, default=20)
    p.add_argument("--no-analyze", action="store_true",
                   help="skip spectra, D matrix and classification")
    _add_grid(p)
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("spectrum", help="lowest eigenvalues and Morse counts of a Hessian block")
    p.add_argument("--target", choices=("l1", "l2", "lj", "full", "lj_gamma", "primary"),
                   required=True)
    p.add_argument("--family", choices=[f.value for f in Family], default="kdv")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--gamma", type=float, default=6.0)
    p.add_argument("--m", type=int, default=8)
    _add_grid(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("stability", help="neutral modes of J L and the embedded LS pair")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--omega", type=float, default=None,
                   help="default: the second pitchfork point")
    p.add_argument("--a", type=float, default=None,
                   help="use the j=2 branch point at this amplitude instead")
    p.add_argument("--window", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--all-modes", action="store_true", help="include non-localized modes")
    _add_grid(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("verify", help="reference values vs computed values")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        res = args.func(args)
    except DomainError as exc:
        print(f"kdvls: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalFailure as exc:
        print(f"kdvls: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(res))
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(render_json(res))
    else:
        try:
            sys.stdout.write(render_csv(res) if args.format == "csv" else render_json(res))
            sys.stdout.flush()
        except BrokenPipeError:  # e.g. piped into head
            sys.stderr.close()
            return EXIT_OK
    if res.command == "verify":
        for c in res.checks:
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

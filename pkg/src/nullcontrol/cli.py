"""Command-line front end.

Exit codes: 0 success, 1 verification failure (residual over tolerance,
inadmissible perturbation, violated necessary condition), 2 input or usage
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import demos
from .eigen import EigenError
from .gram import gamma_sequence, gram_matrix, gram_quadrature_oracle
from .io import (
    ProblemFormatError,
    control_to_dict,
    decode_complex,
    gram_csv_rows,
    load_json,
    problem_from_dict,
    write_csv,
    write_json,
)
from .minimality import boas_certificate, classify_minimality
from .moments import IllConditionedError, MomentTargets, solvability_diagnostic
from .perturbation import perturbed_controllability_check, strip_deviation_mass
from .simulator import (
    modal_state,
    modal_trajectory,
    quadrature_state_oracle,
    verify_null_controllability,
)
from .spectral import ControlProblem, DeviationRule, SpectrumError, validate_spectrum
from .synthesis import (
    NecessaryConditionError,
    NonRealControlError,
    realify,
    synthesize_null_control,
)

log = logging.getLogger("nullcontrol")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
TRACE_POINTS = 201


class VerificationFailure(Exception):
    pass


def _order(p: ControlProblem, n: int | None) -> int:
    n = p.order if n is None else n
    if not 1 <= n <= p.order:
        raise ProblemFormatError("--n", f"order {n} outside 1..{p.order}")
    return n


def analyze_problem(p: ControlProblem, n: int | None = None, seed: int = 0, panels: int = 256) -> dict:
    n = _order(p, n)
    fam = p.family()
    gamma = gamma_sequence(fam, n)
    minimality = classify_minimality(gamma)
    gn = gamma.values[-1]
    boas = boas_certificate(fam, gn, n=n, seed=seed).as_dict() if gn > 0 else None
    G = gram_matrix(fam, n).entries
    Q = gram_quadrature_oracle(fam, n, panels).entries
    disc = float(np.linalg.norm(G - Q) / np.linalg.norm(G))
    targets = MomentTargets(tuple(-x for x in p.x0[:n]))
    profile = solvability_diagnostic(fam, targets, n)
    return {
        "command": "analyze",
        "order": n,
        "horizon": p.horizon,
        "spectrum_validation": validate_spectrum(p.spectrum).as_dict(),
        "minimality": minimality.as_dict(),
        "boas_certificate": boas,
        "gram_quadrature_check": {"panels": panels, "relative_frobenius": disc},
        "solvability": profile.as_dict(),
    }


def synthesize_problem(p: ControlProblem, n: int | None = None):
    n = _order(p, n)
    result = synthesize_null_control(p, n)
    note = None
    if p.spectrum.truncate(n).conjugate_closed:
        try:
            result = realify(result)
        except NonRealControlError as exc:
            note = str(exc)
    else:
        note = "spectrum not conjugate-closed; control left complex"
    report = {
        "command": "synthesize",
        "order": n,
        "horizon": p.horizon,
        "control": control_to_dict(result.control),
        "control_norm": result.control.norm(),
        "targets": list(result.targets.values),
        "moment_residual": result.moment_residual,
        "gamma_used": result.gamma_used,
        "realness_defect": result.realness_defect,
        "real": result.real,
        "realify_note": note,
    }
    return report, result


def simulate_problem(
    p: ControlProblem,
    n: int | None = None,
    J: int | None = None,
    tol: float = 1e-8,
    panels: int = 256,
):
    report, result = synthesize_problem(p, n)
    u = result.control
    verification = verify_null_controllability(p, u, J, tol)
    times = np.linspace(0.0, result.control.horizon, 9)[1:]
    worst = 0.0
    for t in times:
        exact = modal_state(p, u, t, verification.check_order)
        approx = quadrature_state_oracle(p, u, t, panels, verification.check_order)
        J_ = verification.check_order
        lam = p.spectrum.array()[:J_]
        # Cauchy-Schwarz size of each mode, so cancellation is measured fairly
        size = np.abs(p.x0_array()[:J_]) + p.family().norms(J_) * u.norm()
        scale = np.abs(np.exp(lam * t)) * np.maximum(size, 1.0)
        worst = max(worst, float(np.max(np.abs(exact - approx) / scale)))
    report.update(
        command="simulate",
        verification=verification.as_dict(),
        oracle_check={"panels": panels, "max_relative_discrepancy": worst},
    )
    return report, result, verification


def _trajectory_rows(p: ControlProblem, result, J: int, t_end: float):
    times = np.linspace(0.0, t_end, TRACE_POINTS)
    X = modal_trajectory(p, result.control, times, J)
    for t, row in zip(times, X):
        for j, x in enumerate(row, start=1):
            yield [float(t), j, float(x.real), float(x.imag)]


def _control_rows(result):
    u = result.control
    t = np.linspace(0.0, u.horizon, TRACE_POINTS)
    for ti, ui in zip(t, u(t)):
        yield [float(ti), float(ui.real), float(ui.imag)]


def _gamma_rows(gamma):
    for i, (g, flag) in enumerate(zip(gamma["gamma"], gamma["gamma_below_precision_floor"]), start=1):
        tol = gamma["gamma_tolerance"][i - 1] if gamma["gamma_tolerance"] else 0.0
        yield [i, float(g), float(tol), int(flag)]


def perturb_document(doc: dict, n: int | None, J: int | None, tol: float, seed: int, force: bool):
    if not isinstance(doc, dict) or "reference" not in doc or "perturbed" not in doc:
        raise ProblemFormatError("", "perturb input needs 'reference' and 'perturbed' objects")
    ref = problem_from_dict(doc["reference"], "reference.")
    pert_doc = doc["perturbed"]
    if not isinstance(pert_doc, dict):
        raise ProblemFormatError("perturbed", "expected an object")
    merged = dict(doc["reference"])
    merged.update(pert_doc)
    pert = problem_from_dict(merged, "perturbed.")
    n = _order(ref, n)
    if n > pert.order:
        raise ProblemFormatError("--n", f"order {n} exceeds the perturbed problem size {pert.order}")
    if ref.horizon != pert.horizon:
        raise ProblemFormatError("perturbed", "reference and perturbed horizons differ")
    rep = perturbed_controllability_check(ref, pert, n, J, tol, force=force, seed=seed)
    out = {"command": "perturb", "order": n, "horizon": ref.horizon, "tolerance": tol}
    out.update(rep.as_dict())
    if "deviation" in doc:
        rule = DeviationRule(decode_complex(doc["deviation"], "deviation"))
        K = int(doc.get("K", 100))
        gamma_strip = float(np.max(np.abs(ref.spectrum.array().real)))
        mass = strip_deviation_mass(ref.horizon, gamma_strip, rule, K)
        out["strip_mass"] = mass.as_dict()
        out["strip_mass"]["gamma_strip"] = gamma_strip
        out["strip_mass"]["q_mass_bound"] = math.sqrt(mass.total / rep.deviation.alpha_sq)
    return out, rep


def _emit(args, stem: str, report: dict, csvs: dict) -> None:
    out = Path(args.out)
    if args.format in ("json", "both"):
        write_json(report, out / f"{stem}.json")
    if args.format in ("csv", "both"):
        for name, (header, rows) in csvs.items():
            write_csv(out / f"{stem}.{name}.csv", header, rows)


def _load(args) -> ControlProblem:
    if not args.input:
        raise ProblemFormatError("--input", "required for this subcommand")
    return problem_from_dict(load_json(args.input))


def cmd_analyze(args) -> int:
    p = _load(args)
    rep = analyze_problem(p, args.n, args.seed, args.panels)
    G = gram_matrix(p.family(), rep["order"]).entries
    _emit(
        args,
        "analyze",
        rep,
        {
            "gamma": (["n", "gamma", "tolerance", "below_floor"], _gamma_rows(rep["minimality"])),
            "gram": (None, gram_csv_rows(G)),
        },
    )
    boas = rep["boas_certificate"]
    if rep["minimality"]["verdict"] == "degenerate" or (boas is not None and not boas["passed"]):
        return EXIT_FAIL
    return EXIT_OK


def cmd_synthesize(args) -> int:
    p = _load(args)
    rep, result = synthesize_problem(p, args.n)
    _emit(args, "synthesize", rep, {"control": (["t", "re_u", "im_u"], _control_rows(result))})
    limit = args.tol * max(1.0, float(np.linalg.norm(p.x0_array())))
    return EXIT_OK if rep["moment_residual"] <= limit else EXIT_FAIL


def cmd_simulate(args) -> int:
    p = _load(args)
    rep, result, ver = simulate_problem(p, args.n, args.check_order, args.tol, args.panels)
    _emit(
        args,
        "simulate",
        rep,
        {
            "control": (["t", "re_u", "im_u"], _control_rows(result)),
            "modes": (["t", "j", "re_x", "im_x"], _trajectory_rows(p, result, ver.check_order, p.t1)),
        },
    )
    return EXIT_OK if ver.passed else EXIT_FAIL


def cmd_perturb(args) -> int:
    if not args.input:
        raise ProblemFormatError("--input", "required for this subcommand")
    doc = load_json(args.input)
    tol = args.tol if args.tol_given else 1e-7
    rep, res = perturb_document(doc, args.n, args.check_order, tol, args.seed, args.force)
    _emit(args, "perturb", rep, {"q": (["n", "q"], enumerate(res.deviation.q_values, start=1))})
    return EXIT_OK if rep["verdict"] == "pass" else EXIT_FAIL


def _demo_heat(args) -> int:
    p = demos.heat_problem()
    J = args.check_order or demos.HEAT_CHECK
    rep, result, ver = simulate_problem(p, args.n or demos.HEAT_ORDER, J, args.tol, args.panels)
    rep["command"] = "demo"
    rep["demo"] = "heat-null-control"
    _emit(
        args,
        "heat-null-control",
        rep,
        {
            "control": (["t", "re_u", "im_u"], _control_rows(result)),
            "modes": (["t", "j", "re_x", "im_x"], _trajectory_rows(p, result, ver.check_order, p.t1)),
        },
    )
    return EXIT_OK if ver.passed else EXIT_FAIL


def _demo_strip(args) -> int:
    ref, pert = demos.strip_problems(args.n or demos.STRIP_ORDER)
    n = args.n or demos.STRIP_ORDER
    tol = args.tol if args.tol_given else demos.STRIP_TOL
    rep = perturbed_controllability_check(ref, pert, n, args.check_order, tol, seed=args.seed)
    out = {"command": "demo", "demo": "strip-perturbation", "order": n, "horizon": ref.horizon, "tolerance": tol}
    out.update(rep.as_dict())
    mass = strip_deviation_mass(ref.horizon, 0.0, DeviationRule(1.0), 100)
    out["strip_mass"] = mass.as_dict()
    out["strip_mass"]["q_mass_bound"] = math.sqrt(mass.total / rep.deviation.alpha_sq)
    _emit(args, "strip-perturbation", out, {"q": (["n", "q"], enumerate(rep.deviation.q_values, start=1))})
    return EXIT_OK if rep.verdict == "pass" else EXIT_FAIL


def _demo_profile(args) -> int:
    p = demos.heat_profile_problem(args.n or demos.PROFILE_ORDER)
    gamma = gamma_sequence(p.family())
    minimality = classify_minimality(gamma)
    rep = {
        "command": "demo",
        "demo": "strong-minimality-heat",
        "horizon": p.horizon,
        "order": len(gamma),
        "minimality": minimality.as_dict(),
        "monotone_within_tolerance": gamma.is_monotone(),
    }
    _emit(args, "strong-minimality-heat", rep, {"gamma": (["n", "gamma", "tolerance", "below_floor"], _gamma_rows(rep["minimality"]))})
    return EXIT_FAIL if minimality.verdict == "degenerate" else EXIT_OK


DEMO_HANDLERS = {
    "heat-null-control": _demo_heat,
    "strip-perturbation": _demo_strip,
    "strong-minimality-heat": _demo_profile,
}


def cmd_demo(args) -> int:
    return DEMO_HANDLERS[args.name](args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullcontrol",
        description="Null-controllability of diagonal evolution equations via exponential moment problems.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, default=None, help="problem JSON document")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--n", type=int, default=None, help="truncation order (controlled modes)")
    common.add_argument("--check-order", type=int, default=None, help="modes checked at t1 (default 3n)")
    common.add_argument("--tol", type=float, default=None, help="verification tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--panels", type=int, default=256, help="quadrature panels for oracle checks")
    common.add_argument("--format", choices=["json", "csv", "both"], default="both")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="gamma profile, minimality verdict, solvability")
    sub.add_parser("synthesize", parents=[common], help="minimum-norm null control")
    sub.add_parser("simulate", parents=[common], help="synthesize and verify x(t1) = 0")
    pert = sub.add_parser("perturb", parents=[common], help="deviation test and perturbed synthesis")
    pert.add_argument("--force", action="store_true", help="synthesize even when q >= 1")
    demo = sub.add_parser("demo", parents=[common], help="built-in worked examples")
    demo.add_argument("--name", choices=list(DEMO_HANDLERS), required=True)
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "perturb": cmd_perturb,
    "demo": cmd_demo,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    args.tol_given = args.tol is not None
    if args.tol is None:
        args.tol = 1e-8
    if not (args.tol > 0 and math.isfinite(args.tol)):
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.n is not None and args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON in {args.input}: {exc.msg} at line {exc.lineno}, column {exc.colno}", file=sys.stderr)
        return EXIT_INPUT
    except (ProblemFormatError, SpectrumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NecessaryConditionError as exc:
        print(f"necessary condition violated: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (IllConditionedError, EigenError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

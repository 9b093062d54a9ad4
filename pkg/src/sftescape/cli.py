"""Command line interface: ``sftescape analyze | sequence | verify``.

Exit codes: 0 success, 1 verification failure, 2 parse or usage error,
3 precondition failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config
from .asymptotics import report, theorem_gap
from .catalog import three_symbol_example
from .errors import ConvergenceError, InvalidModelError, PreconditionError
from .modelfile import ModelSpec, load_model
from .oracle import brute_mu_delta_n
from .asymptotics import mu_delta_n
from .sft import validate
from .subsystem import SubsystemAnalysis, analyze, verify_block_equivalence
from .transfer import build_transfer, check_normalized, integrate, perron

log = logging.getLogger("sftescape")

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3

CSV_HEADER = "n,mu_delta_n,scaled,residue,predicted,abs_error"


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return "%.17g" % x


def _floats(a) -> list:
    return np.asarray(a, float).tolist()


def load_spec(args) -> ModelSpec:
    if args.model and args.example:
        raise UsageError("use either --model or --example, not both")
    if args.example:
        if args.example != "paper4":
            raise UsageError(f"unknown example {args.example!r} (available: paper4)")
        model, potential, delta = three_symbol_example(args.ep, args.eq)
        spec = ModelSpec(model, potential, delta, normalize=False)
    elif args.model:
        spec = load_model(args.model)
    else:
        raise UsageError("one of --model PATH or --example paper4 is required")
    if args.delta:
        delta = tuple(s.strip() for s in args.delta.split(",") if s.strip())
        for s in delta:
            spec.model.index(s)
        spec = ModelSpec(spec.model, spec.potential, delta, spec.normalize)
    if not spec.delta:
        raise InvalidModelError("no Delta given (model file 'delta' or --delta)")
    return spec


def run_analysis(spec: ModelSpec, tol: float) -> SubsystemAnalysis:
    potential = spec.working_potential()
    return analyze(spec.model, potential, spec.delta, tol=tol)


def analysis_to_dict(analysis: SubsystemAnalysis, spread_tol: float = config.INDETERMINATE_THRESHOLD) -> dict:
    rep = report(analysis, n_max=analysis.m)
    model = analysis.model
    return {
        "states": ["".join(model.decode(u)) if all(len(s) == 1 for s in model.symbols)
                   else list(model.decode(u)) for u in analysis.transfer.states],
        "pressure": analysis.measure.perron.log_eigenvalue,
        "stationary": _floats(analysis.measure.state_measures),
        "m": analysis.m,
        "classes": analysis.classes_labels(),
        "P_Delta": analysis.p_delta,
        "h": _floats(analysis.h),
        "h_Delta": _floats(analysis.h_delta),
        "h_integrals": _floats(analysis.h_integrals),
        "py_mass": analysis.py_mass,
        "d": _floats(analysis.d),
        "alpha": _floats(analysis.alpha),
        "nu_marginals": _floats(analysis.nu_marginals),
        "z_masks": np.asarray(analysis.z_masks, bool).tolist(),
        "z_union": np.asarray(analysis.z_union, bool).tolist(),
        "limits": _floats(rep.residue_limits),
        "spread": rep.spread,
        "converges_overall": bool(rep.spread <= spread_tol),
        "verdict": rep.verdict,
        "invariants": analysis.invariants(),
    }


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    spec = load_spec(args)
    analysis = run_analysis(spec, args.tol)
    doc = spec.to_dict()
    doc["analysis"] = analysis_to_dict(analysis)
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def sequence_csv(rep) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for n, mu, scaled, residue, predicted, err in rep.rows():
        buf.write(",".join([str(n), _fmt(mu), _fmt(scaled), str(residue), _fmt(predicted), _fmt(err)]) + "\n")
    return buf.getvalue()


def sequence_summary(analysis: SubsystemAnalysis, rep) -> dict:
    return {
        "m": analysis.m,
        "P_Delta": analysis.p_delta,
        "n_max": int(rep.n[-1]),
        "residue_limits": _floats(rep.residue_limits),
        "spread": rep.spread,
        "converges_overall": bool(rep.converges_overall),
        "verdict": rep.verdict,
    }


def cmd_sequence(args) -> int:
    spec = load_spec(args)
    analysis = run_analysis(spec, config.CHECK_TOL)
    tol = config.INDETERMINATE_THRESHOLD if args.tol is None else args.tol
    rep = report(analysis, n_max=args.nmax, tol=tol)
    csv_text = sequence_csv(rep)
    json_text = json.dumps(sequence_summary(analysis, rep), indent=2) + "\n"
    if args.format == "json":
        _write(json_text, args.out)
    else:
        _write(csv_text, args.out)
        if args.out:
            Path(args.out).with_suffix(".json").write_text(json_text, encoding="utf-8")
    return EXIT_OK


def verification_checks(spec: ModelSpec, tol: float):
    """Yield ``(name, passed, value)`` for every check; stops early if a prerequisite fails."""
    diag = validate(spec.model)
    yield "model irreducible and aperiodic", diag.irreducible and diag.aperiodic, float(diag.period or 0)
    if not (diag.irreducible and diag.aperiodic):
        return
    potential = spec.working_potential()
    transfer = build_transfer(spec.model, potential)
    col_dev = float(np.abs(transfer.weights.sum(axis=0) - 1).max())
    yield "potential normalized (L1 = 1)", check_normalized(transfer, tol), col_dev
    if col_dev > tol:
        return
    data = perron(transfer)
    yield "Perron residual", data.residual <= 10 * config.PERRON_TOL, data.residual
    yield "pressure of normalized potential is 0", abs(data.log_eigenvalue) <= tol, abs(data.log_eigenvalue)

    analysis = analyze(spec.model, potential, spec.delta, tol=tol)
    measure = analysis.measure
    n_states = len(transfer.states)
    duality = max(
        abs(integrate(measure, transfer.apply(np.eye(n_states)[i])) - integrate(measure, np.eye(n_states)[i]))
        for i in range(n_states)
    )
    yield "duality int L(psi) dmu = int psi dmu", duality <= tol, duality

    inv = analysis.invariants()
    yield "L_Delta h_j = d_j h_{j+1}", inv["coupling"] <= tol, inv["coupling"]
    yield "prod d_j = exp(m P_Delta)", inv["product"] <= tol, inv["product"]
    yield "alpha_j(0) = 1", inv["alpha_zero"] <= tol, inv["alpha_zero"]
    yield "supp h_j = Z_{Delta_j}", inv["support_mismatches"] == 0, inv["support_mismatches"]
    yield "h_j = w_j on Omega_j", inv["w_match"] <= tol, inv["w_match"]
    yield "L_Delta^m h_Delta = exp(m P_Delta) h_Delta", inv["eigen_m"] <= tol, inv["eigen_m"]

    worst = 0.0
    for n in range(config.ORACLE_MAX_N + 1):
        fast = mu_delta_n(analysis, measure, n)
        slow = brute_mu_delta_n(spec.model, measure, spec.delta, n)
        worst = max(worst, abs(fast - slow) / max(abs(slow), 1e-300))
    yield f"mu(Delta_n) matches enumeration for n <= {config.ORACLE_MAX_N}", worst <= 1e-12, worst

    block = verify_block_equivalence(analysis)
    yield "block-recoded h_j match direct h_j", block.max_h_deviation <= tol, block.max_h_deviation
    yield "block component pressures = m P_Delta", block.block_pressure_deviation <= tol, block.block_pressure_deviation

    gap = theorem_gap(analysis, np.ones(n_states), config.THEOREM_GAP_N)
    yield f"theorem gap at n={config.THEOREM_GAP_N}", gap <= config.THEOREM_GAP_TOL, gap


def cmd_verify(args) -> int:
    tol = config.CHECK_TOL if args.tol is None else args.tol
    if not tol > 0:
        raise UsageError(f"--tol must be a positive tolerance (got {tol}); try --tol {config.CHECK_TOL:g}")
    spec = load_spec(args)
    failures = []
    for name, passed, value in verification_checks(spec, tol):
        print(f"{'PASS' if passed else 'FAIL'}  {name}  [{value:.3e}]")
        if not passed:
            failures.append((value, name))
    if failures:
        value, name = max(failures)
        print(f"verification failed: {len(failures)} check(s); worst residual {value:.3e} ({name})")
        return EXIT_FAILED
    print("all checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("model source")
    source.add_argument("--model", metavar="PATH", help="JSON model file")
    source.add_argument("--example", metavar="NAME", help="built-in model (paper4)")
    source.add_argument("--ep", type=float, default=0.2, help="exp(phi) on C[1] for paper4 (default 0.2)")
    source.add_argument("--eq", type=float, default=0.3, help="exp(phi) on C[2] for paper4 (default 0.3)")
    source.add_argument("--delta", metavar="LABELS", help="comma-separated Delta, overrides the model's")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sftescape", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="subsystem analysis as JSON")
    p.add_argument("--tol", type=float, default=config.CHECK_TOL, help="normalization check tolerance")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sequence", parents=[common], help="scaled mu(Delta_n) sequence as CSV")
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--tol", type=float, default=None, help="spread tolerance for converges_overall")
    p.add_argument("--out", metavar="PATH", help="CSV path; a companion .json summary is written next to it")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--tol", type=float, default=None, help=f"check tolerance (default {config.CHECK_TOL:g})")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, InvalidModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ConvergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

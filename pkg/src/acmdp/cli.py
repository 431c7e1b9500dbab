"""Command-line front end.

Commands: validate, solve, solve-constrained, lex, verify, simulate, sweep,
oracle.  Exit codes: 0 success, 1 usage error, 2 invalid instance,
3 infeasible budgets, 4 verification failure, 5 internal inconsistency.
All emitted documents are canonical (sorted keys, repr floats), so repeated
runs with the same inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .acoe import acoe_residuals, constrained_acoe_residuals, extract_greedy_policy
from .constrained import solve_constrained, lex_solve
from .documents import (
    acoe_csv,
    build_constrained_document,
    build_lex_document,
    build_unconstrained_document,
    parse_document,
    pair_from_document,
    gamma_from_document,
    to_json,
    verify_solution_document,
)
from .errors import (
    DocumentError,
    EmptyAbsorbingSetError,
    EnumerationGuardError,
    InfeasibleStageError,
    InstanceParseError,
    InstanceSemanticError,
    InternalInconsistencyError,
    InvalidModelError,
    MultichainError,
    NonConvergenceError,
)
from .lp import INFEASIBLE, Tolerances
from .model import (
    FiniteMDP,
    QueueFamilySpec,
    build_queue_truncation,
    load_instance,
)
from .occupation import DualCertificate, solve_unconstrained
from .oracles import (
    brute_force_constrained_value,
    brute_force_minimum_value,
    relative_value_iteration,
)
from .simulation import GENERATOR_NAME, simulate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID_INSTANCE = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY_FAILED = 4
EXIT_INTERNAL = 5

ORACLE_BRUTE_FORCE_TOL = 1e-6
ORACLE_RVI_TOL = 1e-5


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}") from exc


def _add_model_flags(p: argparse.ArgumentParser, queue_only: bool = False):
    if not queue_only:
        p.add_argument("--input", help="instance document path")
    p.add_argument("--model", choices=["queue"], help="built-in model family")
    p.add_argument("--lambda", dest="lam", type=float, help="queue arrival probability")
    p.add_argument("--sigma", type=float, help="queue service probability")
    p.add_argument("--hc", type=float, help="queue holding cost coefficient")
    p.add_argument("--rc", type=float, help="queue rejection cost")
    p.add_argument("--N", dest="level", type=int, help="queue truncation level")


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--tol-feas", type=float, default=1e-9, help="feasibility and optimality tolerance")
    p.add_argument("--tol-gap", type=float, default=1e-8, help="duality gap tolerance")
    p.add_argument(
        "--format",
        choices=["human", "structured", "csv"],
        default="human",
        help="output rendering",
    )
    p.add_argument("--out", help="write the rendered output to this path instead of stdout")


def _tols(args) -> Tolerances:
    return Tolerances(feas_tol=args.tol_feas, opt_tol=args.tol_feas, gap_tol=args.tol_gap)


def _queue_spec(args, level=None) -> QueueFamilySpec:
    missing = [
        flag
        for flag, val in (
            ("--lambda", args.lam),
            ("--sigma", args.sigma),
            ("--hc", args.hc),
            ("--rc", args.rc),
        )
        if val is None
    ]
    if level is None:
        if args.level is None:
            missing.append("--N")
        else:
            level = args.level
    if missing:
        raise ValueError(f"--model queue requires {', '.join(missing)}")
    return QueueFamilySpec(
        arrival_prob=args.lam,
        service_prob=args.sigma,
        holding_coeff=args.hc,
        rejection_cost=args.rc,
        truncation_level=level,
    )


def _load_model(args) -> FiniteMDP:
    if getattr(args, "input", None):
        text = Path(args.input).read_text(encoding="utf-8")
        return load_instance(text)
    if args.model == "queue":
        return build_queue_truncation(_queue_spec(args))
    raise ValueError("provide --input PATH or --model queue with its parameters")


def _kappa(args, mdp: FiniteMDP):
    if args.kappa is not None:
        return args.kappa
    if mdp.budgets is not None:
        return [float(v) for v in mdp.budgets]
    raise ValueError("provide --kappa or an instance with budgets")


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _human_core(doc: dict) -> list[str]:
    lines = [f"value: {doc['value']!r}"]
    if "rho" in doc:
        lines.append(f"rho: {doc['rho']!r}")
    res = doc.get("residuals", {})
    for key in sorted(res):
        lines.append(f"residual {key}: {res[key]:.3e}")
    support = [i for i, v in enumerate(doc["p"]) if v > 1e-9]
    lines.append(f"support states: {support}")
    if "alpha" in doc:
        lines.append(f"alpha: {[repr(v) for v in doc['alpha']]}")
    if "beta" in doc:
        lines.append(f"beta: {[repr(v) for v in doc['beta']]}")
    if "complementarity" in doc:
        lines.append(f"complementarity: {doc['complementarity']:.3e}")
    if "binding_constraints" in doc:
        lines.append(f"binding constraints: {doc['binding_constraints']}")
    if "lex_values" in doc:
        lines.append(f"lex values: {[repr(v) for v in doc['lex_values']]}")
    if "acoe" in doc:
        block = doc["acoe"]
        lines.append(f"acoe min slack: {block['min_slack']:.3e}")
        lines.append(f"acoe support covered: {block['support_covered']}")
        lines.append(f"greedy actions: {block['greedy_actions']}")
        lines.append(f"absorbing set: {block['absorbing_set']}")
    return lines


def _emit_solution(args, doc: dict):
    if args.format == "structured":
        _emit(args, to_json(doc))
    elif args.format == "csv":
        _emit(args, acoe_csv(doc))
    else:
        _emit(args, "\n".join(_human_core(doc)) + "\n")


def cmd_validate(args) -> int:
    try:
        mdp = _load_model(args)
    except (InstanceParseError, InstanceSemanticError, InvalidModelError) as exc:
        if args.format == "structured":
            _emit(args, to_json({"ok": False, "violations": [str(exc)]}))
        else:
            _emit(args, f"invalid: {exc}\n")
        return EXIT_INVALID_INSTANCE
    if args.format == "structured":
        _emit(args, to_json({"ok": True, "violations": []}))
    else:
        _emit(
            args,
            f"valid: {mdp.n_states} states, {mdp.n_pairs} admissible pairs, "
            f"{mdp.n_constraints} constraint costs\n",
        )
    return EXIT_OK


def cmd_solve(args) -> int:
    mdp = _load_model(args)
    res = solve_unconstrained(mdp, _tols(args))
    report = acoe_residuals(mdp, res.cert, res.pair)
    greedy = extract_greedy_policy(mdp, res.cert, res.pair)
    doc = build_unconstrained_document(mdp, res, report, greedy)
    _emit_solution(args, doc)
    return EXIT_OK


def cmd_solve_constrained(args) -> int:
    mdp = _load_model(args)
    kappa = _kappa(args, mdp)
    sol = solve_constrained(mdp, kappa, _tols(args))
    if sol.status == INFEASIBLE:
        if args.format == "structured":
            _emit(args, to_json({"status": "infeasible"}))
        else:
            _emit(args, "status: infeasible\n")
        return EXIT_INFEASIBLE
    report = constrained_acoe_residuals(mdp, sol.cert, sol.pair, kappa, sol.value)
    rho_adj = float(sol.value - sol.cert.beta @ np.asarray(kappa, dtype=float))
    cert = DualCertificate(rho=rho_adj, h=sol.cert.h, anchor=sol.cert.anchor)
    greedy = extract_greedy_policy(mdp, cert, sol.pair, cost=sol.cert.adjusted_cost(mdp))
    doc = build_constrained_document(mdp, sol, kappa, report, greedy)
    _emit_solution(args, doc)
    return EXIT_OK


def cmd_lex(args) -> int:
    mdp = _load_model(args)
    kappa = _kappa(args, mdp)
    lex = lex_solve(mdp, kappa, _tols(args), args.lex_eps)
    if lex.status == INFEASIBLE:
        if args.format == "structured":
            _emit(args, to_json({"status": "infeasible"}))
        else:
            _emit(args, "status: infeasible\n")
        return EXIT_INFEASIBLE
    doc = build_lex_document(mdp, lex, kappa, args.lex_eps)
    if args.format == "csv":
        raise ValueError("csv output is not defined for lex documents")
    _emit_solution(args, doc)
    return EXIT_OK


def cmd_verify(args) -> int:
    mdp = _load_model(args)
    doc = parse_document(Path(args.solution).read_text(encoding="utf-8"))
    violations = verify_solution_document(mdp, doc, _tols(args))
    if args.format == "structured":
        _emit(args, to_json({"ok": not violations, "violations": violations}))
    elif violations:
        _emit(args, "".join(f"violation: {v}\n" for v in violations))
    else:
        _emit(args, "verified\n")
    return EXIT_VERIFY_FAILED if violations else EXIT_OK


def cmd_simulate(args) -> int:
    mdp = _load_model(args)
    doc = parse_document(Path(args.solution).read_text(encoding="utf-8"))
    pair = pair_from_document(mdp, doc)
    g, errs = gamma_from_document(mdp, doc)
    if errs:
        raise DocumentError("; ".join(errs))
    lp_averages = [float(v) for v in mdp.costs @ g]
    trace_handle = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        result = simulate(
            mdp,
            pair,
            steps=args.steps,
            seed=args.seed,
            initial_state=args.initial_state,
            burn_in=args.burn_in,
            trace=trace_handle,
        )
    finally:
        if trace_handle is not None:
            trace_handle.close()
    abs_error = [
        abs(float(a) - j) for a, j in zip(result.pathwise_avg, lp_averages)
    ]
    band = [
        max(3.0 * float(s), 0.01 * (1.0 + j))
        for s, j in zip(result.stderr_est, lp_averages)
    ]
    summary = {
        "horizon": result.horizon,
        "seed": result.seed,
        "generator": GENERATOR_NAME,
        "burn_in": result.burn_in,
        "initial_state": result.initial_state,
        "pathwise_avg": [float(v) for v in result.pathwise_avg],
        "stderr": [float(v) for v in result.stderr_est],
        "lp_averages": lp_averages,
        "abs_error": abs_error,
        "band": band,
        "within_band": all(e <= b for e, b in zip(abs_error, band)),
    }
    if args.format == "structured":
        _emit(args, to_json(summary))
    else:
        lines = [
            f"horizon: {result.horizon}",
            f"seed: {result.seed}",
            f"generator: {GENERATOR_NAME}",
        ]
        for i, (avg, se, j) in enumerate(
            zip(summary["pathwise_avg"], summary["stderr"], lp_averages)
        ):
            lines.append(
                f"cost {i}: pathwise {avg!r}, stderr {se!r}, expected {j!r}"
            )
        lines.append(f"within band: {summary['within_band']}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.model != "queue":
        raise ValueError("sweep requires --model queue")
    if not args.sweep_n:
        raise ValueError("sweep requires --sweep-N n1,n2,...")
    rows = ["N,rho"]
    for level in args.sweep_n:
        spec = _queue_spec(args, level=level)
        mdp = build_queue_truncation(spec)
        res = solve_unconstrained(mdp, _tols(args), polish=False)
        rows.append(f"{level},{res.value!r}")
    _emit(args, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    mdp = _load_model(args)
    doc = parse_document(Path(args.solution).read_text(encoding="utf-8"))
    value = doc.get("value")
    if not isinstance(value, (int, float)):
        raise DocumentError("solution document has no numeric value field")
    out: dict = {"lp_value": float(value)}
    ok = True
    if "beta" in doc or "kappa" in doc:
        kappa = doc.get("kappa")
        if kappa is None:
            raise DocumentError("constrained document lacks kappa")
        oracle = brute_force_constrained_value(mdp, kappa)
        out["constrained_oracle_status"] = oracle.status
        out["constrained_oracle_value"] = (
            oracle.value if oracle.value != float("inf") else None
        )
        if oracle.status != "optimal":
            ok = False
            out["agreement"] = "document is optimal but the oracle says infeasible"
        else:
            diff = abs(float(value) - oracle.value)
            out["brute_force_abs_diff"] = diff
            ok = diff <= ORACLE_BRUTE_FORCE_TOL
        out["rvi"] = {"skipped": "constrained document"}
    else:
        bf = brute_force_minimum_value(mdp)
        diff = abs(float(value) - bf.value)
        out["brute_force_value"] = bf.value
        out["brute_force_abs_diff"] = diff
        out["brute_force_policy"] = list(bf.policy)
        out["brute_force_class"] = list(bf.recurrent_class)
        bf_ok = diff <= ORACLE_BRUTE_FORCE_TOL
        rvi_ok = True
        try:
            rvi = relative_value_iteration(mdp)
            rvi_diff = abs(float(value) - rvi.rho)
            out["rvi"] = {
                "rho": rvi.rho,
                "abs_diff": rvi_diff,
                "iterations": rvi.iterations,
            }
            rvi_ok = rvi_diff <= ORACLE_RVI_TOL
        except (MultichainError, NonConvergenceError) as exc:
            out["rvi"] = {"skipped": str(exc)}
        ok = bf_ok and rvi_ok
    out["agreement_ok"] = ok
    if args.format == "structured":
        _emit(args, to_json(out))
    else:
        lines = [f"{k}: {v}" for k, v in sorted(out.items())]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="acmdp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check an instance document or built-in model")
    _add_model_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve the unconstrained average-cost problem")
    _add_model_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("solve-constrained", help="solve with budget constraints")
    _add_model_flags(p)
    _add_common_flags(p)
    p.add_argument("--kappa", type=_float_list, help="budget limits v1,v2,...")
    p.set_defaults(func=cmd_solve_constrained)

    p = sub.add_parser("lex", help="lexicographic minimization over the budget set")
    _add_model_flags(p)
    _add_common_flags(p)
    p.add_argument("--kappa", type=_float_list, help="budget limits v1,v2,...")
    p.add_argument("--lex-eps", type=float, default=1e-8, help="stage pin tolerance")
    p.set_defaults(func=cmd_lex)

    p = sub.add_parser("verify", help="recheck a solution document, no solving")
    _add_model_flags(p)
    _add_common_flags(p)
    p.add_argument("--solution", required=True, help="solution document path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="simulate a solution document's pair")
    _add_model_flags(p)
    _add_common_flags(p)
    p.add_argument("--solution", required=True, help="solution document path")
    p.add_argument("--steps", type=int, default=100000, help="trajectory length")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    p.add_argument("--initial-state", dest="initial_state", type=int, default=None)
    p.add_argument("--trace", help="write a per-step CSV trace to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="solve the queue family over several truncations")
    _add_model_flags(p, queue_only=True)
    _add_common_flags(p)
    p.add_argument("--sweep-N", dest="sweep_n", type=_int_list, help="levels n1,n2,...")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="check a solution document against brute force")
    _add_model_flags(p)
    _add_common_flags(p)
    p.add_argument("--solution", required=True, help="solution document path")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse help/version exit 0; its usage errors carry our code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InstanceParseError, InstanceSemanticError, InvalidModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INSTANCE
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except EnumerationGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        InternalInconsistencyError,
        EmptyAbsorbingSetError,
        InfeasibleStageError,
        MultichainError,
        NonConvergenceError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

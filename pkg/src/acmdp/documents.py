"""Solution documents: canonical JSON emission, parsing, and solver-free
verification.

A solution document records the occupation measure, the (policy,
distribution) pair, the dual certificate, and self-reported residuals.
Constrained documents add slacks, multipliers, and the budgets they were
solved against; lexicographic documents record stagewise values instead of a
certificate.  verify_solution_document recomputes every invariant from the
instance and the document alone, with no solver involvement, so it cannot
share a failure mode with the solve path.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .acoe import AcoeReport, GreedyPolicy
from .constrained import ConstrainedSolution, LexSolution
from .errors import DocumentError
from .lp import DEFAULT_TOLS, Tolerances
from .model import FiniteMDP
from .occupation import (
    StationaryPair,
    UnconstrainedSolution,
    balance_residual,
    dual_feasibility_slacks,
    invariance_residual,
    normalization_residual,
    state_marginal,
)

LEX_EPS_DEFAULT = 1e-8


def to_json(doc: dict) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"solution document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("solution document must be an object")
    return doc


def _nonfinite_paths(node, path: str = "document") -> list[str]:
    if isinstance(node, bool):
        return []
    if isinstance(node, (int, float)):
        return [] if math.isfinite(node) else [path]
    if isinstance(node, list):
        out: list[str] = []
        for i, item in enumerate(node):
            out.extend(_nonfinite_paths(item, f"{path}[{i}]"))
        return out
    if isinstance(node, dict):
        out = []
        for key, item in node.items():
            out.extend(_nonfinite_paths(item, f"{path}.{key}"))
        return out
    return []


def _pair_entries(mdp: FiniteMDP, values: np.ndarray, key: str) -> list[dict]:
    out = []
    for k, (x, a) in enumerate(mdp.pairs):
        v = float(values[k])
        if v != 0.0:
            out.append({"x": x, "a": a, key: v})
    return out


def _core_document(mdp: FiniteMDP, gamma: np.ndarray, value: float, pair) -> dict:
    return {
        "value": float(value),
        "gamma": _pair_entries(mdp, gamma, "weight"),
        "p": [float(v) for v in pair.dist],
        "mu": _pair_entries(mdp, pair.policy, "prob"),
    }


def _acoe_block(
    mdp: FiniteMDP,
    report: AcoeReport,
    pair,
    h: np.ndarray,
    greedy: GreedyPolicy,
) -> dict:
    absorbing = set(greedy.absorbing_set)
    return {
        "inequality_ok": report.inequality_ok,
        "min_slack": report.min_slack,
        "support_covered": report.support_covered,
        "randomized_max_dev": report.randomized_max_dev,
        "equality_states": list(report.equality_states),
        "absorbing_set": list(greedy.absorbing_set),
        "greedy_actions": list(greedy.action),
        "per_state": [
            {
                "state": row.state,
                "p": float(pair.dist[row.state]),
                "h": float(h[row.state]),
                "slack": row.slack,
                "argmin_action": row.argmin_action,
                "in_absorbing_set": row.state in absorbing,
            }
            for row in report.per_state
        ],
    }


def build_unconstrained_document(
    mdp: FiniteMDP,
    res: UnconstrainedSolution,
    report: AcoeReport | None = None,
    greedy: GreedyPolicy | None = None,
) -> dict:
    g = res.gamma.gamma
    slacks = dual_feasibility_slacks(mdp, res.cert.rho, res.cert.h)
    doc = _core_document(mdp, g, res.value, res.pair)
    doc["rho"] = float(res.cert.rho)
    doc["h"] = [float(v) for v in res.cert.h]
    doc["residuals"] = {
        "normalization": normalization_residual(g),
        "balance_max": balance_residual(mdp, g),
        "dual_feas_min_slack": float(np.min(slacks)),
        "gap": abs(res.value - res.cert.rho),
    }
    if report is not None and greedy is not None:
        doc["acoe"] = _acoe_block(mdp, report, res.pair, res.cert.h, greedy)
    return doc


def build_constrained_document(
    mdp: FiniteMDP,
    sol: ConstrainedSolution,
    kappa,
    report: AcoeReport | None = None,
    greedy: GreedyPolicy | None = None,
) -> dict:
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    g = sol.gamma.gamma
    cert = sol.cert
    slacks = dual_feasibility_slacks(mdp, cert.rho, cert.h, cert.adjusted_cost(mdp))
    doc = _core_document(mdp, g, sol.value, sol.pair)
    doc["rho"] = float(cert.rho)
    doc["h"] = [float(v) for v in cert.h]
    doc["alpha"] = [float(v) for v in sol.alpha]
    doc["beta"] = [float(v) for v in cert.beta]
    doc["kappa"] = [float(v) for v in kappa]
    doc["complementarity"] = abs(float(sol.alpha @ cert.beta))
    doc["binding_constraints"] = list(sol.binding_constraints)
    doc["residuals"] = {
        "normalization": normalization_residual(g),
        "balance_max": balance_residual(mdp, g),
        "budget_max": float(
            np.max(np.abs(mdp.costs[1:] @ g + sol.alpha - kappa))
        ),
        "dual_feas_min_slack": float(np.min(slacks)),
        "gap": abs(sol.value - (cert.rho + float(cert.beta @ kappa))),
    }
    if report is not None and greedy is not None:
        doc["acoe"] = _acoe_block(mdp, report, sol.pair, cert.h, greedy)
    return doc


def build_lex_document(
    mdp: FiniteMDP,
    lex: LexSolution,
    kappa,
    lex_eps: float = LEX_EPS_DEFAULT,
) -> dict:
    """Lexicographic documents carry stagewise values, not a certificate; the
    final measure is optimal for the running cost only up to the pin widths,
    so no pointwise dual claims are made."""
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    g = lex.gamma.gamma
    alpha = kappa - mdp.costs[1:] @ g
    doc = _core_document(mdp, g, float(mdp.costs[0] @ g), lex.pair)
    doc["kappa"] = [float(v) for v in kappa]
    doc["alpha"] = [float(v) for v in alpha]
    doc["lex_values"] = [float(v) for v in lex.kappa_star]
    doc["lex_eps"] = float(lex_eps)
    doc["binding_constraints"] = [
        int(i) for i in np.nonzero(alpha <= 1e-9)[0]
    ]
    doc["residuals"] = {
        "normalization": normalization_residual(g),
        "balance_max": balance_residual(mdp, g),
        "budget_max": float(np.max(np.abs(np.minimum(alpha, 0.0)))),
    }
    return doc


def acoe_csv(doc: dict) -> str:
    """Per-state table (state, p, h, slack, argmin_action, in_absorbing_set)."""
    if "acoe" not in doc:
        raise DocumentError("document has no optimality-equation block")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["state", "p", "h", "slack", "argmin_action", "in_absorbing_set"])
    for row in doc["acoe"]["per_state"]:
        writer.writerow(
            [
                row["state"],
                repr(row["p"]),
                repr(row["h"]),
                repr(row["slack"]),
                row["argmin_action"],
                str(row["in_absorbing_set"]).lower(),
            ]
        )
    return buf.getvalue()


def gamma_from_document(mdp: FiniteMDP, doc: dict) -> tuple[np.ndarray, list[str]]:
    """Reconstruct the occupation vector; unknown pairs become messages."""
    errors = []
    g = np.zeros(mdp.n_pairs)
    entries = doc.get("gamma")
    if not isinstance(entries, list):
        return g, ["gamma missing or not a list"]
    for rec in entries:
        try:
            x, a, w = int(rec["x"]), int(rec["a"]), float(rec["weight"])
        except (TypeError, KeyError, ValueError):
            errors.append(f"malformed gamma record {rec!r}")
            continue
        if (x, a) not in mdp.pair_index:
            errors.append(f"gamma references inadmissible pair ({x},{a})")
            continue
        g[mdp.pair_index[(x, a)]] = w
    return g, errors


def pair_from_document(mdp: FiniteMDP, doc: dict) -> StationaryPair:
    """Rebuild the (policy, distribution) pair for simulation.

    Requires every state's policy row to sum to one within 1e-6.
    """
    p = doc.get("p")
    mu = doc.get("mu")
    if not isinstance(p, list) or len(p) != mdp.n_states:
        raise DocumentError("p missing or of wrong length")
    if not isinstance(mu, list):
        raise DocumentError("mu missing or not a list")
    nonfinite = _nonfinite_paths({"p": p, "mu": mu})
    if nonfinite:
        raise DocumentError(f"nonfinite number at {nonfinite[0]}")
    policy = np.zeros(mdp.n_pairs)
    for rec in mu:
        try:
            x, a, prob = int(rec["x"]), int(rec["a"]), float(rec["prob"])
        except (TypeError, KeyError, ValueError) as exc:
            raise DocumentError(f"malformed mu record {rec!r}") from exc
        if (x, a) not in mdp.pair_index:
            raise DocumentError(f"mu references inadmissible pair ({x},{a})")
        policy[mdp.pair_index[(x, a)]] = prob
    for x in range(mdp.n_states):
        r = mdp.state_rows(x)
        total = float(np.sum(policy[r.start : r.stop]))
        if abs(total - 1.0) > 1e-6:
            raise DocumentError(f"mu at state {x} sums to {total!r}")
    dist = np.array([float(v) for v in p])
    if abs(float(dist.sum()) - 1.0) > 1e-6 or np.any(dist < -1e-9):
        raise DocumentError("p is not a probability vector")
    return StationaryPair(policy=policy, dist=dist)


def verify_solution_document(
    mdp: FiniteMDP,
    doc: dict,
    tols: Tolerances = DEFAULT_TOLS,
) -> list[str]:
    """Recheck every invariant a solution document claims, without solving.

    Returns a list of violation messages; an empty list is a pass.  Checks
    finiteness of every number, measure invariants (nonnegativity,
    normalization, balance), pair consistency (marginal, policy rows,
    invariance), value consistency, budget rows when present, dual
    feasibility and the no-gap identity when a certificate is present, and
    stage pins for lexicographic documents.
    """
    bad: list[str] = []
    tol = tols.gap_tol
    # every numeric check below compares against a tolerance, and those
    # comparisons are silently false for NaN, so nonfinite numbers must be
    # rejected before anything else is trusted
    bad.extend(f"nonfinite number at {path}" for path in _nonfinite_paths(doc))
    if bad:
        return bad
    g, errs = gamma_from_document(mdp, doc)
    bad.extend(errs)
    if errs:
        return bad

    if np.any(g < -1e-9):
        k = int(np.argmin(g))
        x, a = mdp.pairs[k]
        bad.append(f"gamma weight at ({x},{a}) is negative: {float(g[k])!r}")
    norm = normalization_residual(g)
    if norm > tol:
        bad.append(f"normalization residual {norm:.3e} exceeds {tol:.1e}")
    marginal = state_marginal(mdp, g)
    flow = marginal - mdp.kernel.T @ g
    worst = int(np.argmax(np.abs(flow)))
    if abs(flow[worst]) > tol:
        bad.append(
            f"balance row {worst} residual {abs(float(flow[worst])):.3e} exceeds {tol:.1e}"
        )

    value = doc.get("value")
    if not isinstance(value, (int, float)):
        bad.append("value missing or not a number")
        return bad
    cost_value = float(mdp.costs[0] @ g)
    if abs(value - cost_value) > tol:
        bad.append(
            f"value {value!r} disagrees with <gamma, c0> = {cost_value!r}"
        )

    try:
        pair = pair_from_document(mdp, doc)
    except DocumentError as exc:
        bad.append(str(exc))
        return bad
    if np.max(np.abs(pair.dist - marginal)) > tol:
        bad.append("p disagrees with the gamma state marginal")
    recon = pair.policy * pair.dist[mdp.pair_states]
    if np.max(np.abs(recon - g)) > tol:
        bad.append("mu * p does not reconstruct gamma")
    inv = invariance_residual(pair, mdp)
    if inv > tol:
        bad.append(f"invariance residual {inv:.3e} exceeds {tol:.1e}")

    kappa = doc.get("kappa")
    alpha = doc.get("alpha")
    kappa_arr = None
    alpha_arr = None
    if alpha is not None or kappa is not None:
        if kappa is None and mdp.budgets is not None:
            kappa = [float(v) for v in mdp.budgets]
        if not isinstance(kappa, list) or len(kappa) != mdp.n_constraints:
            bad.append("kappa missing or of wrong length for a budgeted document")
            return bad
        kappa_arr = np.array([float(v) for v in kappa])
        if not isinstance(alpha, list) or len(alpha) != mdp.n_constraints:
            bad.append("alpha missing or of wrong length")
            return bad
        alpha_arr = np.array([float(v) for v in alpha])
        if np.any(alpha_arr < -1e-9):
            bad.append(f"alpha has a negative entry: {float(alpha_arr.min())!r}")
        budget_resid = mdp.costs[1:] @ g + alpha_arr - kappa_arr
        for i in range(mdp.n_constraints):
            if abs(budget_resid[i]) > tol:
                bad.append(
                    f"budget row {i} residual {abs(float(budget_resid[i])):.3e} "
                    f"exceeds {tol:.1e}"
                )

    rho = doc.get("rho")
    h = doc.get("h")
    beta = doc.get("beta")
    if rho is not None or h is not None:
        if not isinstance(rho, (int, float)) or not isinstance(h, list):
            bad.append("certificate requires both rho and h")
            return bad
        if len(h) != mdp.n_states:
            bad.append(f"h has length {len(h)}, expected {mdp.n_states}")
            return bad
        h_arr = np.array([float(v) for v in h])
        cost = mdp.costs[0]
        beta_arr = None
        if beta is not None:
            if not isinstance(beta, list) or len(beta) != mdp.n_constraints:
                bad.append("beta has the wrong length")
                return bad
            if kappa_arr is None:
                bad.append("beta requires kappa to state the no-gap identity")
                return bad
            beta_arr = np.array([float(v) for v in beta])
            if np.any(beta_arr > 1e-9):
                bad.append(f"beta has a positive entry: {float(beta_arr.max())!r}")
            cost = cost - beta_arr @ mdp.costs[1:]
        slacks = dual_feasibility_slacks(mdp, float(rho), h_arr, cost)
        if np.min(slacks) < -tol:
            k = int(np.argmin(slacks))
            x, a = mdp.pairs[k]
            bad.append(
                f"dual feasibility violated at ({x},{a}): slack {float(slacks[k]):.3e}"
            )
        dual_value = float(rho)
        if beta_arr is not None:
            dual_value += float(beta_arr @ kappa_arr)
        if abs(value - dual_value) > tol:
            bad.append(
                f"duality gap |{value!r} - {dual_value!r}| exceeds {tol:.1e}"
            )
        if beta_arr is not None and alpha_arr is not None:
            comp = abs(float(alpha_arr @ beta_arr))
            if comp > tol:
                bad.append(f"complementarity residual {comp:.3e} exceeds {tol:.1e}")

    lex_values = doc.get("lex_values")
    if lex_values is not None:
        if not isinstance(lex_values, list) or len(lex_values) != mdp.n_constraints + 1:
            bad.append("lex_values has the wrong length")
            return bad
        pin_tol = 10.0 * float(doc.get("lex_eps", LEX_EPS_DEFAULT)) + tol
        for i, target in enumerate(lex_values):
            attained = float(mdp.costs[i] @ g)
            if abs(attained - float(target)) > pin_tol:
                bad.append(
                    f"stage {i} value {attained!r} misses its pin {float(target)!r} "
                    f"by more than {pin_tol:.1e}"
                )
    return bad

"""Finite average-cost MDP models, instance documents, and the queue family.

A model is a finite state set {0..n-1}, an explicit admissible action list per
state, a transition kernel with one row per admissible state-action pair, and
one or more nonnegative cost vectors over those pairs (cost 0 is the running
objective, costs 1..d are constraint costs with optional budget limits).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InstanceParseError, InstanceSemanticError, InvalidModelError

ROW_SUM_TOL = 1e-12

ADMIT = 0
REJECT = 1


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a model's value-level invariants."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True, eq=False)
class FiniteMDP:
    """Immutable finite MDP in dense pair-indexed form.

    kernel has one row per admissible pair, in (state, action) sorted order,
    and one column per state.  costs is (d+1, n_pairs); row 0 is the running
    cost, rows 1..d are constraint costs.  budgets, when present, has length d.
    """

    n_states: int
    actions: tuple[tuple[int, ...], ...]
    kernel: np.ndarray
    costs: np.ndarray
    budgets: np.ndarray | None = None
    name: str | None = None

    def __post_init__(self):
        if not isinstance(self.n_states, int) or self.n_states < 1:
            raise ValueError("n_states must be a positive integer")
        if len(self.actions) != self.n_states:
            raise ValueError("actions must list one action set per state")
        acts = tuple(tuple(int(a) for a in row) for row in self.actions)
        for x, row in enumerate(acts):
            if any(a < 0 for a in row):
                raise ValueError(f"state {x} lists a negative action id")
            if any(row[i] >= row[i + 1] for i in range(len(row) - 1)):
                raise ValueError(f"state {x} action list must be strictly increasing")
        object.__setattr__(self, "actions", acts)

        n_pairs = sum(len(row) for row in acts)
        kernel = np.asarray(self.kernel, dtype=float)
        if kernel.shape != (n_pairs, self.n_states):
            raise ValueError(
                f"kernel shape {kernel.shape} does not match "
                f"({n_pairs}, {self.n_states})"
            )
        costs = np.asarray(self.costs, dtype=float)
        if costs.ndim != 2 or costs.shape[0] < 1 or costs.shape[1] != n_pairs:
            raise ValueError(f"costs shape {costs.shape} must be (d+1, {n_pairs})")
        budgets = self.budgets
        if budgets is not None:
            budgets = np.asarray(budgets, dtype=float).reshape(-1)
            budgets.setflags(write=False)
        kernel.setflags(write=False)
        costs.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "budgets", budgets)

    @property
    def n_pairs(self) -> int:
        return self.kernel.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.costs.shape[0] - 1

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Admissible (state, action) pairs in row order."""
        return tuple((x, a) for x in range(self.n_states) for a in self.actions[x])

    @cached_property
    def pair_index(self) -> dict[tuple[int, int], int]:
        return {pair: k for k, pair in enumerate(self.pairs)}

    @cached_property
    def pair_states(self) -> np.ndarray:
        arr = np.array([x for x, _ in self.pairs], dtype=int)
        arr.setflags(write=False)
        return arr

    def state_rows(self, x: int) -> range:
        """Row range of state x's pairs in kernel/cost arrays."""
        start = self.pair_index[(x, self.actions[x][0])]
        return range(start, start + len(self.actions[x]))

    def validate(self) -> ValidationReport:
        return validate(self)


def validate(mdp: FiniteMDP) -> ValidationReport:
    """Check every value-level model invariant; return all violations found.

    An empty report means the model is a genuine finite MDP: every state has
    at least one admissible action, every kernel row is a probability vector
    (sum within 1e-12 of one), and all costs and budgets are finite and
    nonnegative.
    """
    bad = []
    for x in range(mdp.n_states):
        if not mdp.actions[x]:
            bad.append(f"state {x} has no admissible action")
    for k, (x, a) in enumerate(mdp.pairs):
        row = mdp.kernel[k]
        if not np.all(np.isfinite(row)):
            bad.append(f"row ({x},{a}) has a non-finite entry")
            continue
        neg = np.nonzero(row < 0)[0]
        for y in neg:
            bad.append(f"kernel entry ({x},{a} -> {y}) is negative")
        s = float(row.sum())
        if abs(s - 1.0) > ROW_SUM_TOL:
            bad.append(f"row ({x},{a}) sums to {s!r}")
    for i in range(mdp.costs.shape[0]):
        for k, (x, a) in enumerate(mdp.pairs):
            v = mdp.costs[i, k]
            if not np.isfinite(v):
                bad.append(f"cost {i} at ({x},{a}) is not finite")
            elif v < 0:
                bad.append(f"cost {i} at ({x},{a}) is negative")
    if mdp.budgets is not None:
        if len(mdp.budgets) != mdp.n_constraints:
            bad.append(
                f"budget count {len(mdp.budgets)} does not match "
                f"constraint cost count {mdp.n_constraints}"
            )
        for i, kappa in enumerate(mdp.budgets):
            if not np.isfinite(kappa):
                bad.append(f"budget {i} is not finite")
            elif kappa < 0:
                bad.append(f"budget {i} is negative")
    return ValidationReport(tuple(bad))


def require_valid(mdp: FiniteMDP) -> FiniteMDP:
    report = validate(mdp)
    if not report.ok:
        raise InvalidModelError(report.violations)
    return mdp


def _exact_normalize(row: np.ndarray, x: int, a: int) -> None:
    """Scale a near-stochastic row so it sums to exactly 1.0 in floats.

    Rows whose sum deviates by more than the load tolerance are rejected
    rather than silently repaired.
    """
    s = float(row.sum())
    if abs(s - 1.0) > ROW_SUM_TOL:
        raise InstanceSemanticError(f"row ({x},{a}) sums to {s!r}")
    if s != 1.0:
        row /= s
        resid = 1.0 - float(row.sum())
        if resid != 0.0:
            row[int(np.argmax(row))] += resid


def _record_values(rec, fields):
    """Pull field values out of a record given as a mapping or a sequence."""
    if isinstance(rec, dict):
        return tuple(rec[f] for f in fields)
    return tuple(rec)


def from_entries(
    n_states: int,
    actions,
    transitions,
    costs,
    budgets=None,
    name: str | None = None,
) -> FiniteMDP:
    """Build a model from sparse entries, checking semantic consistency.

    transitions is an iterable of (x, a, y, p) records; costs is an iterable
    of per-cost lists of (x, a, value) records.  Records may be tuples or
    mappings with those field names.  Unlisted transition triples and cost
    entries are zero.  Kernel rows must sum to one within 1e-12 and are
    scaled to sum exactly one.
    """
    if not isinstance(n_states, int) or n_states < 1:
        raise InstanceSemanticError("n_states must be a positive integer")
    action_sets = []
    for x, row in enumerate(actions):
        row = [int(a) for a in row]
        if len(set(row)) != len(row):
            raise InstanceSemanticError(f"state {x} lists a duplicate action")
        if any(a < 0 for a in row):
            raise InstanceSemanticError(f"state {x} lists a negative action id")
        action_sets.append(tuple(sorted(row)))
    if len(action_sets) != n_states:
        raise InstanceSemanticError(
            f"actions lists {len(action_sets)} states, n_states is {n_states}"
        )
    action_sets = tuple(action_sets)

    index = {}
    k = 0
    for x in range(n_states):
        for a in action_sets[x]:
            index[(x, a)] = k
            k += 1
    n_pairs = k
    if n_pairs == 0:
        raise InstanceSemanticError("model has no admissible pair")

    kernel = np.zeros((n_pairs, n_states))
    seen = set()
    for rec in transitions:
        x, a, y, p = _record_values(rec, ("x", "a", "y", "p"))
        x, a, y, p = int(x), int(a), int(y), float(p)
        if not 0 <= x < n_states:
            raise InstanceSemanticError(f"transition references state {x} out of range")
        if not 0 <= y < n_states:
            raise InstanceSemanticError(f"transition references state {y} out of range")
        if (x, a) not in index:
            raise InstanceSemanticError(
                f"transition references inadmissible pair ({x},{a})"
            )
        if (x, a, y) in seen:
            raise InstanceSemanticError(f"duplicate transition record ({x},{a},{y})")
        seen.add((x, a, y))
        if not np.isfinite(p) or p < 0:
            raise InstanceSemanticError(
                f"transition ({x},{a},{y}) has invalid probability {p!r}"
            )
        kernel[index[(x, a)], y] = p
    for (x, a), row_k in index.items():
        _exact_normalize(kernel[row_k], x, a)

    cost_lists = list(costs)
    if not cost_lists:
        raise InstanceSemanticError("costs must list at least the running cost")
    cost_arr = np.zeros((len(cost_lists), n_pairs))
    for i, entries in enumerate(cost_lists):
        seen_c = set()
        for rec in entries:
            x, a, v = _record_values(rec, ("x", "a", "value"))
            x, a, v = int(x), int(a), float(v)
            if (x, a) not in index:
                raise InstanceSemanticError(
                    f"cost {i} references inadmissible pair ({x},{a})"
                )
            if (x, a) in seen_c:
                raise InstanceSemanticError(f"duplicate cost {i} record ({x},{a})")
            seen_c.add((x, a))
            if not np.isfinite(v) or v < 0:
                raise InstanceSemanticError(f"cost {i} at ({x},{a}) is invalid: {v!r}")
            cost_arr[i, index[(x, a)]] = v

    if budgets is not None:
        budgets = [float(b) for b in budgets]
        if len(budgets) != len(cost_lists) - 1:
            raise InstanceSemanticError(
                f"budget count {len(budgets)} does not match "
                f"constraint cost count {len(cost_lists) - 1}"
            )
        for i, kappa in enumerate(budgets):
            if not np.isfinite(kappa) or kappa < 0:
                raise InstanceSemanticError(f"budget {i} is invalid: {kappa!r}")

    mdp = FiniteMDP(
        n_states=n_states,
        actions=action_sets,
        kernel=kernel,
        costs=cost_arr,
        budgets=None if budgets is None else np.array(budgets),
        name=name,
    )
    report = validate(mdp)
    if not report.ok:
        raise InstanceSemanticError("; ".join(report.violations))
    return mdp


def load_instance(text: str) -> FiniteMDP:
    """Parse an instance document into a validated model.

    Raises InstanceParseError for malformed documents and
    InstanceSemanticError for well-formed documents that do not describe a
    valid model (bad indices, bad probability rows, negative costs).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceParseError("instance document must be an object")
    for key in ("n_states", "actions", "transitions", "costs"):
        if key not in doc:
            raise InstanceParseError(f"missing required field {key!r}")
    unknown = set(doc) - {"n_states", "actions", "transitions", "costs", "budgets", "name"}
    if unknown:
        raise InstanceParseError(f"unknown fields: {sorted(unknown)}")

    n_states = doc["n_states"]
    if not isinstance(n_states, int) or isinstance(n_states, bool):
        raise InstanceParseError("n_states must be an integer")
    actions = doc["actions"]
    if not isinstance(actions, list) or not all(isinstance(r, list) for r in actions):
        raise InstanceParseError("actions must be a list of per-state lists")
    for row in actions:
        if not all(isinstance(a, int) and not isinstance(a, bool) for a in row):
            raise InstanceParseError("action ids must be integers")

    def _records(entries, fields, where):
        if not isinstance(entries, list):
            raise InstanceParseError(f"{where} must be a list")
        out = []
        for rec in entries:
            if not isinstance(rec, dict) or set(rec) != set(fields):
                raise InstanceParseError(
                    f"each {where} record must be an object with fields {fields}"
                )
            vals = []
            for f in fields:
                v = rec[f]
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise InstanceParseError(f"{where} field {f!r} must be a number")
                if f in ("x", "a", "y") and not isinstance(v, int):
                    raise InstanceParseError(f"{where} field {f!r} must be an integer")
                vals.append(v)
            out.append(tuple(vals))
        return out

    transitions = _records(doc["transitions"], ("x", "a", "y", "p"), "transitions")
    if not isinstance(doc["costs"], list):
        raise InstanceParseError("costs must be a list of cost-entry lists")
    costs = [
        _records(entries, ("x", "a", "value"), f"costs[{i}]")
        for i, entries in enumerate(doc["costs"])
    ]
    budgets = doc.get("budgets")
    if budgets is not None:
        if not isinstance(budgets, list) or not all(
            isinstance(b, (int, float)) and not isinstance(b, bool) for b in budgets
        ):
            raise InstanceParseError("budgets must be a list of numbers")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise InstanceParseError("name must be a string")

    return from_entries(n_states, actions, transitions, costs, budgets, name)


def save_instance(mdp: FiniteMDP) -> str:
    """Serialize a model as a canonical instance document.

    Only nonzero transition probabilities and cost values are listed; keys
    are sorted and records are in (x, a, y) order, so equal models serialize
    to identical text.
    """
    transitions = []
    cost_lists = [[] for _ in range(mdp.costs.shape[0])]
    for k, (x, a) in enumerate(mdp.pairs):
        for y in range(mdp.n_states):
            p = float(mdp.kernel[k, y])
            if p != 0.0:
                transitions.append({"x": x, "a": a, "y": y, "p": p})
        for i in range(mdp.costs.shape[0]):
            v = float(mdp.costs[i, k])
            if v != 0.0:
                cost_lists[i].append({"x": x, "a": a, "value": v})
    doc = {
        "n_states": mdp.n_states,
        "actions": [list(row) for row in mdp.actions],
        "transitions": transitions,
        "costs": cost_lists,
    }
    if mdp.budgets is not None:
        doc["budgets"] = [float(b) for b in mdp.budgets]
    if mdp.name is not None:
        doc["name"] = mdp.name
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class QueueFamilySpec:
    """Single-server admission-control queue, truncated at a finite level.

    Per slot, an admitted arrival occurs with probability arrival_prob and a
    service completion with probability service_prob, independently; the
    queue length moves by their difference, clipped to {0..truncation_level}.
    Action 0 admits arrivals, action 1 rejects them.  The one-stage cost is
    holding_coeff * length, plus rejection_cost when rejecting.
    """

    arrival_prob: float
    service_prob: float
    holding_coeff: float
    rejection_cost: float
    truncation_level: int

    def __post_init__(self):
        if not 0.0 < self.arrival_prob < 1.0:
            raise ValueError("arrival_prob must lie strictly between 0 and 1")
        if not 0.0 < self.service_prob < 1.0:
            raise ValueError("service_prob must lie strictly between 0 and 1")
        if not self.holding_coeff > 0:
            raise ValueError("holding_coeff must be positive")
        if self.rejection_cost < 0:
            raise ValueError("rejection_cost must be nonnegative")
        if not isinstance(self.truncation_level, int) or self.truncation_level < 2:
            raise ValueError("truncation_level must be an integer >= 2")


def build_queue_truncation(spec: QueueFamilySpec) -> FiniteMDP:
    """Build the finite queue model with states {0..N} and reflecting boundary.

    Mass that would leave {0..N} is kept at the boundary state, so every row
    is exactly stochastic.
    """
    lam, sig, big_n = spec.arrival_prob, spec.service_prob, spec.truncation_level
    n_states = big_n + 1
    actions = tuple((ADMIT, REJECT) for _ in range(n_states))
    n_pairs = 2 * n_states
    kernel = np.zeros((n_pairs, n_states))
    c0 = np.zeros(n_pairs)

    up = lam * (1.0 - sig)
    down = (1.0 - lam) * sig
    for x in range(n_states):
        k_admit = 2 * x + ADMIT
        k_reject = 2 * x + REJECT
        lo = max(x - 1, 0)
        hi = min(x + 1, big_n)
        kernel[k_admit, hi] += up
        kernel[k_admit, lo] += down
        kernel[k_admit, x] += 1.0 - up - down
        kernel[k_reject, lo] += sig
        kernel[k_reject, x] += 1.0 - sig
        c0[k_admit] = spec.holding_coeff * x
        c0[k_reject] = spec.holding_coeff * x + spec.rejection_cost
        _exact_normalize(kernel[k_admit], x, ADMIT)
        _exact_normalize(kernel[k_reject], x, REJECT)
    return FiniteMDP(
        n_states=n_states,
        actions=actions,
        kernel=kernel,
        costs=c0.reshape(1, -1),
        name=(
            f"queue(lambda={spec.arrival_prob},sigma={spec.service_prob},"
            f"hc={spec.holding_coeff},rc={spec.rejection_cost},N={big_n})"
        ),
    )

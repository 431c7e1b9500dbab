"""Independent ground-truth computations used to check the LP solver.

Three unrelated routes to the optimal average cost: exhaustive
deterministic-policy enumeration with recurrent-class analysis, relative
value iteration on a damped kernel for unichain instances, and
basic-feasible-solution enumeration of an independently assembled
constrained LP.  None of them share solver code with the production path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EnumerationGuardError,
    InternalInconsistencyError,
    MultichainError,
    NonConvergenceError,
)
from .lp import INFEASIBLE, OPTIMAL, StandardLP, enumerate_bfs_optimum
from .model import FiniteMDP, require_valid

CLASS_LEAK_TOL = 1e-12
POLICY_ENUM_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class ChainAnalysis:
    """Closed recurrent classes of a deterministic policy's chain.

    classes are disjoint state tuples, each closed to within 1e-12 leak;
    class_dists solve p = pP on the class; class_costs[i] holds the
    stationary average of every cost under class i's distribution.
    """

    classes: tuple[tuple[int, ...], ...]
    class_dists: tuple[np.ndarray, ...]
    class_costs: tuple[np.ndarray, ...]
    transient: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    value: float
    policy: tuple[int, ...]
    recurrent_class: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class RviResult:
    rho: float
    h: np.ndarray
    iterations: int
    final_span: float


@dataclass(frozen=True, eq=False)
class ConstrainedOracleResult:
    """Value is +inf when the budget polytope is empty."""

    status: str
    value: float


def _strongly_connected_components(adjacency: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan in fixed index order; deterministic output."""
    n = len(adjacency)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            for i in range(pos, len(adjacency[v])):
                w = adjacency[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sccs


def policy_transition_matrix(mdp: FiniteMDP, policy) -> np.ndarray:
    """Row-stochastic matrix of the chain induced by a deterministic policy."""
    f = [int(a) for a in policy]
    if len(f) != mdp.n_states:
        raise ValueError("policy must pick one action per state")
    p = np.empty((mdp.n_states, mdp.n_states))
    for x, a in enumerate(f):
        if (x, a) not in mdp.pair_index:
            raise ValueError(f"action {a} is not admissible at state {x}")
        p[x] = mdp.kernel[mdp.pair_index[(x, a)]]
    return p


def _class_distribution(p_class: np.ndarray) -> np.ndarray:
    """Solve p = pP, sum p = 1 on one closed class."""
    k = p_class.shape[0]
    system = p_class.T - np.eye(k)
    system[-1] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    try:
        dist = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        stacked = np.vstack([p_class.T - np.eye(k), np.ones(k)])
        full_rhs = np.zeros(k + 1)
        full_rhs[-1] = 1.0
        dist = np.linalg.lstsq(stacked, full_rhs, rcond=None)[0]
    residual = float(np.max(np.abs(dist @ p_class - dist)))
    if residual > 1e-10 or abs(float(dist.sum()) - 1.0) > 1e-10:
        raise InternalInconsistencyError(
            f"stationary system of a closed class solved with residual {residual:.3e}"
        )
    return dist


def analyze_policy_chain(mdp: FiniteMDP, policy) -> ChainAnalysis:
    """Decompose a deterministic policy's chain into closed recurrent classes.

    Strongly connected components of the positive-probability graph are
    checked for closedness (leak at most 1e-12); each closed class gets its
    stationary distribution and stationary cost averages.
    """
    require_valid(mdp)
    f = tuple(int(a) for a in policy)
    p = policy_transition_matrix(mdp, f)
    adjacency = [[int(y) for y in np.nonzero(p[x] > 0.0)[0]] for x in range(mdp.n_states)]
    sccs = _strongly_connected_components(adjacency)
    sccs.sort(key=lambda comp: comp[0])
    classes = []
    dists = []
    costs = []
    in_class = set()
    for comp in sccs:
        mask = np.array(comp, dtype=int)
        leak = 1.0 - p[np.ix_(mask, mask)].sum(axis=1)
        if np.any(leak > CLASS_LEAK_TOL):
            continue
        dist = _class_distribution(p[np.ix_(mask, mask)])
        avg = np.array(
            [
                sum(
                    float(dist[i] * mdp.costs[ci, mdp.pair_index[(x, f[x])]])
                    for i, x in enumerate(comp)
                )
                for ci in range(mdp.costs.shape[0])
            ]
        )
        classes.append(tuple(comp))
        dists.append(dist)
        costs.append(avg)
        in_class.update(comp)
    transient = tuple(x for x in range(mdp.n_states) if x not in in_class)
    return ChainAnalysis(
        classes=tuple(classes),
        class_dists=tuple(dists),
        class_costs=tuple(costs),
        transient=transient,
    )


def brute_force_minimum_value(mdp: FiniteMDP) -> BruteForceResult:
    """Minimum average running cost over every deterministic policy and every
    closed recurrent class of its chain.

    On a finite model this equals the LP optimum: the extreme points of the
    occupation polytope are exactly the (deterministic policy, single
    recurrent class) stationary measures.
    """
    require_valid(mdp)
    n_policies = math.prod(len(row) for row in mdp.actions)
    if n_policies > POLICY_ENUM_LIMIT:
        raise EnumerationGuardError(
            f"{n_policies} deterministic policies exceed the enumeration limit"
        )
    best = None
    for f in itertools.product(*mdp.actions):
        analysis = analyze_policy_chain(mdp, f)
        for comp, avg in zip(analysis.classes, analysis.class_costs):
            value = float(avg[0])
            if best is None or value < best.value - 1e-12:
                best = BruteForceResult(value=value, policy=f, recurrent_class=comp)
    if best is None:
        raise InternalInconsistencyError("a finite chain must have a closed class")
    return best


def relative_value_iteration(
    mdp: FiniteMDP,
    max_iters: int = 100000,
    span_tol: float = 1e-10,
    damping: float = 0.5,
    anchor: int = 0,
) -> RviResult:
    """Relative value iteration on the damped kernel (1-damping) q + damping I.

    Damping forces aperiodicity without changing the average cost or the
    greedy actions; the damped fixed point's bias is 1/(1-damping) times the
    undamped one, so the reported h is rescaled back.  The span of successive
    differences brackets rho; the midpoint is returned once the span closes.
    Instances whose final greedy policy has more than one closed recurrent
    class are refused.
    """
    require_valid(mdp)
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie strictly between 0 and 1")
    c0 = mdp.costs[0]
    keep = 1.0 - damping
    h = np.zeros(mdp.n_states)
    span = math.inf
    rho = math.nan
    for it in range(1, max_iters + 1):
        q_vals = c0 + keep * (mdp.kernel @ h) + damping * h[mdp.pair_states]
        new_h = np.empty(mdp.n_states)
        for x in range(mdp.n_states):
            r = mdp.state_rows(x)
            new_h[x] = np.min(q_vals[r.start : r.stop])
        diff = new_h - h
        lo, hi = float(diff.min()), float(diff.max())
        span = hi - lo
        h = new_h - new_h[anchor]
        if span <= span_tol:
            rho = 0.5 * (lo + hi)
            break
    else:
        raise NonConvergenceError(
            f"value iteration span {span:.3e} above {span_tol:.1e} "
            f"after {max_iters} iterations",
            final_span=span,
        )
    h_report = keep * h
    h_report = h_report - h_report[anchor]
    q_vals = c0 + mdp.kernel @ h_report
    greedy = []
    for x in range(mdp.n_states):
        r = mdp.state_rows(x)
        greedy.append(mdp.actions[x][int(np.argmin(q_vals[r.start : r.stop]))])
    analysis = analyze_policy_chain(mdp, greedy)
    if len(analysis.classes) != 1:
        raise MultichainError(
            f"greedy policy has {len(analysis.classes)} closed recurrent classes; "
            "value iteration is only supported on unichain instances"
        )
    return RviResult(rho=rho, h=h_report, iterations=it, final_span=span)


def brute_force_constrained_value(mdp: FiniteMDP, kappa) -> ConstrainedOracleResult:
    """Constrained optimum via exhaustive basis enumeration.

    The LP rows are assembled here by explicit per-column loops, sharing no
    code with the production builder, then handed to the basis enumerator.
    """
    require_valid(mdp)
    d = mdp.n_constraints
    if d < 1:
        raise ValueError("model has no constraint costs")
    kappa = [float(v) for v in kappa]
    if len(kappa) != d:
        raise ValueError(f"kappa has length {len(kappa)}, expected {d}")
    if any(not math.isfinite(v) or v < 0 for v in kappa):
        raise ValueError("kappa must be finite and nonnegative")

    n, n_pairs = mdp.n_states, mdp.n_pairs
    a = np.zeros((1 + n + d, n_pairs + d))
    b = np.zeros(1 + n + d)
    c = np.zeros(n_pairs + d)
    for k, (x, _) in enumerate(mdp.pairs):
        a[0, k] = 1.0
        for y in range(n):
            a[1 + y, k] = (1.0 if y == x else 0.0) - float(mdp.kernel[k, y])
        for i in range(d):
            a[1 + n + i, k] = float(mdp.costs[1 + i, k])
        c[k] = float(mdp.costs[0, k])
    for i in range(d):
        a[1 + n + i, n_pairs + i] = 1.0
        b[1 + n + i] = kappa[i]
    b[0] = 1.0
    if a.shape != (1 + n + d, n_pairs + d):
        raise InternalInconsistencyError("constrained oracle assembled a wrong shape")

    sol = enumerate_bfs_optimum(StandardLP(objective=c, matrix=a, rhs=b))
    if sol.status == INFEASIBLE:
        return ConstrainedOracleResult(status=INFEASIBLE, value=math.inf)
    if sol.status != OPTIMAL:
        raise InternalInconsistencyError(
            f"constrained oracle LP came back {sol.status}"
        )
    return ConstrainedOracleResult(status=OPTIMAL, value=float(sol.objective_value))

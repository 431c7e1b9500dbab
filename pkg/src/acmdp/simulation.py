"""Seeded Monte-Carlo simulation of the chain induced by a stationary pair.

Uses the counter-based Philox generator (numpy's Philox, the 4x64-10
variant) with a fixed draw schedule: one uniform for the initial state, then
two per step (action, successor), so identical inputs reproduce identical
trajectories bit for bit.  Sampling is by inverse CDF over precomputed
cumulative rows; standard errors come from batch means over (up to) 100
equal batches.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .model import FiniteMDP
from .occupation import StationaryPair

GENERATOR_NAME = "philox4x64-10"
N_BATCHES = 100


@dataclass(frozen=True, eq=False)
class SimResult:
    """Pathwise averages of every cost with batch-means standard errors."""

    horizon: int
    pathwise_avg: np.ndarray
    stderr_est: np.ndarray
    seed: int
    initial_state: int
    burn_in: int = 0
    generator: str = GENERATOR_NAME


def _cumulative_rows(matrix: np.ndarray) -> list[list[float]]:
    return [list(np.cumsum(row)) for row in matrix]


def simulate(
    mdp: FiniteMDP,
    pair: StationaryPair,
    steps: int,
    seed: int,
    initial_state: int | None = None,
    burn_in: int = 0,
    trace=None,
) -> SimResult:
    """Run one trajectory of length steps under the pair.

    The initial state is drawn from the pair's distribution unless given
    explicitly; burn-in steps are simulated but not measured.  When trace is
    a writable text stream, each measured step is appended as a CSV row
    (step, state, action, one column per cost).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    dist_total = float(np.sum(pair.dist))
    if dist_total <= 0.0:
        raise ValueError("pair has an empty support")

    n_costs = mdp.costs.shape[0]
    action_cums = []
    action_offsets = []
    for x in range(mdp.n_states):
        r = mdp.state_rows(x)
        action_offsets.append(r.start)
        action_cums.append(list(np.cumsum(pair.policy[r.start : r.stop])))
    next_cums = _cumulative_rows(mdp.kernel)
    init_cum = list(np.cumsum(pair.dist))

    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.random(1 + 2 * (burn_in + steps))

    if initial_state is None:
        state = min(bisect_right(init_cum, float(draws[0])), mdp.n_states - 1)
    else:
        if not 0 <= initial_state < mdp.n_states:
            raise ValueError(f"initial state {initial_state} out of range")
        state = int(initial_state)

    n_batches = min(N_BATCHES, steps)
    base, extra = divmod(steps, n_batches)
    batch_sizes = [base + 1 if i < extra else base for i in range(n_batches)]
    counts = [[0] * mdp.n_pairs for _ in range(n_batches)]

    writer = None
    if trace is not None:
        writer = csv.writer(trace, lineterminator="\n")
        writer.writerow(
            ["step", "state", "action"] + [f"c{i}" for i in range(n_costs)]
        )

    ptr = 1
    for _ in range(burn_in):
        j = min(
            bisect_right(action_cums[state], float(draws[ptr])),
            len(action_cums[state]) - 1,
        )
        k = action_offsets[state] + j
        state = min(
            bisect_right(next_cums[k], float(draws[ptr + 1])), mdp.n_states - 1
        )
        ptr += 2

    start_state = state
    batch_idx = 0
    left_in_batch = batch_sizes[0]
    actions = mdp.actions
    costs = mdp.costs
    for step in range(steps):
        cums = action_cums[state]
        j = min(bisect_right(cums, float(draws[ptr])), len(cums) - 1)
        k = action_offsets[state] + j
        counts[batch_idx][k] += 1
        if writer is not None:
            writer.writerow(
                [step, state, actions[state][j]]
                + [repr(float(costs[i, k])) for i in range(n_costs)]
            )
        state = min(
            bisect_right(next_cums[k], float(draws[ptr + 1])), mdp.n_states - 1
        )
        ptr += 2
        left_in_batch -= 1
        if left_in_batch == 0 and batch_idx + 1 < n_batches:
            batch_idx += 1
            left_in_batch = batch_sizes[batch_idx]

    count_mat = np.array(counts, dtype=float)
    batch_totals = count_mat @ costs.T
    sizes = np.array(batch_sizes, dtype=float)[:, None]
    batch_means = batch_totals / sizes
    totals = count_mat.sum(axis=0) @ costs.T
    pathwise = totals / float(steps)
    if n_batches >= 2:
        stderr = np.std(batch_means, axis=0, ddof=1) / math.sqrt(n_batches)
    else:
        stderr = np.full(n_costs, math.inf)
    return SimResult(
        horizon=steps,
        pathwise_avg=pathwise,
        stderr_est=stderr,
        seed=int(seed),
        initial_state=int(start_state),
        burn_in=burn_in,
    )

"""Seeded random instance generators shared across the test modules."""

import numpy as np

import acmdp
from acmdp.oracles import analyze_policy_chain


def random_mdp(rng, max_states=6, max_actions=3, d=0, multichain_prob=0.3):
    """Random valid model with sparse kernels and costs in [0, 10].

    With probability multichain_prob (and at least two states) the state set
    is split into two groups whose kernels never cross, so some draws have
    several isolated recurrent classes.
    """
    n = int(rng.integers(1, max_states + 1))
    actions = [list(range(int(rng.integers(1, max_actions + 1)))) for _ in range(n)]
    if n >= 2 and rng.random() < multichain_prob:
        cut = int(rng.integers(1, n))
        groups = [list(range(cut)), list(range(cut, n))]
    else:
        groups = [list(range(n))]
    group_of = {}
    for g in groups:
        for x in g:
            group_of[x] = g
    transitions = []
    for x in range(n):
        targets = group_of[x]
        for a in actions[x]:
            k = int(rng.integers(1, min(3, len(targets)) + 1))
            ys = rng.choice(targets, size=k, replace=False)
            w = rng.random(k) + 0.1
            w = w / w.sum()
            for y, p in zip(ys, w):
                transitions.append({"x": x, "a": a, "y": int(y), "p": float(p)})
    costs = []
    for _ in range(d + 1):
        entries = []
        for x in range(n):
            for a in actions[x]:
                entries.append({"x": x, "a": a, "value": float(rng.random() * 10.0)})
        costs.append(entries)
    return acmdp.from_entries(n, actions, transitions, costs)


def random_unichain_mdp(rng, max_states=6, max_actions=3):
    """Random model in which every policy's chain is unichain.

    Every row mixes ten percent of its mass into state 0, so state 0 is
    reachable from everywhere under any policy and the recurrent class is
    unique.
    """
    mdp = random_mdp(rng, max_states, max_actions, d=0, multichain_prob=0.0)
    kernel = mdp.kernel * 0.9
    kernel[:, 0] += 0.1
    transitions = []
    for k, (x, a) in enumerate(mdp.pairs):
        row = kernel[k] / kernel[k].sum()
        for y in np.nonzero(row)[0]:
            transitions.append({"x": x, "a": a, "y": int(y), "p": float(row[y])})
    costs = [
        [
            {"x": x, "a": a, "value": float(mdp.costs[0, k])}
            for k, (x, a) in enumerate(mdp.pairs)
        ]
    ]
    return acmdp.from_entries(
        mdp.n_states, [list(r) for r in mdp.actions], transitions, costs
    )


def policy_occupation(mdp, policy):
    """Occupation measure of one closed recurrent class of a policy chain."""
    analysis = analyze_policy_chain(mdp, policy)
    comp = analysis.classes[0]
    dist = analysis.class_dists[0]
    gamma = np.zeros(mdp.n_pairs)
    for i, x in enumerate(comp):
        gamma[mdp.pair_index[(x, policy[x])]] = dist[i]
    return gamma


def random_constrained_mdp(rng, max_states=4, feasible_prob=0.8):
    """Random constrained model (d in {1, 2}) with a calibrated budget draw.

    With probability feasible_prob the budgets sit above a known achievable
    cost vector (the stationary averages of a random deterministic policy),
    so roughly that fraction of draws is feasible by construction.
    """
    d = int(rng.integers(1, 3))
    mdp = random_mdp(rng, max_states=max_states, max_actions=3, d=d)
    policy = tuple(int(rng.choice(row)) for row in mdp.actions)
    gamma = policy_occupation(mdp, policy)
    achieved = mdp.costs[1:] @ gamma
    if rng.random() < feasible_prob:
        kappa = [float(j + rng.random() * 2.0) for j in achieved]
    else:
        kappa = [float(max(0.0, j * rng.random() * 0.3)) for j in achieved]
    return mdp, kappa


def random_standard_lp(rng, max_rows=6, max_cols=10):
    """Random equality-form LP with a healthy mix of statuses."""
    m = int(rng.integers(1, max_rows + 1))
    n = int(rng.integers(m, max_cols + 1))
    a = rng.uniform(-2.0, 2.0, size=(m, n))
    a[rng.random(a.shape) < 0.3] = 0.0
    if rng.random() < 0.7:
        x_hat = rng.random(n)
        x_hat[rng.random(n) < 0.5] = 0.0
        b = a @ x_hat
    else:
        b = rng.uniform(-1.0, 1.0, size=m)
    c = rng.uniform(-5.0, 5.0, size=n)
    return acmdp.StandardLP(objective=c, matrix=a, rhs=b)

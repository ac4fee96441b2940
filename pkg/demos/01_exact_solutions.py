#!/usr/bin/env python3
"""Solving a small world exactly, and failing to beat the solution.

A finite discounted MDP always admits a deterministic stationary policy
that is optimal.  This script computes one by dynamic programming and then
tries (and fails) to outperform it with a thousand random stochastic
policies.
"""

from pathlib import Path

import numpy as np

from mdplab import (
    Policy,
    load_mdp,
    policy_evaluate,
    policy_iteration,
    value_iteration,
    verify_deterministic_optimality,
)

world = load_mdp(Path(__file__).parent / "data" / "stay_go.json")
print("states:", world.states)
print("actions:", world.actions)
print("gamma:", world.gamma, " reward bound:", world.reward_bound)

# Two routes to the same answer: value iteration (epsilon-accurate sweeps of
# the optimality backup) and policy iteration (exact evaluation alternating
# with greedy improvement).
vi = value_iteration(world, epsilon=1e-10)
pi = policy_iteration(world)
print("\nvalue iteration   V* =", dict(vi.v_star.as_dict(world)),
      f"after {vi.iterations} sweeps, residual {vi.residual:.1e}")
print("policy iteration  V* =", dict(pi.v_star.as_dict(world)),
      f"after {pi.iterations} improvements")
print("optimal policy:", pi.pi_star.as_dict(world))
print("action values:")
for state, row in pi.q_star.as_dict(world).items():
    print("   ", state, {a: round(q, 6) for a, q in row.items()})

# The optimal policy is a plain state -> action map, yet no randomized
# policy does better at any state.
report = verify_deterministic_optimality(world, trials=1000,
                                         rng=np.random.default_rng(0))
print(f"\nsampled {report.trials} random stochastic policies:",
      "no violations" if report.passed else report.violations[:5])
print("largest value excess over V* across all samples:",
      f"{report.max_excess:.3e} (negative means strictly dominated)")

# A hand-picked suboptimal policy for comparison: never leave s0.
lazy = Policy.deterministic(np.array([0, 0]))
print("\nstay-everywhere policy evaluates to:", policy_evaluate(world, lazy).as_dict(world))
print("which the optimum dominates state by state.")
